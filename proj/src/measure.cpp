#include "rexp/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "rexp/rng.hpp"

namespace rexp {

namespace {

constexpr size_t kCellBudget = 200000;

Rational frac1(Rational x) {
    // x mod 1 into [0,1)
    BigInt whole = numerator(x) / denominator(x);
    Rational r = x - Rational(whole);
    if (r < 0) r += 1;
    return r;
}

std::vector<std::pair<Rational, Rational>> rational_vertices(const MapSpec& m) {
    std::vector<std::pair<Rational, Rational>> v;
    v.reserve(m.vertices.size());
    for (auto [x, y] : m.vertices) v.emplace_back(rational_from_double(x), rational_from_double(y));
    return v;
}

Rational pl_forward_exact(const std::vector<std::pair<Rational, Rational>>& v, const Rational& x) {
    for (size_t i = 1; i < v.size(); ++i) {
        if (x <= v[i].first) {
            const auto& [x0, y0] = v[i - 1];
            const auto& [x1, y1] = v[i];
            return y0 + (x - x0) * (y1 - y0) / (x1 - x0);
        }
    }
    return 1;
}

Rational pl_inverse_exact(const std::vector<std::pair<Rational, Rational>>& v, const Rational& y) {
    for (size_t i = 1; i < v.size(); ++i) {
        if (y <= v[i].second) {
            const auto& [x0, y0] = v[i - 1];
            const auto& [x1, y1] = v[i];
            return x0 + (y - y0) * (x1 - x0) / (y1 - y0);
        }
    }
    return 1;
}

}  // namespace

// --- CylinderProduct --------------------------------------------------------

CylinderProduct::CylinderProduct(BasePoint base, RandomScalar alphabet_bound, CylinderRule rule,
                                 std::map<int, std::vector<Rational>> skew_overrides)
    : base_(std::move(base)),
      alphabet_bound_(std::move(alphabet_bound)),
      rule_(rule),
      skew_overrides_(std::move(skew_overrides)) {
    for (const auto& [k, vec] : skew_overrides_) {
        if (static_cast<long long>(vec.size()) != k)
            throw std::invalid_argument("CylinderProduct: override vector size must equal alphabet size");
        Rational sum = 0;
        for (const auto& p : vec) {
            if (p <= 0) throw std::invalid_argument("CylinderProduct: vector entries must be > 0");
            sum += p;
        }
        if (sum != 1) throw std::invalid_argument("CylinderProduct: vector must sum to 1 exactly");
    }
}

long long CylinderProduct::alphabet_at(int64_t index) const {
    long long k = alphabet_bound_.eval_int(base_.advanced(index));
    if (k < 2) throw std::invalid_argument("CylinderProduct: alphabet bound must be >= 2");
    return k;
}

std::vector<Rational> CylinderProduct::skew_vector(long long k) const {
    auto it = skew_overrides_.find(static_cast<int>(k));
    if (it != skew_overrides_.end()) return it->second;
    std::vector<Rational> v(static_cast<size_t>(k), Rational(1, 2 * k));
    v[0] = Rational(k + 1, 2 * k);
    return v;
}

std::vector<Rational> CylinderProduct::vector_at(int64_t index) const {
    long long k = alphabet_at(index);
    switch (rule_) {
        case CylinderRule::Uniform:
            return std::vector<Rational>(static_cast<size_t>(k), Rational(1, k));
        case CylinderRule::SkewFirst:
            if (index + steps_ == 0) return skew_vector(k);
            return std::vector<Rational>(static_cast<size_t>(k), Rational(1, k));
        case CylinderRule::SkewIID:
            return skew_vector(k);
    }
    return std::vector<Rational>(static_cast<size_t>(k), Rational(1, k));
}

Rational CylinderProduct::word_mass(const std::vector<int>& word) const {
    Rational mass = 1;
    for (size_t i = 0; i < word.size(); ++i) {
        auto vec = vector_at(static_cast<int64_t>(i));
        int sym = word[i];
        if (sym < 1 || static_cast<size_t>(sym) > vec.size()) return 0;  // bound violated
        mass *= vec[static_cast<size_t>(sym - 1)];
    }
    return mass;
}

CylinderProduct CylinderProduct::pushforward_shift() const {
    CylinderProduct out = *this;
    out.base_ = base_.advanced(1);
    out.steps_ = steps_ + 1;
    return out;
}

// --- PiecewiseDensity -------------------------------------------------------

PiecewiseDensity PiecewiseDensity::uniform(SpaceKind kind) {
    PiecewiseDensity d;
    d.kind = kind;
    d.cuts = {Rational(0), Rational(1)};
    d.masses = {Rational(1)};
    return d;
}

PiecewiseDensity PiecewiseDensity::from_cell_masses(SpaceKind kind, std::vector<Rational> masses) {
    if (masses.empty()) throw std::invalid_argument("PiecewiseDensity: empty mass vector");
    PiecewiseDensity d;
    d.kind = kind;
    size_t n = masses.size();
    d.cuts.reserve(n + 1);
    for (size_t i = 0; i <= n; ++i) d.cuts.push_back(Rational(static_cast<long long>(i), n));
    d.masses = std::move(masses);
    d.validate();
    return d;
}

void PiecewiseDensity::validate() const {
    if (cuts.size() != masses.size() + 1)
        throw std::invalid_argument("PiecewiseDensity: cuts/masses size mismatch");
    if (cuts.front() != 0 || cuts.back() != 1)
        throw std::invalid_argument("PiecewiseDensity: cuts must span [0,1]");
    for (size_t i = 1; i < cuts.size(); ++i)
        if (!(cuts[i] > cuts[i - 1])) throw std::invalid_argument("PiecewiseDensity: cuts not increasing");
    Rational sum = 0;
    for (const auto& m : masses) {
        if (m < 0) throw std::invalid_argument("PiecewiseDensity: negative mass");
        sum += m;
    }
    if (sum != 1) throw std::invalid_argument("PiecewiseDensity: masses must sum to 1 exactly");
}

bool PiecewiseDensity::is_uniform() const {
    for (size_t i = 0; i < masses.size(); ++i)
        if (masses[i] != cuts[i + 1] - cuts[i]) return false;
    return true;
}

Rational PiecewiseDensity::interval_mass(const Rational& a, const Rational& b) const {
    if (b <= a) return 0;
    Rational acc = 0;
    for (size_t i = 0; i < masses.size(); ++i) {
        Rational lo = std::max(cuts[i], a);
        Rational hi = std::min(cuts[i + 1], b);
        if (hi > lo) acc += masses[i] * (hi - lo) / (cuts[i + 1] - cuts[i]);
    }
    return acc;
}

double PiecewiseDensity::segment_mass(double a, double b) const {
    if (b <= a) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < masses.size(); ++i) {
        double clo = to_double(cuts[i]), chi = to_double(cuts[i + 1]);
        double lo = std::max(clo, a), hi = std::min(chi, b);
        if (hi > lo) acc += to_double(masses[i]) * (hi - lo) / (chi - clo);
    }
    return acc;
}

// --- FiberMeasure -----------------------------------------------------------

bool FiberMeasure::cylinder_compatible() const {
    switch (kind()) {
        case Kind::Cylinder: return true;
        case Kind::Mixture:
            for (const auto& [w, p] : mixture().parts)
                if (!p->cylinder_compatible()) return false;
            return true;
        default: return false;
    }
}

bool FiberMeasure::region_compatible() const {
    switch (kind()) {
        case Kind::Density:
        case Kind::Atomic: return true;
        case Kind::Mixture:
            for (const auto& [w, p] : mixture().parts)
                if (!p->region_compatible()) return false;
            return true;
        default: return false;
    }
}

FiberMeasure FiberMeasure::mix(std::vector<std::pair<Rational, FiberMeasure>> parts) {
    if (parts.empty()) throw std::invalid_argument("FiberMeasure::mix: no parts");
    Rational sum = 0;
    MixtureParts mp;
    for (auto& [w, m] : parts) {
        if (w < 0) throw std::invalid_argument("FiberMeasure::mix: negative weight");
        sum += w;
        mp.parts.emplace_back(w, std::make_shared<const FiberMeasure>(std::move(m)));
    }
    if (sum != 1) throw std::invalid_argument("FiberMeasure::mix: weights must sum to 1 exactly");
    return FiberMeasure(std::move(mp));
}

FiberMeasure FiberMeasure::mix_merged(std::vector<std::pair<Rational, FiberMeasure>> parts) {
    std::vector<std::pair<Rational, FiberMeasure>> merged;
    std::map<std::string, size_t> index;
    for (auto& [w, m] : parts) {
        auto key = canonical_key(m);
        if (key) {
            auto it = index.find(*key);
            if (it != index.end()) {
                merged[it->second].first += w;
                continue;
            }
            index.emplace(*key, merged.size());
        }
        merged.emplace_back(w, std::move(m));
    }
    if (merged.size() == 1 && merged.front().first == 1) return std::move(merged.front().second);
    return mix(std::move(merged));
}

// --- masses -----------------------------------------------------------------

std::optional<std::string> canonical_key(const FiberMeasure& mu) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Cylinder: {
            const auto& cp = mu.cylinder();
            std::string orbit = std::to_string(cp.base().seed()) + "@" +
                                std::to_string(cp.base().offset());
            std::string skews;
            for (const auto& [k, vec] : cp.skew_overrides()) {
                skews += std::to_string(k) + "=";
                for (const auto& v : vec) skews += fraction_string(v) + ",";
            }
            switch (cp.rule()) {
                case CylinderRule::Uniform:
                    return "U|" + orbit;
                case CylinderRule::SkewFirst:
                    // Once the skewed coordinate is shifted away the measure
                    // coincides with the uniform product on the same fiber.
                    if (cp.steps() >= 1) return "U|" + orbit;
                    return "SF|" + orbit + "|" + skews;
                case CylinderRule::SkewIID:
                    return "SI|" + orbit + "|" + skews;
            }
            return std::nullopt;
        }
        case FiberMeasure::Kind::Density: {
            const auto& d = mu.density();
            if (d.cells() > 64) return std::nullopt;
            std::string key = "D|";
            for (size_t i = 0; i < d.cells(); ++i)
                key += fraction_string(d.cuts[i + 1]) + ":" + fraction_string(d.masses[i]) + ";";
            return key;
        }
        default:
            return std::nullopt;
    }
}

Rational word_mass(const FiberMeasure& mu, const std::vector<int>& word) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Cylinder:
            return mu.cylinder().word_mass(word);
        case FiberMeasure::Kind::Mixture: {
            Rational acc = 0;
            for (const auto& [w, p] : mu.mixture().parts) acc += w * word_mass(*p, word);
            return acc;
        }
        default:
            throw std::invalid_argument("word_mass: measure has no cylinder algebra");
    }
}

Rational cylinder_mass(const FiberMeasure& mu, const CylinderSet& c) { return word_mass(mu, c.word); }

std::vector<long long> depth_alphabets(const FiberMeasure& mu, int depth) {
    const FiberMeasure* cur = &mu;
    while (cur->kind() == FiberMeasure::Kind::Mixture)
        cur = cur->mixture().parts.front().second.get();
    if (cur->kind() != FiberMeasure::Kind::Cylinder)
        throw std::invalid_argument("depth_alphabets: measure has no cylinder algebra");
    std::vector<long long> out;
    out.reserve(depth);
    for (int i = 0; i < depth; ++i) out.push_back(cur->cylinder().alphabet_at(i));
    return out;
}

std::vector<Rational> depth_masses(const FiberMeasure& mu, int depth) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Cylinder: {
            const auto& cp = mu.cylinder();
            std::vector<Rational> acc = {Rational(1)};
            for (int i = 0; i < depth; ++i) {
                auto vec = cp.vector_at(i);
                if (acc.size() * vec.size() > kCellBudget)
                    throw std::length_error("depth_masses: cylinder budget exceeded");
                std::vector<Rational> next;
                next.reserve(acc.size() * vec.size());
                for (const auto& m : acc)
                    for (const auto& p : vec) next.push_back(m * p);
                acc = std::move(next);
            }
            return acc;
        }
        case FiberMeasure::Kind::Mixture: {
            std::vector<Rational> acc;
            for (const auto& [w, p] : mu.mixture().parts) {
                auto part = depth_masses(*p, depth);
                if (acc.empty()) acc.assign(part.size(), Rational(0));
                if (part.size() != acc.size())
                    throw std::invalid_argument("depth_masses: mixture components disagree on alphabets");
                for (size_t i = 0; i < part.size(); ++i) acc[i] += w * part[i];
            }
            return acc;
        }
        default:
            throw std::invalid_argument("depth_masses: measure has no cylinder algebra");
    }
}

Rational total_mass_exact(const FiberMeasure& mu) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Cylinder: {
            auto vec = mu.cylinder().vector_at(0);
            Rational acc = 0;
            for (const auto& p : vec) acc += p;
            return acc;
        }
        case FiberMeasure::Kind::Density: {
            Rational acc = 0;
            for (const auto& m : mu.density().masses) acc += m;
            return acc;
        }
        case FiberMeasure::Kind::Atomic: {
            double acc = 0.0;
            for (const auto& [pt, w] : mu.atomic().atoms) acc += w;
            return rational_from_double(acc);
        }
        case FiberMeasure::Kind::Mixture: {
            Rational acc = 0;
            for (const auto& [w, p] : mu.mixture().parts) acc += w * total_mass_exact(*p);
            return acc;
        }
    }
    return 0;
}

MassBracket region_mass(const FiberMeasure& mu, const RegionSet& region) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Density: {
            const auto& d = mu.density();
            MassBracket b;
            for (const Segment& s : region.inner_segments()) b.lower += d.segment_mass(s.lo, s.hi);
            for (const Segment& s : region.outer_segments()) b.upper += d.segment_mass(s.lo, s.hi);
            b.lower = std::min(b.lower, b.upper);
            return b;
        }
        case FiberMeasure::Kind::Atomic: {
            MassBracket b;
            auto inner = region.inner_segments();
            auto outer = region.outer_segments();
            auto inside = [](const std::vector<Segment>& segs, double p) {
                for (const Segment& s : segs)
                    if (p >= s.lo && p <= s.hi) return true;
                return false;
            };
            for (const auto& [pt, w] : mu.atomic().atoms) {
                if (inside(inner, pt.coord())) b.lower += w;
                if (inside(outer, pt.coord())) b.upper += w;
            }
            return b;
        }
        case FiberMeasure::Kind::Mixture: {
            MassBracket b;
            for (const auto& [w, p] : mu.mixture().parts) {
                MassBracket part = region_mass(*p, region);
                double wd = to_double(w);
                b.lower += wd * part.lower;
                b.upper += wd * part.upper;
            }
            return b;
        }
        default:
            throw std::invalid_argument("region_mass: measure is not defined on circle/interval sets");
    }
}

// --- dynamics ---------------------------------------------------------------

namespace {

PiecewiseDensity pushforward_density(const MapSpec& map, const PiecewiseDensity& d) {
    if (d.is_uniform() && map.kind != MapSpec::Kind::PiecewiseLinear) {
        // Rotations and k-to-1 linear coverings preserve normalized Lebesgue.
        return PiecewiseDensity::uniform(d.kind);
    }
    switch (map.kind) {
        case MapSpec::Kind::Rotation: {
            Rational a = frac1(rational_from_double(map.angle));
            std::set<Rational> cutset = {Rational(0), Rational(1)};
            for (const auto& c : d.cuts) cutset.insert(frac1(c + a));
            std::vector<Rational> cuts(cutset.begin(), cutset.end());
            std::vector<Rational> masses;
            masses.reserve(cuts.size() - 1);
            for (size_t i = 0; i + 1 < cuts.size(); ++i) {
                // preimage of [cuts[i], cuts[i+1]] is the interval shifted by -a (possibly wrapped)
                Rational lo = frac1(cuts[i] - a);
                Rational hi = lo + (cuts[i + 1] - cuts[i]);
                if (hi <= 1) {
                    masses.push_back(d.interval_mass(lo, hi));
                } else {
                    masses.push_back(d.interval_mass(lo, 1) + d.interval_mass(0, hi - 1));
                }
            }
            PiecewiseDensity out{d.kind, std::move(cuts), std::move(masses)};
            out.validate();
            return out;
        }
        case MapSpec::Kind::Expanding: {
            long long deg = map.degree;
            std::set<Rational> cutset = {Rational(0), Rational(1)};
            for (const auto& c : d.cuts) cutset.insert(frac1(c * deg));
            std::vector<Rational> cuts(cutset.begin(), cutset.end());
            if ((cuts.size() - 1) * static_cast<size_t>(deg) > kCellBudget)
                throw std::length_error("pushforward_measure: density cell budget exceeded");
            std::vector<Rational> masses;
            masses.reserve(cuts.size() - 1);
            for (size_t i = 0; i + 1 < cuts.size(); ++i) {
                Rational acc = 0;
                for (long long m = 0; m < deg; ++m)
                    acc += d.interval_mass((cuts[i] + m) / deg, (cuts[i + 1] + m) / deg);
                masses.push_back(acc);
            }
            PiecewiseDensity out{d.kind, std::move(cuts), std::move(masses)};
            out.validate();
            return out;
        }
        case MapSpec::Kind::PiecewiseLinear: {
            auto verts = rational_vertices(map);
            std::set<Rational> cutset;
            for (const auto& c : d.cuts) cutset.insert(pl_forward_exact(verts, c));
            for (const auto& [x, y] : verts) cutset.insert(y);
            std::vector<Rational> cuts(cutset.begin(), cutset.end());
            std::vector<Rational> masses;
            masses.reserve(cuts.size() - 1);
            for (size_t i = 0; i + 1 < cuts.size(); ++i)
                masses.push_back(
                    d.interval_mass(pl_inverse_exact(verts, cuts[i]), pl_inverse_exact(verts, cuts[i + 1])));
            PiecewiseDensity out{d.kind, std::move(cuts), std::move(masses)};
            out.validate();
            return out;
        }
    }
    return d;
}

}  // namespace

FiberMeasure pushforward_measure(const FiberSystem& sys, const BasePoint& w_source,
                                 const FiberMeasure& mu) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Cylinder: {
            if (sys.kind != GeneratorKind::Shift)
                throw std::invalid_argument("pushforward_measure: cylinder measure needs a shift system");
            return FiberMeasure(mu.cylinder().pushforward_shift());
        }
        case FiberMeasure::Kind::Density:
            return FiberMeasure(pushforward_density(sys.map_at(w_source), mu.density()));
        case FiberMeasure::Kind::Atomic: {
            AtomicMeasure out;
            out.atoms.reserve(mu.atomic().atoms.size());
            for (const auto& [pt, weight] : mu.atomic().atoms)
                out.atoms.emplace_back(cocycle_apply(sys, w_source, pt, 1), weight);
            return FiberMeasure(std::move(out));
        }
        case FiberMeasure::Kind::Mixture: {
            MixtureParts out;
            for (const auto& [weight, p] : mu.mixture().parts)
                out.parts.emplace_back(weight, std::make_shared<const FiberMeasure>(
                                                   pushforward_measure(sys, w_source, *p)));
            return FiberMeasure(std::move(out));
        }
    }
    throw std::logic_error("pushforward_measure: unreachable");
}

// --- distances ---------------------------------------------------------------

Rational tv_cylinder_exact(const FiberMeasure& a, const FiberMeasure& b, int depth) {
    auto ma = depth_masses(a, depth);
    auto mb = depth_masses(b, depth);
    if (ma.size() != mb.size())
        throw std::invalid_argument("tv_cylinder_exact: incompatible cylinder algebras");
    Rational acc = 0;
    for (size_t i = 0; i < ma.size(); ++i) {
        Rational d = ma[i] - mb[i];
        acc += d < 0 ? Rational(-d) : d;
    }
    return acc / 2;
}

namespace {

std::optional<PiecewiseDensity> flatten_to_density(const FiberMeasure& mu) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Density: return mu.density();
        case FiberMeasure::Kind::Mixture: {
            std::set<Rational> cutset = {Rational(0), Rational(1)};
            std::vector<std::pair<Rational, PiecewiseDensity>> parts;
            for (const auto& [w, p] : mu.mixture().parts) {
                auto d = flatten_to_density(*p);
                if (!d) return std::nullopt;
                for (const auto& c : d->cuts) cutset.insert(c);
                parts.emplace_back(w, std::move(*d));
            }
            std::vector<Rational> cuts(cutset.begin(), cutset.end());
            std::vector<Rational> masses(cuts.size() - 1, Rational(0));
            for (const auto& [w, d] : parts)
                for (size_t i = 0; i + 1 < cuts.size(); ++i)
                    masses[i] += w * d.interval_mass(cuts[i], cuts[i + 1]);
            PiecewiseDensity out{parts.front().second.kind, std::move(cuts), std::move(masses)};
            out.validate();
            return out;
        }
        default: return std::nullopt;
    }
}

double mass_below(const FiberMeasure& mu, double t, bool closed) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Density:
            return mu.density().segment_mass(0.0, t);
        case FiberMeasure::Kind::Atomic: {
            double acc = 0.0;
            for (const auto& [pt, w] : mu.atomic().atoms)
                if (pt.coord() < t || (closed && pt.coord() == t)) acc += w;
            return acc;
        }
        case FiberMeasure::Kind::Mixture: {
            double acc = 0.0;
            for (const auto& [w, p] : mu.mixture().parts)
                acc += to_double(w) * mass_below(*p, t, closed);
            return acc;
        }
        default:
            throw std::invalid_argument("wasserstein: measure not supported");
    }
}

void collect_breaks(const FiberMeasure& mu, std::set<double>& pts) {
    switch (mu.kind()) {
        case FiberMeasure::Kind::Density:
            for (const auto& c : mu.density().cuts) pts.insert(to_double(c));
            break;
        case FiberMeasure::Kind::Atomic:
            for (const auto& [pt, w] : mu.atomic().atoms) pts.insert(pt.coord());
            break;
        case FiberMeasure::Kind::Mixture:
            for (const auto& [w, p] : mu.mixture().parts) collect_breaks(*p, pts);
            break;
        default:
            throw std::invalid_argument("wasserstein: measure not supported");
    }
}

// integral of |g - c| over a piece where g is linear from g0 to g1 over length len
double abs_linear_integral(double g0, double g1, double len, double c) {
    double a = g0 - c, b = g1 - c;
    if (len <= 0.0) return 0.0;
    if (a * b >= 0.0) return 0.5 * (std::abs(a) + std::abs(b)) * len;
    double cross = std::abs(a) / (std::abs(a) + std::abs(b));
    return 0.5 * (std::abs(a) * cross + std::abs(b) * (1.0 - cross)) * len;
}

double wasserstein_1d(const FiberMeasure& a, const FiberMeasure& b, SpaceKind kind) {
    std::set<double> pts = {0.0, 1.0};
    collect_breaks(a, pts);
    collect_breaks(b, pts);
    std::vector<double> t(pts.begin(), pts.end());
    size_t n = t.size() - 1;
    std::vector<double> g0(n), g1(n), len(n);
    for (size_t i = 0; i < n; ++i) {
        g0[i] = mass_below(a, t[i], true) - mass_below(b, t[i], true);
        g1[i] = mass_below(a, t[i + 1], false) - mass_below(b, t[i + 1], false);
        len[i] = t[i + 1] - t[i];
    }
    auto objective = [&](double c) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += abs_linear_integral(g0[i], g1[i], len[i], c);
        return acc;
    };
    if (kind != SpaceKind::Circle) return objective(0.0);
    double lo = 0.0, hi = 0.0;
    for (size_t i = 0; i < n; ++i) {
        lo = std::min({lo, g0[i], g1[i]});
        hi = std::max({hi, g0[i], g1[i]});
    }
    for (int iter = 0; iter < 200; ++iter) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (objective(m1) <= objective(m2))
            hi = m2;
        else
            lo = m1;
    }
    return objective(0.5 * (lo + hi));
}

}  // namespace

double measure_distance(const FiberMeasure& a, const FiberMeasure& b, DistanceMode mode,
                        int cylinder_depth) {
    switch (mode) {
        case DistanceMode::TvCylinder: {
            auto ma = depth_masses(a, cylinder_depth);
            auto mb = depth_masses(b, cylinder_depth);
            if (ma.size() != mb.size())
                throw std::invalid_argument("measure_distance: incompatible cylinder algebras");
            double acc = 0.0;
            for (size_t i = 0; i < ma.size(); ++i) acc += std::abs(to_double(ma[i]) - to_double(mb[i]));
            return acc / 2.0;
        }
        case DistanceMode::TvGrid: {
            auto da = flatten_to_density(a);
            auto db = flatten_to_density(b);
            if (!da || !db)
                throw std::invalid_argument("measure_distance: tv-grid needs density measures");
            std::set<Rational> cutset(da->cuts.begin(), da->cuts.end());
            cutset.insert(db->cuts.begin(), db->cuts.end());
            std::vector<Rational> cuts(cutset.begin(), cutset.end());
            Rational acc = 0;
            for (size_t i = 0; i + 1 < cuts.size(); ++i) {
                Rational d = da->interval_mass(cuts[i], cuts[i + 1]) - db->interval_mass(cuts[i], cuts[i + 1]);
                acc += d < 0 ? Rational(-d) : d;
            }
            return to_double(acc / 2);
        }
        case DistanceMode::Wasserstein1D: {
            SpaceKind kind = SpaceKind::Interval;
            if (a.kind() == FiberMeasure::Kind::Density)
                kind = a.density().kind;
            else if (b.kind() == FiberMeasure::Kind::Density)
                kind = b.density().kind;
            else if (a.kind() == FiberMeasure::Kind::Atomic && !a.atomic().atoms.empty())
                kind = a.atomic().atoms.front().first.kind();
            return wasserstein_1d(a, b, kind);
        }
    }
    throw std::logic_error("measure_distance: unreachable");
}

// --- sampling -----------------------------------------------------------------

std::vector<FiberPoint> sample_fiber(const FiberMeasure& mu, int count, uint64_t seed, int sym_depth) {
    if (count < 1) throw std::invalid_argument("sample_fiber: count must be >= 1");
    std::vector<FiberPoint> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        uint64_t s = hash_u64(seed, static_cast<uint64_t>(i));
        const FiberMeasure* cur = &mu;
        int hop = 0;
        while (cur->kind() == FiberMeasure::Kind::Mixture) {
            const auto& parts = cur->mixture().parts;
            double u = uniform01(hash_u64(s, 0xfeedULL + hop++));
            double acc = 0.0;
            const FiberMeasure* chosen = parts.back().second.get();
            for (const auto& [w, p] : parts) {
                acc += to_double(w);
                if (u < acc) {
                    chosen = p.get();
                    break;
                }
            }
            cur = chosen;
        }
        switch (cur->kind()) {
            case FiberMeasure::Kind::Cylinder: {
                std::vector<int> word;
                word.reserve(sym_depth);
                for (int j = 0; j < sym_depth; ++j) {
                    auto vec = cur->cylinder().vector_at(j);
                    std::vector<double> w(vec.size());
                    for (size_t q = 0; q < vec.size(); ++q) w[q] = to_double(vec[q]);
                    word.push_back(1 + pick_categorical(w, uniform01(hash_u64(s, static_cast<uint64_t>(j)))));
                }
                out.push_back(FiberPoint::symbolic(std::move(word)));
                break;
            }
            case FiberMeasure::Kind::Density: {
                const auto& d = cur->density();
                double u = uniform01(hash_u64(s, 1));
                double acc = 0.0;
                size_t cell = d.masses.size() - 1;
                for (size_t j = 0; j < d.masses.size(); ++j) {
                    acc += to_double(d.masses[j]);
                    if (u < acc) {
                        cell = j;
                        break;
                    }
                }
                double lo = to_double(d.cuts[cell]), hi = to_double(d.cuts[cell + 1]);
                double v = uniform01(hash_u64(s, 2));
                out.push_back(FiberPoint::real(d.kind, lo + v * (hi - lo)));
                break;
            }
            case FiberMeasure::Kind::Atomic: {
                const auto& atoms = cur->atomic().atoms;
                std::vector<double> w(atoms.size());
                for (size_t q = 0; q < atoms.size(); ++q) w[q] = atoms[q].second;
                out.push_back(atoms[pick_categorical(w, uniform01(hash_u64(s, 3)))].first);
                break;
            }
            case FiberMeasure::Kind::Mixture:
                break;  // unreachable
        }
    }
    return out;
}

// --- disintegrations -----------------------------------------------------------

DisintegratedMeasure pullback_disintegration(const FiberSystem& sys, const DisintegratedMeasure& dis,
                                             int order) {
    if (order < 1) throw std::invalid_argument("pullback_disintegration: order must be >= 1");
    auto inner = dis.rule;
    DisintegratedMeasure out;
    out.name = dis.name + "*";
    out.rule = [sys, inner, order](const BasePoint& w) {
        FiberMeasure m = inner(w.advanced(-order));
        for (int i = order; i >= 1; --i) m = pushforward_measure(sys, w.advanced(-i), m);
        return m;
    };
    return out;
}

DisintegratedMeasure uniform_cylinder_disintegration(const FiberSpace& space) {
    if (space.kind != SpaceKind::Symbolic)
        throw std::invalid_argument("uniform_cylinder_disintegration: needs a symbolic space");
    RandomScalar bound = space.alphabet_bound;
    return {"uniform-cylinder", [bound](const BasePoint& w) {
                return FiberMeasure(CylinderProduct(w, bound, CylinderRule::Uniform));
            }};
}

DisintegratedMeasure skew_cylinder_disintegration(const FiberSpace& space, CylinderRule rule,
                                                  std::map<int, std::vector<Rational>> overrides) {
    if (space.kind != SpaceKind::Symbolic)
        throw std::invalid_argument("skew_cylinder_disintegration: needs a symbolic space");
    RandomScalar bound = space.alphabet_bound;
    std::string name = rule == CylinderRule::SkewFirst ? "skew-first-cylinder" : "skew-iid-cylinder";
    return {name, [bound, rule, overrides](const BasePoint& w) {
                return FiberMeasure(CylinderProduct(w, bound, rule, overrides));
            }};
}

DisintegratedMeasure lebesgue_disintegration(SpaceKind kind) {
    return {"lebesgue", [kind](const BasePoint&) {
                return FiberMeasure(PiecewiseDensity::uniform(kind));
            }};
}

DisintegratedMeasure density_disintegration(SpaceKind kind, std::vector<Rational> cell_masses) {
    PiecewiseDensity d = PiecewiseDensity::from_cell_masses(kind, std::move(cell_masses));
    return {"grid-density", [d](const BasePoint&) { return FiberMeasure(d); }};
}

DisintegratedMeasure atomic_disintegration(AtomicMeasure atoms) {
    double sum = 0.0;
    for (const auto& [pt, w] : atoms.atoms) sum += w;
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("atomic_disintegration: weights must sum to 1 within 1e-12");
    return {"atomic", [atoms](const BasePoint&) { return FiberMeasure(atoms); }};
}

}  // namespace rexp

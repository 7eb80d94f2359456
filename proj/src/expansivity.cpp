#include "rexp/expansivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rexp/rng.hpp"

namespace rexp {

namespace {

constexpr double kLogFloor = 1e-300;
constexpr double kCircleTol = 1e-12;

const char* kVerdictNames[] = {"evidence-for", "refuted", "inconclusive", "not-applicable"};

// --- symbolic Bowen-set enumeration ----------------------------------------
//
// Enumerates words of length L = hi + 1 + buffer with exact rational distance
// bookkeeping. A cell is certified-in when the fixed coordinates plus the
// worst-case tail (|1/a - 1/b| <= 1 gives 2^{-(L-k-1)} slack at constraint k)
// stay inside delta, certified-out when the fixed part alone exceeds delta at
// some constraint, boundary otherwise.

struct SymbolicEnumerator {
    std::vector<long long> alphabets;  // per position j in [0, L)
    std::vector<Rational> inv_x;       // 1/x_j
    std::vector<Rational> delta;       // per constraint, index k - lo
    std::vector<Rational> tail_slack;  // 2^{-(L-k-1)}
    int64_t lo = 0, hi = 0;
    int word_len = 0;
    size_t budget = 0;

    std::vector<Rational> partial;
    std::vector<int> prefix;
    std::vector<std::vector<int>> in_cells, boundary_cells;
    size_t leaves = 0;
    bool exceeded = false;

    void visit(int p) {
        if (exceeded) return;
        if (p == word_len) {
            if (++leaves > budget) {
                exceeded = true;
                return;
            }
            bool in = true;
            for (size_t c = 0; c < partial.size(); ++c) {
                if (partial[c] + tail_slack[c] > delta[c]) {
                    in = false;
                    break;
                }
            }
            (in ? in_cells : boundary_cells).push_back(prefix);
            return;
        }
        for (int sym = 1; sym <= alphabets[p]; ++sym) {
            Rational diff = inv_x[p] - Rational(1, sym);
            if (diff < 0) diff = -diff;
            bool pruned = false;
            int64_t kmax = std::min<int64_t>(hi, p);
            std::vector<std::pair<size_t, Rational>> undo;
            if (diff != 0) {
                for (int64_t k = lo; k <= kmax; ++k) {
                    size_t c = static_cast<size_t>(k - lo);
                    Rational add = pow2(-(p - k)) * diff;
                    partial[c] += add;
                    undo.emplace_back(c, add);
                    if (partial[c] > delta[c]) pruned = true;
                }
            }
            if (!pruned) {
                prefix.push_back(sym);
                visit(p + 1);
                prefix.pop_back();
            }
            for (auto& [c, add] : undo) partial[c] -= add;
            if (exceeded) return;
        }
    }
};

GammaSetApprox bowen_set_symbolic(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                                  const RandomScalar& delta, ConstraintRange range,
                                  const GammaOptions& opts) {
    if (range.lo < 0)
        throw std::invalid_argument("bowen_set_approx: shift fibers support forward ranges only");
    GammaSetApprox g;
    g.kind = SpaceKind::Symbolic;
    g.range = range;
    g.word_len = static_cast<int>(range.hi) + 1 + opts.buffer;

    SymbolicEnumerator e;
    e.lo = range.lo;
    e.hi = range.hi;
    e.word_len = g.word_len;
    e.budget = opts.cell_budget;
    e.alphabets.resize(g.word_len);
    e.inv_x.resize(g.word_len);
    for (int j = 0; j < g.word_len; ++j) {
        e.alphabets[j] = sys.alphabet_at(w.advanced(j));
        e.inv_x[j] = Rational(1, x.sym(j));
    }
    size_t n_constraints = static_cast<size_t>(range.hi - range.lo + 1);
    e.delta.resize(n_constraints);
    e.tail_slack.resize(n_constraints);
    e.partial.assign(n_constraints, Rational(0));
    for (int64_t k = range.lo; k <= range.hi; ++k) {
        e.delta[k - range.lo] = delta.eval_exact(w.advanced(k));
        e.tail_slack[k - range.lo] = pow2(-(g.word_len - k - 1));
    }
    e.visit(0);
    g.in_cells = std::move(e.in_cells);
    g.boundary_cells = std::move(e.boundary_cells);
    g.budget_exceeded = e.exceeded;
    return g;
}

// --- circle/interval Bowen-set computation ----------------------------------

GammaSetApprox bowen_set_region(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                                const RandomScalar& delta, ConstraintRange range,
                                const GammaOptions& opts) {
    (void)opts;
    SpaceKind kind = sys.space.kind;
    auto orbit_ball = [&](int64_t k) {
        double center = cocycle_apply(sys, w, x, k).coord();
        return RegionSet::ball(kind, center, delta.eval(w.advanced(k)));
    };

    // Forward constraints pulled back to time 0.
    RegionSet s = RegionSet::whole(kind);
    for (int64_t k = range.hi; k >= 0; --k) {
        if (k >= range.lo) s = s.intersected(orbit_ball(k));
        if (k > 0) s = s.preimage(sys.map_at(w.advanced(k - 1)));
    }
    // Backward constraints pushed forward to time 0.
    if (range.lo < 0) {
        RegionSet v = orbit_ball(range.lo);
        for (int64_t k = range.lo; k < 0; ++k) {
            if (k > range.lo) v = v.intersected(orbit_ball(k));
            v = v.image(sys.map_at(w.advanced(k)));
        }
        s = s.intersected(v);
    }

    GammaSetApprox g;
    g.kind = kind;
    g.range = range;
    g.region = s;
    return g;
}

// --- decay fitting -----------------------------------------------------------

struct Fit {
    double slope = 0.0;
    double residual = 0.0;  // rms residual / |total fitted drop|
};

Fit lsq_fit(const std::vector<double>& y) {
    size_t n = y.size();
    Fit f;
    if (n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        double xi = static_cast<double>(i + 1);
        sx += xi;
        sy += y[i];
        sxx += xi * xi;
        sxy += xi * y[i];
    }
    double denom = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - f.slope * sx) / n;
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        double r = y[i] - (intercept + f.slope * (i + 1));
        ss += r * r;
    }
    double rms = std::sqrt(ss / n);
    double drop = std::abs(f.slope) * (n - 1);
    f.residual = drop > 1e-9 ? rms / drop : (rms < 1e-12 ? 0.0 : 1e9);
    return f;
}

void finish_curve(SampleCurve& c) {
    for (size_t i = 0; i + 1 < c.upper.size(); ++i) {
        if (c.upper[i + 1] > c.upper[i] + 1e-9) c.monotone = false;
        // Nested sets: the running minimum is still a certified upper bound.
        c.upper[i + 1] = std::min(c.upper[i + 1], c.upper[i]);
    }
    std::vector<double> logs;
    logs.reserve(c.upper.size());
    for (double u : c.upper) logs.push_back(std::log(std::max(u, kLogFloor)));
    size_t n = logs.size();
    if (n >= 2) c.mean_rate = (logs.front() - logs.back()) / static_cast<double>(n - 1);
    Fit f = lsq_fit(logs);
    c.lsq_slope = f.slope;
    c.lsq_residual = f.residual;
}

std::vector<FiberPoint> adversarial_points(const FiberSystem& sys, const BasePoint& w, int horizon) {
    std::vector<FiberPoint> pts;
    if (sys.space.kind == SpaceKind::Symbolic) {
        pts.push_back(FiberPoint::symbolic({}, {1}));  // fixed point of the shift
        std::vector<int> maxword;
        maxword.reserve(horizon);
        for (int j = 0; j < horizon; ++j)
            maxword.push_back(static_cast<int>(sys.alphabet_at(w.advanced(j))));
        pts.push_back(FiberPoint::symbolic(std::move(maxword), {1}));
    } else {
        pts.push_back(FiberPoint::real(sys.space.kind, 0.0));  // fixed point of doubling / PL maps
        pts.push_back(FiberPoint::real(sys.space.kind, 0.5));
    }
    return pts;
}

Sided pick_sided(const FiberSystem& sys, ExpansivityNotion notion) {
    if (notion == ExpansivityNotion::PositivelyRandomExpansive) return Sided::Forward;
    return sys.invertible ? Sided::TwoSided : Sided::Forward;
}

bool refuting(const SampleCurve& c, const DiagnosticParams& p) {
    // A refutation needs a certified lower bound that has stabilized above the
    // floor: present across the persistence window and showing no geometric
    // decay over the second half of the depth ladder (staircase decay of
    // mixed isometric/expanding steps makes short windows flat).
    size_t n = c.lower.size();
    if (n < static_cast<size_t>(p.persist_window) || n < 2) return false;
    for (size_t i = n - p.persist_window; i < n; ++i)
        if (c.lower[i] < p.refute_floor) return false;
    size_t mid = n / 2;
    if (mid == n - 1) mid = n - 2;
    if (c.lower[mid] <= 0.0) return false;
    double half_rate = (std::log(c.lower[mid]) - std::log(c.lower[n - 1])) /
                       static_cast<double>(n - 1 - mid);
    return half_rate < p.min_rate;
}

bool decaying(const SampleCurve& c, const DiagnosticParams& p) {
    return c.monotone && !c.budget_exceeded && c.mean_rate >= p.min_rate;
}

}  // namespace

std::string verdict_name(Verdict v) { return kVerdictNames[static_cast<int>(v)]; }

Membership bowen_membership_range(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                                  const FiberPoint& y, const RandomScalar& delta,
                                  ConstraintRange range) {
    if (range.lo < 0 && !sys.invertible)
        throw std::invalid_argument("bowen_membership: two-sided range needs an invertible system");
    bool boundary = false;
    for (int64_t k = range.lo; k <= range.hi; ++k) {
        BasePoint wk = w.advanced(k);
        FiberPoint xk = cocycle_apply(sys, w, x, k);
        FiberPoint yk = cocycle_apply(sys, w, y, k);
        if (sys.space.kind == SpaceKind::Symbolic) {
            if (symbolic_distance_exact(xk, yk) > delta.eval_exact(wk)) return Membership::Out;
        } else {
            double d = sys.space.kind == SpaceKind::Circle
                           ? circle_distance(xk.coord(), yk.coord())
                           : std::abs(xk.coord() - yk.coord());
            double dv = delta.eval(wk);
            if (d > dv + kCircleTol) return Membership::Out;
            if (d > dv - kCircleTol) boundary = true;
        }
    }
    return boundary ? Membership::Boundary : Membership::In;
}

Membership bowen_membership(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                            const FiberPoint& y, const RandomScalar& delta, int n, Sided sided) {
    if (n < 1) throw std::invalid_argument("bowen_membership: n must be >= 1");
    if (sided == Sided::TwoSided && !sys.invertible)
        throw std::invalid_argument("bowen_membership: two-sided needs an invertible system");
    return bowen_membership_range(sys, w, x, y, delta,
                                  sided == Sided::Forward ? forward_range(n) : two_sided_range(n));
}

GammaSetApprox bowen_set_approx(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                                const RandomScalar& delta, ConstraintRange range,
                                const GammaOptions& opts) {
    if (range.hi < range.lo) throw std::invalid_argument("bowen_set_approx: empty range");
    if (range.lo < 0 && !sys.invertible)
        throw std::invalid_argument("bowen_set_approx: two-sided range needs an invertible system");
    GammaSetApprox g = sys.space.kind == SpaceKind::Symbolic
                           ? bowen_set_symbolic(sys, w, x, delta, range, opts)
                           : bowen_set_region(sys, w, x, delta, range, opts);
    g.depth = static_cast<int>(range.hi) + 1;
    return g;
}

GammaSetApprox gamma_approx(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                            const RandomScalar& delta, int depth, Sided sided,
                            const GammaOptions& opts) {
    if (depth < 1) throw std::invalid_argument("gamma_approx: depth must be >= 1");
    if (sided == Sided::TwoSided && !sys.invertible)
        throw std::invalid_argument("gamma_approx: two-sided needs an invertible system");
    ConstraintRange range = sided == Sided::Forward ? forward_range(depth) : two_sided_range(depth);
    GammaSetApprox g = bowen_set_approx(sys, w, x, delta, range, opts);
    g.sided = sided;
    g.depth = depth;
    return g;
}

MassBracket gamma_mass(const FiberMeasure& mu, const GammaSetApprox& g) {
    if (g.kind == SpaceKind::Symbolic) {
        Rational lower = 0;
        for (const auto& cell : g.in_cells) lower += word_mass(mu, cell);
        Rational upper = lower;
        for (const auto& cell : g.boundary_cells) upper += word_mass(mu, cell);
        MassBracket b;
        b.lower_exact = lower;
        b.upper_exact = upper;
        b.lower = to_double(lower);
        b.upper = to_double(upper);
        if (g.budget_exceeded) {
            b.upper = 1.0;
            b.upper_exact = Rational(1);
        }
        return b;
    }
    return region_mass(mu, g.region);
}

ExpansivityReport expansive_diagnostic(const FiberSystem& sys, const EnvPtr& env,
                                       const DisintegratedMeasure& dis, const RandomScalar& delta,
                                       const DiagnosticParams& params, ExpansivityNotion notion) {
    ExpansivityReport rep;
    rep.notion = notion == ExpansivityNotion::RandomExpansive ? "random-expansive"
                                                              : "positively-random-expansive";
    rep.sided = pick_sided(sys, notion);
    if (notion == ExpansivityNotion::RandomExpansive && !sys.invertible)
        rep.note = "two-sided Gamma unavailable on a non-invertible system; forward sets used";
    rep.depth = params.depth;
    rep.refute_floor = params.refute_floor;

    int horizon = params.depth + params.gamma.buffer;
    auto bases = sample_base(env, params.base_samples, hash_u64(params.seed, 0xba5e));
    for (size_t wi = 0; wi < bases.size(); ++wi) {
        const BasePoint& w = bases[wi];
        FiberMeasure mu = dis.at(w);
        std::vector<FiberPoint> xs =
            sample_fiber(mu, params.fiber_samples, hash_u64(params.seed, wi), horizon + 8);
        for (FiberPoint& a : adversarial_points(sys, w, horizon)) xs.push_back(std::move(a));
        for (const FiberPoint& x : xs) {
            SampleCurve c;
            c.w_id = w.id();
            c.x_desc = x.describe();
            for (int n = 1; n <= params.depth; ++n) {
                GammaSetApprox g = gamma_approx(sys, w, x, delta, n, rep.sided, params.gamma);
                MassBracket b = gamma_mass(mu, g);
                c.lower.push_back(b.lower);
                c.upper.push_back(b.upper);
                c.lower_exact.push_back(b.lower_exact ? fraction_string(*b.lower_exact) : "");
                c.upper_exact.push_back(b.upper_exact ? fraction_string(*b.upper_exact) : "");
                c.cells.push_back(static_cast<long long>(g.cell_count()));
                c.budget_exceeded |= g.budget_exceeded;
            }
            finish_curve(c);
            rep.samples.push_back(std::move(c));
        }
    }

    double rate_acc = 0, lsq_acc = 0;
    bool all_decay = true;
    for (const SampleCurve& c : rep.samples) {
        rate_acc += c.mean_rate;
        lsq_acc += -c.lsq_slope;
        if (!decaying(c, params)) all_decay = false;
        if (refuting(c, params)) {
            rep.verdict = Verdict::Refuted;
            if (c.lower.back() > rep.witness_mass) {
                rep.witness = c.w_id + " x=" + c.x_desc;
                rep.witness_mass = c.lower.back();
            }
        }
    }
    if (!rep.samples.empty()) {
        rep.decay_rate = rate_acc / rep.samples.size();
        rep.lsq_rate = lsq_acc / rep.samples.size();
    }
    if (rep.verdict != Verdict::Refuted)
        rep.verdict = all_decay && !rep.samples.empty() ? Verdict::EvidenceFor : Verdict::Inconclusive;
    return rep;
}

ExpansivityReport countable_diagnostic(const FiberSystem& sys, const EnvPtr& env,
                                       const RandomScalar& delta, const DiagnosticParams& params) {
    ExpansivityReport rep;
    rep.notion = "countably-expansive";
    rep.sided = sys.invertible ? Sided::TwoSided : Sided::Forward;
    rep.depth = params.depth;
    rep.refute_floor = params.refute_floor;

    // Reference gauge: uniform mass, so "cells shrink" is measurable.
    DisintegratedMeasure gauge = sys.space.kind == SpaceKind::Symbolic
                                     ? uniform_cylinder_disintegration(sys.space)
                                     : lebesgue_disintegration(sys.space.kind);

    const size_t count_cap = 256;
    int horizon = params.depth + params.gamma.buffer;
    auto bases = sample_base(env, params.base_samples, hash_u64(params.seed, 0xc0c0));
    bool counts_bounded = true;
    for (size_t wi = 0; wi < bases.size(); ++wi) {
        const BasePoint& w = bases[wi];
        FiberMeasure mu = gauge.at(w);
        std::vector<FiberPoint> xs =
            sample_fiber(mu, params.fiber_samples, hash_u64(params.seed, wi), horizon + 8);
        for (FiberPoint& a : adversarial_points(sys, w, horizon)) xs.push_back(std::move(a));
        for (const FiberPoint& x : xs) {
            SampleCurve c;
            c.w_id = w.id();
            c.x_desc = x.describe();
            for (int n = 1; n <= params.depth; ++n) {
                GammaSetApprox g = gamma_approx(sys, w, x, delta, n, rep.sided, params.gamma);
                MassBracket b = gamma_mass(mu, g);
                c.lower.push_back(b.lower);
                c.upper.push_back(b.upper);
                c.lower_exact.push_back(b.lower_exact ? fraction_string(*b.lower_exact) : "");
                c.upper_exact.push_back(b.upper_exact ? fraction_string(*b.upper_exact) : "");
                long long cells = g.kind == SpaceKind::Symbolic
                                      ? static_cast<long long>(g.in_cells.size())
                                      : static_cast<long long>(g.region.count());
                c.cells.push_back(cells);
                c.budget_exceeded |= g.budget_exceeded;
                if (cells > static_cast<long long>(count_cap)) counts_bounded = false;
            }
            finish_curve(c);
            rep.samples.push_back(std::move(c));
        }
    }

    double rate_acc = 0, lsq_acc = 0;
    bool all_decay = true;
    for (const SampleCurve& c : rep.samples) {
        rate_acc += c.mean_rate;
        lsq_acc += -c.lsq_slope;
        if (!decaying(c, params)) all_decay = false;
        if (refuting(c, params)) {
            rep.verdict = Verdict::Refuted;
            if (c.lower.back() > rep.witness_mass) {
                rep.witness = c.w_id + " x=" + c.x_desc;
                rep.witness_mass = c.lower.back();
            }
        }
    }
    if (!rep.samples.empty()) {
        rep.decay_rate = rate_acc / rep.samples.size();
        rep.lsq_rate = lsq_acc / rep.samples.size();
    }
    if (rep.verdict != Verdict::Refuted)
        rep.verdict = all_decay && counts_bounded && !rep.samples.empty() ? Verdict::EvidenceFor
                                                                          : Verdict::Inconclusive;
    if (!counts_bounded) rep.note = "certified-in cell count exceeded the bounded-count cap";
    return rep;
}

std::optional<int64_t> continuum_wise_check(const FiberSystem& sys, const BasePoint& w,
                                            double segment_lo, double segment_len,
                                            const RandomScalar& delta, int max_n) {
    if (sys.space.kind == SpaceKind::Symbolic)
        throw std::invalid_argument("continuum_wise_check: needs a circle or interval system");
    if (segment_len <= 0.0) throw std::invalid_argument("continuum_wise_check: empty segment");

    auto diam = [&](double len) {
        return sys.space.kind == SpaceKind::Circle ? std::min(len, 0.5) : len;
    };
    struct State {
        double lo, len;
    };
    auto step_forward = [&](State s, const MapSpec& m) -> State {
        switch (m.kind) {
            case MapSpec::Kind::Rotation: return {s.lo + m.angle, s.len};
            case MapSpec::Kind::Expanding:
                return {map_forward(m, s.lo), std::min(1.0, s.len * static_cast<double>(m.degree))};
            case MapSpec::Kind::PiecewiseLinear: {
                double a = map_forward(m, s.lo), b = map_forward(m, std::min(1.0, s.lo + s.len));
                return {a, b - a};
            }
        }
        return s;
    };
    auto step_backward = [&](State s, const MapSpec& m) -> State {
        switch (m.kind) {
            case MapSpec::Kind::Rotation: return {s.lo - m.angle, s.len};
            case MapSpec::Kind::PiecewiseLinear: {
                double a = map_inverse(m, s.lo), b = map_inverse(m, std::min(1.0, s.lo + s.len));
                return {a, b - a};
            }
            case MapSpec::Kind::Expanding:
                throw std::logic_error("continuum_wise_check: backward step on expanding map");
        }
        return s;
    };

    State fwd{segment_lo, segment_len};
    State bwd{segment_lo, segment_len};
    if (diam(fwd.len) > delta.eval(w)) return 0;
    for (int n = 1; n <= max_n; ++n) {
        fwd = step_forward(fwd, sys.map_at(w.advanced(n - 1)));
        if (diam(fwd.len) > delta.eval(w.advanced(n))) return n;
        if (sys.invertible) {
            bwd = step_backward(bwd, sys.map_at(w.advanced(-n)));
            if (diam(bwd.len) > delta.eval(w.advanced(-n))) return -n;
        }
    }
    return std::nullopt;
}

ExpansivityReport continuum_wise_diagnostic(const FiberSystem& sys, const EnvPtr& env,
                                            const RandomScalar& delta, const DiagnosticParams& params,
                                            double segment_length, int max_n) {
    ExpansivityReport rep;
    rep.notion = "continuum-wise";
    rep.sided = sys.invertible ? Sided::TwoSided : Sided::Forward;
    rep.depth = max_n;
    if (sys.space.kind == SpaceKind::Symbolic) {
        rep.verdict = Verdict::NotApplicable;
        rep.note = "symbolic fibers are totally disconnected; no nontrivial continua exist";
        return rep;
    }

    auto bases = sample_base(env, params.base_samples, hash_u64(params.seed, 0xc311));
    bool all_escape = true;
    double diam0 = sys.space.kind == SpaceKind::Circle ? std::min(segment_length, 0.5) : segment_length;
    bool certified_never = false;
    // Isometries preserve diameters exactly: a segment below the infimum of
    // delta can never escape, at any horizon.
    if (sys.is_isometry_system() && diam0 <= to_double(delta.min_value())) certified_never = true;

    for (size_t wi = 0; wi < bases.size(); ++wi) {
        const BasePoint& w = bases[wi];
        double lo = uniform01(hash_u64(params.seed, 0x5e9 + wi));
        auto esc = continuum_wise_check(sys, w, lo, segment_length, delta, max_n);
        SampleCurve c;
        c.w_id = w.id();
        c.x_desc = "segment@" + std::to_string(lo);
        c.lower.push_back(esc ? static_cast<double>(*esc) : -1.0);
        c.upper.push_back(c.lower.back());
        rep.samples.push_back(std::move(c));
        if (!esc) all_escape = false;
    }
    if (certified_never) {
        rep.verdict = Verdict::Refuted;
        rep.note = "isometry system: segment diameter is preserved below inf delta";
        rep.witness_mass = diam0;
    } else if (all_escape) {
        rep.verdict = Verdict::EvidenceFor;
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "some segments did not escape within the horizon";
    }
    return rep;
}

std::vector<StableClassEntry> stable_class_mass(const FiberSystem& sys, const FiberMeasure& mu_w,
                                                const BasePoint& w, const FiberPoint& p,
                                                const std::vector<RandomScalar>& gammas, int max_j,
                                                int depth, const GammaOptions& opts) {
    if (gammas.empty()) throw std::invalid_argument("stable_class_mass: empty gamma sequence");
    std::vector<StableClassEntry> table;
    for (size_t gi = 0; gi < gammas.size(); ++gi) {
        for (int j = 0; j <= max_j; ++j) {
            for (int d = j; d <= depth; ++d) {
                GammaSetApprox g = bowen_set_approx(sys, w, p, gammas[gi], {j, d}, opts);
                MassBracket b = gamma_mass(mu_w, g);
                table.push_back({static_cast<int>(gi), j, d, b.upper});
            }
        }
    }
    return table;
}

std::vector<ChainSystemResult> implication_chain_test(const std::vector<ChainEntry>& suite,
                                                      const DiagnosticParams& params) {
    std::vector<ChainSystemResult> results;
    for (const ChainEntry& entry : suite) {
        ChainSystemResult r;
        r.name = entry.name;
        bool any_expansive = false;
        bool all_expansive = true;
        for (const DisintegratedMeasure& dis : entry.nonatomic) {
            ExpansivityReport e = expansive_diagnostic(entry.sys, entry.env, dis, entry.delta, params);
            r.per_measure.emplace_back(dis.name, e.verdict);
            if (e.verdict == Verdict::EvidenceFor)
                any_expansive = true;
            else
                all_expansive = false;
        }
        r.expansive = any_expansive ? Verdict::EvidenceFor
                                    : (r.per_measure.empty() ? Verdict::Inconclusive
                                                             : r.per_measure.front().second);
        ExpansivityReport cnt = countable_diagnostic(entry.sys, entry.env, entry.delta, params);
        r.countable = cnt.verdict;
        ExpansivityReport cw = continuum_wise_diagnostic(entry.sys, entry.env, entry.delta, params);
        r.continuum = cw.verdict;

        bool continuum_pass = r.continuum == Verdict::EvidenceFor || r.continuum == Verdict::NotApplicable;
        r.chain_ok = true;
        if (any_expansive && (r.countable == Verdict::Refuted || r.continuum == Verdict::Refuted))
            r.chain_ok = false;
        if (r.countable == Verdict::EvidenceFor && r.continuum == Verdict::Refuted) r.chain_ok = false;
        if (any_expansive && !continuum_pass && r.continuum != Verdict::Inconclusive) r.chain_ok = false;
        r.theorem_c_ok = r.countable != Verdict::EvidenceFor || all_expansive;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace rexp

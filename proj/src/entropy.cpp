#include "rexp/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rexp/rng.hpp"

namespace rexp {

namespace {

constexpr double kMassFloor = 1e-300;

// Least-squares slope of y against n over indices [first, last].
double window_slope(const std::vector<double>& y, size_t first, size_t last) {
    size_t n = last - first + 1;
    if (n < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = first; i <= last; ++i) {
        double xi = static_cast<double>(i + 1);
        sx += xi;
        sy += y[i];
        sxx += xi * xi;
        sxy += xi * y[i];
    }
    double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace

std::vector<MassBracket> bowen_mass_sequence(const FiberSystem& sys, const DisintegratedMeasure& dis,
                                             const BasePoint& w, const FiberPoint& x,
                                             const RandomScalar& delta, int n_max,
                                             const GammaOptions& opts) {
    if (n_max < 1) throw std::invalid_argument("bowen_mass_sequence: n_max must be >= 1");
    FiberMeasure mu = dis.at(w);
    std::vector<MassBracket> seq;
    seq.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) {
        GammaSetApprox g = bowen_set_approx(sys, w, x, delta, forward_range(n), opts);
        MassBracket b = gamma_mass(mu, g);
        if (!seq.empty()) {
            // Nested balls: bounds can only tighten.
            b.upper = std::min(b.upper, seq.back().upper);
            b.lower = std::min(b.lower, b.upper);
        }
        seq.push_back(b);
    }
    return seq;
}

std::vector<RandomScalar> default_delta_ladder(const FiberSpace& space) {
    std::vector<RandomScalar> ladder;
    Rational base = rational_from_double(space.diameter_bound()) / 4;
    for (int i = 0; i < 5; ++i) {
        ladder.push_back(RandomScalar::constant(base));
        base /= 2;
    }
    return ladder;
}

EntropyEstimate brin_katok_estimate(const FiberSystem& sys, const EnvPtr& env,
                                    const DisintegratedMeasure& dis,
                                    const std::vector<RandomScalar>& ladder,
                                    const EntropyParams& params) {
    if (ladder.empty()) throw std::invalid_argument("brin_katok_estimate: empty delta ladder");
    EntropyEstimate est;
    size_t win_lo = static_cast<size_t>(params.n_max / 2);  // 0-based index of n = n_max/2 + 1
    size_t win_hi = static_cast<size_t>(params.n_max - 1);

    auto bases = sample_base(env, params.samples, hash_u64(params.seed, 0xb1ca));
    for (size_t li = 0; li < ladder.size(); ++li) {
        const RandomScalar& delta = ladder[li];
        std::vector<EntropySample> samples;
        samples.reserve(bases.size());
        for (size_t wi = 0; wi < bases.size(); ++wi) {
            const BasePoint& w = bases[wi];
            FiberPoint x = sample_fiber(dis.at(w), 1, hash_u64(params.seed, wi * 31 + li),
                                        params.n_max + params.gamma.buffer + 8)
                               .front();
            EntropySample s;
            s.w_id = w.id();
            s.x_desc = x.describe();
            auto seq = bowen_mass_sequence(sys, dis, w, x, delta, params.n_max, params.gamma);
            for (size_t i = 0; i < seq.size(); ++i) {
                double u = seq[i].upper;
                if (u <= 0.0) {
                    s.truncated = true;
                    break;
                }
                s.neg_log_mass.push_back(-std::log(std::max(u, kMassFloor)));
                s.ratio.push_back(s.neg_log_mass.back() / static_cast<double>(i + 1));
            }
            size_t hi = std::min(win_hi, s.neg_log_mass.empty() ? 0 : s.neg_log_mass.size() - 1);
            size_t lo = std::min(win_lo, hi);
            s.slope = window_slope(s.neg_log_mass, lo, hi);
            s.ratio_min = 0.0;
            for (size_t i = lo; i <= hi && i < s.ratio.size(); ++i)
                s.ratio_min = i == lo ? s.ratio[i] : std::min(s.ratio_min, s.ratio[i]);
            samples.push_back(std::move(s));
        }
        double mean = 0, ratio_mean = 0;
        for (const auto& s : samples) {
            mean += s.slope;
            ratio_mean += s.ratio_min;
        }
        mean /= samples.size();
        ratio_mean /= samples.size();
        double var = 0;
        for (const auto& s : samples) var += (s.slope - mean) * (s.slope - mean);
        double halfwidth = samples.size() > 1
                               ? 1.96 * std::sqrt(var / (samples.size() - 1) / samples.size())
                               : 0.0;
        double dval = to_double(delta.min_value());
        est.ladder.push_back({dval, mean, halfwidth, ratio_mean});
        if (li + 1 == ladder.size()) {
            est.estimate = mean;
            est.halfwidth = halfwidth;
            est.ratio_estimate = ratio_mean;
            est.delta_used = dval;
            for (auto& s : samples) est.truncated |= s.truncated;
            est.samples = std::move(samples);
        }
    }
    return est;
}

std::optional<double> analytic_entropy_oracle(const FiberSystem& sys, const BaseEnvironment& env) {
    switch (sys.kind) {
        case GeneratorKind::ExpandingCircle:
            return integrate_scalar(env, sys.degree, [](double d) { return std::log(d); });
        case GeneratorKind::Shift:
            return integrate_scalar(env, sys.space.alphabet_bound,
                                    [](double k) { return std::log(k); });
        case GeneratorKind::Rotation:
        case GeneratorKind::Mixed:
            return std::nullopt;
    }
    return std::nullopt;
}

TheoremAReport theorem_a_consistency(const FiberSystem& sys, const EnvPtr& env,
                                     const DisintegratedMeasure& dis,
                                     const std::vector<RandomScalar>& ladder,
                                     const TheoremAParams& params) {
    TheoremAReport rep;
    EntropyEstimate est = brin_katok_estimate(sys, env, dis, ladder, params.entropy);
    rep.entropy_estimate = est.estimate;
    rep.entropy_halfwidth = est.halfwidth;
    if (est.estimate > params.entropy.entropy_cap) {
        rep.note = "entropy estimate exceeds the cap; treated as estimation failure";
        return rep;
    }
    rep.applicable = est.estimate > params.positivity_cutoff;
    if (!rep.applicable) {
        rep.note = "entropy estimate is not positive; the hypothesis of the implication is unmet";
        return rep;
    }

    // (b) positive expansivity with decay rate at least h/2 - tolerance at
    // some ladder radius.
    double target = est.estimate / 2.0 - params.rate_tolerance;
    for (const RandomScalar& delta : ladder) {
        ExpansivityReport e = expansive_diagnostic(sys, env, dis, delta, params.diagnostic,
                                                   ExpansivityNotion::PositivelyRandomExpansive);
        if (e.verdict == Verdict::EvidenceFor && e.decay_rate >= target) {
            rep.expansive_verdict = e.verdict;
            rep.expansive_rate = e.decay_rate;
            rep.delta_used = to_double(delta.min_value());
            rep.rate_clause_ok = true;
            break;
        }
        if (e.verdict == Verdict::EvidenceFor && rep.expansive_verdict != Verdict::EvidenceFor) {
            rep.expansive_verdict = e.verdict;
            rep.expansive_rate = e.decay_rate;
            rep.delta_used = to_double(delta.min_value());
        }
    }

    // (c) truncated stable-class masses strictly decreasing in depth.
    std::vector<RandomScalar> gammas;
    RandomScalar g0 = ladder.back();
    for (int i = 0; i < 3; ++i) gammas.push_back(g0.scaled(Rational(1, 1 << i)));
    auto bases = sample_base(env, params.stable_samples, hash_u64(params.diagnostic.seed, 0x57ab));
    rep.stable_clause_ok = true;
    for (size_t wi = 0; wi < bases.size() && rep.stable_clause_ok; ++wi) {
        const BasePoint& w = bases[wi];
        FiberMeasure mu = dis.at(w);
        FiberPoint p = sample_fiber(mu, 1, hash_u64(params.diagnostic.seed, 0x9000 + wi),
                                    params.stable_depth + params.diagnostic.gamma.buffer + 8)
                           .front();
        auto table = stable_class_mass(sys, mu, w, p, gammas, 1, params.stable_depth,
                                       params.diagnostic.gamma);
        for (size_t i = 0; i + 1 < table.size(); ++i) {
            const auto& a = table[i];
            const auto& b = table[i + 1];
            if (a.gamma_index == b.gamma_index && a.start_j == b.start_j && b.depth == a.depth + 1) {
                if (!(b.upper < a.upper - 1e-15 || b.upper <= a.upper * (1.0 - 1e-9))) {
                    rep.stable_clause_ok = false;
                    rep.note = "stable-class mass failed to decrease strictly (gamma " +
                               std::to_string(a.gamma_index) + ", j " + std::to_string(a.start_j) +
                               ", depth " + std::to_string(a.depth) + " -> " + std::to_string(b.depth) +
                               " at w " + w.id() + ")";
                    break;
                }
            }
        }
    }

    rep.all_pass = rep.applicable && rep.rate_clause_ok && rep.stable_clause_ok;
    return rep;
}

}  // namespace rexp

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rexp/expansivity.hpp"
#include "rexp/measure.hpp"

namespace rexp {

// Fiber-entropy estimation through the masses of random Bowen balls
// mu_w(B_w[x,delta,n]) and the functional -log mu_w(B_w[x,delta,n]) / n.

std::vector<MassBracket> bowen_mass_sequence(const FiberSystem& sys, const DisintegratedMeasure& dis,
                                             const BasePoint& w, const FiberPoint& x,
                                             const RandomScalar& delta, int n_max,
                                             const GammaOptions& opts = {});

struct EntropySample {
    std::string w_id;
    std::string x_desc;
    std::vector<double> neg_log_mass;  // -log upper mass, n = 1..n_max
    std::vector<double> ratio;         // -log upper mass / n
    double ratio_min = 0.0;            // min of ratio over the tail window
    double slope = 0.0;                // tail-window slope of -log mass vs n
    bool truncated = false;
};

struct LadderPoint {
    double delta = 0.0;
    double estimate = 0.0;
    double halfwidth = 0.0;
    double ratio_estimate = 0.0;
};

struct EntropyEstimate {
    double estimate = 0.0;        // aggregate slope estimate at delta_used
    double halfwidth = 0.0;       // 1.96 * stderr over samples
    double ratio_estimate = 0.0;  // aggregate min-window ratio (raw functional)
    double delta_used = 0.0;
    std::vector<LadderPoint> ladder;
    std::vector<EntropySample> samples;  // at delta_used
    bool truncated = false;

    double threshold_H() const { return estimate / 2.0; }
};

// Five constant radii halving from diameter/4.
std::vector<RandomScalar> default_delta_ladder(const FiberSpace& space);

struct EntropyParams {
    int n_max = 14;
    int samples = 100;  // (w, x) pairs
    uint64_t seed = 1;
    GammaOptions gamma;
    double entropy_cap = 50.0;  // estimates above this flag estimation failure
};

EntropyEstimate brin_katok_estimate(const FiberSystem& sys, const EnvPtr& env,
                                    const DisintegratedMeasure& dis,
                                    const std::vector<RandomScalar>& ladder,
                                    const EntropyParams& params);

// Closed-form fiber entropy for declared integer expansion data:
// sum over base symbols of weight * log(degree). Absent for systems without a
// degree/alphabet-bound scalar.
std::optional<double> analytic_entropy_oracle(const FiberSystem& sys, const BaseEnvironment& env);

struct TheoremAReport {
    bool applicable = false;  // entropy estimate above the positivity cutoff
    double entropy_estimate = 0.0;
    double entropy_halfwidth = 0.0;
    Verdict expansive_verdict = Verdict::Inconclusive;
    double expansive_rate = 0.0;
    double delta_used = 0.0;
    bool rate_clause_ok = false;    // rate >= h/2 - tolerance
    bool stable_clause_ok = false;  // stable-class tables strictly decreasing
    bool all_pass = false;
    std::string note;
};

struct TheoremAParams {
    EntropyParams entropy;
    DiagnosticParams diagnostic;
    int stable_samples = 10;
    int stable_depth = 10;
    double rate_tolerance = 0.05;
    double positivity_cutoff = 0.01;
};

TheoremAReport theorem_a_consistency(const FiberSystem& sys, const EnvPtr& env,
                                     const DisintegratedMeasure& dis,
                                     const std::vector<RandomScalar>& ladder,
                                     const TheoremAParams& params);

}  // namespace rexp

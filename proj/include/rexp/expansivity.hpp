#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rexp/measure.hpp"
#include "rexp/regions.hpp"

namespace rexp {

// Random Bowen balls, finite-depth Gamma-set approximations and the four
// expansivity diagnostics.

enum class Sided { Forward, TwoSided };

// Inclusive constraint index range: d(f_w^k(x), f_w^k(y)) <= delta(theta^k(w))
// for all lo <= k <= hi.
struct ConstraintRange {
    int64_t lo = 0;
    int64_t hi = 0;
};
inline ConstraintRange forward_range(int n) { return {0, n - 1}; }
inline ConstraintRange two_sided_range(int n) { return {-(n - 1), n - 1}; }

enum class Membership { In, Out, Boundary };

Membership bowen_membership_range(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                                  const FiberPoint& y, const RandomScalar& delta, ConstraintRange range);
Membership bowen_membership(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                            const FiberPoint& y, const RandomScalar& delta, int n, Sided sided);

struct GammaOptions {
    int buffer = 4;               // extra word coordinates beyond the horizon
    size_t cell_budget = 262144;  // enumerated-leaf cap
};

// Certified finite-depth approximation of a Bowen set: a cylinder union with
// boundary-undecided cells for symbolic fibers, a slop-padded segment union
// for circle/interval fibers. Always a superset of the true set at infinite
// refinement, and monotone under deepening.
struct GammaSetApprox {
    SpaceKind kind = SpaceKind::Circle;
    Sided sided = Sided::Forward;
    int depth = 1;
    ConstraintRange range;
    bool budget_exceeded = false;

    // symbolic representation
    int word_len = 0;
    std::vector<std::vector<int>> in_cells;
    std::vector<std::vector<int>> boundary_cells;

    // circle/interval representation
    RegionSet region;

    size_t cell_count() const { return in_cells.size() + boundary_cells.size(); }
};

GammaSetApprox bowen_set_approx(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                                const RandomScalar& delta, ConstraintRange range,
                                const GammaOptions& opts = {});
GammaSetApprox gamma_approx(const FiberSystem& sys, const BasePoint& w, const FiberPoint& x,
                            const RandomScalar& delta, int depth, Sided sided,
                            const GammaOptions& opts = {});

MassBracket gamma_mass(const FiberMeasure& mu, const GammaSetApprox& g);

// --- diagnostics -----------------------------------------------------------

enum class Verdict { EvidenceFor, Refuted, Inconclusive, NotApplicable };
std::string verdict_name(Verdict v);

struct SampleCurve {
    std::string w_id;
    std::string x_desc;
    std::vector<double> lower;  // indexed by depth-1
    std::vector<double> upper;
    std::vector<std::string> lower_exact;  // fraction strings; empty when inexact
    std::vector<std::string> upper_exact;
    std::vector<long long> cells;
    bool budget_exceeded = false;
    double mean_rate = 0.0;     // (log u_1 - log u_D)/(D-1)
    double lsq_slope = 0.0;     // of log(upper) against depth
    double lsq_residual = 0.0;  // rms residual / total fitted drop
    bool monotone = true;
};

struct ExpansivityReport {
    std::string notion;
    Sided sided = Sided::Forward;
    Verdict verdict = Verdict::Inconclusive;
    int depth = 0;
    double decay_rate = 0.0;  // aggregate mean of per-sample mean_rate
    double lsq_rate = 0.0;
    double refute_floor = 0.0;
    std::string witness;  // sample id for refutations
    double witness_mass = 0.0;
    std::vector<SampleCurve> samples;
    std::string note;
};

struct DiagnosticParams {
    int depth = 16;
    int base_samples = 20;
    int fiber_samples = 2;
    uint64_t seed = 1;
    double refute_floor = 1e-6;
    double min_rate = 0.05;  // average decay per step declaring geometric decay
    int persist_window = 5;  // depths a refuting lower bound must persist
    GammaOptions gamma;
};

enum class ExpansivityNotion { RandomExpansive, PositivelyRandomExpansive };

// Samples w from P and x from mu_w (plus fixed adversarial points) and
// brackets mu_w(Gamma^{(n)}) across depths.
ExpansivityReport expansive_diagnostic(const FiberSystem& sys, const EnvPtr& env,
                                       const DisintegratedMeasure& dis, const RandomScalar& delta,
                                       const DiagnosticParams& params,
                                       ExpansivityNotion notion = ExpansivityNotion::RandomExpansive);

// Cardinality-flavoured diagnostic: cell counts and reference-mass decay of
// the Gamma approximations under the natural uniform gauge.
ExpansivityReport countable_diagnostic(const FiberSystem& sys, const EnvPtr& env,
                                       const RandomScalar& delta, const DiagnosticParams& params);

// Smallest |n| <= max_n with diam(f_w^n(segment)) > delta(theta^n(w)); search
// order 0, 1, -1, 2, -2, ... (forward only on non-invertible systems).
std::optional<int64_t> continuum_wise_check(const FiberSystem& sys, const BasePoint& w,
                                            double segment_lo, double segment_len,
                                            const RandomScalar& delta, int max_n);

ExpansivityReport continuum_wise_diagnostic(const FiberSystem& sys, const EnvPtr& env,
                                            const RandomScalar& delta, const DiagnosticParams& params,
                                            double segment_length = 1e-3, int max_n = 200);

// Truncated w-stable-set masses: upper bounds of
// mu_w( intersect_{j<=k<=depth} f_w^{-k} B[f_w^k(p), gamma_i] ).
struct StableClassEntry {
    int gamma_index = 0;
    int start_j = 0;
    int depth = 0;
    double upper = 0.0;
};

std::vector<StableClassEntry> stable_class_mass(const FiberSystem& sys, const FiberMeasure& mu_w,
                                                const BasePoint& w, const FiberPoint& p,
                                                const std::vector<RandomScalar>& gammas, int max_j,
                                                int depth, const GammaOptions& opts = {});

// --- implication chain -------------------------------------------------------

struct ChainEntry {
    std::string name;
    FiberSystem sys;
    EnvPtr env;
    RandomScalar delta;
    std::vector<DisintegratedMeasure> nonatomic;  // test disintegrations
};

struct ChainSystemResult {
    std::string name;
    Verdict expansive = Verdict::Inconclusive;
    Verdict countable = Verdict::Inconclusive;
    Verdict continuum = Verdict::Inconclusive;
    std::vector<std::pair<std::string, Verdict>> per_measure;
    bool chain_ok = true;
    bool theorem_c_ok = true;
};

std::vector<ChainSystemResult> implication_chain_test(const std::vector<ChainEntry>& suite,
                                                      const DiagnosticParams& params);

}  // namespace rexp

#pragma once

#include <string>
#include <vector>

#include "rexp/expansivity.hpp"
#include "rexp/measure.hpp"

namespace rexp {

// Constructive side of the invariant-expansive-measure theorem: Gamma-set
// invariance under fiber pullback, pullback of disintegrations, and the
// Cesaro averages mu_{n,w} of backward pullbacks with their 2/n invariance
// defect envelope.

struct CesaroState {
    BasePoint w;
    int order = 0;
    // components[i] = (f_{w_{-1}} o ... o f_{w_{-i}})_* mu_{theta^{-i}(w)}
    std::vector<FiberMeasure> components;

    // (1/order) sum of components, with identical cylinder components merged.
    FiberMeasure averaged() const;
};

CesaroState cesaro_average(const FiberSystem& sys, const DisintegratedMeasure& dis,
                           const BasePoint& w, int order);
// Incremental step: extends order n to n+1 with one more pullback component.
void cesaro_extend(CesaroState& state, const FiberSystem& sys, const DisintegratedMeasure& dis);

double invariance_defect(const FiberSystem& sys, const BasePoint& w, const FiberMeasure& mu_w,
                         const FiberMeasure& mu_next, DistanceMode mode, int depth = 8);

struct PullbackIdentityResult {
    bool pass = false;
    double mismatch = 0.0;  // symmetric-difference size outside boundary cells
    std::string detail;
};

// Finite-depth form of the Gamma pullback identity: the preimage under
// f_{w_{-1}} of the depth-n Gamma set at (w, x) must coincide with the Bowen
// set at (w_{-1}, f_{w_{-1}}^{-1} x) over the index-shifted constraint range,
// up to boundary-undecided cells. Non-invertible shifts use the declared
// prepend-one preimage convention.
PullbackIdentityResult gamma_pullback_identity_check(const FiberSystem& sys, const BasePoint& w,
                                                     const FiberPoint& x, const RandomScalar& delta,
                                                     int depth, const GammaOptions& opts = {});

struct DefectRow {
    std::string w_id;
    int order = 0;
    int depth = 0;
    double defect = 0.0;
};

struct ConstructParams {
    int n_max = 256;
    int probe_depth = 8;
    int base_samples = 20;
    uint64_t seed = 1;
    DiagnosticParams diagnostic;
};

struct ConstructReport {
    std::vector<DefectRow> rows;
    bool envelope_ok = true;  // every defect <= 2/order
    bool hypothesis_met = false;
    Verdict input_verdict = Verdict::Inconclusive;
    Verdict final_verdict = Verdict::Inconclusive;
    double final_rate = 0.0;
    std::vector<int> orders;
    std::string note;
};

ConstructReport construct_invariant(const FiberSystem& sys, const EnvPtr& env,
                                    const DisintegratedMeasure& dis, const RandomScalar& delta,
                                    const ConstructParams& params);

}  // namespace rexp

#include "rexp/cesaro.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "rexp/rng.hpp"

namespace rexp {

namespace {

FiberMeasure nth_component(const FiberSystem& sys, const DisintegratedMeasure& dis,
                           const BasePoint& w, int i) {
    FiberMeasure m = dis.at(w.advanced(-i));
    for (int step = i; step >= 1; --step) m = pushforward_measure(sys, w.advanced(-step), m);
    return m;
}

double segments_overlap(const std::vector<Segment>& a, const std::vector<Segment>& b) {
    double acc = 0.0;
    for (const Segment& s : a)
        for (const Segment& t : b) {
            double lo = std::max(s.lo, t.lo);
            double hi = std::min(s.hi, t.hi);
            if (hi > lo) acc += hi - lo;
        }
    return acc;
}

double region_symmetric_difference(const RegionSet& a, const RegionSet& b) {
    double la = a.total_length();
    double lb = b.total_length();
    return la + lb - 2.0 * segments_overlap(a.segments(), b.segments());
}

}  // namespace

FiberMeasure CesaroState::averaged() const {
    if (order < 1) throw std::logic_error("CesaroState: empty state");
    std::vector<std::pair<Rational, FiberMeasure>> parts;
    parts.reserve(components.size());
    for (const FiberMeasure& m : components) parts.emplace_back(Rational(1, order), m);
    return FiberMeasure::mix_merged(std::move(parts));
}

CesaroState cesaro_average(const FiberSystem& sys, const DisintegratedMeasure& dis,
                           const BasePoint& w, int order) {
    if (order < 1) throw std::invalid_argument("cesaro_average: order must be >= 1");
    CesaroState state{w, 0, {}};
    state.components.reserve(order);
    for (int i = 0; i < order; ++i) state.components.push_back(nth_component(sys, dis, w, i));
    state.order = order;
    return state;
}

void cesaro_extend(CesaroState& state, const FiberSystem& sys, const DisintegratedMeasure& dis) {
    state.components.push_back(nth_component(sys, dis, state.w, state.order));
    ++state.order;
}

double invariance_defect(const FiberSystem& sys, const BasePoint& w, const FiberMeasure& mu_w,
                         const FiberMeasure& mu_next, DistanceMode mode, int depth) {
    return measure_distance(pushforward_measure(sys, w, mu_w), mu_next, mode, depth);
}

PullbackIdentityResult gamma_pullback_identity_check(const FiberSystem& sys, const BasePoint& w,
                                                     const FiberPoint& x, const RandomScalar& delta,
                                                     int depth, const GammaOptions& opts) {
    if (depth < 1) throw std::invalid_argument("gamma_pullback_identity_check: depth must be >= 1");
    BasePoint w_prev = w.advanced(-1);
    PullbackIdentityResult res;

    if (sys.space.kind == SpaceKind::Symbolic) {
        if (sys.kind != GeneratorKind::Shift)
            throw std::invalid_argument("gamma_pullback_identity_check: symbolic system must be a shift");
        // Declared preimage convention for the non-invertible shift: prepend
        // symbol 1; the preimage of a cell union is the union over all first
        // symbols.
        GammaSetApprox fwd = gamma_approx(sys, w, x, delta, depth, Sided::Forward, opts);
        long long k_prev = sys.alphabet_at(w_prev);
        auto prepend_all = [&](const std::vector<std::vector<int>>& cells) {
            std::set<std::vector<int>> out;
            for (const auto& cell : cells) {
                for (int s = 1; s <= k_prev; ++s) {
                    std::vector<int> c;
                    c.reserve(cell.size() + 1);
                    c.push_back(s);
                    c.insert(c.end(), cell.begin(), cell.end());
                    out.insert(std::move(c));
                }
            }
            return out;
        };
        std::set<std::vector<int>> lhs_in = prepend_all(fwd.in_cells);
        std::set<std::vector<int>> lhs_bnd = prepend_all(fwd.boundary_cells);

        FiberPoint x_prev = x.with_prepended(1);
        GammaSetApprox rhs = bowen_set_approx(sys, w_prev, x_prev, delta,
                                              {1, static_cast<int64_t>(depth)}, opts);
        std::set<std::vector<int>> rhs_in(rhs.in_cells.begin(), rhs.in_cells.end());
        std::set<std::vector<int>> rhs_bnd(rhs.boundary_cells.begin(), rhs.boundary_cells.end());

        size_t violations = 0;
        for (const auto& c : lhs_in)
            if (!rhs_in.count(c) && !rhs_bnd.count(c)) ++violations;
        for (const auto& c : rhs_in)
            if (!lhs_in.count(c) && !lhs_bnd.count(c)) ++violations;
        res.mismatch = static_cast<double>(violations);
        res.pass = violations == 0 && !fwd.budget_exceeded && !rhs.budget_exceeded;
        res.detail = "cells lhs=" + std::to_string(lhs_in.size()) +
                     " rhs=" + std::to_string(rhs_in.size()) +
                     " violations=" + std::to_string(violations);
        return res;
    }

    if (!sys.invertible)
        throw std::invalid_argument(
            "gamma_pullback_identity_check: needs an invertible system or a shift");

    GammaSetApprox gam = gamma_approx(sys, w, x, delta, depth, Sided::TwoSided, opts);
    RegionSet lhs = gam.region.preimage(sys.map_at(w_prev));
    FiberPoint x_prev = cocycle_apply(sys, w, x, -1);
    GammaSetApprox rhs = bowen_set_approx(sys, w_prev, x_prev, delta,
                                          {-(static_cast<int64_t>(depth)) + 2,
                                           static_cast<int64_t>(depth)},
                                          opts);
    res.mismatch = region_symmetric_difference(lhs, rhs.region);
    double tol = 4.0 * (lhs.slop() + rhs.region.slop()) *
                     static_cast<double>(lhs.count() + rhs.region.count()) +
                 1e-9;
    res.pass = res.mismatch <= tol;
    res.detail = "lhs segments=" + std::to_string(lhs.count()) +
                 " rhs segments=" + std::to_string(rhs.region.count());
    return res;
}

ConstructReport construct_invariant(const FiberSystem& sys, const EnvPtr& env,
                                    const DisintegratedMeasure& dis, const RandomScalar& delta,
                                    const ConstructParams& params) {
    ConstructReport rep;
    ExpansivityReport input = expansive_diagnostic(sys, env, dis, delta, params.diagnostic);
    rep.input_verdict = input.verdict;
    rep.hypothesis_met = input.verdict == Verdict::EvidenceFor;
    if (!rep.hypothesis_met)
        rep.note = "input disintegration did not show expansive evidence; hypothesis unmet";

    for (int n = 1; n <= params.n_max; n *= 2) rep.orders.push_back(n);
    if (rep.orders.back() != params.n_max) rep.orders.push_back(params.n_max);

    DistanceMode mode =
        sys.space.kind == SpaceKind::Symbolic ? DistanceMode::TvCylinder : DistanceMode::TvGrid;

    auto bases = sample_base(env, params.base_samples, hash_u64(params.seed, 0xce5a));
    for (const BasePoint& w : bases) {
        CesaroState at_w = cesaro_average(sys, dis, w, 1);
        CesaroState at_next = cesaro_average(sys, dis, w.advanced(1), 1);
        for (int order : rep.orders) {
            while (at_w.order < order) cesaro_extend(at_w, sys, dis);
            while (at_next.order < order) cesaro_extend(at_next, sys, dis);
            double defect =
                invariance_defect(sys, w, at_w.averaged(), at_next.averaged(), mode, params.probe_depth);
            rep.rows.push_back({w.id(), order, params.probe_depth, defect});
            if (defect > 2.0 / order + 1e-9) rep.envelope_ok = false;
        }
    }

    DisintegratedMeasure averaged;
    averaged.name = dis.name + "-cesaro" + std::to_string(params.n_max);
    int n_max = params.n_max;
    auto rule = dis.rule;
    averaged.rule = [sys, rule, n_max](const BasePoint& w) {
        DisintegratedMeasure inner{"", rule};
        return cesaro_average(sys, inner, w, n_max).averaged();
    };
    ExpansivityReport final_rep = expansive_diagnostic(sys, env, averaged, delta, params.diagnostic);
    rep.final_verdict = final_rep.verdict;
    rep.final_rate = final_rep.decay_rate;
    return rep;
}

}  // namespace rexp

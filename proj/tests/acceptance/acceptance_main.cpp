// Acceptance suite: one check per criterion, one pass/fail line each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rexp/cesaro.hpp"
#include "rexp/entropy.hpp"
#include "rexp/expansivity.hpp"
#include "rexp/rng.hpp"
#include "rexp/scenario.hpp"

using namespace rexp;

namespace {

int failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& body) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d [%s] %-34s (%.2fs)%s%s\n", number, ok ? "PASS" : "FAIL",
                label.c_str(), secs, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

RandomScalar bound23() { return RandomScalar::symbol_table({Rational(2), Rational(3)}); }
RandomScalar delta_k2() { return RandomScalar::symbol_table({Rational(1, 4), Rational(1, 9)}); }
const double kLog23 = (std::log(2.0) + std::log(3.0)) / 2.0;

double lsq_slope(const std::vector<double>& y) {
    size_t n = y.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        double xi = double(i + 1);
        sx += xi;
        sy += y[i];
        sxx += xi * xi;
        sxy += xi * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

int main() {
    // 1. Exact cylinder masses on the constant-alphabet shift.
    criterion(1, "exact depth-10 cylinder masses", [](std::string& detail) {
        auto env = BaseEnvironment::singleton();
        BasePoint w(env, 0);
        FiberMeasure mu{CylinderProduct(w, RandomScalar::constant(Rational(2)),
                                        CylinderRule::Uniform)};
        auto masses = depth_masses(mu, 10);
        if (masses.size() != 1024) {
            detail = "expected 1024 cylinders";
            return false;
        }
        Rational total = 0;
        for (const auto& m : masses) {
            if (m != Rational(1, 1024)) {
                detail = "mass " + fraction_string(m) + " != 1/1024";
                return false;
            }
            total += m;
        }
        if (total != 1) {
            detail = "masses sum to " + fraction_string(total);
            return false;
        }
        detail = "1024 cylinders, each exactly 1/1024, total exactly 1";
        return true;
    });

    // 2. Random-shift expansivity at delta = k^{-2}.
    criterion(2, "random-shift gamma decay", [](std::string& detail) {
        auto env = BaseEnvironment::bernoulli({0.5, 0.5});
        FiberSystem sys = FiberSystem::shift(bound23());
        DisintegratedMeasure dis = uniform_cylinder_disintegration(sys.space);
        RandomScalar delta = delta_k2();
        const int depth = 16;
        auto bases = sample_base(env, 50, 20250809);
        double rate_acc = 0;
        int pairs = 0;
        double worst_final = 0;
        for (size_t wi = 0; wi < bases.size(); ++wi) {
            const BasePoint& w = bases[wi];
            FiberMeasure mu = dis.at(w);
            for (const FiberPoint& x : sample_fiber(mu, 2, hash_u64(77, wi), depth + 12)) {
                std::vector<double> neg_log;
                double final_upper = 1;
                for (int n = 1; n <= depth; ++n) {
                    MassBracket b =
                        gamma_mass(mu, gamma_approx(sys, w, x, delta, n, Sided::Forward));
                    final_upper = b.upper;
                    neg_log.push_back(-std::log(std::max(b.upper, 1e-300)));
                }
                if (final_upper > std::ldexp(1.0, -12)) {
                    detail = "upper bound at depth 16 above 2^-12";
                    return false;
                }
                worst_final = std::max(worst_final, final_upper);
                rate_acc += lsq_slope(neg_log);
                ++pairs;
            }
        }
        double rate = rate_acc / pairs;
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "%d pairs, max upper(16) = %.2e <= 2^-12, rate %.4f vs log-mean %.4f", pairs,
                      worst_final, rate, kLog23);
        detail = buf;
        return pairs == 100 && std::abs(rate - kLog23) / kLog23 <= 0.10;
    });

    // 3. Rotations with Lebesgue fibers: refuted with the analytic ball mass.
    criterion(3, "isometry negative control", [](std::string& detail) {
        ScenarioConfig config = config_from_json(builtin_config("example2_isometry"));
        ResolvedScenario rs = resolve_scenario(config);
        DiagnosticParams params;
        params.depth = 50;
        params.base_samples = 20;
        params.fiber_samples = 2;
        params.seed = 4242;
        ExpansivityReport rep = expansive_diagnostic(rs.sys, rs.env, rs.dis, rs.delta, params);
        if (rep.verdict != Verdict::Refuted) {
            detail = "expected refuted, got " + verdict_name(rep.verdict);
            return false;
        }
        for (const SampleCurve& c : rep.samples) {
            for (int n = 0; n < 50; ++n) {
                if (c.lower[n] < 0.09 || c.upper[n] > 0.11) {
                    detail = "mass outside [0.09, 0.11] at depth " + std::to_string(n + 1);
                    return false;
                }
            }
        }
        char buf[120];
        std::snprintf(buf, sizeof buf, "refuted, every witness mass in [0.09,0.11], final %.4f",
                      rep.witness_mass);
        detail = buf;
        return true;
    });

    // 4. Brin-Katok estimate against the integral oracle.
    criterion(4, "expanding-circle fiber entropy", [](std::string& detail) {
        ScenarioConfig config = config_from_json(builtin_config("example3_expanding"));
        ResolvedScenario rs = resolve_scenario(config);
        EntropyParams params;
        params.n_max = 14;
        params.samples = 500;
        params.seed = 1001;
        EntropyEstimate est = brin_katok_estimate(rs.sys, rs.env, rs.dis, rs.ladder, params);
        auto oracle = analytic_entropy_oracle(rs.sys, *rs.env);
        if (!oracle) {
            detail = "oracle unavailable";
            return false;
        }
        double err = std::abs(est.estimate - *oracle) / *oracle;
        char buf[160];
        std::snprintf(buf, sizeof buf, "estimate %.5f vs oracle %.5f (%.2f%%), delta %.5f",
                      est.estimate, *oracle, err * 100, est.delta_used);
        detail = buf;
        return err <= 0.05;
    });

    // 5. Theorem A consistency on the expanding suite.
    criterion(5, "entropy implies positive expansivity", [](std::string& detail) {
        ScenarioConfig config = config_from_json(builtin_config("example3_expanding"));
        ResolvedScenario rs = resolve_scenario(config);
        TheoremAParams params;
        params.entropy.n_max = 14;
        params.entropy.samples = 100;
        params.entropy.seed = 1101;
        params.diagnostic.depth = 16;
        params.diagnostic.base_samples = 50;
        params.diagnostic.fiber_samples = 2;
        params.diagnostic.seed = 1102;
        params.stable_samples = 50;
        params.stable_depth = 10;
        TheoremAReport rep = theorem_a_consistency(rs.sys, rs.env, rs.dis, rs.ladder, params);
        char buf[160];
        std::snprintf(buf, sizeof buf, "h=%.4f, rate %.4f >= h/2-0.05, stable tables decreasing: %s",
                      rep.entropy_estimate, rep.expansive_rate, rep.stable_clause_ok ? "yes" : "no");
        detail = buf;
        return rep.all_pass;
    });

    // 6. Gamma pullback identity on the invertible interval system.
    criterion(6, "gamma pullback identity", [](std::string& detail) {
        auto env = BaseEnvironment::bernoulli({0.5, 0.5});
        FiberSystem pl = FiberSystem::mixed(
            FiberSpace::interval(),
            {{0, MapSpec::piecewise_linear({{0, 0}, {0.25, 0.5}, {0.5, 0.75}, {1, 1}})},
             {1, MapSpec::piecewise_linear({{0, 0}, {0.5, 0.25}, {0.75, 0.5}, {1, 1}})}});
        RandomScalar delta = RandomScalar::symbol_table({Rational(1, 10), Rational(1, 20)});
        auto bases = sample_base(env, 50, 606);
        double worst = 0;
        for (size_t wi = 0; wi < bases.size(); ++wi) {
            FiberPoint x = FiberPoint::interval(uniform01(hash_u64(607, wi)));
            PullbackIdentityResult r = gamma_pullback_identity_check(pl, bases[wi], x, delta, 6);
            worst = std::max(worst, r.mismatch);
            if (!r.pass || r.mismatch > 1e-12) {
                detail = "mismatch " + std::to_string(r.mismatch) + " at sample " +
                         std::to_string(wi);
                return false;
            }
        }
        char buf[120];
        std::snprintf(buf, sizeof buf, "50 samples, exact cell-union equality (worst %.1e)", worst);
        detail = buf;
        return true;
    });

    // 7. Invariant construction by Cesaro pullback averaging.
    criterion(7, "cesaro construction envelope", [](std::string& detail) {
        auto env = BaseEnvironment::bernoulli({0.5, 0.5});
        FiberSystem sys = FiberSystem::shift(bound23());
        DisintegratedMeasure dis = skew_cylinder_disintegration(sys.space, CylinderRule::SkewFirst);
        ConstructParams params;
        params.n_max = 256;
        params.probe_depth = 8;
        params.base_samples = 20;
        params.seed = 707;
        params.diagnostic.depth = 14;
        params.diagnostic.base_samples = 20;
        params.diagnostic.fiber_samples = 2;
        params.diagnostic.seed = 708;
        ConstructReport rep = construct_invariant(sys, env, dis, delta_k2(), params);
        double worst_ratio = 0;
        for (const DefectRow& row : rep.rows)
            worst_ratio = std::max(worst_ratio, row.defect * row.order / 2.0);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "defect <= 2/n at every order (worst ratio %.3f), order-256 verdict %s",
                      worst_ratio, verdict_name(rep.final_verdict).c_str());
        detail = buf;
        return rep.envelope_ok && rep.hypothesis_met && rep.final_verdict == Verdict::EvidenceFor;
    });

    // 8. Continuum-wise escape on the rotation/doubling mix.
    criterion(8, "continuum-wise escape times", [](std::string& detail) {
        ScenarioConfig config = config_from_json(builtin_config("example4_continuum_mix"));
        ResolvedScenario rs = resolve_scenario(config);
        auto bases = sample_base(rs.env, 100, 808);
        for (size_t wi = 0; wi < bases.size(); ++wi) {
            double lo = uniform01(hash_u64(809, wi));
            auto n = continuum_wise_check(rs.sys, bases[wi], lo, 1e-3, rs.delta, 200);
            if (!n) {
                detail = "segment failed to escape within 200 steps";
                return false;
            }
        }
        // all-ones symbol path: the doubling entry applies at every step
        auto ones = BaseEnvironment::bernoulli({1e-15, 1.0 - 1e-15});
        BasePoint w_ones(ones, 99);
        for (int k = 0; k <= 20; ++k) {
            if (w_ones.symbol(k) != 1) {
                detail = "all-ones base path not realized";
                return false;
            }
        }
        auto n_ones = continuum_wise_check(rs.sys, w_ones, 0.25, 1e-3, rs.delta, 200);
        char buf[120];
        std::snprintf(buf, sizeof buf, "100 segments escape; all-ones escape time %lld",
                      n_ones ? static_cast<long long>(*n_ones) : -1);
        detail = buf;
        return n_ones && *n_ones == 7;
    });

    // 9. Implication chain and the countable/measure-expansive equivalence.
    criterion(9, "implication chain over built-ins", [](std::string& detail) {
        DiagnosticParams params;
        params.depth = 30;
        params.base_samples = 10;
        params.fiber_samples = 2;
        params.seed = 909;
        auto results = implication_chain_test(builtin_chain_suite(), params);
        std::string pattern;
        for (const ChainSystemResult& r : results) {
            if (!r.chain_ok) {
                detail = r.name + " violates the implication chain";
                return false;
            }
            if (!r.theorem_c_ok) {
                detail = r.name + " violates countable => measure-expansive";
                return false;
            }
            pattern += r.name.substr(0, 8) + "=" + verdict_name(r.expansive).substr(0, 3) + "/" +
                       verdict_name(r.countable).substr(0, 3) + "/" +
                       verdict_name(r.continuum).substr(0, 3) + " ";
        }
        // golden verdicts from the built-in registry
        for (const ChainSystemResult& r : results) {
            Json expected = builtin_config(r.name).at("expected");
            if (verdict_name(r.expansive) != expected.at("expansive").get<std::string>() ||
                verdict_name(r.countable) != expected.at("countable").get<std::string>() ||
                verdict_name(r.continuum) != expected.at("continuum_wise").get<std::string>()) {
                detail = r.name + " deviates from its golden verdicts";
                return false;
            }
        }
        detail = pattern;
        return true;
    });

    // 10. Singleton drive reproduces the deterministic doubling-map verdicts.
    criterion(10, "deterministic reduction", [](std::string& detail) {
        auto single = BaseEnvironment::singleton();
        auto one_symbol = BaseEnvironment::bernoulli({1.0 - 1e-15, 1e-15});
        FiberSystem sys = FiberSystem::expanding_circle(RandomScalar::constant(Rational(2)));
        DisintegratedMeasure leb = lebesgue_disintegration(SpaceKind::Circle);
        DiagnosticParams params;
        params.depth = 16;
        params.base_samples = 10;
        params.fiber_samples = 2;
        params.seed = 1010;
        ExpansivityReport a = expansive_diagnostic(sys, single, leb,
                                                   RandomScalar::constant(Rational(1, 20)), params,
                                                   ExpansivityNotion::PositivelyRandomExpansive);
        ExpansivityReport b = expansive_diagnostic(sys, one_symbol, leb,
                                                   RandomScalar::constant(Rational(1, 20)), params,
                                                   ExpansivityNotion::PositivelyRandomExpansive);
        if (a.verdict != Verdict::EvidenceFor || b.verdict != a.verdict) {
            detail = "verdicts differ between singleton and one-symbol drives";
            return false;
        }
        if (std::abs(a.decay_rate - b.decay_rate) > 1e-9) {
            detail = "decay rates differ between equivalent drives";
            return false;
        }
        EntropyParams ep;
        ep.n_max = 14;
        ep.samples = 100;
        ep.seed = 1011;
        EntropyEstimate est =
            brin_katok_estimate(sys, single, leb, default_delta_ladder(sys.space), ep);
        double err = std::abs(est.estimate - std::log(2.0)) / std::log(2.0);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "evidence-for with rate %.4f (= log 2 per step), entropy %.5f vs log2 (%.2f%%)",
                      a.decay_rate, est.estimate, err * 100);
        detail = buf;
        return err <= 0.05;
    });

    std::printf("%d/%d criteria passed\n", 10 - failures, 10);
    return failures == 0 ? 0 : 1;
}

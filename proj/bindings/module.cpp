#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "rexp/cesaro.hpp"
#include "rexp/entropy.hpp"
#include "rexp/expansivity.hpp"
#include "rexp/rng.hpp"
#include "rexp/scenario.hpp"

namespace py = pybind11;
using namespace rexp;

namespace {

// A resolved scenario plus the direct operations on it. Reports come back as
// JSON strings; callers json.loads them.
class Scenario {
public:
    explicit Scenario(const std::string& name_path_or_text)
        : config_(load_config(name_path_or_text)), rs_(resolve_scenario(config_)) {}

    std::string name() const { return config_.name; }
    std::string config_json() const { return config_.doc.dump(); }

    std::string run(std::optional<uint64_t> seed) const {
        return run_scenario(config_, seed).dump();
    }

    std::vector<int> base_symbols(uint64_t seed, int64_t offset, int64_t lo, int64_t hi) const {
        BasePoint w(rs_.env, seed, offset);
        std::vector<int> out;
        for (int64_t k = lo; k <= hi; ++k) out.push_back(w.symbol(k));
        return out;
    }

    double eval_delta(uint64_t seed, int64_t offset) const {
        return rs_.delta.eval(BasePoint(rs_.env, seed, offset));
    }

    double cocycle_coord(uint64_t seed, double x, int64_t n) const {
        BasePoint w(rs_.env, seed);
        return cocycle_apply(rs_.sys, w, FiberPoint::real(rs_.sys.space.kind, x), n).coord();
    }

    std::vector<int> cocycle_word(uint64_t seed, const std::vector<int>& word, int64_t n,
                                  int out_len) const {
        BasePoint w(rs_.env, seed);
        FiberPoint y = cocycle_apply(rs_.sys, w, FiberPoint::symbolic(word), n);
        std::vector<int> out;
        for (int i = 0; i < out_len; ++i) out.push_back(y.sym(i));
        return out;
    }

    std::string cylinder_mass_fraction(uint64_t seed, const std::vector<int>& word) const {
        BasePoint w(rs_.env, seed);
        return fraction_string(cylinder_mass(rs_.dis.at(w), CylinderSet{w, word}));
    }

    std::pair<double, double> gamma_mass_bracket(uint64_t seed, py::object x, int depth,
                                                 bool two_sided) const {
        BasePoint w(rs_.env, seed);
        FiberPoint pt = to_point(x);
        GammaSetApprox g = gamma_approx(rs_.sys, w, pt, rs_.delta, depth,
                                        two_sided ? Sided::TwoSided : Sided::Forward);
        MassBracket b = gamma_mass(rs_.dis.at(w), g);
        return {b.lower, b.upper};
    }

    std::string expansive(int depth, int base_samples, int fiber_samples, uint64_t seed,
                          bool positively) const {
        DiagnosticParams params;
        params.depth = depth;
        params.base_samples = base_samples;
        params.fiber_samples = fiber_samples;
        params.seed = seed;
        ExpansivityReport rep = expansive_diagnostic(
            rs_.sys, rs_.env, rs_.dis, rs_.delta, params,
            positively ? ExpansivityNotion::PositivelyRandomExpansive
                       : ExpansivityNotion::RandomExpansive);
        return expansivity_report_to_json(rep).dump();
    }

    std::string countable(int depth, int base_samples, int fiber_samples, uint64_t seed) const {
        DiagnosticParams params;
        params.depth = depth;
        params.base_samples = base_samples;
        params.fiber_samples = fiber_samples;
        params.seed = seed;
        return expansivity_report_to_json(countable_diagnostic(rs_.sys, rs_.env, rs_.delta, params))
            .dump();
    }

    std::optional<int64_t> continuum_escape(uint64_t seed, double segment_lo, double segment_len,
                                            int max_n) const {
        BasePoint w(rs_.env, seed);
        return continuum_wise_check(rs_.sys, w, segment_lo, segment_len, rs_.delta, max_n);
    }

    std::string entropy(int n_max, int samples, uint64_t seed) const {
        EntropyParams params;
        params.n_max = n_max;
        params.samples = samples;
        params.seed = seed;
        Json j = entropy_estimate_to_json(
            brin_katok_estimate(rs_.sys, rs_.env, rs_.dis, rs_.ladder, params));
        auto oracle = analytic_entropy_oracle(rs_.sys, *rs_.env);
        if (oracle) j["analytic_oracle"] = *oracle;
        return j.dump();
    }

    std::string construct(int n_max, int probe_depth, int base_samples, uint64_t seed) const {
        ConstructParams params;
        params.n_max = n_max;
        params.probe_depth = probe_depth;
        params.base_samples = base_samples;
        params.seed = seed;
        params.diagnostic.seed = hash_u64(seed, 2);
        return construct_report_to_json(
                   construct_invariant(rs_.sys, rs_.env, rs_.dis, rs_.delta, params))
            .dump();
    }

    std::string pullback_identity(uint64_t seed, py::object x, int depth) const {
        BasePoint w(rs_.env, seed);
        PullbackIdentityResult r =
            gamma_pullback_identity_check(rs_.sys, w, to_point(x), rs_.delta, depth);
        return Json{{"pass", r.pass}, {"mismatch", r.mismatch}, {"detail", r.detail}}.dump();
    }

private:
    FiberPoint to_point(const py::object& x) const {
        if (py::isinstance<py::float_>(x) || py::isinstance<py::int_>(x))
            return FiberPoint::real(rs_.sys.space.kind, x.cast<double>());
        return FiberPoint::symbolic(x.cast<std::vector<int>>());
    }

    ScenarioConfig config_;
    ResolvedScenario rs_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "random dynamical systems: expansivity diagnostics, fiber entropy, invariant "
              "measure construction";

    m.def("list_builtins", &builtin_names, "names of the built-in example scenarios");
    m.def(
        "builtin_config", [](const std::string& name) { return builtin_config(name).dump(); },
        py::arg("name"), "JSON text of a built-in scenario config");
    m.def(
        "validate_config",
        [](const std::string& text) {
            Json doc = Json::parse(text, nullptr, false);
            if (doc.is_discarded()) return std::vector<std::string>{"config: not valid JSON"};
            return validate_config(doc).errors;
        },
        py::arg("text"), "returns the list of validation errors (empty when valid)");
    m.def(
        "run_scenario",
        [](const std::string& name_path_or_text, std::optional<uint64_t> seed) {
            return run_scenario(load_config(name_path_or_text), seed).dump();
        },
        py::arg("scenario"), py::arg("seed") = std::nullopt,
        "run a scenario (built-in name, file path, or inline JSON); returns the report JSON");

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<const std::string&>(), py::arg("scenario"))
        .def_property_readonly("name", &Scenario::name)
        .def("config_json", &Scenario::config_json)
        .def("run", &Scenario::run, py::arg("seed") = std::nullopt)
        .def("base_symbols", &Scenario::base_symbols, py::arg("seed"), py::arg("offset"),
             py::arg("lo"), py::arg("hi"))
        .def("eval_delta", &Scenario::eval_delta, py::arg("seed"), py::arg("offset") = 0)
        .def("cocycle_coord", &Scenario::cocycle_coord, py::arg("seed"), py::arg("x"), py::arg("n"))
        .def("cocycle_word", &Scenario::cocycle_word, py::arg("seed"), py::arg("word"), py::arg("n"),
             py::arg("out_len") = 8)
        .def("cylinder_mass", &Scenario::cylinder_mass_fraction, py::arg("seed"), py::arg("word"))
        .def("gamma_mass_bracket", &Scenario::gamma_mass_bracket, py::arg("seed"), py::arg("x"),
             py::arg("depth"), py::arg("two_sided") = false)
        .def("expansive", &Scenario::expansive, py::arg("depth") = 16, py::arg("base_samples") = 20,
             py::arg("fiber_samples") = 2, py::arg("seed") = 1, py::arg("positively") = false)
        .def("countable", &Scenario::countable, py::arg("depth") = 16, py::arg("base_samples") = 20,
             py::arg("fiber_samples") = 2, py::arg("seed") = 1)
        .def("continuum_escape", &Scenario::continuum_escape, py::arg("seed"),
             py::arg("segment_lo") = 0.25, py::arg("segment_len") = 1e-3, py::arg("max_n") = 200)
        .def("entropy", &Scenario::entropy, py::arg("n_max") = 14, py::arg("samples") = 100,
             py::arg("seed") = 1)
        .def("construct_invariant", &Scenario::construct, py::arg("n_max") = 64,
             py::arg("probe_depth") = 8, py::arg("base_samples") = 10, py::arg("seed") = 1)
        .def("pullback_identity", &Scenario::pullback_identity, py::arg("seed"), py::arg("x"),
             py::arg("depth") = 6);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}

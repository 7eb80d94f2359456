#include "rexp/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rexp/rng.hpp"

namespace rexp {

namespace {

constexpr double kGoldenAngle = 0.6180339887498949;   // frac((sqrt(5)-1)/2)
constexpr double kSilverAngle = 0.41421356237309515;  // sqrt(2)-1

// --- small json helpers -------------------------------------------------------

void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed,
                std::vector<std::string>& errors) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) errors.push_back(path + ": unknown key '" + it.key() + "'");
    }
}

Rational rational_from_json(const Json& v) {
    if (v.is_string()) return parse_fraction(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number()) return rational_from_double(v.get<double>());
    throw std::invalid_argument("expected a number or fraction string");
}

double double_from_json(const Json& v) { return to_double(rational_from_json(v)); }

}  // namespace

// --- scalars -------------------------------------------------------------------

RandomScalar scalar_from_json(const Json& spec) {
    if (!spec.is_object()) throw std::invalid_argument("scalar: expected an object");
    std::string form = spec.value("form", "");
    if (form == "constant") {
        return RandomScalar::constant(rational_from_json(spec.at("value")));
    }
    if (form == "symbol_table") {
        std::vector<Rational> table;
        for (const auto& v : spec.at("table")) table.push_back(rational_from_json(v));
        return RandomScalar::symbol_table(std::move(table));
    }
    if (form == "window_function") {
        int radius = spec.at("radius").get<int>();
        std::map<std::vector<int>, Rational> table;
        for (auto it = spec.at("table").begin(); it != spec.at("table").end(); ++it) {
            std::vector<int> key;
            std::stringstream ss(it.key());
            std::string tok;
            while (std::getline(ss, tok, ',')) key.push_back(std::stoi(tok));
            table[key] = rational_from_json(it.value());
        }
        return RandomScalar::window_function(radius, std::move(table));
    }
    throw std::invalid_argument("scalar: unknown form '" + form + "'");
}

Json scalar_to_json(const RandomScalar& s) {
    Json j;
    switch (s.form()) {
        case RandomScalar::Form::Constant:
            j["form"] = "constant";
            j["value"] = fraction_string(s.constant_value() * s.scale());
            break;
        case RandomScalar::Form::SymbolTable: {
            j["form"] = "symbol_table";
            Json t = Json::array();
            for (const auto& v : s.table()) t.push_back(fraction_string(v * s.scale()));
            j["table"] = t;
            break;
        }
        case RandomScalar::Form::WindowFunction: {
            j["form"] = "window_function";
            j["radius"] = s.radius();
            Json t = Json::object();
            for (const auto& [key, v] : s.window_table()) {
                std::string k;
                for (size_t i = 0; i < key.size(); ++i) k += (i ? "," : "") + std::to_string(key[i]);
                t[k] = fraction_string(v * s.scale());
            }
            j["table"] = t;
            break;
        }
    }
    return j;
}

// --- section builders ------------------------------------------------------------

namespace {

EnvPtr env_from_json(const Json& spec) {
    std::string kind = spec.value("kind", "");
    std::string desc = spec.value("description", kind);
    if (kind == "singleton") return BaseEnvironment::singleton(desc);
    if (kind == "finite_rotation") return BaseEnvironment::finite_rotation(spec.at("period").get<int>(), desc);
    if (kind == "bernoulli") {
        std::vector<double> weights;
        for (const auto& v : spec.at("weights")) weights.push_back(double_from_json(v));
        return BaseEnvironment::bernoulli(std::move(weights), desc);
    }
    if (kind == "markov") {
        std::vector<std::vector<double>> matrix;
        for (const auto& row : spec.at("transition")) {
            std::vector<double> r;
            for (const auto& v : row) r.push_back(double_from_json(v));
            matrix.push_back(std::move(r));
        }
        std::vector<double> stat;
        for (const auto& v : spec.at("stationary")) stat.push_back(double_from_json(v));
        return BaseEnvironment::markov(std::move(matrix), std::move(stat), desc);
    }
    throw std::invalid_argument("environment: unknown kind '" + kind + "'");
}

FiberSpace space_from_json(const Json& spec) {
    std::string kind = spec.value("kind", "");
    if (kind == "symbolic") return FiberSpace::symbolic(scalar_from_json(spec.at("alphabet_bound")));
    if (kind == "circle") return FiberSpace::circle();
    if (kind == "interval") return FiberSpace::interval();
    throw std::invalid_argument("fiber_space: unknown kind '" + kind + "'");
}

MapSpec map_from_json(const Json& spec) {
    std::string kind = spec.value("kind", "");
    if (kind == "rotation") return MapSpec::rotation(double_from_json(spec.at("angle")));
    if (kind == "expanding") return MapSpec::expanding(spec.at("degree").get<long long>());
    if (kind == "pl") {
        std::vector<std::pair<double, double>> verts;
        for (const auto& v : spec.at("vertices"))
            verts.emplace_back(double_from_json(v.at(0)), double_from_json(v.at(1)));
        return MapSpec::piecewise_linear(std::move(verts));
    }
    throw std::invalid_argument("map: unknown kind '" + kind + "'");
}

FiberSystem system_from_json(const Json& spec, const FiberSpace& space) {
    std::string gen = spec.value("generator", "");
    FiberSystem sys;
    if (gen == "shift") {
        if (space.kind != SpaceKind::Symbolic)
            throw std::invalid_argument("system: shift needs a symbolic fiber space");
        sys = FiberSystem::shift(space.alphabet_bound);
    } else if (gen == "expanding_circle") {
        if (space.kind != SpaceKind::Circle)
            throw std::invalid_argument("system: expanding_circle needs a circle space");
        sys = FiberSystem::expanding_circle(scalar_from_json(spec.at("degree")));
    } else if (gen == "rotation") {
        if (space.kind != SpaceKind::Circle)
            throw std::invalid_argument("system: rotation needs a circle space");
        sys = FiberSystem::rotation_circle(scalar_from_json(spec.at("angle")));
    } else if (gen == "mixed") {
        std::map<int, MapSpec> table;
        for (auto it = spec.at("maps").begin(); it != spec.at("maps").end(); ++it)
            table[std::stoi(it.key())] = map_from_json(it.value());
        sys = FiberSystem::mixed(space, std::move(table));
    } else {
        throw std::invalid_argument("system: unknown generator '" + gen + "'");
    }
    if (spec.contains("invertible") && spec.at("invertible").is_boolean()) {
        bool want = spec.at("invertible").get<bool>();
        if (want && !sys.invertible)
            throw std::invalid_argument("system: cannot declare a non-invertible generator invertible");
        sys.invertible = want;
    }
    return sys;
}

DisintegratedMeasure dis_from_json(const Json& spec, const FiberSpace& space) {
    std::string rule = spec.value("rule", "");
    if (rule == "uniform_cylinder") return uniform_cylinder_disintegration(space);
    if (rule == "skew_first_cylinder" || rule == "skew_iid_cylinder") {
        std::map<int, std::vector<Rational>> overrides;
        if (spec.contains("skew")) {
            for (auto it = spec.at("skew").begin(); it != spec.at("skew").end(); ++it) {
                std::vector<Rational> vec;
                for (const auto& v : it.value()) vec.push_back(rational_from_json(v));
                overrides[std::stoi(it.key())] = std::move(vec);
            }
        }
        CylinderRule cr = rule == "skew_first_cylinder" ? CylinderRule::SkewFirst : CylinderRule::SkewIID;
        return skew_cylinder_disintegration(space, cr, std::move(overrides));
    }
    if (rule == "lebesgue") {
        if (space.kind == SpaceKind::Symbolic)
            throw std::invalid_argument("disintegration: lebesgue needs a circle/interval space");
        return lebesgue_disintegration(space.kind);
    }
    if (rule == "grid_density") {
        std::vector<Rational> masses;
        for (const auto& v : spec.at("cell_masses")) masses.push_back(rational_from_json(v));
        return density_disintegration(space.kind, std::move(masses));
    }
    if (rule == "atomic") {
        AtomicMeasure atoms;
        for (const auto& a : spec.at("atoms")) {
            double weight = double_from_json(a.at("weight"));
            if (a.contains("coord")) {
                atoms.atoms.emplace_back(FiberPoint::real(space.kind, double_from_json(a.at("coord"))),
                                         weight);
            } else {
                std::vector<int> word;
                for (const auto& s : a.at("word")) word.push_back(s.get<int>());
                atoms.atoms.emplace_back(FiberPoint::symbolic(std::move(word)), weight);
            }
        }
        return atomic_disintegration(std::move(atoms));
    }
    throw std::invalid_argument("disintegration: unknown rule '" + rule + "'");
}

const std::set<std::string> kTopKeys = {"schema",         "name",   "environment", "fiber_space",
                                        "system",         "delta",  "delta_ladder", "diagnostics",
                                        "disintegration", "output", "expected"};

const std::set<std::string> kOps = {"expansive",        "positively_expansive", "countable",
                                    "continuum_wise",   "entropy",              "theorem_a",
                                    "construct_invariant", "pullback_identity", "chain"};

const std::set<std::string> kOpKeys = {
    "op",          "seed",          "depth",         "base_samples", "fiber_samples",
    "refute_floor", "min_rate",     "persist_window", "buffer",       "n_max",
    "samples",     "segment_length", "max_n",        "probe_depth",  "stable_samples",
    "stable_depth", "rate_tolerance"};

const std::set<std::string> kDeltaOps = {"expansive", "positively_expansive", "countable",
                                         "continuum_wise", "construct_invariant",
                                         "pullback_identity"};

}  // namespace

ValidationResult validate_config(const Json& doc) {
    ValidationResult res;
    auto& errors = res.errors;
    if (!doc.is_object()) {
        errors.push_back("config: expected a JSON object");
        res.ok = false;
        return res;
    }
    check_keys(doc, "config", kTopKeys, errors);
    if (!doc.contains("name") || !doc.at("name").is_string())
        errors.push_back("name: required string");
    for (const char* section : {"environment", "fiber_space", "system", "diagnostics"})
        if (!doc.contains(section)) errors.push_back(std::string(section) + ": required");

    FiberSpace space = FiberSpace::circle();
    bool space_ok = false;
    if (doc.contains("environment")) {
        try {
            env_from_json(doc.at("environment"));
        } catch (const std::exception& e) {
            errors.push_back("environment: " + std::string(e.what()));
        }
    }
    if (doc.contains("fiber_space")) {
        try {
            space = space_from_json(doc.at("fiber_space"));
            space_ok = true;
        } catch (const std::exception& e) {
            errors.push_back("fiber_space: " + std::string(e.what()));
        }
    }
    if (doc.contains("system") && space_ok) {
        try {
            system_from_json(doc.at("system"), space);
        } catch (const std::exception& e) {
            errors.push_back("system: " + std::string(e.what()));
        }
    }
    if (doc.contains("disintegration") && space_ok) {
        try {
            dis_from_json(doc.at("disintegration"), space);
        } catch (const std::exception& e) {
            errors.push_back("disintegration: " + std::string(e.what()));
        }
    }
    bool has_delta = doc.contains("delta");
    if (has_delta) {
        try {
            scalar_from_json(doc.at("delta"));
        } catch (const std::exception& e) {
            errors.push_back("delta: " + std::string(e.what()));
        }
    }
    if (doc.contains("delta_ladder")) {
        if (!doc.at("delta_ladder").is_array() || doc.at("delta_ladder").empty()) {
            errors.push_back("delta_ladder: expected a nonempty array");
        } else {
            for (size_t i = 0; i < doc.at("delta_ladder").size(); ++i) {
                try {
                    scalar_from_json(doc.at("delta_ladder")[i]);
                } catch (const std::exception& e) {
                    errors.push_back("delta_ladder[" + std::to_string(i) + "]: " + e.what());
                }
            }
        }
    }
    if (doc.contains("diagnostics")) {
        if (!doc.at("diagnostics").is_array()) {
            errors.push_back("diagnostics: expected an array");
        } else {
            for (size_t i = 0; i < doc.at("diagnostics").size(); ++i) {
                const Json& d = doc.at("diagnostics")[i];
                std::string path = "diagnostics[" + std::to_string(i) + "]";
                if (!d.is_object()) {
                    errors.push_back(path + ": expected an object");
                    continue;
                }
                check_keys(d, path, kOpKeys, errors);
                std::string op = d.value("op", "");
                if (!kOps.count(op)) errors.push_back(path + ".op: unknown operation '" + op + "'");
                if (!d.contains("seed") || !d.at("seed").is_number_integer())
                    errors.push_back(path + ".seed: required integer (no nondeterministic defaults)");
                if (kDeltaOps.count(op) && !has_delta)
                    errors.push_back(path + ": operation '" + op + "' requires a delta spec");
                for (const char* positive : {"depth", "base_samples", "fiber_samples", "n_max",
                                             "samples", "max_n", "probe_depth"}) {
                    if (d.contains(positive) &&
                        (!d.at(positive).is_number_integer() || d.at(positive).get<long long>() < 1))
                        errors.push_back(path + "." + positive + ": must be a positive integer");
                }
                if (d.contains("segment_length") && !(d.at("segment_length").is_number() &&
                                                      d.at("segment_length").get<double>() > 0))
                    errors.push_back(path + ".segment_length: must be > 0");
            }
        }
    }
    if (doc.contains("output")) {
        const Json& out = doc.at("output");
        check_keys(out, "output", {"format", "path"}, errors);
        std::string fmt = out.value("format", "json");
        if (fmt != "json" && fmt != "csv") errors.push_back("output.format: must be json or csv");
    }
    res.ok = errors.empty();
    return res;
}

ScenarioConfig config_from_json(const Json& doc) {
    ValidationResult v = validate_config(doc);
    if (!v.ok) {
        std::string msg = "invalid scenario config:";
        for (const auto& e : v.errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    ScenarioConfig config;
    config.name = doc.at("name").get<std::string>();
    config.doc = doc;
    if (!config.doc.contains("schema")) config.doc["schema"] = kConfigSchema;
    for (const Json& d : doc.at("diagnostics"))
        config.diagnostics.push_back({d.at("op").get<std::string>(), d});
    if (doc.contains("output")) {
        config.output_format = doc.at("output").value("format", "json");
        config.output_path = doc.at("output").value("path", "");
    }
    return config;
}

ScenarioConfig load_config(const std::string& name_path_or_text) {
    for (const std::string& b : builtin_names())
        if (b == name_path_or_text) return config_from_json(builtin_config(b));
    std::string text = name_path_or_text;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
        std::ifstream in(name_path_or_text);
        if (!in) throw std::invalid_argument("cannot open config file '" + name_path_or_text + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument("config parse error: " + std::string(e.what()));
    }
    return config_from_json(doc);
}

ResolvedScenario resolve_scenario(const ScenarioConfig& config) {
    ResolvedScenario rs;
    rs.env = env_from_json(config.doc.at("environment"));
    FiberSpace space = space_from_json(config.doc.at("fiber_space"));
    rs.sys = system_from_json(config.doc.at("system"), space);
    if (config.doc.contains("disintegration"))
        rs.dis = dis_from_json(config.doc.at("disintegration"), space);
    else
        rs.dis = space.kind == SpaceKind::Symbolic ? uniform_cylinder_disintegration(space)
                                                   : lebesgue_disintegration(space.kind);
    if (config.doc.contains("delta"))
        rs.delta = scalar_from_json(config.doc.at("delta"));
    else
        rs.delta = RandomScalar::constant(Rational(1, 20));
    if (config.doc.contains("delta_ladder")) {
        for (const Json& d : config.doc.at("delta_ladder")) rs.ladder.push_back(scalar_from_json(d));
    } else {
        rs.ladder = default_delta_ladder(space);
    }
    return rs;
}

// --- built-ins ---------------------------------------------------------------------

std::vector<std::string> builtin_names() {
    return {"example1_random_shift", "example2_isometry", "example3_expanding",
            "example4_continuum_mix"};
}

Json builtin_config(const std::string& name) {
    if (name == "example1_random_shift") {
        return Json{
            {"schema", kConfigSchema},
            {"name", "example1_random_shift"},
            {"environment",
             {{"kind", "bernoulli"}, {"weights", {0.5, 0.5}}, {"description", "fair coin over alphabet bounds {2,3}"}}},
            {"fiber_space",
             {{"kind", "symbolic"},
              {"alphabet_bound", {{"form", "symbol_table"}, {"table", {"2", "3"}}}}}},
            {"system", {{"generator", "shift"}}},
            {"disintegration", {{"rule", "uniform_cylinder"}}},
            {"delta", {{"form", "symbol_table"}, {"table", {"1/4", "1/9"}}}},
            {"diagnostics",
             Json::array({Json{{"op", "expansive"}, {"depth", 16}, {"base_samples", 50},
                               {"fiber_samples", 2}, {"seed", 101}},
                          Json{{"op", "countable"}, {"depth", 12}, {"base_samples", 10},
                               {"fiber_samples", 2}, {"seed", 102}}})},
            {"expected",
             {{"expansive", "evidence-for"}, {"countable", "evidence-for"},
              {"continuum_wise", "not-applicable"}}}};
    }
    if (name == "example2_isometry") {
        return Json{
            {"schema", kConfigSchema},
            {"name", "example2_isometry"},
            {"environment",
             {{"kind", "bernoulli"}, {"weights", {0.5, 0.5}}, {"description", "fair coin over two rotation angles"}}},
            {"fiber_space", {{"kind", "circle"}}},
            {"system",
             {{"generator", "rotation"},
              {"angle", {{"form", "symbol_table"}, {"table", {kGoldenAngle, kSilverAngle}}}}}},
            {"disintegration", {{"rule", "lebesgue"}}},
            {"delta", {{"form", "constant"}, {"value", "1/20"}}},
            {"diagnostics",
             Json::array({Json{{"op", "expansive"}, {"depth", 50}, {"base_samples", 20},
                               {"fiber_samples", 2}, {"seed", 201}},
                          Json{{"op", "countable"}, {"depth", 30}, {"base_samples", 10},
                               {"fiber_samples", 2}, {"seed", 202}},
                          Json{{"op", "continuum_wise"}, {"max_n", 200}, {"base_samples", 50},
                               {"seed", 203}}})},
            {"expected",
             {{"expansive", "refuted"}, {"countable", "refuted"}, {"continuum_wise", "refuted"}}}};
    }
    if (name == "example3_expanding") {
        return Json{
            {"schema", kConfigSchema},
            {"name", "example3_expanding"},
            {"environment",
             {{"kind", "bernoulli"}, {"weights", {0.5, 0.5}}, {"description", "fair coin over degrees {2,3}"}}},
            {"fiber_space", {{"kind", "circle"}}},
            {"system",
             {{"generator", "expanding_circle"},
              {"degree", {{"form", "symbol_table"}, {"table", {"2", "3"}}}}}},
            {"disintegration", {{"rule", "lebesgue"}}},
            {"delta", {{"form", "constant"}, {"value", "1/20"}}},
            {"diagnostics",
             Json::array({Json{{"op", "entropy"}, {"n_max", 14}, {"samples", 500}, {"seed", 301}},
                          Json{{"op", "theorem_a"}, {"n_max", 14}, {"samples", 100},
                               {"base_samples", 50}, {"seed", 302}}})},
            {"expected",
             {{"expansive", "evidence-for"}, {"countable", "evidence-for"},
              {"continuum_wise", "evidence-for"}}}};
    }
    if (name == "example4_continuum_mix") {
        return Json{
            {"schema", kConfigSchema},
            {"name", "example4_continuum_mix"},
            {"environment",
             {{"kind", "bernoulli"},
              {"weights", {0.5, 0.5}},
              {"description", "fair coin: symbol 0 rotates, symbol 1 doubles"}}},
            {"fiber_space", {{"kind", "circle"}}},
            {"system",
             {{"generator", "mixed"},
              {"maps",
               {{"0", {{"kind", "rotation"}, {"angle", kGoldenAngle}}},
                {"1", {{"kind", "expanding"}, {"degree", 2}}}}}}},
            {"disintegration", {{"rule", "lebesgue"}}},
            {"delta", {{"form", "constant"}, {"value", "1/10"}}},
            {"diagnostics",
             Json::array({Json{{"op", "continuum_wise"}, {"max_n", 200}, {"base_samples", 100},
                               {"segment_length", 0.001}, {"seed", 401}},
                          Json{{"op", "expansive"}, {"depth", 40}, {"base_samples", 20},
                               {"fiber_samples", 2}, {"seed", 402}},
                          Json{{"op", "countable"}, {"depth", 40}, {"base_samples", 10},
                               {"fiber_samples", 2}, {"seed", 403}}})},
            {"expected",
             {{"expansive", "evidence-for"}, {"countable", "evidence-for"},
              {"continuum_wise", "evidence-for"}}}};
    }
    throw std::invalid_argument("unknown built-in scenario '" + name + "'");
}

std::vector<ChainEntry> builtin_chain_suite() {
    std::vector<ChainEntry> suite;
    for (const std::string& name : builtin_names()) {
        ScenarioConfig config = config_from_json(builtin_config(name));
        ResolvedScenario rs = resolve_scenario(config);
        ChainEntry entry;
        entry.name = name;
        entry.sys = rs.sys;
        entry.env = rs.env;
        entry.delta = rs.delta;
        entry.nonatomic.push_back(rs.dis);
        // A second non-atomic disintegration on the same fibers.
        if (rs.sys.space.kind == SpaceKind::Symbolic) {
            entry.nonatomic.push_back(
                skew_cylinder_disintegration(rs.sys.space, CylinderRule::SkewIID));
        } else {
            entry.nonatomic.push_back(density_disintegration(
                rs.sys.space.kind, {Rational(3, 8), Rational(1, 8), Rational(1, 8), Rational(3, 8)}));
        }
        suite.push_back(std::move(entry));
    }
    return suite;
}

// --- report fragments -----------------------------------------------------------------

namespace {

Json sample_curve_to_json(const SampleCurve& c) {
    Json j;
    j["w"] = c.w_id;
    j["x"] = c.x_desc;
    j["lower"] = c.lower;
    j["upper"] = c.upper;
    if (!c.lower_exact.empty()) j["lower_exact"] = c.lower_exact;
    if (!c.upper_exact.empty()) j["upper_exact"] = c.upper_exact;
    j["cells"] = c.cells;
    j["mean_rate"] = c.mean_rate;
    j["lsq_slope"] = c.lsq_slope;
    j["lsq_residual"] = c.lsq_residual;
    j["monotone"] = c.monotone;
    if (c.budget_exceeded) j["budget_exceeded"] = true;
    return j;
}

}  // namespace

Json expansivity_report_to_json(const ExpansivityReport& rep) {
    Json j;
    j["notion"] = rep.notion;
    j["sided"] = rep.sided == Sided::Forward ? "forward" : "two-sided";
    j["verdict"] = verdict_name(rep.verdict);
    j["depth"] = rep.depth;
    j["decay_rate"] = rep.decay_rate;
    j["lsq_rate"] = rep.lsq_rate;
    j["refute_floor"] = rep.refute_floor;
    if (!rep.witness.empty()) {
        j["witness"] = rep.witness;
        j["witness_mass"] = rep.witness_mass;
    }
    if (!rep.note.empty()) j["note"] = rep.note;
    Json samples = Json::array();
    for (const SampleCurve& c : rep.samples) samples.push_back(sample_curve_to_json(c));
    j["samples"] = samples;
    return j;
}

Json entropy_estimate_to_json(const EntropyEstimate& est) {
    Json j;
    j["estimate"] = est.estimate;
    j["halfwidth"] = est.halfwidth;
    j["ratio_estimate"] = est.ratio_estimate;
    j["delta_used"] = est.delta_used;
    j["threshold_H"] = est.threshold_H();
    if (est.truncated) j["truncated"] = true;
    Json ladder = Json::array();
    for (const LadderPoint& p : est.ladder)
        ladder.push_back(Json{{"delta", p.delta},
                              {"estimate", p.estimate},
                              {"halfwidth", p.halfwidth},
                              {"ratio_estimate", p.ratio_estimate}});
    j["ladder"] = ladder;
    Json samples = Json::array();
    for (const EntropySample& s : est.samples) {
        Json sj;
        sj["w"] = s.w_id;
        sj["x"] = s.x_desc;
        sj["neg_log_mass"] = s.neg_log_mass;
        sj["ratio"] = s.ratio;
        sj["ratio_min"] = s.ratio_min;
        sj["slope"] = s.slope;
        if (s.truncated) sj["truncated"] = true;
        samples.push_back(sj);
    }
    j["samples"] = samples;
    return j;
}

Json theorem_a_report_to_json(const TheoremAReport& rep) {
    Json j;
    j["applicable"] = rep.applicable;
    j["entropy_estimate"] = rep.entropy_estimate;
    j["entropy_halfwidth"] = rep.entropy_halfwidth;
    j["expansive_verdict"] = verdict_name(rep.expansive_verdict);
    j["expansive_rate"] = rep.expansive_rate;
    j["delta_used"] = rep.delta_used;
    j["rate_clause_ok"] = rep.rate_clause_ok;
    j["stable_clause_ok"] = rep.stable_clause_ok;
    j["all_pass"] = rep.all_pass;
    if (!rep.note.empty()) j["note"] = rep.note;
    return j;
}

Json construct_report_to_json(const ConstructReport& rep) {
    Json j;
    j["envelope_ok"] = rep.envelope_ok;
    j["hypothesis_met"] = rep.hypothesis_met;
    j["input_verdict"] = verdict_name(rep.input_verdict);
    j["final_verdict"] = verdict_name(rep.final_verdict);
    j["final_rate"] = rep.final_rate;
    j["orders"] = rep.orders;
    if (!rep.note.empty()) j["note"] = rep.note;
    Json rows = Json::array();
    for (const DefectRow& r : rep.rows)
        rows.push_back(Json{{"w_id", r.w_id}, {"n", r.order}, {"depth", r.depth}, {"defect", r.defect}});
    j["defect_rows"] = rows;
    return j;
}

Json chain_results_to_json(const std::vector<ChainSystemResult>& results) {
    Json arr = Json::array();
    for (const ChainSystemResult& r : results) {
        Json j;
        j["name"] = r.name;
        j["expansive"] = verdict_name(r.expansive);
        j["countable"] = verdict_name(r.countable);
        j["continuum_wise"] = verdict_name(r.continuum);
        j["chain_ok"] = r.chain_ok;
        j["theorem_c_ok"] = r.theorem_c_ok;
        Json per = Json::array();
        for (const auto& [name, verdict] : r.per_measure)
            per.push_back(Json{{"measure", name}, {"verdict", verdict_name(verdict)}});
        j["per_measure"] = per;
        arr.push_back(j);
    }
    return Json{{"systems", arr}};
}

// --- execution --------------------------------------------------------------------------

namespace {

DiagnosticParams diag_params(const Json& p, uint64_t seed) {
    DiagnosticParams d;
    d.depth = p.value("depth", 16);
    d.base_samples = p.value("base_samples", 20);
    d.fiber_samples = p.value("fiber_samples", 2);
    d.seed = seed;
    d.refute_floor = p.value("refute_floor", 1e-6);
    d.min_rate = p.value("min_rate", 0.05);
    d.persist_window = p.value("persist_window", 5);
    d.gamma.buffer = p.value("buffer", 4);
    return d;
}

Json run_diagnostic(const ResolvedScenario& rs, const DiagnosticSpec& spec, uint64_t seed) {
    const Json& p = spec.params;
    Json out;
    out["op"] = spec.op;
    out["seed"] = seed;
    if (spec.op == "expansive" || spec.op == "positively_expansive") {
        ExpansivityNotion notion = spec.op == "expansive"
                                       ? ExpansivityNotion::RandomExpansive
                                       : ExpansivityNotion::PositivelyRandomExpansive;
        out["report"] = expansivity_report_to_json(
            expansive_diagnostic(rs.sys, rs.env, rs.dis, rs.delta, diag_params(p, seed), notion));
    } else if (spec.op == "countable") {
        out["report"] = expansivity_report_to_json(
            countable_diagnostic(rs.sys, rs.env, rs.delta, diag_params(p, seed)));
    } else if (spec.op == "continuum_wise") {
        DiagnosticParams d = diag_params(p, seed);
        out["report"] = expansivity_report_to_json(continuum_wise_diagnostic(
            rs.sys, rs.env, rs.delta, d, p.value("segment_length", 1e-3), p.value("max_n", 200)));
    } else if (spec.op == "entropy") {
        EntropyParams ep;
        ep.n_max = p.value("n_max", 14);
        ep.samples = p.value("samples", 100);
        ep.seed = seed;
        out["report"] = entropy_estimate_to_json(
            brin_katok_estimate(rs.sys, rs.env, rs.dis, rs.ladder, ep));
        auto oracle = analytic_entropy_oracle(rs.sys, *rs.env);
        if (oracle) out["analytic_oracle"] = *oracle;
    } else if (spec.op == "theorem_a") {
        TheoremAParams tp;
        tp.entropy.n_max = p.value("n_max", 14);
        tp.entropy.samples = p.value("samples", 100);
        tp.entropy.seed = seed;
        tp.diagnostic = diag_params(p, hash_u64(seed, 1));
        tp.stable_samples = p.value("stable_samples", 10);
        tp.stable_depth = p.value("stable_depth", 10);
        tp.rate_tolerance = p.value("rate_tolerance", 0.05);
        out["report"] =
            theorem_a_report_to_json(theorem_a_consistency(rs.sys, rs.env, rs.dis, rs.ladder, tp));
    } else if (spec.op == "construct_invariant") {
        ConstructParams cp;
        cp.n_max = p.value("n_max", 256);
        cp.probe_depth = p.value("probe_depth", 8);
        cp.base_samples = p.value("base_samples", 20);
        cp.seed = seed;
        cp.diagnostic = diag_params(p, hash_u64(seed, 2));
        out["report"] = construct_report_to_json(
            construct_invariant(rs.sys, rs.env, rs.dis, rs.delta, cp));
    } else if (spec.op == "pullback_identity") {
        int depth = p.value("depth", 6);
        int samples = p.value("samples", 50);
        auto bases = sample_base(rs.env, samples, hash_u64(seed, 0x1de));
        Json rows = Json::array();
        bool all_pass = true;
        GammaOptions opts;
        opts.buffer = p.value("buffer", 4);
        for (size_t i = 0; i < bases.size(); ++i) {
            FiberPoint x = sample_fiber(rs.dis.at(bases[i]), 1, hash_u64(seed, i),
                                        depth + opts.buffer + 8)
                               .front();
            PullbackIdentityResult r =
                gamma_pullback_identity_check(rs.sys, bases[i], x, rs.delta, depth, opts);
            all_pass &= r.pass;
            rows.push_back(Json{{"w", bases[i].id()},
                                {"x", x.describe()},
                                {"pass", r.pass},
                                {"mismatch", r.mismatch},
                                {"detail", r.detail}});
        }
        out["report"] = Json{{"all_pass", all_pass}, {"depth", depth}, {"rows", rows}};
    } else if (spec.op == "chain") {
        out["report"] =
            chain_results_to_json(implication_chain_test(builtin_chain_suite(), diag_params(p, seed)));
    } else {
        throw std::invalid_argument("unknown diagnostic op '" + spec.op + "'");
    }
    return out;
}

}  // namespace

Json run_scenario(const ScenarioConfig& config, std::optional<uint64_t> seed_override) {
    auto start = std::chrono::steady_clock::now();
    ResolvedScenario rs = resolve_scenario(config);
    Json results = Json::array();
    for (size_t i = 0; i < config.diagnostics.size(); ++i) {
        const DiagnosticSpec& spec = config.diagnostics[i];
        uint64_t seed = spec.params.value("seed", 1);
        if (seed_override) seed = hash_u64(*seed_override, static_cast<uint64_t>(i));
        try {
            results.push_back(run_diagnostic(rs, spec, seed));
        } catch (const std::exception& e) {
            // Per-diagnostic failures are recorded; the run continues.
            results.push_back(Json{{"op", spec.op}, {"error", e.what()}});
        }
    }
    auto end = std::chrono::steady_clock::now();
    Json report;
    report["schema"] = kReportSchema;
    report["scenario"] = config.doc;
    report["results"] = results;
    report["timing"] = {
        {"wall_clock_ms",
         std::chrono::duration_cast<std::chrono::milliseconds>(end - start).count()}};
    return report;
}

// --- emission ------------------------------------------------------------------------------

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string result_to_csv(const Json& result) {
    std::ostringstream csv;
    std::string op = result.value("op", "");
    if (!result.contains("report")) {
        csv << "op,error\n" << op << "," << csv_escape(result.value("error", "")) << "\n";
        return csv.str();
    }
    const Json& rep = result.at("report");
    if (op == "construct_invariant") {
        csv << "w_id,n,depth,defect\n";
        for (const Json& r : rep.at("defect_rows"))
            csv << r.at("w_id").get<std::string>() << "," << r.at("n") << "," << r.at("depth") << ","
                << r.at("defect") << "\n";
    } else if (rep.contains("samples") && rep.at("samples").is_array() &&
               !rep.at("samples").empty() && rep.at("samples")[0].contains("lower")) {
        csv << "w_id,x,depth,lower,upper\n";
        for (const Json& s : rep.at("samples")) {
            const Json& lo = s.at("lower");
            const Json& up = s.at("upper");
            for (size_t n = 0; n < lo.size(); ++n)
                csv << s.at("w").get<std::string>() << "," << csv_escape(s.at("x").get<std::string>())
                    << "," << (n + 1) << "," << lo[n] << "," << up[n] << "\n";
        }
    } else {
        csv << "key,value\n";
        for (auto it = rep.begin(); it != rep.end(); ++it)
            if (it.value().is_primitive()) csv << it.key() << "," << csv_escape(it.value().dump()) << "\n";
    }
    return csv.str();
}

}  // namespace

std::vector<std::string> emit_report(const Json& report, const std::string& format,
                                     const std::string& path) {
    std::vector<std::string> written;
    if (format == "json") {
        std::string text = report.dump(2) + "\n";
        if (path.empty()) {
            fputs(text.c_str(), stdout);
        } else {
            write_text(path, text);
            written.push_back(path);
        }
        return written;
    }
    if (format != "csv") throw std::invalid_argument("emit_report: unknown format '" + format + "'");
    std::string stem = path;
    if (stem.size() >= 5 && stem.substr(stem.size() - 5) == ".json") stem.resize(stem.size() - 5);
    if (stem.size() >= 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
    const Json& results = report.at("results");
    for (size_t i = 0; i < results.size(); ++i) {
        std::string csv = result_to_csv(results[i]);
        if (path.empty()) {
            fputs(csv.c_str(), stdout);
            continue;
        }
        std::string file = stem + "." + std::to_string(i) + "." +
                           results[i].value("op", "result") + ".csv";
        write_text(file, csv);
        written.push_back(file);
    }
    return written;
}

}  // namespace rexp

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rexp/scenario.hpp"

using namespace rexp;

namespace {

Json minimal_config() {
    return Json{
        {"schema", kConfigSchema},
        {"name", "mini"},
        {"environment", {{"kind", "bernoulli"}, {"weights", {0.5, 0.5}}}},
        {"fiber_space",
         {{"kind", "symbolic"}, {"alphabet_bound", {{"form", "symbol_table"}, {"table", {"2", "3"}}}}}},
        {"system", {{"generator", "shift"}}},
        {"disintegration", {{"rule", "uniform_cylinder"}}},
        {"delta", {{"form", "symbol_table"}, {"table", {"1/4", "1/9"}}}},
        {"diagnostics", Json::array({Json{{"op", "expansive"},
                                          {"depth", 6},
                                          {"base_samples", 4},
                                          {"fiber_samples", 1},
                                          {"seed", 5}}})}};
}

Json strip_timing(Json report) {
    report.erase("timing");
    return report;
}

}  // namespace

TEST_CASE("builtin registry contains exactly the four examples") {
    auto names = builtin_names();
    REQUIRE(names.size() == 4);
    CHECK(names[0] == "example1_random_shift");
    CHECK(names[1] == "example2_isometry");
    CHECK(names[2] == "example3_expanding");
    CHECK(names[3] == "example4_continuum_mix");
    for (const auto& n : names) {
        Json doc = builtin_config(n);
        CHECK(validate_config(doc).ok);
        CHECK(doc.contains("expected"));
    }
}

TEST_CASE("config round-trip through serialization") {
    ScenarioConfig a = config_from_json(minimal_config());
    ScenarioConfig b = load_config(a.doc.dump());
    CHECK(a.doc == b.doc);
    CHECK(a.name == b.name);
}

TEST_CASE("unknown keys are rejected with their field path") {
    Json doc = minimal_config();
    doc["surprise"] = 1;
    doc["diagnostics"][0]["bogus_knob"] = true;
    ValidationResult v = validate_config(doc);
    CHECK(!v.ok);
    bool saw_top = false, saw_diag = false;
    for (const auto& e : v.errors) {
        if (e.find("surprise") != std::string::npos) saw_top = true;
        if (e.find("diagnostics[0]") != std::string::npos &&
            e.find("bogus_knob") != std::string::npos)
            saw_diag = true;
    }
    CHECK(saw_top);
    CHECK(saw_diag);
}

TEST_CASE("negative depth is rejected with the field path") {
    Json doc = minimal_config();
    doc["diagnostics"][0]["depth"] = -3;
    ValidationResult v = validate_config(doc);
    CHECK(!v.ok);
    bool found = false;
    for (const auto& e : v.errors)
        if (e.find("diagnostics[0].depth") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("missing seeds are rejected") {
    Json doc = minimal_config();
    doc["diagnostics"][0].erase("seed");
    ValidationResult v = validate_config(doc);
    CHECK(!v.ok);
    bool found = false;
    for (const auto& e : v.errors)
        if (e.find("seed") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("malformed weights are itemized") {
    Json doc = minimal_config();
    doc["environment"]["weights"] = {0.5, 0.6};
    ValidationResult v = validate_config(doc);
    CHECK(!v.ok);
    bool found = false;
    for (const auto& e : v.errors)
        if (e.find("environment") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("builtin example1 yields the expected golden verdicts") {
    ScenarioConfig config = config_from_json(builtin_config("example1_random_shift"));
    Json report = run_scenario(config);
    const Json& results = report.at("results");
    REQUIRE(results.size() == 2);
    CHECK(results[0].at("report").at("verdict") == "evidence-for");
    CHECK(results[1].at("report").at("verdict") == "evidence-for");
}

TEST_CASE("reports are byte-identical across runs, timing aside") {
    ScenarioConfig config = config_from_json(minimal_config());
    Json a = strip_timing(run_scenario(config));
    Json b = strip_timing(run_scenario(config));
    CHECK(a.dump() == b.dump());
}

TEST_CASE("seed override changes the sampled points deterministically") {
    ScenarioConfig config = config_from_json(minimal_config());
    Json a = strip_timing(run_scenario(config, 900));
    Json b = strip_timing(run_scenario(config, 900));
    Json c = strip_timing(run_scenario(config, 901));
    CHECK(a.dump() == b.dump());
    CHECK(a.dump() != c.dump());
}

TEST_CASE("exact masses serialize as fraction strings") {
    ScenarioConfig config = config_from_json(minimal_config());
    Json report = run_scenario(config);
    const Json& samples = report.at("results")[0].at("report").at("samples");
    REQUIRE(!samples.empty());
    bool saw_fraction = false;
    for (const Json& s : samples) {
        if (!s.contains("upper_exact")) continue;
        for (const Json& u : s.at("upper_exact")) {
            std::string v = u.get<std::string>();
            if (v.find('/') != std::string::npos) saw_fraction = true;
        }
    }
    CHECK(saw_fraction);
}

TEST_CASE("csv emission writes the defect-curve header") {
    Json doc = Json{
        {"schema", kConfigSchema},
        {"name", "csvtest"},
        {"environment", {{"kind", "bernoulli"}, {"weights", {0.5, 0.5}}}},
        {"fiber_space",
         {{"kind", "symbolic"}, {"alphabet_bound", {{"form", "symbol_table"}, {"table", {"2", "3"}}}}}},
        {"system", {{"generator", "shift"}}},
        {"disintegration", {{"rule", "skew_first_cylinder"}}},
        {"delta", {{"form", "symbol_table"}, {"table", {"1/4", "1/9"}}}},
        {"diagnostics", Json::array({Json{{"op", "construct_invariant"},
                                          {"n_max", 4},
                                          {"probe_depth", 4},
                                          {"base_samples", 2},
                                          {"seed", 3}}})}};
    ScenarioConfig config = config_from_json(doc);
    Json report = run_scenario(config);
    std::string stem = "/tmp/rexp_csv_test_report";
    auto files = emit_report(report, "csv", stem + ".json");
    REQUIRE(!files.empty());
    std::ifstream in(files[0]);
    std::string header;
    std::getline(in, header);
    CHECK(header == "w_id,n,depth,defect");
    for (const auto& f : files) std::remove(f.c_str());
}

TEST_CASE("json emission re-parses to the identical document") {
    ScenarioConfig config = config_from_json(minimal_config());
    Json report = run_scenario(config);
    std::string path = "/tmp/rexp_json_test_report.json";
    emit_report(report, "json", path);
    std::ifstream in(path);
    Json parsed = Json::parse(in);
    CHECK(parsed == report);
    std::remove(path.c_str());
}

TEST_CASE("per-diagnostic failures are captured and the run continues") {
    Json doc = minimal_config();
    // continuum_wise is undefined on symbolic fibers only through
    // gamma machinery; force a failure with a two-sided pullback op instead
    doc["diagnostics"] = Json::array(
        {Json{{"op", "entropy"}, {"n_max", 4}, {"samples", 3}, {"seed", 4}},
         Json{{"op", "expansive"}, {"depth", 4}, {"base_samples", 2}, {"fiber_samples", 1}, {"seed", 5}}});
    ScenarioConfig config = config_from_json(doc);
    Json report = run_scenario(config);
    CHECK(report.at("results").size() == 2);
}

#ifdef REXP_CLI_PATH
TEST_CASE("cli exit codes: 0 on success, 1 on validation failure") {
    std::string cli = REXP_CLI_PATH;
    CHECK(std::system((cli + " list > /dev/null").c_str()) == 0);
    CHECK(std::system((cli + " run example1_random_shift --out /tmp/rexp_cli_test.json > /dev/null").c_str()) == 0);
    std::remove("/tmp/rexp_cli_test.json");

    std::ofstream bad("/tmp/rexp_bad_config.json");
    bad << "{\"name\": 3}";
    bad.close();
    int rc = std::system((cli + " validate /tmp/rexp_bad_config.json 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == 1);
    rc = std::system((cli + " run /tmp/rexp_bad_config.json 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == 1);
    std::remove("/tmp/rexp_bad_config.json");
}
#endif

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rexp/cesaro.hpp"
#include "rexp/entropy.hpp"
#include "rexp/expansivity.hpp"

namespace rexp {

using Json = nlohmann::json;

// Scenario configuration, the built-in example systems, diagnostic
// orchestration and report emission.

struct ValidationResult {
    bool ok = true;
    std::vector<std::string> errors;
};

struct DiagnosticSpec {
    std::string op;
    Json params;
};

struct ScenarioConfig {
    std::string name;
    Json doc;  // normalized document (config echo)
    std::vector<DiagnosticSpec> diagnostics;
    std::string output_format = "json";
    std::string output_path;
};

struct ResolvedScenario {
    EnvPtr env;
    FiberSystem sys;
    DisintegratedMeasure dis;
    RandomScalar delta;
    std::vector<RandomScalar> ladder;
};

// --- config ------------------------------------------------------------------

ValidationResult validate_config(const Json& doc);
ScenarioConfig config_from_json(const Json& doc);  // throws listing all errors
// Accepts a built-in name, a file path, or inline JSON text.
ScenarioConfig load_config(const std::string& name_path_or_text);

RandomScalar scalar_from_json(const Json& spec);
Json scalar_to_json(const RandomScalar& s);
ResolvedScenario resolve_scenario(const ScenarioConfig& config);

// --- built-ins -----------------------------------------------------------------

std::vector<std::string> builtin_names();
Json builtin_config(const std::string& name);

// Suite used by the implication-chain diagnostic: the four built-ins with
// their non-atomic test disintegrations.
std::vector<ChainEntry> builtin_chain_suite();

// --- execution -------------------------------------------------------------------

Json run_scenario(const ScenarioConfig& config, std::optional<uint64_t> seed_override = {});

// Serializes a run report; "json" writes one document, "csv" writes one file
// per tabular result next to `path` (or returns the concatenation when path
// is empty). Returns the list of files written.
std::vector<std::string> emit_report(const Json& report, const std::string& format,
                                     const std::string& path);

// Report fragments (also used by the python bindings).
Json expansivity_report_to_json(const ExpansivityReport& rep);
Json entropy_estimate_to_json(const EntropyEstimate& est);
Json theorem_a_report_to_json(const TheoremAReport& rep);
Json construct_report_to_json(const ConstructReport& rep);
Json chain_results_to_json(const std::vector<ChainSystemResult>& results);

inline constexpr const char* kReportSchema = "rexp-report/1";
inline constexpr const char* kConfigSchema = "rexp-scenario/1";

}  // namespace rexp

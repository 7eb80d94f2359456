#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rexp/scenario.hpp"

namespace {

// Exit codes: 0 success (verdicts are data, not errors), 1 validation
// failure, 2 diagnostic-infrastructure error.
constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kInfrastructureError = 2;

std::string apply_out_dir(const std::string& path) {
    const char* dir = std::getenv("REXP_OUT_DIR");
    if (!dir || path.empty()) return path;
    if (path.front() == '/') return path;
    std::string d(dir);
    if (!d.empty() && d.back() != '/') d += '/';
    return d + path;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-expansivity toolkit"};
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "list built-in scenarios");

    std::string run_target, out_path, format = "";
    std::optional<uint64_t> seed_override;
    auto* run_cmd = app.add_subcommand("run", "run a built-in or config file");
    run_cmd->add_option("scenario", run_target, "built-in name or config path")->required();
    run_cmd->add_option("--out", out_path, "output path");
    run_cmd->add_option("--format", format, "json or csv (default: config setting)");
    uint64_t seed_value = 0;
    auto* seed_opt = run_cmd->add_option("--seed", seed_value, "override every diagnostic seed");

    std::string validate_target;
    auto* validate_cmd = app.add_subcommand("validate", "validate a config file");
    validate_cmd->add_option("config", validate_target, "config path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list_cmd) {
            for (const std::string& name : rexp::builtin_names()) std::cout << name << "\n";
            return kOk;
        }
        if (*validate_cmd) {
            rexp::Json doc;
            try {
                rexp::ScenarioConfig config = rexp::load_config(validate_target);
                std::cout << "ok: " << config.name << "\n";
                return kOk;
            } catch (const std::invalid_argument& e) {
                std::cerr << e.what() << "\n";
                return kValidationError;
            }
        }
        if (*run_cmd) {
            rexp::ScenarioConfig config;
            try {
                config = rexp::load_config(run_target);
            } catch (const std::invalid_argument& e) {
                std::cerr << e.what() << "\n";
                return kValidationError;
            }
            if (*seed_opt) seed_override = seed_value;
            rexp::Json report = rexp::run_scenario(config, seed_override);
            std::string fmt = format.empty() ? config.output_format : format;
            std::string path = out_path.empty() ? config.output_path : out_path;
            for (const std::string& f : rexp::emit_report(report, fmt, apply_out_dir(path)))
                std::cerr << "wrote " << f << "\n";
            for (const rexp::Json& r : report.at("results")) {
                if (r.contains("error")) {
                    std::cerr << "diagnostic '" << r.value("op", "?") << "' failed: "
                              << r.value("error", "") << "\n";
                    return kInfrastructureError;
                }
            }
            return kOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kInfrastructureError;
    }
    return kOk;
}

// qwalk command-line front end; talks to the library only through qwalk.h.

#include "qwalk/qwalk.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

int exit_code(qw_status s) {
    switch (s) {
    case QW_OK: return 0;
    case QW_CONFIG_ERROR:
    case QW_INVALID_ARGUMENT: return 2;
    case QW_NON_CONVERGENCE: return 3;
    case QW_REGIME_VIOLATION: return 4;
    case QW_IO_ERROR: return 5;
    default: return 1;
    }
}

int report(qw_status s, const std::string& command) {
    nlohmann::ordered_json j;
    j["error"] = qw_status_name(s);
    j["exit_code"] = exit_code(s);
    j["command"] = command;
    j["message"] = qw_last_error();
    std::cerr << j.dump() << '\n';
    return exit_code(s);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear discrete-time quantum walk toolkit"};
    app.set_version_flag("--version", std::string(qw_version()));
    app.require_subcommand(1, 1);

    std::string config_path, out_dir;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;

    const char* commands[][2] = {
        {"walk", "Simulate a trajectory: diagnostics and probability CSVs"},
        {"decay", "Decay study: norm series and log-log slope fits"},
        {"scatter", "Scattering state with certified truncation"},
        {"invscat", "Reconstruct the coin derivatives at the origin from scattering data"},
        {"spectrum", "Dispersion relation export"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Run config (TOML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory")->required();
        sub->add_option("--threads", threads, "Worker threads for independent sub-runs")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Seed for random initial states");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    qw_config* cfg = nullptr;
    qw_status s = qw_config_load(config_path.c_str(), &cfg);
    if (s != QW_OK)
        return report(s, command);
    if (seed)
        s = qw_config_set_seed(cfg, *seed);
    if (s == QW_OK)
        s = qw_run(cfg, command.c_str(), out_dir.c_str(), threads);
    qw_config_free(cfg);
    if (s != QW_OK)
        return report(s, command);
    return 0;
}

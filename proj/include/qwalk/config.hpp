#pragma once

// Run configs (TOML subset) and the command runners behind the CLI. Every
// runner writes one directory: a copy of the config, JSON reports with a
// schema_version field, and CSV series.

#include "qwalk/coin.hpp"
#include "qwalk/grid_state.hpp"
#include "qwalk/walk.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qwalk {

struct InitialSpec {
    enum class Kind { delta, deltas, wavepacket, file, random } kind = Kind::delta;
    // delta
    int component = 1;
    std::int64_t site = 0;
    Complex amplitude = 1.0;
    // deltas: (component, site, amplitude)
    struct Entry {
        int component;
        std::int64_t site;
        Complex amplitude;
    };
    std::vector<Entry> entries;
    // wavepacket
    double center = 0, width = 1, momentum = 0;
    Spinor polarization{1.0, 0.0};
    std::optional<double> l1, l2;
    // file
    std::filesystem::path path;
    // random
    std::int64_t sites = 16;
    std::uint64_t seed = 0;
};

struct RunConfig {
    std::string source;
    nlohmann::ordered_json tree;
    /// Directory used to resolve relative paths in the config.
    std::filesystem::path base_dir;

    Mat2 constant = Mat2::identity();
    /// Set when constant has the (a b; -conj(b) conj(a)) shape with 0 < |a| < 1.
    std::optional<ConstantCoin> standard;
    std::string constant_problem;
    NonlinearCoin nonlinear;
    InitialSpec initial;
    std::optional<std::uint64_t> seed_override;

    /// The named table, or an empty one.
    const nlohmann::ordered_json& section(std::string_view name) const;
};

/// Parses and schema-validates a config; unknown sections and keys are
/// rejected with Error(config).
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

GridState build_initial_state(const RunConfig& cfg);

WalkConfig walk_config(const RunConfig& cfg, std::int64_t horizon = 0);

/// Runs walk | decay | scatter | invscat | spectrum into out_dir. Throws
/// qwalk::Error on failure after writing whatever partial report exists.
void run_command(const RunConfig& cfg, std::string_view command, const std::filesystem::path& out_dir,
                 unsigned threads);

} // namespace qwalk

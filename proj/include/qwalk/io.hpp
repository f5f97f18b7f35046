#pragma once

// Serialization: GridState JSON (bit-exact for finite doubles), CSV writers
// for trajectories and series, and schema-versioned report files.

#include "qwalk/estimates.hpp"
#include "qwalk/grid_state.hpp"
#include "qwalk/walk.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace qwalk {

inline constexpr int schema_version = 1;

/// Shortest representation that reads back to the same double.
std::string format_double(double v);

/// {"schema_version", "offset", "cells": [[re1, im1, re2, im2], ...]}.
nlohmann::ordered_json state_to_json(const GridState& u);
/// Accepts the object above (schema_version optional); throws Error(config).
GridState state_from_json(const nlohmann::ordered_json& j);

void write_diagnostics_header(std::ostream& os);
void write_diagnostics_row(std::ostream& os, const Diagnostics& d);
void write_probabilities_header(std::ostream& os);
/// Rows (t, x, p_t(x)) over the stored window of u.
void write_probabilities_rows(std::ostream& os, std::int64_t t, const GridState& u);
void write_series_csv(std::ostream& os, const DecaySeries& series);

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for run bundles; throws Error(io).
void write_file(const std::filesystem::path& path, const std::string& contents);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

} // namespace qwalk

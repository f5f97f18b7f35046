#include "qwalk/io.hpp"

#include "qwalk/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace qwalk {

std::string format_double(double v) {
    if (!std::isfinite(v))
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

nlohmann::ordered_json state_to_json(const GridState& u) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : u.cells()) {
        for (double v : {c.c1.real(), c.c1.imag(), c.c2.real(), c.c2.imag()})
            if (!std::isfinite(v))
                fail(ErrorCode::invalid_argument, "cannot serialize a non-finite amplitude");
        cells.push_back({c.c1.real(), c.c1.imag(), c.c2.real(), c.c2.imag()});
    }
    return {{"schema_version", schema_version}, {"offset", u.lo()}, {"cells", std::move(cells)}};
}

GridState state_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object() || !j.contains("offset") || !j.contains("cells"))
        fail(ErrorCode::config, "state JSON needs 'offset' and 'cells'");
    for (const auto& [k, v] : j.items())
        if (k != "schema_version" && k != "offset" && k != "cells")
            fail(ErrorCode::config, "unknown key '" + k + "' in state JSON");
    if (!j["offset"].is_number_integer())
        fail(ErrorCode::config, "state 'offset' must be an integer");
    const auto& cells = j["cells"];
    if (!cells.is_array())
        fail(ErrorCode::config, "state 'cells' must be an array");
    std::vector<Spinor> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
        if (!c.is_array() || c.size() != 4)
            fail(ErrorCode::config, "each state cell must be [re1, im1, re2, im2]");
        double v[4];
        for (int i = 0; i < 4; ++i) {
            if (!c[i].is_number())
                fail(ErrorCode::config, "state cell entries must be numbers");
            v[i] = c[i].get<double>();
        }
        out.push_back({{v[0], v[1]}, {v[2], v[3]}});
    }
    return GridState(j["offset"].get<std::int64_t>(), std::move(out));
}

void write_diagnostics_header(std::ostream& os) { os << "t,l2,l5,linf,weak_l4,support_lo,support_hi\n"; }

void write_diagnostics_row(std::ostream& os, const Diagnostics& d) {
    os << d.t << ',' << format_double(d.l2) << ',' << format_double(d.l5) << ',' << format_double(d.linf) << ','
       << format_double(d.weak_l4) << ',' << d.support_lo << ',' << d.support_hi << '\n';
}

void write_probabilities_header(std::ostream& os) { os << "t,x,p\n"; }

void write_probabilities_rows(std::ostream& os, std::int64_t t, const GridState& u) {
    std::int64_t x = u.lo();
    for (const auto& c : u.cells())
        os << t << ',' << x++ << ',' << format_double(c.norm_sq()) << '\n';
}

void write_series_csv(std::ostream& os, const DecaySeries& series) {
    os << "t," << series.kind.name() << '\n';
    for (std::size_t k = 0; k < series.times.size(); ++k)
        os << series.times[k] << ',' << format_double(series.values[k]) << '\n';
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::io, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorCode::io, "cannot write '" + path.string() + "'");
    out << contents;
    if (!out)
        fail(ErrorCode::io, "write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    write_file(path, j.dump(2) + "\n");
}

} // namespace qwalk

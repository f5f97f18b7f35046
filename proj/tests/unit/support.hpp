#pragma once

#include "qwalk/grid_state.hpp"
#include "qwalk/mat2.hpp"

#include <random>

namespace qwalk::test {

inline GridState random_state(std::mt19937_64& rng, std::size_t sites, std::int64_t offset = 0, double scale = 1.0) {
    std::normal_distribution<double> n;
    std::vector<Spinor> cells(sites);
    for (auto& c : cells)
        c = {{scale * n(rng), scale * n(rng)}, {scale * n(rng), scale * n(rng)}};
    return GridState(offset, std::move(cells));
}

inline double max_entry_diff(const Mat2& a, const Mat2& b) { return max_abs_entry(a - b); }

/// Plain-loop reference, independent of the library's norm code.
inline double reference_lp(const GridState& u, double p) {
    double s = 0;
    for (const auto& c : u.cells())
        s += std::pow(std::sqrt(std::norm(c.c1) + std::norm(c.c2)), p);
    return std::pow(s, 1 / p);
}

} // namespace qwalk::test

#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"

#include <doctest.h>

#include <numbers>

using namespace qwalk;

namespace {

/// Outermost local maximum of p_t on the sublattice x = t (mod 2) that
/// carries the walk started at the origin.
std::int64_t right_front(const GridState& u, std::int64_t t) {
    std::int64_t front = 0;
    std::int64_t x0 = u.lo();
    if (((x0 - t) % 2 + 2) % 2 != 0)
        ++x0;
    for (std::int64_t x = x0 + 2; x + 2 <= u.hi(); x += 2) {
        const double p = u.at(x).norm_sq();
        if (p > u.at(x - 2).norm_sq() && p >= u.at(x + 2).norm_sq())
            front = x;
    }
    return front;
}

const double as[] = {0.3, 1 / std::numbers::sqrt2, 0.95};

} // namespace

TEST_CASE("probability front within three sites of |a| t at t = 512") {
    const std::int64_t t = 512;
    for (double a : as) {
        CAPTURE(a);
        const ConstantCoin c(a, std::sqrt(1 - a * a));
        const auto u = linear_power(GridState::delta(1, 0), c.matrix(), t);
        CHECK(std::abs(double(right_front(u, t)) - a * double(t)) <= 3.0);
    }
}

TEST_CASE("probability front matches the Airy-corrected caustic") {
    // Near s = |a| the kernel is an Airy function of (x - |a| t) / (t |p'''| / 2)^{1/3};
    // |Ai|^2 peaks at -1.0188 in those units.
    for (std::int64_t t : {512, 2048}) {
        for (double a : as) {
            CAPTURE(a);
            CAPTURE(t);
            const ConstantCoin c(a, std::sqrt(1 - a * a));
            const Dispersion d(c);
            const double width = std::cbrt(double(t) * std::abs(d.d3p(std::numbers::pi / 2)) / 2);
            const double predicted = a * double(t) - 1.0188 * width;
            const auto u = linear_power(GridState::delta(1, 0), c.matrix(), t);
            CHECK(std::abs(double(right_front(u, t)) - predicted) <= 1.5);
        }
    }
}

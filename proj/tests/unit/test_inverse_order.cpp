#include "support.hpp"

#include "qwalk/inverse.hpp"

#include <doctest.h>

#include <numbers>

using namespace qwalk;

namespace {

const Mat2 c0 = Mat2::rotation(std::numbers::pi / 4);
const Complex I{0.0, 1.0};

/// e(lambda) / e(lambda / 2) for both reconstructed derivatives.
std::array<double, 2> halving_ratio(const WalkConfig& cfg, double lambda) {
    const auto t1 = derivative_at_origin(cfg.nonlinear, 1), t2 = derivative_at_origin(cfg.nonlinear, 2);
    const auto at = probe_functionals(cfg, lambda);
    const auto big = reconstruct(at, probe_functionals(cfg, 2 * lambda));
    const auto small = reconstruct(probe_functionals(cfg, lambda / 2), at);
    return {operator_norm(big.d1 - t1) / operator_norm(small.d1 - t1),
            operator_norm(big.d2 - t2) / operator_norm(small.d2 - t2)};
}

} // namespace

// Third-order convergence: halving lambda divides the error by 4 to 16.
TEST_CASE("third order reconstruction, Kerr(1, -0.5)") {
    const WalkConfig cfg{c0, NonlinearCoin::kerr_diagonal(1.0, -0.5), 0};
    for (double l : {0.3, 0.2}) {
        CAPTURE(l);
        const auto r = halving_ratio(cfg, l);
        CHECK(r[0] >= 4);
        CHECK(r[0] <= 16);
        CHECK(r[1] >= 4);
        CHECK(r[1] <= 16);
    }
}

TEST_CASE("third order reconstruction, squared Gross-Neveu") {
    const WalkConfig cfg{c0, NonlinearCoin::gross_neveu(1.0, std::numbers::pi / 4).with_squared_arguments(), 0};
    for (double l : {0.3, 0.2}) {
        CAPTURE(l);
        const auto r = halving_ratio(cfg, l);
        CHECK(r[0] >= 4);
        CHECK(r[0] <= 16);
        CHECK(r[1] >= 4);
        CHECK(r[1] <= 16);
    }
}

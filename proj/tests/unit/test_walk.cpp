#include "support.hpp"

#include "qwalk/error.hpp"
#include "qwalk/walk.hpp"

#include <doctest.h>

#include <numbers>

using namespace qwalk;

namespace {

const double r2 = 1 / std::numbers::sqrt2;
const Mat2 c_half{r2, r2, -r2, r2};

/// Dense reference step on an explicit window, written from the definition:
/// v = C u(x); new u1(x) = v1(x + 1), new u2(x) = v2(x - 1).
std::vector<Spinor> reference_step(const std::vector<Spinor>& u, const Mat2& c0, const NonlinearCoin& coin) {
    const std::size_t n = u.size();
    std::vector<Spinor> v(n), out(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (c0 * coin.evaluate(std::norm(u[i].c1), std::norm(u[i].c2))).apply(u[i]);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n)
            out[i].c1 = v[i + 1].c1;
        if (i >= 1)
            out[i].c2 = v[i - 1].c2;
    }
    return out;
}

std::vector<NonlinearCoin> coins() {
    return {NonlinearCoin::identity(),
            NonlinearCoin::optical_galton(1.0),
            NonlinearCoin::gross_neveu(1.0, 0.3),
            NonlinearCoin::thirring(1.0, 0.3),
            NonlinearCoin::rotation_power(0.3, 1.0, -1, 1.5),
            NonlinearCoin::kerr_diagonal(1.0, 1.0),
            NonlinearCoin::gross_neveu(1.0, 0.3).with_squared_arguments()};
}

} // namespace

TEST_CASE("one linear step by hand") {
    const WalkConfig cfg{c_half, NonlinearCoin::identity(), 1};
    const auto u1 = step_nonlinear(GridState::delta(1, 0), cfg);
    // C0 e1 = (r2, -r2); component 1 goes left and component 2 right.
    CHECK(u1.at(-1) == Spinor{r2, 0.0});
    CHECK(u1.at(1) == Spinor{0.0, -r2});
    CHECK(u1.at(0) == Spinor{});
    CHECK(u1.lo() == -1);
    CHECK(u1.hi() == 1);
    CHECK(step_nonlinear(GridState{}, cfg).empty());
}

TEST_CASE("steps match a dense reference implementation") {
    std::mt19937_64 rng(21);
    const Mat2 c0 = Mat2::rotation(0.9);
    for (const auto& coin : coins()) {
        CAPTURE(coin.name());
        const auto u0 = test::random_state(rng, 6, -2, 0.6);
        const WalkConfig cfg{c0, coin, 0};
        const std::int64_t steps = 12, lo = u0.lo() - steps - 1;
        std::vector<Spinor> dense(u0.size() + 2 * steps + 2);
        for (std::int64_t x = u0.lo(); x <= u0.hi(); ++x)
            dense[x - lo] = u0.at(x);
        // Compared one step at a time: over many steps the nonlinearity
        // amplifies rounding differences between the two implementations.
        double diff = 0;
        for (int t = 0; t < steps; ++t) {
            const GridState u = step_nonlinear(GridState(lo, dense), cfg);
            dense = reference_step(dense, c0, coin);
            for (std::size_t i = 0; i < dense.size(); ++i) {
                const Spinor s = u.at(lo + std::int64_t(i));
                diff = std::max({diff, std::abs(s.c1 - dense[i].c1), std::abs(s.c2 - dense[i].c2)});
            }
        }
        CHECK(diff <= 1e-14);
    }
}

TEST_CASE("inverse step undoes the forward step") {
    std::mt19937_64 rng(22);
    const Mat2 c0{Complex(0.6, 0.3), Complex(0.5, -0.5477225575051661), Complex(-0.5, -0.5477225575051661),
                  Complex(0.6, -0.3)};
    for (int trial = 0; trial < 10; ++trial) {
        const auto u = test::random_state(rng, 5 + trial, trial);
        const auto back = linear_step(linear_step(u, c0, Direction::forward), c0, Direction::inverse);
        CHECK(l2_norm(sub(back, u)) <= 1e-14);
        const auto fwd = linear_step(linear_step(u, c0, Direction::inverse), c0, Direction::forward);
        CHECK(l2_norm(sub(fwd, u)) <= 1e-14);
    }
    const auto u = test::random_state(rng, 4);
    CHECK(l2_norm(sub(linear_power(linear_power(u, c0, 37), c0, -37), u)) <= 1e-13);
}

TEST_CASE("linear propagation basics") {
    const auto d = GridState::delta(1, 0);
    CHECK(linf_norm(linear_power(d, c_half, 0)) == 1.0);
    for (std::int64_t t : {1, 5, 64}) {
        const auto u = linear_power(d, c_half, t);
        CHECK(u.lo() >= -t);
        CHECK(u.hi() <= t);
    }
}

TEST_CASE("norm conservation, propagation speed and gauge covariance") {
    std::mt19937_64 rng(23);
    for (const auto& coin : coins()) {
        CAPTURE(coin.name());
        const WalkConfig cfg{Mat2::rotation(0.5), coin, 300};
        const auto u0 = test::random_state(rng, 4, 3, 0.4);
        const auto ut = rotate_phase(u0, 1.1);
        GridState u = u0, v = ut;
        const double n0 = l2_norm(u0);
        for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
            u = step_nonlinear(u, cfg);
            v = step_nonlinear(v, cfg);
            CHECK(std::abs(l2_norm(u) - n0) <= 1e-12 * double(t));
            CHECK(u.lo() >= u0.lo() - t);
            CHECK(u.hi() <= u0.hi() + t);
        }
        double worst = 0;
        for (std::int64_t x = u.lo(); x <= u.hi(); ++x)
            worst = std::max(worst, std::abs(std::sqrt(u.at(x).norm_sq()) - std::sqrt(v.at(x).norm_sq())));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("evolve records diagnostics and states") {
    const WalkConfig t0{c_half, NonlinearCoin::identity(), 0};
    const auto u0 = GridState::delta(1, 0);
    const auto traj0 = evolve(u0, t0);
    REQUIRE(traj0.states.size() == 1);
    CHECK(traj0.states[0] == u0);
    CHECK(traj0.diagnostics.size() == 1);

    const WalkConfig cfg{c_half, NonlinearCoin::thirring(1.0, 0.2), 40};
    const auto u1 = scale(0.8, u0);
    const auto traj = evolve(u1, cfg);
    CHECK(traj.states.size() == 41);
    CHECK(traj.diagnostics.size() == 41);
    for (const auto& s : traj.states) {
        double total = 0;
        for (double p : probabilities(s))
            total += p;
        CHECK(total == doctest::Approx(0.64).epsilon(1e-13));
    }
    CHECK(traj.final_state == traj.states.back());
    const auto& d = traj.diagnostics[7];
    CHECK(d.t == 7);
    CHECK(d.l2 == doctest::Approx(0.8));
    CHECK(d.linf == linf_norm(traj.states[7]));
    CHECK(d.support_lo == traj.states[7].lo());

    const WalkConfig lin{c_half, NonlinearCoin::identity(), 40};
    const auto tl = evolve(u0, lin);
    for (std::int64_t t = 0; t <= 40; ++t)
        CHECK(l2_norm(sub(tl.states[t], linear_power(u0, c_half, t))) <= 1e-12);

    TrajectoryOptions sparse;
    sparse.diagnostics_every = 15;
    sparse.record_states = false;
    const auto ts = evolve(u0, lin, sparse);
    CHECK(ts.states.empty());
    REQUIRE(ts.diagnostics.size() == 4);
    CHECK(ts.diagnostics.back().t == 40);
    CHECK_THROWS_AS(evolve(u0, WalkConfig{c_half, {}, -1}), Error);
}

TEST_CASE("Duhamel identity") {
    const auto u0 = GridState::delta(1, 0, 0.1);
    const WalkConfig lin{c_half, NonlinearCoin::identity(), 100};
    for (double r : duhamel_residuals(u0, lin, 100))
        CHECK(r == 0.0);
    const WalkConfig th{c_half, NonlinearCoin::thirring(1.0, 0.3), 50};
    CHECK(duhamel_residual(u0, th, 50) <= 1e-10);
    CHECK(duhamel_residual(u0, th, 1) <= 1e-14);
    CHECK_THROWS_AS(duhamel_residual(u0, th, 51), Error);
    std::mt19937_64 rng(24);
    for (const auto& coin : coins()) {
        const WalkConfig cfg{Mat2::rotation(0.7), coin, 200};
        const auto v = test::random_state(rng, 3, 0, 0.5);
        const auto res = duhamel_residuals(v, cfg, 200);
        CHECK(*std::max_element(res.begin(), res.end()) <= 1e-10);
    }
}

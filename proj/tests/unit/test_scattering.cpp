#include "support.hpp"

#include "qwalk/scattering.hpp"

#include <doctest.h>

#include <numbers>

using namespace qwalk;

namespace {

const Mat2 c0 = Mat2::rotation(std::numbers::pi / 4);

GridState packet(double l1, double width = 4.0) {
    const auto u = gaussian_wavepacket(0.0, width, 0.0, {1.0, Complex(0, 1)});
    return scale(l1 / l1_norm(u), u);
}

} // namespace

TEST_CASE("tail monitor on geometric terms") {
    TailOptions o;
    o.tol = 1e-6;
    TailMonitor m(o);
    std::size_t n = 0;
    for (double d = 1.0;; d *= 0.5) {
        ++n;
        if (m.push(d))
            break;
        REQUIRE(n < 200);
    }
    // Certified once d / (1 - 0.5) <= 1e-6, i.e. d <= 5e-7, and 10 ratios are in.
    const double last = m.terms().back();
    CHECK(last <= 5e-7);
    CHECK(last * 2 > 5e-7);
    CHECK(m.rate() == doctest::Approx(0.5));
    CHECK(m.tail_bound() == doctest::Approx(2 * last));
    CHECK(m.monotone());
}

TEST_CASE("tail monitor rejects growth and resets on spikes") {
    TailOptions o;
    o.tol = 1e-3;
    TailMonitor grow(o);
    for (int k = 0; k < 100; ++k)
        CHECK_FALSE(grow.push(1e-4 * (1 + k)));
    CHECK_FALSE(grow.monotone());

    TailMonitor spike(o);
    double d = 1.0;
    for (int k = 0; k < 30; ++k, d *= 0.9)
        spike.push(d);
    CHECK(spike.monotone());
    spike.push(d * 2);
    CHECK_FALSE(spike.monotone());
    CHECK(spike.guard_trips() == 1);
}

TEST_CASE("linear coin: the scattering state is the data") {
    std::mt19937_64 rng(51);
    const auto u0 = test::random_state(rng, 5);
    const WalkConfig cfg{c0, NonlinearCoin::identity(), 0};
    const auto r = wave_operator(u0, cfg);
    CHECK(r.u_plus == u0);
    CHECK(r.t_star == 0);
    CHECK(r.certified);
    for (double v : scattering_defect(u0, cfg, u0, {0, 10, 100}).values)
        CHECK(v == 0.0);
}

TEST_CASE("small Kerr data certifies") {
    const WalkConfig cfg{c0, NonlinearCoin::kerr_diagonal(1.0, 1.0), 0};
    const auto u0 = packet(0.2);
    const auto r = wave_operator(u0, cfg);
    REQUIRE(r.certified);
    CHECK(r.tail_bound <= 1e-10);
    CHECK(r.monotone_tail);
    CHECK(r.coin_order == 2.0);
    CHECK(r.partial_sums_deltas.size() == std::size_t(r.t_star + 1));
    CHECK(std::abs(l2_norm(r.u_plus) - l2_norm(u0)) <= 4e-10);

    // Independent check: evolve u0 nonlinearly and u+ linearly.
    const auto defect = scattering_defect(u0, cfg, r.u_plus, {r.t_star, 2 * r.t_star});
    CHECK(defect.values[0] <= 2e-10);
    CHECK(defect.values[1] <= 2e-10);
    const auto back = linear_power(nonlinear_power(u0, cfg, r.t_star), cfg.constant, -r.t_star);
    CHECK(l2_norm(sub(back, r.u_plus)) <= 2e-10);

    // Beyond the start of the monotone tail no term grows by more than 10%.
    const auto& d = r.partial_sums_deltas;
    std::size_t start = 0;
    int streak = 0;
    for (std::size_t t = 4; t < d.size(); ++t) {
        streak = d[t] < d[t - 4] ? streak + 1 : 0;
        if (streak == 10) {
            start = t;
            break;
        }
    }
    REQUIRE(start > 0);
    for (std::size_t t = start + 1; t < d.size(); ++t)
        CHECK(d[t] <= 1.10 * d[t - 1]);

    // Term norms decay at least like <t>^{-4/3}.
    DecaySeries terms;
    for (std::size_t t = 16; t < d.size(); ++t) {
        terms.times.push_back(std::int64_t(t));
        terms.values.push_back(d[t]);
    }
    CHECK(fit_decay(terms, r.t_star / 8, r.t_star).slope <= -4.0 / 3);
}

TEST_CASE("large data is reported as not certified") {
    const WalkConfig cfg{c0, NonlinearCoin::kerr_diagonal(1.0, 1.0), 0};
    TailOptions o;
    o.t_max = 2000;
    const auto u0 = GridState::delta(1, 0, 0.45);
    try {
        wave_operator(u0, cfg, o);
        FAIL("expected NotCertified");
    } catch (const NotCertified& e) {
        CHECK(e.code() == ErrorCode::non_convergence);
        CHECK_FALSE(e.partial().certified);
        CHECK(e.partial().partial_sums_deltas.size() == 2001);
    }
}

TEST_CASE("l5 decay of small nonlinear data") {
    const WalkConfig lin{c0, NonlinearCoin::identity(), 0};
    const auto delta = GridState::delta(1, 0);
    const auto f = l5_decay_check(delta, lin);
    REQUIRE(f);
    CHECK(std::abs(f->slope + 4.0 / 15) <= 0.05);
    const WalkConfig kerr{c0, NonlinearCoin::kerr_diagonal(1.0, 1.0), 0};
    const auto g = l5_decay_check(GridState::delta(1, 0, 0.05), kerr);
    REQUIRE(g);
    CHECK(std::abs(g->slope + 4.0 / 15) <= 0.05);
    CHECK(g->slope <= -4.0 / 15 + 0.05);
    CHECK_FALSE(l5_decay_check(GridState{}, kerr).has_value());
}

TEST_CASE("paired series matches two direct wave operators") {
    const WalkConfig cfg{c0, NonlinearCoin::kerr_diagonal(1.0, -0.5), 0};
    const auto u0 = packet(0.2, 3.0);
    const TailOptions o;
    const auto ws = wave_operator(u0, cfg, o);
    const auto wu = wave_operator(linear_step(u0, cfg.constant, Direction::forward), cfg, o);
    const auto direct = sub(linear_step(wu.u_plus, cfg.constant, Direction::inverse), ws.u_plus);
    const auto paired = intertwining_defect(u0, cfg, o);
    CHECK(l2_norm(sub(paired.value, direct)) <= ws.tail_bound + wu.tail_bound + 1e-12);
    CHECK(l2_norm(direct) > 10 * (ws.tail_bound + wu.tail_bound));
    CHECK(paired.terms > 0);
    CHECK(intertwining_defect(u0, WalkConfig{c0, {}, 0}, o).value.empty());
}

#include "support.hpp"

#include "qwalk/inverse.hpp"

#include <doctest.h>

#include <numbers>

using namespace qwalk;

namespace {

const Mat2 c0 = Mat2::rotation(std::numbers::pi / 4);
const Complex I{0.0, 1.0};

} // namespace

TEST_CASE("probe states") {
    const auto p1 = probe_state(1, 0.3);
    CHECK(p1.lo() == 0);
    CHECK(p1.size() == 1);
    CHECK(p1.at(0).c1 == Complex(0.09));
    CHECK(std::abs(p1.at(0).c2 - 0.027) <= 1e-17);
    const auto p2 = probe_state(2, 0.3);
    CHECK(std::abs(p2.at(0).c1 - 0.027) <= 1e-17);
    CHECK(p2.at(0).c2 == Complex(0.09));
    CHECK(l1_norm(p1) == doctest::Approx(std::hypot(0.09, 0.027)));
}

TEST_CASE("difference operator") {
    CHECK(d_lambda(2.0, 2.0, 0.3) == Complex(0.0));
    const Complex A(1, 2), B(-0.5, 0.25), E(0.3, -0.1);
    auto g = [&](double l) { return A + B * l; };
    CHECK(std::abs(d_lambda(g(0.2), g(0.4), 0.2) - B) <= 4e-15);
    auto h = [&](double l) { return A + B * l + E * std::pow(l, 4); };
    const double l = 0.2;
    CHECK(std::abs(d_lambda(h(l), h(2 * l), l) - (B + 15.0 * E * std::pow(l, 3))) <= 1e-14);
}

TEST_CASE("linear coin gives zero functionals") {
    const WalkConfig cfg{c0, NonlinearCoin::identity(), 0};
    const auto p = probe_functionals(cfg, 0.3);
    for (const auto& row : p.L)
        for (const auto& v : row)
            CHECK(v == Complex(0.0));
    const auto rec = reconstruct(p, probe_functionals(cfg, 0.6));
    CHECK(rec.d1 == Mat2::zero());
    CHECK(rec.d2 == Mat2::zero());
}

TEST_CASE("Kerr(1, 0): L11 tends to i") {
    const WalkConfig cfg{c0, NonlinearCoin::kerr_diagonal(1.0, 0.0), 0};
    double prev = INFINITY;
    for (double l : {0.3, 0.2, 0.1}) {
        const auto p = probe_functionals(cfg, l);
        const auto taylor = taylor_functionals(cfg, l);
        // Single-site oracle from the closed form: lambda^{-10} (e^{i lambda^8} - 1) lambda^2.
        const double phi = std::pow(l, 8);
        const Complex oracle = Complex(-2 * std::pow(std::sin(phi / 2), 2), std::sin(phi)) / phi;
        CHECK(std::abs(taylor[0][0] - oracle) <= 1e-12);
        const double err = std::abs(p.L[0][0] - I);
        CHECK(err < prev);
        prev = err;
        CHECK(p.terms[0] > 0);
        CHECK(p.tail[0] <= std::pow(l, 14));
    }
    CHECK(prev <= 0.05);
}

TEST_CASE("functionals stay close to the single-site Taylor term") {
    const WalkConfig cfg{c0, NonlinearCoin::kerr_diagonal(1.0, -0.5), 0};
    std::vector<double> ratios;
    for (double l : {0.3, 0.2}) {
        const auto p = probe_functionals(cfg, l);
        const auto t = taylor_functionals(cfg, l);
        double diff = 0;
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < 2; ++j)
                diff = std::max(diff, std::abs(p.L[k][j] - t[k][j]));
        ratios.push_back(diff / std::pow(l, 8));
    }
    // Constant C in C lambda^8 does not blow up between the two lambdas.
    CHECK(ratios[1] <= 2 * ratios[0] + 1e-3);
}

TEST_CASE("reconstruction against the Kerr ground truth") {
    const WalkConfig cfg{c0, NonlinearCoin::kerr_diagonal(1.0, -0.5), 0};
    const auto at = probe_functionals(cfg, 0.3), at2 = probe_functionals(cfg, 0.6);
    const auto rec = reconstruct(at, at2);
    // Row j of d1 is (L_1j - lambda D L_1j, D L_1j).
    const Complex d = d_lambda(at.L[0][1], at2.L[0][1], 0.3);
    CHECK(rec.d1.m11 == d);
    CHECK(rec.d1.m10 == at.L[0][1] - 0.3 * d);
    const double e1 = operator_norm(rec.d1 - Mat2::diag(I, 0.0));
    const double e2 = operator_norm(rec.d2 - Mat2::diag(0.0, -0.5 * I));
    CHECK(e1 <= 0.5);
    CHECK(e2 <= 0.5);
    const auto h = reconstruct(probe_functionals(cfg, 0.15), at);
    const double f1 = operator_norm(h.d1 - Mat2::diag(I, 0.0));
    const double f2 = operator_norm(h.d2 - Mat2::diag(0.0, -0.5 * I));
    CHECK(e1 / f1 >= 4);
    CHECK(e2 / f2 >= 4);
}

TEST_CASE("order study report") {
    const WalkConfig cfg{c0, NonlinearCoin::gross_neveu(1.0, std::numbers::pi / 4).with_squared_arguments(), 0};
    OrderStudyOptions o;
    o.threads = 2;
    const auto rep = order_study(cfg, {0.4, 0.3, 0.2}, o);
    REQUIRE(rep.truth1);
    CHECK(rep.entries.size() == 5);
    CHECK(rep.warnings.empty());
    for (std::size_t i = 1; i < rep.entries.size(); ++i)
        CHECK(rep.entries[i].lambda < rep.entries[i - 1].lambda);
    for (double l : {0.4, 0.3, 0.2}) {
        const auto* e = rep.find(l);
        REQUIRE(e);
        REQUIRE(e->order1);
        REQUIRE(e->order2);
        CHECK(*e->order1 >= 2);
        CHECK(*e->order1 <= 4);
        CHECK(*e->order2 >= 2);
        CHECK(*e->order2 <= 4);
    }
    const auto* small = rep.find(0.1);
    REQUIRE(small);
    CHECK_FALSE(small->order1);
    CHECK(std::find(small->flags.begin(), small->flags.end(), "outside_window") != small->flags.end());
    CHECK(std::find(rep.find(0.4)->flags.begin(), rep.find(0.4)->flags.end(), "probe_2x_outside_window") !=
          rep.find(0.4)->flags.end());

    const auto tiny = order_study(cfg, {0.05}, o);
    const auto& fl = tiny.entries.front().flags;
    CHECK(std::find(fl.begin(), fl.end(), "roundoff") != fl.end());

    const WalkConfig plain{c0, NonlinearCoin::gross_neveu(1.0, 0.3), 0};
    const auto rep2 = order_study(plain, {0.3}, o);
    CHECK_FALSE(rep2.truth1);
    CHECK_FALSE(rep2.warnings.empty());
    CHECK_FALSE(rep2.entries.front().err1);
    const auto& f2 = rep2.entries.front().flags;
    CHECK(std::find(f2.begin(), f2.end(), "not_certified") != f2.end());

    NonlinearCoin::Custom table;
    const char* phase[] = {"s1 * s2", "0", "0", "s1 * s1"};
    for (int k = 0; k < 4; ++k) {
        table.magnitude[k] = Expr::parse(k == 1 || k == 2 ? "0" : "1");
        table.phase[k] = Expr::parse(phase[k]);
    }
    table.order = 2;
    const auto rep3 = order_study(WalkConfig{c0, NonlinearCoin::custom(table, false), 0}, {0.3}, o);
    CHECK_FALSE(rep3.truth1);
    REQUIRE(rep3.warnings.size() == 1);
    CHECK(rep3.entries.front().flags == std::vector<std::string>{"probe_2x_outside_window"});
    CHECK(max_abs_entry(rep3.entries.front().d1_hat) > 0);
}

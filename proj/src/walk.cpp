#include "qwalk/walk.hpp"

#include "qwalk/error.hpp"

#include <cmath>
#include <limits>
#include <variant>

namespace qwalk {

namespace {

/// Subnormal amplitudes (below ~2.2e-308) are flushed to zero: they carry no
/// information at double precision and slow arithmetic down severalfold.
inline Complex flush(Complex z) {
    constexpr double tiny = std::numeric_limits<double>::min();
    return {std::abs(z.real()) < tiny ? 0.0 : z.real(), std::abs(z.imag()) < tiny ? 0.0 : z.imag()};
}

/// Shift after coining: component 1 of cell i lands one site left, component 2
/// one site right. The output window is [lo - 1, hi + 1].
template <class CoinAt>
GridState coin_then_shift(const GridState& u, CoinAt&& coin_at) {
    if (u.empty())
        return {};
    const auto in = u.cells();
    const std::size_t n = in.size();
    std::vector<Spinor> out(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Spinor v = coin_at(in[i]);
        out[i].c1 = flush(v.c1);
        out[i + 2].c2 = flush(v.c2);
    }
    return GridState(u.lo() - 1, std::move(out));
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

/// Calls run(kernel) with kernel(v) = C_N(|v1|^2, |v2|^2) v, dispatching on the
/// coin kind once per step instead of once per site.
template <class Run>
GridState with_coin_kernel(const NonlinearCoin& coin, Run&& run) {
    const bool squared = coin.squared();
    auto arg = [squared](Complex z) {
        const double s = std::norm(z);
        return squared ? s * s : s;
    };
    using C = NonlinearCoin;
    return std::visit(
        overloaded{
            [&](const C::OpticalGalton& c) {
                return run([&, g = c.g](const Spinor& v) {
                    return Spinor{v.c1 * cis(g * arg(v.c1)), v.c2 * cis(g * arg(v.c2))};
                });
            },
            [&](const C::KerrDiagonal& c) {
                return run([&, g1 = c.g1, g2 = c.g2](const Spinor& v) {
                    return Spinor{v.c1 * cis(g1 * arg(v.c1)), v.c2 * cis(g2 * arg(v.c2))};
                });
            },
            [&](const C::Thirring& c) {
                return run([&, g = c.g](const Spinor& v) {
                    const Complex e = cis(g * (arg(v.c1) + arg(v.c2)));
                    return Spinor{e * v.c1, e * v.c2};
                });
            },
            [&](const C::GrossNeveu& c) {
                const Mat2 r = Mat2::rotation(c.theta), r_inv = Mat2::rotation(-c.theta);
                return run([&, g = c.g, r, r_inv](const Spinor& v) {
                    const double d = g * (arg(v.c1) - arg(v.c2));
                    const Spinor w = r.apply(v);
                    return r_inv.apply({w.c1 * cis(-d), w.c2 * cis(d)});
                });
            },
            [&](const auto&) {
                return run([&](const Spinor& v) { return coin.evaluate(std::norm(v.c1), std::norm(v.c2)).apply(v); });
            }},
        coin.params());
}

} // namespace

GridState step_nonlinear(const GridState& u, const WalkConfig& cfg) {
    if (cfg.nonlinear.is_linear())
        return linear_step(u, cfg.constant, Direction::forward);
    const Mat2& c0 = cfg.constant;
    const NonlinearCoin& coin = cfg.nonlinear;
    return with_coin_kernel(coin, [&](auto&& kernel) {
        return coin_then_shift(u, [&](const Spinor& s) { return c0.apply(kernel(s)); });
    });
}

GridState linear_step(const GridState& u, const Mat2& c0, Direction direction) {
    if (direction == Direction::forward)
        return coin_then_shift(u, [&](const Spinor& s) { return c0.apply(s); });
    if (u.empty())
        return {};
    // U0^{-1} = C0* S^{-1}: component 1 moves right, component 2 moves left.
    const Mat2 c0_inv = c0.adjoint();
    const auto in = u.cells();
    const std::size_t n = in.size();
    std::vector<Spinor> out(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        out[i + 2].c1 = in[i].c1;
        out[i].c2 = in[i].c2;
    }
    for (auto& c : out) {
        const Spinor v = c0_inv.apply(c);
        c = {flush(v.c1), flush(v.c2)};
    }
    return GridState(u.lo() - 1, std::move(out));
}

GridState linear_power(const GridState& u, const Mat2& c0, std::int64_t t) {
    GridState v = u;
    const Direction d = t >= 0 ? Direction::forward : Direction::inverse;
    for (std::int64_t k = 0; k < std::abs(t); ++k)
        v = linear_step(v, c0, d);
    return v;
}

GridState nonlinear_power(const GridState& u0, const WalkConfig& cfg, std::int64_t t) {
    if (t < 0)
        fail(ErrorCode::invalid_argument, "nonlinear evolution is defined for t >= 0 only");
    GridState v = u0;
    for (std::int64_t k = 0; k < t; ++k)
        v = step_nonlinear(v, cfg);
    return v;
}

Diagnostics diagnose(std::int64_t t, const GridState& u, bool with_weak_l4) {
    Diagnostics d;
    d.t = t;
    d.l2 = l2_norm(u);
    d.l5 = norm(u, NormKind::lp(5));
    d.linf = linf_norm(u);
    d.weak_l4 = with_weak_l4 ? norm(u, NormKind::weak_lp(4)) : std::nan("");
    if (!u.empty()) {
        d.support_lo = u.lo();
        d.support_hi = u.hi();
    }
    return d;
}

Trajectory evolve(const GridState& u0, const WalkConfig& cfg, const TrajectoryOptions& options) {
    if (cfg.horizon < 0)
        fail(ErrorCode::invalid_argument, "horizon must be >= 0");
    if (options.diagnostics_every < 1)
        fail(ErrorCode::invalid_argument, "diagnostics_every must be >= 1");
    const bool keep = options.record_states.value_or(cfg.horizon <= 4096);
    Trajectory traj;
    GridState u = u0;
    for (std::int64_t t = 0;; ++t) {
        if (options.observer)
            options.observer(t, u);
        if (keep)
            traj.states.push_back(u);
        if (t % options.diagnostics_every == 0 || t == cfg.horizon)
            traj.diagnostics.push_back(diagnose(t, u, options.weak_l4));
        if (t == cfg.horizon)
            break;
        u = step_nonlinear(u, cfg);
    }
    traj.final_state = std::move(u);
    return traj;
}

std::vector<double> probabilities(const GridState& u) {
    std::vector<double> p;
    p.reserve(u.size());
    for (const auto& s : u.cells())
        p.push_back(s.norm_sq());
    return p;
}

std::vector<double> duhamel_residuals(const GridState& u0, const WalkConfig& cfg, std::int64_t t_max) {
    if (t_max < 0)
        fail(ErrorCode::invalid_argument, "t must be >= 0");
    std::vector<double> residuals;
    residuals.reserve(static_cast<std::size_t>(t_max + 1));
    GridState u = u0;        // U(t) u0
    GridState free = u0;     // U0^t u0
    GridState duhamel;       // sum_{s<t} U0^{t-s} (C_N - I) u(s)
    for (std::int64_t t = 0;; ++t) {
        residuals.push_back(l2_norm(sub(sub(u, free), duhamel)));
        if (t == t_max)
            break;
        duhamel = linear_step(add(duhamel, nonlinear_source(cfg.nonlinear, u)), cfg.constant, Direction::forward);
        free = linear_step(free, cfg.constant, Direction::forward);
        u = step_nonlinear(u, cfg);
    }
    return residuals;
}

double duhamel_residual(const GridState& u0, const WalkConfig& cfg, std::int64_t t) {
    if (t > cfg.horizon)
        fail(ErrorCode::invalid_argument, "duhamel_residual requires t <= horizon");
    return duhamel_residuals(u0, cfg, t).back();
}

} // namespace qwalk

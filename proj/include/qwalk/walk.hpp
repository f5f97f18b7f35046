#pragma once

// Evolution operators: U = S C (nonlinear), U0 = S C0 and its inverse,
// trajectories with per-step diagnostics, and the Duhamel identity.
//
// Shift convention: (T_- v)(x) = v(x+1) acts on component 1 and
// (T_+ v)(x) = v(x-1) on component 2, so component 1 moves toward negative x.

#include "qwalk/coin.hpp"
#include "qwalk/grid_state.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace qwalk {

struct WalkConfig {
    /// Any unitary C0; spectral tools additionally require the (a b; -b* a*) shape.
    Mat2 constant = Mat2::identity();
    NonlinearCoin nonlinear;
    std::int64_t horizon = 0;
};

enum class Direction { forward, inverse };

/// U u = S (C0 C_N(|u1|^2, |u2|^2) u).
GridState step_nonlinear(const GridState& u, const WalkConfig& cfg);

/// U0 u = S C0 u, or U0^{-1} u = C0* S^{-1} u.
GridState linear_step(const GridState& u, const Mat2& c0, Direction direction);

/// U0^t u for any integer t (negative t applies the inverse).
GridState linear_power(const GridState& u, const Mat2& c0, std::int64_t t);

/// U(t) u0 by t nonlinear steps.
GridState nonlinear_power(const GridState& u0, const WalkConfig& cfg, std::int64_t t);

/// Per-step norm diagnostics of u(t).
struct Diagnostics {
    std::int64_t t = 0;
    double l2 = 0, l5 = 0, linf = 0, weak_l4 = 0;
    std::int64_t support_lo = 0, support_hi = -1;
};

Diagnostics diagnose(std::int64_t t, const GridState& u, bool with_weak_l4 = true);

struct TrajectoryOptions {
    /// Keep u(0..T). Default: on for T <= 4096, off above (diagnostics only).
    std::optional<bool> record_states;
    /// Record diagnostics every this many steps (and always at t = T).
    std::int64_t diagnostics_every = 1;
    /// The weak-l4 norm needs a sort per sample; it can be skipped.
    bool weak_l4 = true;
    /// Optional observer called at every t with u(t), including t = 0.
    std::function<void(std::int64_t, const GridState&)> observer;
};

struct Trajectory {
    std::vector<GridState> states;
    std::vector<Diagnostics> diagnostics;
    GridState final_state;
};

Trajectory evolve(const GridState& u0, const WalkConfig& cfg, const TrajectoryOptions& options = {});

/// p_t(x) = ||u(t, x)||^2 over the stored window of u.
std::vector<double> probabilities(const GridState& u);

/// ||U(t)u0 - U0^t u0 - sum_{s<t} U0^{t-s} (C_N - I) U(s) u0||_{l2} for
/// t = 0..t_max. The sum is accumulated by its one-step recursion.
std::vector<double> duhamel_residuals(const GridState& u0, const WalkConfig& cfg, std::int64_t t_max);
double duhamel_residual(const GridState& u0, const WalkConfig& cfg, std::int64_t t);

} // namespace qwalk

#pragma once

// Finite-horizon checks of the linear and nonlinear decay estimates:
// sampled norm series, log-log slope fits and space-time Strichartz norms.

#include "qwalk/coin.hpp"
#include "qwalk/grid_state.hpp"
#include "qwalk/walk.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace qwalk {

struct DecaySeries {
    std::vector<std::int64_t> times;
    std::vector<double> values;
    NormKind kind = NormKind::linf();
    std::string initial;
};

/// About `count` distinct integers spaced evenly in log t over [t_min, t_max].
std::vector<std::int64_t> log_spaced_times(std::int64_t t_min, std::int64_t t_max, std::size_t count);

/// Evolves u0 once under cfg (linear when cfg.nonlinear is the identity) and
/// samples ||u(t)|| at the requested increasing times.
DecaySeries decay_series(const GridState& u0, const WalkConfig& cfg, const NormKind& kind,
                         const std::vector<std::int64_t>& times, std::string initial = {});

/// Several norms from a single trajectory.
std::vector<DecaySeries> decay_series(const GridState& u0, const WalkConfig& cfg, const std::vector<NormKind>& kinds,
                                      const std::vector<std::int64_t>& times, std::string initial = {});

/// <t> = sqrt(1 + t^2).
inline double japanese_bracket(double t) { return std::sqrt(1.0 + t * t); }

enum class Abscissa { log_bracket_t, log_t };

struct SlopeFit {
    double slope = 0, intercept = 0, r2 = 0;
    std::int64_t t_min = 0, t_max = 0;
    std::size_t samples = 0;
};

/// Least squares of log value against log <t> (or log t) over samples with
/// t_min <= t <= t_max. Needs at least 8 samples, all positive.
SlopeFit fit_decay(const DecaySeries& series, std::int64_t t_min, std::int64_t t_max,
                   Abscissa abscissa = Abscissa::log_bracket_t);

/// max over the window of value * <t>^{-exponent} / scale, with exponent the
/// (negative) target rate; a finite-horizon stand-in for the constant C.
double fitted_constant(const DecaySeries& series, double exponent, std::int64_t t_min, std::int64_t t_max,
                       double scale = 1.0);

struct StrichartzCheckpoint {
    std::int64_t horizon = 0;
    double linf_l2 = 0;   // max_{t<=T} ||U0^t u0||_{l2}
    double l6_linf = 0;   // (sum_{t<=T} ||U0^t u0||_{linf}^6)^{1/6}
    double stz = 0;
    double ratio = 0;     // stz / ||u0||_{l2}
    double l6_ratio = 0;  // l6_linf / ||u0||_{l2}
};

struct StrichartzReport {
    std::int64_t horizon = 0;
    double linf_l2 = 0, l6_linf = 0, stz = 0, ratio = 0;
    /// Values at T = 1, 2, 4, ... and at the horizon.
    std::vector<StrichartzCheckpoint> doubling;
};

StrichartzReport strichartz_report(const GridState& u0, const Mat2& c0, std::int64_t horizon);

} // namespace qwalk

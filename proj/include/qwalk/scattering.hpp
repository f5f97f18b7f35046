#pragma once

// Scattering state u+ = W* u0 = u0 + sum_t U0^{-t} (C_N - I) U(t) u0 with a
// certified truncation, plus convergence diagnostics.

#include "qwalk/error.hpp"
#include "qwalk/estimates.hpp"
#include "qwalk/walk.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qwalk {

struct TailOptions {
    double tol = 1e-10;
    std::int64_t t_max = 100000;
    /// Consecutive ratios below 1 needed before the tail counts as monotone.
    int persistence = 10;
    /// Largest relative increase tolerated once the tail is monotone.
    double guard = 1.10;
    /// Ratios are taken over this many steps, r = (d_t / d_{t-lag})^{1/lag},
    /// so the period-2 and period-4 ripple of walk norms averages out.
    int lag = 4;
    /// From this many terms on, checked again at every doubling: a log-log
    /// slope above -1 over the last half of the terms means the series cannot
    /// be summed and the run stops early. 0 disables the check.
    std::int64_t divergence_after = 4096;
};

/// Watches a sequence of term norms and decides when the remaining tail is
/// below tol: the last term is <= tol, the worst of the last `persistence`
/// per-step ratios r is < 1, and term / (1 - r) <= tol. A term more than
/// `guard` times its predecessor breaks the monotone tail.
class TailMonitor {
public:
    explicit TailMonitor(TailOptions options) : options_(options) {}

    /// Adds the next term norm; returns true when the sum is certified.
    bool push(double term);

    double tail_bound() const { return tail_bound_; }
    double rate() const { return rate_; }
    /// The monotone tail has been established and not broken since.
    bool monotone() const { return monotone_from_.has_value(); }
    int guard_trips() const { return guard_trips_; }
    const std::vector<double>& terms() const { return terms_; }
    /// Set once the doubling check has seen a slope above -1.
    std::optional<double> divergent_slope() const { return divergent_slope_; }

private:
    void check_divergence();

    TailOptions options_;
    std::vector<double> terms_;
    std::vector<double> ratios_;
    std::optional<std::size_t> monotone_from_;
    int streak_ = 0;
    int guard_trips_ = 0;
    double tail_bound_ = 0;
    double rate_ = 0;
    std::optional<double> divergent_slope_;
};

struct WaveOperatorResult {
    GridState u_plus;
    std::int64_t t_star = 0;
    double tail_bound = 0;
    double rate = 0;
    bool certified = false;
    bool monotone_tail = false;
    int guard_trips = 0;
    /// ||d_t|| = ||S_t - S_{t-1}|| for t = 0..T*, d_t = U0^{-t} (C_N - I) U(t) u0.
    std::vector<double> partial_sums_deltas;
    std::optional<double> coin_order;
};

/// Raised when the term norms fail to certify before t_max; carries the
/// partial result.
class NotCertified : public Error {
public:
    NotCertified(const std::string& what, WaveOperatorResult partial)
        : Error(ErrorCode::non_convergence, what), partial_(std::move(partial)) {}
    const WaveOperatorResult& partial() const { return partial_; }

private:
    WaveOperatorResult partial_;
};

WaveOperatorResult wave_operator(const GridState& u0, const WalkConfig& cfg, const TailOptions& options = {});

/// ||U(t) u0 - U0^t u+||_{l2} sampled at increasing times.
DecaySeries scattering_defect(const GridState& u0, const WalkConfig& cfg, const GridState& u_plus,
                              const std::vector<std::int64_t>& times);

/// Slope of the nonlinear l5 series over [t_min, t_max]; nullopt when u0 = 0.
/// samples = 0 samples every integer t, otherwise about `samples` log-spaced
/// times (sparse sampling aliases the caustic ripple into the slope).
std::optional<SlopeFit> l5_decay_check(const GridState& u0, const WalkConfig& cfg, std::int64_t t_min = 64,
                                       std::int64_t t_max = 4096, std::size_t samples = 0);

struct IntertwiningResult {
    /// (U0^{-1} W* U0 - W*) u0.
    GridState value;
    std::int64_t terms = 0;
    double tail_bound = 0;
    std::vector<double> term_norms;
};

/// (U0^{-1} W* U0 - W*) u0 from the time-aligned series
///   -(C_N - I) u0 + sum_{s>=0} U0^{-(s+1)} [N(U(s) U0 u0) - N(U(s) U u0)],
/// whose terms are differences of two nearby trajectories. Certified with
/// options.tol as the l2 tail budget; throws Error(non_convergence) otherwise.
IntertwiningResult intertwining_defect(const GridState& u0, const WalkConfig& cfg, const TailOptions& options);

} // namespace qwalk

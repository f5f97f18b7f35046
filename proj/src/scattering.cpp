#include "qwalk/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qwalk {

bool TailMonitor::push(double term) {
    if (!terms_.empty()) {
        const double prev = terms_.back();
        if (monotone_from_ && term > options_.guard * prev) {
            monotone_from_.reset();
            streak_ = 0;
            ++guard_trips_;
        }
    }
    terms_.push_back(term);
    check_divergence();
    const auto lag = static_cast<std::size_t>(std::max(options_.lag, 1));
    if (terms_.size() <= lag)
        return false;
    const double base = terms_[terms_.size() - 1 - lag];
    const double r = base > 0 ? std::pow(term / base, 1.0 / static_cast<double>(lag)) : (term > 0 ? INFINITY : 0.0);
    ratios_.push_back(r);
    streak_ = r < 1.0 ? streak_ + 1 : 0;
    if (!monotone_from_ && streak_ >= options_.persistence)
        monotone_from_ = terms_.size() - 1;
    if (!monotone_from_ || term > options_.tol)
        return false;
    const auto n = static_cast<std::ptrdiff_t>(std::min<std::size_t>(ratios_.size(), options_.persistence));
    const double worst = *std::max_element(ratios_.end() - n, ratios_.end());
    if (!(worst < 1.0))
        return false;
    rate_ = worst;
    tail_bound_ = term / (1.0 - worst);
    return tail_bound_ <= options_.tol;
}

void TailMonitor::check_divergence() {
    const auto n = static_cast<std::int64_t>(terms_.size());
    const std::int64_t first = options_.divergence_after;
    if (first <= 0 || n < first || (n / first) * first != n || ((n / first) & (n / first - 1)) != 0)
        return;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::int64_t t = n / 2; t < n; ++t) {
        if (!(terms_[t] > 0))
            return;
        const double x = std::log(double(t)), y = std::log(terms_[t]);
        sx += x, sy += y, sxx += x * x, sxy += x * y, m += 1;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (slope > -1)
        divergent_slope_ = slope;
}

WaveOperatorResult wave_operator(const GridState& u0, const WalkConfig& cfg, const TailOptions& options) {
    if (!(options.tol > 0))
        fail(ErrorCode::invalid_argument, "wave_operator needs tol > 0");
    TailMonitor monitor(options);
    WaveOperatorResult result;
    result.coin_order = cfg.nonlinear.order();
    if (cfg.nonlinear.is_linear()) {
        result.u_plus = u0;
        result.certified = true;
        result.monotone_tail = true;
        result.partial_sums_deltas = {0.0};
        return result;
    }
    GridState u = u0;
    GridState z;  // sum_{s<t} U0^{t-s} N(u(s))
    for (std::int64_t t = 0; t <= options.t_max; ++t) {
        const GridState n = nonlinear_source(cfg.nonlinear, u);
        const bool done = monitor.push(l2_norm(n));
        if (monitor.divergent_slope())
            break;
        z = linear_step(add(z, n), cfg.constant, Direction::forward);
        if (done) {
            result.u_plus = add(u0, linear_power(z, cfg.constant, -(t + 1)));
            result.t_star = t;
            result.certified = true;
            break;
        }
        u = step_nonlinear(u, cfg);
    }
    result.tail_bound = monitor.tail_bound();
    result.rate = monitor.rate();
    result.monotone_tail = monitor.monotone();
    result.guard_trips = monitor.guard_trips();
    result.partial_sums_deltas = monitor.terms();
    if (!result.certified) {
        const double last = monitor.terms().empty() ? 0.0 : monitor.terms().back();
        char msg[200];
        if (const auto slope = monitor.divergent_slope()) {
            result.t_star = std::int64_t(monitor.terms().size()) - 1;
            std::snprintf(msg, sizeof msg,
                          "wave operator series not summable: term norms decay like t^%.3f by t = %lld (last term %.3g)",
                          *slope, static_cast<long long>(result.t_star), last);
        } else {
            result.t_star = options.t_max;
            std::snprintf(msg, sizeof msg, "wave operator series not certified by t_max = %lld (last term %.3g)",
                          static_cast<long long>(options.t_max), last);
        }
        throw NotCertified(msg, std::move(result));
    }
    return result;
}

DecaySeries scattering_defect(const GridState& u0, const WalkConfig& cfg, const GridState& u_plus,
                              const std::vector<std::int64_t>& times) {
    DecaySeries series;
    series.kind = NormKind::lp(2);
    series.initial = "defect";
    GridState u = u0, v = u_plus;
    std::int64_t t = 0;
    for (const std::int64_t target : times) {
        if (target < t)
            fail(ErrorCode::invalid_argument, "sample times must be increasing");
        for (; t < target; ++t) {
            u = step_nonlinear(u, cfg);
            v = linear_step(v, cfg.constant, Direction::forward);
        }
        series.times.push_back(target);
        series.values.push_back(l2_norm(sub(u, v)));
    }
    return series;
}

std::optional<SlopeFit> l5_decay_check(const GridState& u0, const WalkConfig& cfg, std::int64_t t_min,
                                       std::int64_t t_max, std::size_t samples) {
    if (u0.empty())
        return std::nullopt;
    std::vector<std::int64_t> times;
    if (samples == 0)
        for (std::int64_t t = t_min; t <= t_max; ++t)
            times.push_back(t);
    else
        times = log_spaced_times(t_min, t_max, samples);
    return fit_decay(decay_series(u0, cfg, NormKind::lp(5), times), t_min, t_max);
}

IntertwiningResult intertwining_defect(const GridState& u0, const WalkConfig& cfg, const TailOptions& options) {
    const GridState source = nonlinear_source(cfg.nonlinear, u0);
    GridState a = linear_step(u0, cfg.constant, Direction::forward);
    GridState b = step_nonlinear(u0, cfg);
    IntertwiningResult result;
    if (cfg.nonlinear.is_linear())
        return result;
    TailMonitor monitor(options);
    GridState y;  // sum_{r<s} U0^{s-1-r} diff_r
    for (std::int64_t s = 0; s <= options.t_max; ++s) {
        const GridState diff = sub(nonlinear_source(cfg.nonlinear, a), nonlinear_source(cfg.nonlinear, b));
        const bool done = monitor.push(l2_norm(diff));
        if (const auto slope = monitor.divergent_slope())
            fail(ErrorCode::non_convergence, "intertwining series not summable: term norms decay like t^" +
                                                 std::to_string(*slope).substr(0, 6));
        y = add(linear_step(y, cfg.constant, Direction::forward), diff);
        if (done) {
            result.value = sub(linear_power(y, cfg.constant, -(s + 1)), source);
            result.terms = s + 1;
            result.tail_bound = monitor.tail_bound();
            result.term_norms = monitor.terms();
            return result;
        }
        a = step_nonlinear(a, cfg);
        b = step_nonlinear(b, cfg);
    }
    fail(ErrorCode::non_convergence, "intertwining series not certified within t_max");
}

} // namespace qwalk

#include "qwalk/estimates.hpp"

#include "qwalk/error.hpp"

#include <algorithm>
#include <cmath>

namespace qwalk {

std::vector<std::int64_t> log_spaced_times(std::int64_t t_min, std::int64_t t_max, std::size_t count) {
    if (t_min < 1 || t_max < t_min || count < 2)
        fail(ErrorCode::invalid_argument, "log_spaced_times needs 1 <= t_min <= t_max and count >= 2");
    std::vector<std::int64_t> out;
    const double l0 = std::log(static_cast<double>(t_min)), l1 = std::log(static_cast<double>(t_max));
    for (std::size_t k = 0; k < count; ++k) {
        const double l = l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(count - 1);
        const auto t = static_cast<std::int64_t>(std::llround(std::exp(l)));
        if (out.empty() || t > out.back())
            out.push_back(t);
    }
    out.back() = t_max;
    return out;
}

std::vector<DecaySeries> decay_series(const GridState& u0, const WalkConfig& cfg, const std::vector<NormKind>& kinds,
                                      const std::vector<std::int64_t>& times, std::string initial) {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0 || (k > 0 && times[k] <= times[k - 1]))
            fail(ErrorCode::invalid_argument, "sample times must be nonnegative and increasing");
    }
    std::vector<DecaySeries> out(kinds.size());
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        out[k].kind = kinds[k];
        out[k].initial = initial;
        out[k].times = times;
        out[k].values.reserve(times.size());
    }
    GridState u = u0;
    std::int64_t t = 0;
    for (const std::int64_t target : times) {
        for (; t < target; ++t)
            u = step_nonlinear(u, cfg);
        for (std::size_t k = 0; k < kinds.size(); ++k)
            out[k].values.push_back(norm(u, kinds[k]));
    }
    return out;
}

DecaySeries decay_series(const GridState& u0, const WalkConfig& cfg, const NormKind& kind,
                         const std::vector<std::int64_t>& times, std::string initial) {
    return std::move(decay_series(u0, cfg, std::vector<NormKind>{kind}, times, std::move(initial)).front());
}

SlopeFit fit_decay(const DecaySeries& series, std::int64_t t_min, std::int64_t t_max, Abscissa abscissa) {
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const std::int64_t t = series.times[k];
        if (t < t_min || t > t_max)
            continue;
        const double v = series.values[k];
        if (!(v > 0.0))
            fail(ErrorCode::invalid_argument, "fit window contains a nonpositive value");
        const double td = static_cast<double>(t);
        xs.push_back(abscissa == Abscissa::log_t ? std::log(td) : std::log(japanese_bracket(td)));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 8)
        fail(ErrorCode::invalid_argument, "fit window needs at least 8 samples");
    const auto n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    fit.t_min = t_min;
    fit.t_max = t_max;
    fit.samples = xs.size();
    return fit;
}

double fitted_constant(const DecaySeries& series, double exponent, std::int64_t t_min, std::int64_t t_max,
                       double scale) {
    double c = 0;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const std::int64_t t = series.times[k];
        if (t >= t_min && t <= t_max)
            c = std::max(c, series.values[k] * std::pow(japanese_bracket(static_cast<double>(t)), -exponent));
    }
    return c / scale;
}

StrichartzReport strichartz_report(const GridState& u0, const Mat2& c0, std::int64_t horizon) {
    if (horizon < 1)
        fail(ErrorCode::invalid_argument, "strichartz_report requires T >= 1");
    const double n0 = l2_norm(u0);
    StrichartzReport report;
    report.horizon = horizon;
    GridState u = u0;
    double max_l2 = 0, sum6 = 0;
    std::int64_t next = 1;
    for (std::int64_t t = 0; t <= horizon; ++t) {
        max_l2 = std::max(max_l2, l2_norm(u));
        sum6 += std::pow(linf_norm(u), 6);
        if (t == next || t == horizon) {
            StrichartzCheckpoint c;
            c.horizon = t;
            c.linf_l2 = max_l2;
            c.l6_linf = std::pow(sum6, 1.0 / 6.0);
            c.stz = std::max(c.linf_l2, c.l6_linf);
            c.ratio = n0 > 0 ? c.stz / n0 : 0.0;
            c.l6_ratio = n0 > 0 ? c.l6_linf / n0 : 0.0;
            if (report.doubling.empty() || report.doubling.back().horizon != t)
                report.doubling.push_back(c);
            if (t == next)
                next *= 2;
        }
        if (t < horizon)
            u = linear_step(u, c0, Direction::forward);
    }
    const auto& last = report.doubling.back();
    report.linf_l2 = last.linf_l2;
    report.l6_linf = last.l6_linf;
    report.stz = last.stz;
    report.ratio = last.ratio;
    return report;
}

} // namespace qwalk

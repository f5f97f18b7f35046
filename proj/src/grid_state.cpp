#include "qwalk/grid_state.hpp"

#include "qwalk/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace qwalk {

GridState::GridState(std::int64_t offset, std::vector<Spinor> cells)
    : offset_(offset), cells_(std::move(cells)) {
    auto first = std::find_if(cells_.begin(), cells_.end(), [](const Spinor& s) { return !s.is_zero(); });
    if (first == cells_.end()) {
        offset_ = 0;
        cells_.clear();
        return;
    }
    auto last = std::find_if(cells_.rbegin(), cells_.rend(), [](const Spinor& s) { return !s.is_zero(); });
    cells_.erase(last.base(), cells_.end());
    offset_ += first - cells_.begin();
    cells_.erase(cells_.begin(), first);
}

GridState GridState::delta(int component, std::int64_t site, Complex amplitude) {
    if (component != 1 && component != 2)
        fail(ErrorCode::invalid_argument, "component index must be 1 or 2, got " + std::to_string(component));
    Spinor s;
    (component == 1 ? s.c1 : s.c2) = amplitude;
    return GridState(site, {s});
}

GridState gaussian_wavepacket(double center, double width, double momentum, Spinor polarization, double cutoff) {
    if (!(width > 0) || !(cutoff > 0 && cutoff < 1))
        fail(ErrorCode::invalid_argument, "wavepacket needs width > 0 and 0 < cutoff < 1");
    const double reach = width * std::sqrt(-2.0 * std::log(cutoff));
    const auto lo = static_cast<std::int64_t>(std::floor(center - reach));
    const auto hi = static_cast<std::int64_t>(std::ceil(center + reach));
    std::vector<Spinor> cells;
    cells.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x) {
        const double d = (static_cast<double>(x) - center) / width;
        const Complex e = std::polar(std::exp(-0.5 * d * d), momentum * static_cast<double>(x));
        cells.push_back({e * polarization.c1, e * polarization.c2});
    }
    return GridState(lo, std::move(cells));
}

Spinor GridState::at(std::int64_t x) const {
    if (x < lo() || x > hi())
        return {};
    return cells_[static_cast<std::size_t>(x - offset_)];
}

GridState GridState::trimmed(double eps) const {
    if (eps <= 0.0)
        return *this;
    const double eps_sq = eps * eps;
    std::size_t begin = 0;
    std::size_t end = cells_.size();
    while (begin < end && cells_[begin].norm_sq() <= eps_sq)
        ++begin;
    while (end > begin && cells_[end - 1].norm_sq() <= eps_sq)
        --end;
    return GridState(offset_ + static_cast<std::int64_t>(begin),
                     std::vector<Spinor>(cells_.begin() + static_cast<std::ptrdiff_t>(begin),
                                         cells_.begin() + static_cast<std::ptrdiff_t>(end)));
}

NormKind NormKind::lp(double p) {
    if (!(p >= 1.0))
        fail(ErrorCode::invalid_argument, "l^p norm requires p >= 1");
    return NormKind(Tag::lp, p);
}

NormKind NormKind::linf() { return NormKind(Tag::lp, std::numeric_limits<double>::infinity()); }

NormKind NormKind::weak_lp(double p) {
    if (!(p > 1.0) || std::isinf(p))
        fail(ErrorCode::invalid_argument, "weak l^p norm requires finite p > 1");
    return NormKind(Tag::weak_lp, p);
}

bool NormKind::is_inf() const { return std::isinf(p_); }

NormKind NormKind::parse(std::string_view name) {
    auto parse_p = [&](std::string_view digits) {
        if (digits == "inf")
            return std::numeric_limits<double>::infinity();
        std::string s(digits);
        std::size_t used = 0;
        double p = 0;
        try {
            p = std::stod(s, &used);
        } catch (const std::exception&) {
            fail(ErrorCode::invalid_argument, "unknown norm '" + std::string(name) + "'");
        }
        if (used != s.size())
            fail(ErrorCode::invalid_argument, "unknown norm '" + std::string(name) + "'");
        return p;
    };
    if (name.starts_with("weak_l"))
        return weak_lp(parse_p(name.substr(6)));
    if (name.starts_with("l")) {
        double p = parse_p(name.substr(1));
        return std::isinf(p) ? linf() : lp(p);
    }
    fail(ErrorCode::invalid_argument, "unknown norm '" + std::string(name) + "'");
}

std::string NormKind::name() const {
    auto fmt_p = [](double p) {
        if (std::isinf(p))
            return std::string("inf");
        if (p == std::floor(p))
            return std::to_string(static_cast<long long>(p));
        std::string s = std::to_string(p);
        s.erase(s.find_last_not_of('0') + 1);
        return s;
    };
    return (tag_ == Tag::weak_lp ? "weak_l" : "l") + fmt_p(p_);
}

std::vector<double> site_magnitudes(const GridState& u) {
    std::vector<double> m;
    m.reserve(u.size());
    for (const auto& s : u.cells())
        m.push_back(std::sqrt(s.norm_sq()));
    return m;
}

double norm(const GridState& u, const NormKind& kind) {
    if (u.empty())
        return 0.0;
    if (kind.tag() == NormKind::Tag::lp && kind.p() == 2.0) {
        double sum = 0.0;
        for (const auto& s : u.cells())
            sum += s.norm_sq();
        return std::sqrt(sum);
    }
    std::vector<double> m = site_magnitudes(u);
    const double peak = *std::max_element(m.begin(), m.end());
    if (kind.tag() == NormKind::Tag::weak_lp) {
        // sup_gamma gamma * #{|u| > gamma}^{1/p} is approached as gamma rises to
        // the k-th largest magnitude, giving max_k k^{1/p} m_(k).
        std::sort(m.begin(), m.end(), std::greater<>());
        double best = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k)
            best = std::max(best, m[k] * std::pow(static_cast<double>(k + 1), 1.0 / kind.p()));
        return best;
    }
    if (kind.is_inf())
        return peak;
    const double p = kind.p();
    double sum = 0.0;
    for (double v : m)
        sum += std::pow(v / peak, p);
    return peak * std::pow(sum, 1.0 / p);
}

Complex inner(const GridState& f, const GridState& g) {
    if (f.empty() || g.empty())
        return {};
    const std::int64_t lo = std::max(f.lo(), g.lo());
    const std::int64_t hi = std::min(f.hi(), g.hi());
    Complex sum{};
    for (std::int64_t x = lo; x <= hi; ++x) {
        const Spinor a = f.at(x);
        const Spinor b = g.at(x);
        sum += a.c1 * std::conj(b.c1) + a.c2 * std::conj(b.c2);
    }
    return sum;
}

GridState axpy(Complex alpha, const GridState& u, const GridState& v) {
    if (u.empty() || alpha == Complex{})
        return v;
    if (v.empty())
        return scale(alpha, u);
    const std::int64_t lo = std::min(u.lo(), v.lo());
    const std::int64_t hi = std::max(u.hi(), v.hi());
    std::vector<Spinor> cells(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = v.lo(); x <= v.hi(); ++x)
        cells[static_cast<std::size_t>(x - lo)] = v.at(x);
    for (std::int64_t x = u.lo(); x <= u.hi(); ++x) {
        Spinor& c = cells[static_cast<std::size_t>(x - lo)];
        const Spinor s = u.at(x);
        c.c1 += alpha * s.c1;
        c.c2 += alpha * s.c2;
    }
    return GridState(lo, std::move(cells));
}

GridState scale(Complex alpha, const GridState& u) {
    std::vector<Spinor> cells(u.cells().begin(), u.cells().end());
    for (auto& c : cells) {
        c.c1 *= alpha;
        c.c2 *= alpha;
    }
    return GridState(u.lo(), std::move(cells));
}

GridState add(const GridState& u, const GridState& v) { return axpy(1.0, u, v); }
GridState sub(const GridState& u, const GridState& v) { return axpy(-1.0, v, u); }

GridState rotate_phase(const GridState& u, double phase) { return scale(std::polar(1.0, phase), u); }

} // namespace qwalk

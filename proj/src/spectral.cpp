#include "qwalk/spectral.hpp"

#include "qwalk/error.hpp"

#include <fftw3.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>

namespace qwalk {

namespace {

constexpr double pi = std::numbers::pi;

// The FFTW planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {
        std::fill_n(reinterpret_cast<double*>(data), 2 * n, 0.0);
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    Complex& operator[](std::size_t i) { return reinterpret_cast<Complex*>(data)[i]; }
    fftw_complex* data;
    std::size_t size;
};

class FftwPlan {
public:
    FftwPlan(FftwBuffer& buf, int sign) {
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(buf.size), buf.data, buf.data, sign, FFTW_ESTIMATE);
    }
    ~FftwPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;

    void run(FftwBuffer& buf) const { fftw_execute_dft(plan_, buf.data, buf.data); }

private:
    fftw_plan plan_;
};

struct Eigen {
    Complex lambda_plus, lambda_minus;
    double phase;  // p~ in (0, pi), lambda_+ = e^{i phase}
    Complex r_plus[2], r_minus[2];
};

Eigen eigen(const ConstantCoin& c0, double xi) {
    const Complex e = std::polar(1.0, xi);
    const Complex a = e * c0.a();
    const Complex b = e * c0.b();
    const double w = a.real();
    const double root = std::sqrt(std::max(0.0, (1.0 - w) * (1.0 + w)));
    Eigen out;
    out.lambda_plus = {w, root};
    out.lambda_minus = {w, -root};
    out.phase = std::atan2(root, w);
    auto row = [&](Complex lambda_other, Complex* r) {
        r[0] = std::conj(b);
        r[1] = lambda_other - std::conj(a);
        const double n = std::sqrt(std::norm(r[0]) + std::norm(r[1]));
        if (!(n > 0.0))
            fail(ErrorCode::regime_violation, "degenerate diagonalizer of the symbol");
        r[0] /= n;
        r[1] /= n;
    };
    row(out.lambda_minus, out.r_plus);
    row(out.lambda_plus, out.r_minus);
    return out;
}

Mat2 projector_from_row(const Complex* r) {
    return {std::conj(r[0]) * r[0], std::conj(r[0]) * r[1], std::conj(r[1]) * r[0], std::conj(r[1]) * r[1]};
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t wrap(std::int64_t x, std::size_t n) {
    const auto m = static_cast<std::int64_t>(n);
    return static_cast<std::size_t>(((x % m) + m) % m);
}

/// Loads u into two cyclic buffers indexed by x mod N, transforms, applies
/// `multiplier(xi)` per frequency, and transforms back.
template <class Multiplier>
void apply_symbol(const GridState& u, FftwBuffer& b1, FftwBuffer& b2, Multiplier&& multiplier) {
    const std::size_t n = b1.size;
    for (std::int64_t x = u.lo(); x <= u.hi(); ++x) {
        const Spinor s = u.at(x);
        b1[wrap(x, n)] = s.c1;
        b2[wrap(x, n)] = s.c2;
    }
    FftwPlan fwd(b1, FFTW_FORWARD);
    FftwPlan bwd(b1, FFTW_BACKWARD);
    fwd.run(b1);
    fwd.run(b2);
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
        const Mat2 m = multiplier(xi);
        const Spinor v = m.apply({b1[k], b2[k]});
        b1[k] = v.c1;
        b2[k] = v.c2;
    }
    bwd.run(b1);
    bwd.run(b2);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        b1[k] *= inv;
        b2[k] *= inv;
    }
}

GridState read_window(FftwBuffer& b1, FftwBuffer& b2, std::int64_t lo, std::int64_t hi) {
    std::vector<Spinor> cells;
    cells.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x)
        cells.push_back({b1[wrap(x, b1.size)], b2[wrap(x, b2.size)]});
    return GridState(lo, std::move(cells));
}

} // namespace

Dispersion::Dispersion(const ConstantCoin& c0) : abs_a_(c0.abs_a()), theta_a_(c0.theta_a()) {}

double Dispersion::p(double xi) const { return std::acos(abs_a_ * std::cos(xi)); }

double Dispersion::dp(double xi) const {
    const double c = abs_a_ * std::cos(xi);
    return abs_a_ * std::sin(xi) / std::sqrt(1.0 - c * c);
}

double Dispersion::d2p(double xi) const {
    const double c = abs_a_ * std::cos(xi);
    const double q = 1.0 - c * c;
    return abs_a_ * (1.0 - abs_a_ * abs_a_) * std::cos(xi) / (q * std::sqrt(q));
}

double Dispersion::d3p(double xi) const {
    const double c = abs_a_ * std::cos(xi);
    const double q = 1.0 - c * c;
    return -abs_a_ * (1.0 - abs_a_ * abs_a_) * (1.0 + 2.0 * c * c) * std::sin(xi) / (q * q * std::sqrt(q));
}

SymbolAtXi symbol(const ConstantCoin& c0, double xi) {
    const Complex e = std::polar(1.0, xi);
    const Complex a = e * c0.a();
    const Complex b = e * c0.b();
    const Eigen eg = eigen(c0, xi);
    SymbolAtXi out;
    out.xi = xi;
    out.symbol = {a, b, -std::conj(b), std::conj(a)};
    out.lambda_plus = eg.lambda_plus;
    out.lambda_minus = eg.lambda_minus;
    out.diagonalizer = {eg.r_plus[0], eg.r_plus[1], eg.r_minus[0], eg.r_minus[1]};
    return out;
}

Mat2 spectral_projector(const ConstantCoin& c0, double xi, int sign) {
    const Eigen eg = eigen(c0, xi);
    const Mat2 plus = projector_from_row(eg.r_plus);
    return sign > 0 ? plus : Mat2::identity() - plus;
}

std::size_t default_fft_grid(const GridState& u, std::int64_t t) {
    const auto need = static_cast<std::size_t>(4 * (t + static_cast<std::int64_t>(std::max<std::size_t>(u.size(), 1))));
    return std::bit_ceil(need);
}

GridState fft_propagate(const GridState& u0, const ConstantCoin& c0, std::int64_t t, std::size_t grid) {
    if (t < 0)
        fail(ErrorCode::invalid_argument, "fft_propagate requires t >= 0");
    if (t == 0 || u0.empty())
        return u0;
    const std::size_t n = grid == 0 ? default_fft_grid(u0, t) : grid;
    const auto support = static_cast<std::int64_t>(u0.size());
    if (!is_power_of_two(n))
        fail(ErrorCode::invalid_argument, "frequency grid must be a power of two");
    if (static_cast<std::int64_t>(n) < 2 * (t + support))
        fail(ErrorCode::invalid_argument, "frequency grid too small: the cyclic wrap would alias the support");
    FftwBuffer b1(n), b2(n);
    const double tt = static_cast<double>(t);
    apply_symbol(u0, b1, b2, [&](double xi) {
        const Eigen eg = eigen(c0, xi);
        const Mat2 plus = projector_from_row(eg.r_plus);
        const Mat2 minus = Mat2::identity() - plus;
        return std::polar(1.0, tt * eg.phase) * plus + std::polar(1.0, -tt * eg.phase) * minus;
    });
    return read_window(b1, b2, u0.lo() - t, u0.hi() + t);
}

std::pair<GridState, GridState> projections(const ConstantCoin& c0, const GridState& u, std::size_t grid) {
    if (u.empty())
        return {{}, {}};
    // Projector kernels decay like e^{-kappa |x|} with kappa = arccosh(1/|a|).
    const double kappa = std::acosh(1.0 / c0.abs_a());
    const auto margin = static_cast<std::size_t>(std::ceil(40.0 / kappa)) + 16;
    const std::size_t width = u.size();
    std::size_t n = grid;
    if (n == 0)
        n = std::bit_ceil(std::max(4 * width, width + 2 * margin));
    if (!is_power_of_two(n))
        fail(ErrorCode::invalid_argument, "frequency grid must be a power of two");
    if (n < width + 2 * margin)
        fail(ErrorCode::invalid_argument, "frequency grid too small: projector tails would alias");
    FftwBuffer b1(n), b2(n);
    apply_symbol(u, b1, b2, [&](double xi) { return spectral_projector(c0, xi, +1); });
    const std::int64_t centre = u.lo() + static_cast<std::int64_t>(width / 2);
    const std::int64_t lo = centre - static_cast<std::int64_t>(n / 2);
    const std::int64_t hi = lo + static_cast<std::int64_t>(n) - 1;
    GridState plus = read_window(b1, b2, lo, hi);
    return {plus, sub(u, plus)};
}

OscillatoryKernel::OscillatoryKernel(const ConstantCoin& c0, int sign, std::int64_t t, std::size_t panels,
                                     std::size_t order)
    : t_(t) {
    if (t < 1)
        fail(ErrorCode::invalid_argument, "kernel I(t, s) requires t >= 1");
    if (panels == 0 || order < 2)
        fail(ErrorCode::invalid_argument, "quadrature needs at least one panel and order >= 2");
    const Dispersion disp(c0);
    const double theta = c0.theta_a();
    const double tt = static_cast<double>(t);
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
        gsl_integration_glfixed_table_alloc(order), &gsl_integration_glfixed_table_free);
    if (!table)
        fail(ErrorCode::invalid_argument, "failed to build Gauss-Legendre table");
    const std::size_t total = panels * order;
    shifted_.reserve(total);
    weights_.reserve(total);
    amplitudes_.reserve(total);
    const double h = 2.0 * pi / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
        const double a = -pi + h * static_cast<double>(k);
        for (std::size_t i = 0; i < order; ++i) {
            double xi = 0, wi = 0;
            gsl_integration_glfixed_point(a, a + h, i, &xi, &wi, table.get());
            const Mat2 q = spectral_projector(c0, xi - theta, sign);
            const double phase = (sign > 0 ? 1.0 : -1.0) * tt * disp.p(xi);
            shifted_.push_back(xi - theta);
            weights_.push_back(wi / (2.0 * pi));
            amplitudes_.push_back(std::polar(1.0, phase) * q);
        }
    }
}

Mat2 OscillatoryKernel::operator()(double s) const {
    const double ts = static_cast<double>(t_) * s;
    Mat2 acc;
    for (std::size_t k = 0; k < shifted_.size(); ++k) {
        const Complex f = std::polar(weights_[k], ts * shifted_[k]);
        const Mat2& m = amplitudes_[k];
        acc.m00 += f * m.m00;
        acc.m01 += f * m.m01;
        acc.m10 += f * m.m10;
        acc.m11 += f * m.m11;
    }
    return acc;
}

Mat2 kernel_I(const ConstantCoin& c0, int sign, std::int64_t t, double s, const KernelOptions& options) {
    std::size_t panels = options.panels_per_t * static_cast<std::size_t>(std::max<std::int64_t>(t, 1));
    Mat2 coarse = OscillatoryKernel(c0, sign, t, panels)(s);
    for (int r = 0; r <= options.max_refinements; ++r) {
        panels *= 2;
        const Mat2 fine = OscillatoryKernel(c0, sign, t, panels)(s);
        if (max_abs_entry(fine - coarse) <= options.tol)
            return fine;
        coarse = fine;
    }
    fail(ErrorCode::non_convergence, "oscillatory quadrature did not reach the requested tolerance");
}

KernelSup kernel_sup(const ConstantCoin& c0, int sign, std::int64_t t) {
    const OscillatoryKernel kernel(c0, sign, t, 8 * static_cast<std::size_t>(t));
    auto value = [&](double s) { return max_abs_entry(kernel(s)); };
    KernelSup best;
    auto consider = [&](double s) {
        const double v = value(s);
        if (v > best.value)
            best = {v, s};
    };
    for (int i = -150; i <= 150; ++i)
        consider(0.01 * i);
    const double tau = std::pow(static_cast<double>(t), -2.0 / 3.0);
    const double step = 0.2 * tau;
    for (double caustic : {c0.abs_a(), -c0.abs_a()}) {
        for (int i = -60; i <= 20; ++i)
            consider(caustic + (caustic > 0 ? 1.0 : -1.0) * step * i);
    }
    // Golden-section refinement on [s* - step, s* + step].
    double lo = best.s - step, hi = best.s + step;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = value(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = value(x2);
        }
    }
    consider(0.5 * (lo + hi));
    return best;
}

void write_dispersion_csv(std::ostream& os, const Dispersion& d, std::size_t points) {
    os << "xi,p,dp,d2p,d3p\n";
    char line[256];
    for (std::size_t k = 0; k < points; ++k) {
        const double xi = -pi + 2.0 * pi * static_cast<double>(k) / static_cast<double>(points);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", xi, d.p(xi), d.dp(xi), d.d2p(xi),
                      d.d3p(xi));
        os << line;
    }
}

} // namespace qwalk

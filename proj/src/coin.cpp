#include "qwalk/coin.hpp"

#include "qwalk/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qwalk {

namespace {

constexpr double unit_tol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

Complex expm1_i(double phi) { return cis_minus_one(phi); }

/// R(alpha) - I without cancellation.
Mat2 rotation_minus_identity(double alpha) {
    const double h = std::sin(0.5 * alpha);
    const double c = -2.0 * h * h;
    const double s = std::sin(alpha);
    return {c, -s, s, c};
}

const Mat2 hadamard{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2,
                    -std::numbers::sqrt2 / 2};

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        fail(ErrorCode::invalid_argument, std::string(what) + " must be finite");
}

} // namespace

ConstantCoin::ConstantCoin(Complex a, Complex b) : a_(a), b_(b) {
    const double n = std::norm(a) + std::norm(b);
    if (std::abs(n - 1.0) > unit_tol)
        fail(ErrorCode::invalid_argument, "constant coin requires |a|^2 + |b|^2 = 1");
    const double r = std::abs(a);
    if (!(r > 0.0) || !(r < 1.0))
        fail(ErrorCode::regime_violation,
             "constant coin requires 0 < |a| < 1; the dispersive estimates fail at |a| = 0 and |a| = 1");
}

ConstantCoin ConstantCoin::rotation(double theta) { return ConstantCoin(std::cos(theta), -std::sin(theta)); }

std::optional<ConstantCoin> ConstantCoin::from_matrix(const Mat2& m, double tol) {
    if (std::abs(m.m10 + std::conj(m.m01)) > tol || std::abs(m.m11 - std::conj(m.m00)) > tol)
        return std::nullopt;
    const double n = std::norm(m.m00) + std::norm(m.m01);
    if (std::abs(n - 1.0) > tol)
        return std::nullopt;
    const double r = std::abs(m.m00);
    if (!(r > 0.0 && r < 1.0))
        return std::nullopt;
    // Renormalise away the tolerance so the constructor's check passes.
    const double s = 1.0 / std::sqrt(n);
    return ConstantCoin(m.m00 * s, m.m01 * s);
}

std::string coin_kind_name(CoinKind kind) {
    switch (kind) {
    case CoinKind::identity: return "identity";
    case CoinKind::optical_galton: return "optical_galton";
    case CoinKind::gross_neveu: return "gross_neveu";
    case CoinKind::thirring: return "thirring";
    case CoinKind::rotation_power: return "rotation_power";
    case CoinKind::kerr_diagonal: return "kerr_diagonal";
    case CoinKind::custom: return "custom";
    }
    return "unknown";
}

NonlinearCoin NonlinearCoin::optical_galton(double g) {
    require_finite(g, "g");
    return NonlinearCoin(OpticalGalton{g}, false);
}

NonlinearCoin NonlinearCoin::gross_neveu(double g, double theta) {
    require_finite(g, "g");
    require_finite(theta, "theta");
    return NonlinearCoin(GrossNeveu{g, theta}, false);
}

NonlinearCoin NonlinearCoin::thirring(double g, double theta) {
    require_finite(g, "g");
    require_finite(theta, "theta");
    return NonlinearCoin(Thirring{g, theta}, false);
}

NonlinearCoin NonlinearCoin::rotation_power(double theta0, double g, int lambda_sign, double p) {
    require_finite(theta0, "theta0");
    require_finite(g, "g");
    if (lambda_sign != 1 && lambda_sign != -1)
        fail(ErrorCode::invalid_argument, "rotation_power lambda must be +1 or -1");
    if (!(p >= 1.0) || !std::isfinite(p))
        fail(ErrorCode::invalid_argument, "rotation_power exponent p must be >= 1");
    if (g < 0.0)
        fail(ErrorCode::invalid_argument, "rotation_power requires g >= 0");
    return NonlinearCoin(RotationPower{theta0, g, lambda_sign, p}, false);
}

NonlinearCoin NonlinearCoin::kerr_diagonal(double g1, double g2) {
    require_finite(g1, "g1");
    require_finite(g2, "g2");
    return NonlinearCoin(KerrDiagonal{g1, g2}, true);
}

NonlinearCoin NonlinearCoin::custom(Custom table, bool tilde_form) {
    NonlinearCoin coin(std::make_shared<const Custom>(std::move(table)), tilde_form);
    const Mat2 origin = coin.evaluate(0.0, 0.0);
    if (operator_norm(origin - Mat2::identity()) > unit_tol)
        fail(ErrorCode::config, "custom coin must satisfy C_N(0,0) = I");
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            const Mat2 m = coin.evaluate(0.1 * i, 0.1 * j);
            const double d = unitarity_defect(m);
            if (!(d <= unit_tol))
                fail(ErrorCode::config, "custom coin is not unitary at (s1, s2) = (" + std::to_string(0.1 * i) +
                                            ", " + std::to_string(0.1 * j) + ")");
        }
    }
    return coin;
}

NonlinearCoin NonlinearCoin::with_squared_arguments() const {
    if (squared_)
        fail(ErrorCode::invalid_argument, "coin already takes squared arguments");
    return NonlinearCoin(params_, true);
}

CoinKind NonlinearCoin::kind() const {
    return std::visit(overloaded{[](const Identity&) { return CoinKind::identity; },
                                 [](const OpticalGalton&) { return CoinKind::optical_galton; },
                                 [](const GrossNeveu&) { return CoinKind::gross_neveu; },
                                 [](const Thirring&) { return CoinKind::thirring; },
                                 [](const RotationPower&) { return CoinKind::rotation_power; },
                                 [](const KerrDiagonal&) { return CoinKind::kerr_diagonal; },
                                 [](const std::shared_ptr<const Custom>&) { return CoinKind::custom; }},
                      params_);
}

std::string NonlinearCoin::name() const {
    std::string n = coin_kind_name(kind());
    if (squared_ && kind() != CoinKind::kerr_diagonal)
        n += "[squared]";
    return n;
}

Mat2 NonlinearCoin::base_minus_identity(double s1, double s2) const {
    return std::visit(
        overloaded{
            [](const Identity&) { return Mat2::zero(); },
            [&](const OpticalGalton& c) { return Mat2::diag(expm1_i(c.g * s1), expm1_i(c.g * s2)); },
            [&](const GrossNeveu& c) {
                const double d = c.g * (s1 - s2);
                return Mat2::rotation(-c.theta) * Mat2::diag(expm1_i(-d), expm1_i(d)) * Mat2::rotation(c.theta);
            },
            [&](const Thirring& c) {
                const Complex e = expm1_i(c.g * (s1 + s2));
                return Mat2::diag(e, e);
            },
            [&](const RotationPower& c) {
                const double alpha = c.lambda_sign * std::pow(c.g * s1 + c.g * s2, c.p);
                return rotation_minus_identity(alpha);
            },
            [&](const KerrDiagonal& c) { return Mat2::diag(expm1_i(c.g1 * s1), expm1_i(c.g2 * s2)); },
            [&](const std::shared_ptr<const Custom>& c) {
                Mat2 m;
                Complex* out[4] = {&m.m00, &m.m01, &m.m10, &m.m11};
                for (int i = 0; i < 4; ++i)
                    *out[i] = std::polar(c->magnitude[i](s1, s2), c->phase[i](s1, s2));
                return m - Mat2::identity();
            }},
        params_);
}

Mat2 NonlinearCoin::minus_identity(double s1, double s2) const {
    return squared_ ? base_minus_identity(s1 * s1, s2 * s2) : base_minus_identity(s1, s2);
}

Mat2 NonlinearCoin::evaluate(double s1, double s2) const { return minus_identity(s1, s2) + Mat2::identity(); }

bool NonlinearCoin::has_tilde_form() const { return squared_ || kind() == CoinKind::identity; }

Mat2 NonlinearCoin::tilde_minus_identity(double s1, double s2) const {
    if (!has_tilde_form())
        fail(ErrorCode::invalid_argument,
             "coin '" + name() + "' has no tilde form C_N(s1,s2) = Ctilde(s1^2, s2^2)");
    return base_minus_identity(s1, s2);
}

Mat2 NonlinearCoin::tilde(double s1, double s2) const { return tilde_minus_identity(s1, s2) + Mat2::identity(); }

std::optional<Mat2> NonlinearCoin::tilde_derivative_closed_form(int k) const {
    if (k != 1 && k != 2)
        fail(ErrorCode::invalid_argument, "derivative index must be 1 or 2");
    if (!has_tilde_form())
        return std::nullopt;
    const Complex i{0.0, 1.0};
    return std::visit(
        overloaded{
            [](const Identity&) -> std::optional<Mat2> { return Mat2::zero(); },
            [&](const OpticalGalton& c) -> std::optional<Mat2> {
                return k == 1 ? Mat2::diag(i * c.g, 0.0) : Mat2::diag(0.0, i * c.g);
            },
            [&](const GrossNeveu& c) -> std::optional<Mat2> {
                const Mat2 d1 = Mat2::rotation(-c.theta) * Mat2::diag(-i * c.g, i * c.g) * Mat2::rotation(c.theta);
                return k == 1 ? d1 : Complex(-1.0) * d1;
            },
            [&](const Thirring& c) -> std::optional<Mat2> { return Mat2::diag(i * c.g, i * c.g); },
            [&](const RotationPower& c) -> std::optional<Mat2> {
                if (c.p > 1.0)
                    return Mat2::zero();
                // p == 1: d/ds R(lambda g s) at 0 = lambda g (0 -1; 1 0).
                const double f = c.lambda_sign * c.g;
                return Mat2{0.0, -f, f, 0.0};
            },
            [&](const KerrDiagonal& c) -> std::optional<Mat2> {
                return k == 1 ? Mat2::diag(i * c.g1, 0.0) : Mat2::diag(0.0, i * c.g2);
            },
            [](const std::shared_ptr<const Custom>&) -> std::optional<Mat2> { return std::nullopt; }},
        params_);
}

std::optional<double> NonlinearCoin::order() const {
    std::optional<double> base = std::visit(
        overloaded{[](const Identity&) -> std::optional<double> { return std::nullopt; },
                   [](const OpticalGalton&) -> std::optional<double> { return 1.0; },
                   [](const GrossNeveu&) -> std::optional<double> { return 1.0; },
                   [](const Thirring&) -> std::optional<double> { return 1.0; },
                   [](const RotationPower& c) -> std::optional<double> { return c.p; },
                   [](const KerrDiagonal&) -> std::optional<double> { return 1.0; },
                   [](const std::shared_ptr<const Custom>& c) { return c->order; }},
        params_);
    if (base && squared_ && kind() != CoinKind::custom)
        return 2.0 * *base;
    return base;
}

std::optional<Mat2> NonlinearCoin::paired_constant() const {
    return std::visit(overloaded{[](const OpticalGalton&) -> std::optional<Mat2> { return hadamard; },
                                 [](const GrossNeveu& c) -> std::optional<Mat2> { return Mat2::rotation(c.theta); },
                                 [](const Thirring& c) -> std::optional<Mat2> { return Mat2::rotation(c.theta); },
                                 [](const RotationPower& c) -> std::optional<Mat2> {
                                     return Mat2::rotation(c.theta0);
                                 },
                                 [](const auto&) -> std::optional<Mat2> { return std::nullopt; }},
                      params_);
}

Mat2 NonlinearCoin::model_matrix(double s1, double s2) const {
    auto c0 = paired_constant();
    if (!c0)
        fail(ErrorCode::invalid_argument, "coin '" + name() + "' has no paired constant coin");
    return *c0 * evaluate(s1, s2);
}

std::string NonlinearCoin::model_card() const {
    std::ostringstream os;
    os << "coin: " << name() << "\n";
    if (auto m = order())
        os << "order m: " << *m << "\n";
    else
        os << "order m: unspecified\n";
    os << "tilde form: " << (has_tilde_form() ? "yes" : "no") << "\n";
    switch (kind()) {
    case CoinKind::optical_galton:
        os << "paired C0: (1/sqrt2)(1 1; 1 -1). This factor has determinant -1 and is not of the\n"
              "(a b; -conj(b) conj(a)) shape: it equals i * C0' with a = b = -i/sqrt2. Dynamics accept it\n"
              "directly; spectral operations require the shaped C0' and it is not substituted implicitly.\n";
        break;
    case CoinKind::gross_neveu:
    case CoinKind::thirring:
    case CoinKind::rotation_power:
        os << "paired C0: R(theta), i.e. a = cos(theta), b = -sin(theta).\n";
        break;
    default: break;
    }
    return os.str();
}

Mat2 derivative_at_origin_fd(const NonlinearCoin& coin, int k, double h) {
    if (k != 1 && k != 2)
        fail(ErrorCode::invalid_argument, "derivative index must be 1 or 2");
    auto f = [&](double s) { return k == 1 ? coin.tilde_minus_identity(s, 0.0) : coin.tilde_minus_identity(0.0, s); };
    auto finite = [](const Mat2& m) {
        return std::isfinite(std::abs(m.m00)) && std::isfinite(std::abs(m.m01)) &&
               std::isfinite(std::abs(m.m10)) && std::isfinite(std::abs(m.m11));
    };
    auto central = [&](double step) -> std::optional<Mat2> {
        const Mat2 fp = f(step), fm = f(-step);
        if (!finite(fp) || !finite(fm))
            return std::nullopt;
        return Complex(1.0 / (2.0 * step)) * (fp - fm);
    };
    auto forward = [&](double step) {
        // f(0) = 0 for the minus-identity form.
        return Complex(1.0 / (2.0 * step)) * (Complex(4.0) * f(step) - f(2.0 * step));
    };
    auto dh = central(h);
    auto dh2 = central(0.5 * h);
    if (dh && dh2)
        return Complex(1.0 / 3.0) * (Complex(4.0) * *dh2 - *dh);
    return Complex(1.0 / 3.0) * (Complex(4.0) * forward(0.5 * h) - forward(h));
}

Mat2 derivative_at_origin(const NonlinearCoin& coin, int k) {
    if (!coin.has_tilde_form())
        fail(ErrorCode::invalid_argument,
             "coin '" + coin.name() + "' has no tilde form; d_k Ctilde_N(0,0) is undefined");
    if (auto closed = coin.tilde_derivative_closed_form(k))
        return *closed;
    return derivative_at_origin_fd(coin, k);
}

GridState apply_pointwise_coin(const NonlinearCoin& coin, const Mat2& c0, const GridState& u) {
    std::vector<Spinor> cells(u.cells().begin(), u.cells().end());
    for (auto& c : cells) {
        const Mat2 m = c0 * coin.evaluate(std::norm(c.c1), std::norm(c.c2));
        c = m.apply(c);
    }
    return GridState(u.lo(), std::move(cells));
}

GridState nonlinear_source(const NonlinearCoin& coin, const GridState& u) {
    if (coin.is_linear())
        return {};
    std::vector<Spinor> cells(u.cells().begin(), u.cells().end());
    for (auto& c : cells)
        c = coin.minus_identity(std::norm(c.c1), std::norm(c.c2)).apply(c);
    return GridState(u.lo(), std::move(cells));
}

} // namespace qwalk

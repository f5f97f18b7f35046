#pragma once

// Constant coin C0 and the catalog of state-dependent coins C_N with
// C(s1, s2) = C0 * C_N(s1, s2) and C_N(0, 0) = I.

#include "qwalk/expr.hpp"
#include "qwalk/grid_state.hpp"
#include "qwalk/mat2.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace qwalk {

/// C0 = (a b; -conj(b) conj(a)) with |a|^2 + |b|^2 = 1 and 0 < |a| < 1.
class ConstantCoin {
public:
    ConstantCoin(Complex a, Complex b);

    /// R(theta) written in the (a, b) shape: a = cos(theta), b = -sin(theta).
    static ConstantCoin rotation(double theta);
    /// Recovers (a, b) when m has the required shape; nullopt otherwise.
    static std::optional<ConstantCoin> from_matrix(const Mat2& m, double tol = 1e-12);

    Complex a() const { return a_; }
    Complex b() const { return b_; }
    double abs_a() const { return std::abs(a_); }
    double theta_a() const { return std::arg(a_); }
    Mat2 matrix() const { return {a_, b_, -std::conj(b_), std::conj(a_)}; }

private:
    Complex a_, b_;
};

enum class CoinKind { identity, optical_galton, gross_neveu, thirring, rotation_power, kerr_diagonal, custom };

std::string coin_kind_name(CoinKind kind);

class NonlinearCoin {
public:
    struct Identity {};
    struct OpticalGalton { double g; };
    struct GrossNeveu { double g, theta; };
    struct Thirring { double g, theta; };
    struct RotationPower { double theta0, g; int lambda_sign; double p; };
    struct KerrDiagonal { double g1, g2; };
    /// Row-major table; entry = magnitude(s1, s2) * exp(i phase(s1, s2)).
    struct Custom {
        std::array<Expr, 4> magnitude;
        std::array<Expr, 4> phase;
        std::optional<double> order;
    };
    using Params = std::variant<Identity, OpticalGalton, GrossNeveu, Thirring, RotationPower, KerrDiagonal,
                                std::shared_ptr<const Custom>>;

    NonlinearCoin() : NonlinearCoin(Identity{}, false) {}

    static NonlinearCoin identity() { return {}; }
    /// diag(e^{i g s1}, e^{i g s2}); the model pairs it with the Hadamard C0.
    static NonlinearCoin optical_galton(double g);
    /// R(-theta) diag(e^{-ig(s1-s2)}, e^{ig(s1-s2)}) R(theta); model C0 = R(theta).
    static NonlinearCoin gross_neveu(double g, double theta);
    /// e^{ig(s1+s2)} I; model C0 = R(theta).
    static NonlinearCoin thirring(double g, double theta);
    /// R(lambda (g s1 + g s2)^p), lambda = +-1; model C0 = R(theta0).
    static NonlinearCoin rotation_power(double theta0, double g, int lambda_sign, double p);
    /// Ctilde(s1, s2) = diag(e^{i g1 s1}, e^{i g2 s2}), so C_N(s1, s2) = diag(e^{i g1 s1^2}, e^{i g2 s2^2}).
    static NonlinearCoin kerr_diagonal(double g1, double g2);
    /// Table entries are validated (C(0,0) = I, unitary on [0,1]^2). With
    /// tilde_form the table defines Ctilde and C_N(s) = Ctilde(s1^2, s2^2).
    static NonlinearCoin custom(Custom table, bool tilde_form);

    /// The same model with squared arguments: C_N'(s1, s2) = C_N(s1^2, s2^2),
    /// whose tilde form is the original C_N.
    NonlinearCoin with_squared_arguments() const;

    CoinKind kind() const;
    const Params& params() const { return params_; }
    bool squared() const { return squared_; }
    bool is_linear() const { return kind() == CoinKind::identity; }
    std::string name() const;

    /// C_N(s1, s2).
    Mat2 evaluate(double s1, double s2) const;
    /// C_N(s1, s2) - I without cancellation near the origin.
    Mat2 minus_identity(double s1, double s2) const;

    bool has_tilde_form() const;
    /// Ctilde_N(s1, s2); throws when the coin has no tilde form.
    Mat2 tilde(double s1, double s2) const;
    Mat2 tilde_minus_identity(double s1, double s2) const;
    /// d_k Ctilde_N(0, 0) when the kind has a closed form.
    std::optional<Mat2> tilde_derivative_closed_form(int k) const;

    /// Smallest m with ||C_N(s1,s2) - I|| <~ (s1+s2)^m near 0; nullopt for the
    /// identity coin or unspecified custom coins.
    std::optional<double> order() const;

    /// C0 proposed together with this model, when the model comes with one.
    std::optional<Mat2> paired_constant() const;
    /// The model's full coin C(s1, s2) = C0 * C_N(s1, s2); requires paired_constant().
    Mat2 model_matrix(double s1, double s2) const;
    std::string model_card() const;

private:
    NonlinearCoin(Params params, bool squared) : params_(std::move(params)), squared_(squared) {}
    Mat2 base_minus_identity(double s1, double s2) const;

    Params params_;
    bool squared_ = false;
};

/// d_k Ctilde_N(0,0): the closed form when available, otherwise
/// Richardson-extrapolated differences. Throws when there is no tilde form.
Mat2 derivative_at_origin(const NonlinearCoin& coin, int k);
/// Richardson-extrapolated central differences (one level), step h.
Mat2 derivative_at_origin_fd(const NonlinearCoin& coin, int k, double h = 1e-4);

/// (C u)(x) = C0 C_N(|u1(x)|^2, |u2(x)|^2) u(x).
GridState apply_pointwise_coin(const NonlinearCoin& coin, const Mat2& c0, const GridState& u);
/// (C_N - I) u evaluated at the state's own moduli.
GridState nonlinear_source(const NonlinearCoin& coin, const GridState& u);

} // namespace qwalk

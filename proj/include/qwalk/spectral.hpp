#pragma once

// Fourier-side description of U0 = S C0: symbol, eigenphases, dispersion
// relation, spectral projections, an FFT propagator, and the oscillatory
// kernels I_pm(t, s) whose convolution reproduces U0^t.
//
// Conventions: (F u)(xi) = sum_x e^{-i x xi} u(x) on the torus [-pi, pi);
// U0^hat(xi) = e^{i xi} P0 + e^{-i xi} Q0 with eigenvalues
// lambda_pm = w +- i sqrt(1 - w^2), w = Re(e^{i xi} a).

#include "qwalk/coin.hpp"
#include "qwalk/grid_state.hpp"

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace qwalk {

/// p(xi) = arccos(|a| cos xi) and its first three derivatives.
class Dispersion {
public:
    explicit Dispersion(const ConstantCoin& c0);

    double abs_a() const { return abs_a_; }
    double theta_a() const { return theta_a_; }

    double p(double xi) const;
    double dp(double xi) const;
    double d2p(double xi) const;
    double d3p(double xi) const;
    /// Eigenphase of lambda_+(xi): p(xi + theta_a).
    double eigenphase(double xi) const { return p(xi + theta_a_); }

private:
    double abs_a_, theta_a_;
};

struct SymbolAtXi {
    double xi = 0;
    Mat2 symbol;
    Complex lambda_plus, lambda_minus;
    /// Rows are unit left eigenvectors for lambda_+ and lambda_-, so
    /// P U0^hat P^{-1} = diag(lambda_+, lambda_-) and P^{-1} = P*.
    Mat2 diagonalizer;
};

SymbolAtXi symbol(const ConstantCoin& c0, double xi);

/// Spectral projector of U0^hat(xi) onto the lambda_+ (sign > 0) or lambda_-
/// eigenline.
Mat2 spectral_projector(const ConstantCoin& c0, double xi, int sign);

/// Smallest power of two >= 4 (t + support) (the default grid).
std::size_t default_fft_grid(const GridState& u, std::int64_t t);

/// U0^t u0 by multiplying U0^hat(xi)^t = P^{-1} diag(e^{i t p~}, e^{-i t p~}) P
/// on a discrete frequency grid. `grid` = 0 selects default_fft_grid; an
/// explicit grid must be a power of two >= 2 (t + support).
GridState fft_propagate(const GridState& u0, const ConstantCoin& c0, std::int64_t t, std::size_t grid = 0);

/// (P_+ u, P_- u) on a frequency grid wide enough that the exponentially
/// decaying projector kernels do not alias (tails below ~e^{-40}).
std::pair<GridState, GridState> projections(const ConstantCoin& c0, const GridState& u, std::size_t grid = 0);

/// Precomputed quadrature of
///   I_pm(t, s) = (1/2pi) int_T e^{i t (pm p(xi) + s (xi - theta_a))} Q_pm(xi) dxi
/// with composite Gauss-Legendre on `panels` equal panels.
class OscillatoryKernel {
public:
    OscillatoryKernel(const ConstantCoin& c0, int sign, std::int64_t t, std::size_t panels, std::size_t order = 10);

    Mat2 operator()(double s) const;
    std::int64_t t() const { return t_; }

private:
    std::int64_t t_;
    std::vector<double> shifted_;   // xi_k - theta_a
    std::vector<double> weights_;   // w_k / (2 pi)
    std::vector<Mat2> amplitudes_;  // e^{pm i t p(xi_k)} Q_pm(xi_k)
};

struct KernelOptions {
    double tol = 1e-8;
    std::size_t panels_per_t = 8;
    int max_refinements = 4;
};

/// I_pm(t, s) with a panel-doubling convergence check; throws
/// Error(non_convergence) if the tolerance is not met.
Mat2 kernel_I(const ConstantCoin& c0, int sign, std::int64_t t, double s, const KernelOptions& options = {});

struct KernelSup {
    double value = 0;  // max_ij |I_pm,ij(t, s*)|
    double s = 0;      // maximiser s*
};

/// sup_s max_ij |I_pm,ij(t, s)| by a global scan, dense scans around the
/// caustics s = +-|a|, and golden-section refinement.
KernelSup kernel_sup(const ConstantCoin& c0, int sign, std::int64_t t);

/// CSV rows (xi, p, dp, d2p, d3p) at `points` equispaced xi in [-pi, pi).
void write_dispersion_csv(std::ostream& os, const Dispersion& d, std::size_t points);

} // namespace qwalk

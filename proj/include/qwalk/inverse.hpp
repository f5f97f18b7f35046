#pragma once

// Recovers d_1 Ctilde_N(0,0) and d_2 Ctilde_N(0,0) from scattering data of
// lambda-scaled probe states u0^k = lambda^{1+k} delta_{1,0} + lambda^{4-k} delta_{2,0}.

#include "qwalk/scattering.hpp"
#include "qwalk/walk.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace qwalk {

/// lambda^{1+k} delta_{1,0} + lambda^{4-k} delta_{2,0}, k in {1, 2}.
GridState probe_state(int k, double lambda);

struct ProbeFunctionals {
    double lambda = 0;
    /// L[k-1][j-1] = L_kj(lambda) = lambda^{-10} <(W* - U0^{-1} W* U0) u0^k, delta_{j,0}>.
    std::array<std::array<Complex, 2>, 2> L{};
    double tail_budget = 0;
    std::array<double, 2> tail{};
    std::array<std::int64_t, 2> terms{};
};

struct ProbeOptions {
    /// l2 tail budget for the series; lambda^14 when unset.
    std::optional<double> tail_budget;
    std::int64_t t_max = 100000;
};

ProbeFunctionals probe_functionals(const WalkConfig& cfg, double lambda, const ProbeOptions& options = {});

/// The single-site leading term lambda^{-10} <(C_N - I) u0^k, delta_{j,0}>,
/// i.e. the functionals with W* replaced by its t = 0 term.
std::array<std::array<Complex, 2>, 2> taylor_functionals(const WalkConfig& cfg, double lambda);

/// D_lambda g = (g(2 lambda) - g(lambda)) / lambda.
inline Complex d_lambda(Complex g_lambda, Complex g_2lambda, double lambda) { return (g_2lambda - g_lambda) / lambda; }

struct Reconstruction {
    Mat2 d1, d2;
};

/// Row j of d1 is (L_1j - lambda D L_1j, D L_1j); row j of d2 is
/// (D L_2j, L_2j - lambda D L_2j).
Reconstruction reconstruct(const ProbeFunctionals& at_lambda, const ProbeFunctionals& at_2lambda);

struct OrderStudyOptions {
    double window_lo = 0.15, window_hi = 0.4;
    /// At or below this lambda the functionals are flagged roundoff dominated.
    double roundoff_lambda = 0.05;
    ProbeOptions probe;
    unsigned threads = 1;
};

struct LambdaEntry {
    double lambda = 0;
    ProbeFunctionals probes, probes_2x;
    Mat2 d1_hat, d2_hat;
    std::optional<double> err1, err2;
    /// log2(err(lambda) / err(lambda / 2)) when lambda / 2 is in the study.
    std::optional<double> order1, order2;
    /// ||d_hat + d_hat*||.
    double skew1 = 0, skew2 = 0;
    std::vector<std::string> flags;
};

struct ReconstructionReport {
    std::vector<double> grid;
    /// One entry per lambda in grid and grid / 2, in decreasing lambda.
    std::vector<LambdaEntry> entries;
    std::optional<Mat2> truth1, truth2;
    std::vector<std::string> warnings;

    const LambdaEntry* find(double lambda) const;
};

ReconstructionReport order_study(const WalkConfig& cfg, const std::vector<double>& grid,
                                 const OrderStudyOptions& options = {});

} // namespace qwalk

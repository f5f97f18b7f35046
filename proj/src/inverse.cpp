#include "qwalk/inverse.hpp"

#include "qwalk/error.hpp"
#include "qwalk/io.hpp"
#include "qwalk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qwalk {

namespace {

bool same_lambda(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

struct ProbeOutcome {
    std::optional<ProbeFunctionals> value;
    std::string failure;
};

} // namespace

GridState probe_state(int k, double lambda) {
    if (k != 1 && k != 2)
        fail(ErrorCode::invalid_argument, "probe index k must be 1 or 2");
    if (!(lambda > 0))
        fail(ErrorCode::invalid_argument, "lambda must be positive");
    return GridState(0, {Spinor{std::pow(lambda, 1 + k), std::pow(lambda, 4 - k)}});
}

ProbeFunctionals probe_functionals(const WalkConfig& cfg, double lambda, const ProbeOptions& options) {
    if (!(lambda > 0))
        fail(ErrorCode::regime_violation, "lambda must be positive");
    ProbeFunctionals out;
    out.lambda = lambda;
    out.tail_budget = options.tail_budget.value_or(std::pow(lambda, 14));
    TailOptions tail;
    tail.tol = out.tail_budget;
    tail.t_max = options.t_max;
    const double scale = std::pow(lambda, -10);
    for (int k = 1; k <= 2; ++k) {
        const IntertwiningResult r = intertwining_defect(probe_state(k, lambda), cfg, tail);
        const Spinor at0 = r.value.at(0);
        out.L[k - 1] = {-scale * at0.c1, -scale * at0.c2};
        out.tail[k - 1] = r.tail_bound;
        out.terms[k - 1] = r.terms;
    }
    return out;
}

std::array<std::array<Complex, 2>, 2> taylor_functionals(const WalkConfig& cfg, double lambda) {
    const double scale = std::pow(lambda, -10);
    std::array<std::array<Complex, 2>, 2> L{};
    for (int k = 1; k <= 2; ++k) {
        const Spinor s = nonlinear_source(cfg.nonlinear, probe_state(k, lambda)).at(0);
        L[k - 1] = {scale * s.c1, scale * s.c2};
    }
    return L;
}

Reconstruction reconstruct(const ProbeFunctionals& at_lambda, const ProbeFunctionals& at_2lambda) {
    const double lambda = at_lambda.lambda;
    if (!same_lambda(at_2lambda.lambda, 2 * lambda))
        fail(ErrorCode::invalid_argument, "reconstruct needs functionals at lambda and 2 lambda");
    Reconstruction r;
    Complex d1[2][2], d2[2][2];
    for (int j = 0; j < 2; ++j) {
        const Complex l1 = at_lambda.L[0][j], l2 = at_lambda.L[1][j];
        const Complex dl1 = d_lambda(l1, at_2lambda.L[0][j], lambda);
        const Complex dl2 = d_lambda(l2, at_2lambda.L[1][j], lambda);
        d1[j][0] = l1 - lambda * dl1;
        d1[j][1] = dl1;
        d2[j][0] = dl2;
        d2[j][1] = l2 - lambda * dl2;
    }
    r.d1 = {d1[0][0], d1[0][1], d1[1][0], d1[1][1]};
    r.d2 = {d2[0][0], d2[0][1], d2[1][0], d2[1][1]};
    return r;
}

const LambdaEntry* ReconstructionReport::find(double lambda) const {
    for (const auto& e : entries)
        if (same_lambda(e.lambda, lambda))
            return &e;
    return nullptr;
}

ReconstructionReport order_study(const WalkConfig& cfg, const std::vector<double>& grid,
                                 const OrderStudyOptions& options) {
    ReconstructionReport report;
    report.grid = grid;
    if (grid.empty())
        fail(ErrorCode::invalid_argument, "order study needs a nonempty lambda grid");
    for (double l : grid)
        if (!(l > 0))
            fail(ErrorCode::regime_violation, "lambda values must be positive");

    std::vector<double> lambdas;
    auto insert = [](std::vector<double>& v, double x) {
        if (std::none_of(v.begin(), v.end(), [&](double y) { return same_lambda(x, y); }))
            v.push_back(x);
    };
    for (double l : grid) {
        insert(lambdas, l);
        insert(lambdas, l / 2);
    }
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    std::vector<double> probes;
    for (double l : lambdas) {
        insert(probes, l);
        insert(probes, 2 * l);
    }

    std::vector<ProbeOutcome> outcomes(probes.size());
    parallel_for(probes.size(), options.threads, [&](std::size_t i) {
        try {
            outcomes[i].value = probe_functionals(cfg, probes[i], options.probe);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::non_convergence)
                throw;
            outcomes[i].failure = e.what();
        }
    });
    auto outcome = [&](double l) -> const ProbeOutcome& {
        for (std::size_t i = 0; i < probes.size(); ++i)
            if (same_lambda(probes[i], l))
                return outcomes[i];
        fail(ErrorCode::invalid_argument, "missing probe");
    };

    if (cfg.nonlinear.has_tilde_form()) {
        report.truth1 = derivative_at_origin(cfg.nonlinear, 1);
        report.truth2 = derivative_at_origin(cfg.nonlinear, 2);
    } else {
        report.warnings.push_back("coin '" + cfg.nonlinear.name() +
                                  "' has no tilde form; reconstruction emitted without ground truth");
    }

    for (std::size_t i = 0; i < probes.size(); ++i)
        if (!outcomes[i].value)
            report.warnings.push_back("probe at lambda " + format_double(probes[i]) + ": " + outcomes[i].failure);

    for (double l : lambdas) {
        LambdaEntry e;
        e.lambda = l;
        if (l < options.window_lo || l > options.window_hi)
            e.flags.push_back("outside_window");
        if (2 * l > options.window_hi)
            e.flags.push_back("probe_2x_outside_window");
        if (l <= options.roundoff_lambda)
            e.flags.push_back("roundoff");
        const ProbeOutcome& a = outcome(l);
        const ProbeOutcome& b = outcome(2 * l);
        if (!a.value || !b.value) {
            e.flags.push_back("not_certified");
            report.entries.push_back(std::move(e));
            continue;
        }
        e.probes = *a.value;
        e.probes_2x = *b.value;
        const Reconstruction r = reconstruct(e.probes, e.probes_2x);
        e.d1_hat = r.d1;
        e.d2_hat = r.d2;
        e.skew1 = operator_norm(r.d1 + r.d1.adjoint());
        e.skew2 = operator_norm(r.d2 + r.d2.adjoint());
        if (report.truth1) {
            e.err1 = operator_norm(r.d1 - *report.truth1);
            e.err2 = operator_norm(r.d2 - *report.truth2);
        }
        report.entries.push_back(std::move(e));
    }
    for (auto& e : report.entries) {
        const LambdaEntry* half = nullptr;
        for (const auto& h : report.entries)
            if (same_lambda(h.lambda, e.lambda / 2))
                half = &h;
        if (!half)
            continue;
        if (e.err1 && half->err1 && *half->err1 > 0)
            e.order1 = std::log2(*e.err1 / *half->err1);
        if (e.err2 && half->err2 && *half->err2 > 0)
            e.order2 = std::log2(*e.err2 / *half->err2);
    }
    return report;
}

} // namespace qwalk

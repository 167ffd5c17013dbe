#include "sugar/risk.hpp"

#include <cmath>
#include <sstream>

#include "sugar/errors.hpp"
#include "sugar/format.hpp"

namespace sugar {

JacobianSolution Estimator::estimate_with_jacobian(const LeaderStack& y, const Hyperparams& lambda) const {
    AttributePair x = estimate(y, lambda);
    AttributePair zero = AttributePair::zeros(x.rows(), x.cols());
    return {std::move(x), {zero, zero}, {}};
}

AttributePair PrimalDualEstimator::estimate(const LeaderStack& y, const Hyperparams& lambda) const {
    return solve(y, lambda, cfg_).x;
}

JacobianSolution PrimalDualEstimator::estimate_with_jacobian(const LeaderStack& y, const Hyperparams& lambda) const {
    return solve_with_jacobian(y, lambda, cfg_);
}

AttributePair LinearRegressionEstimator::estimate(const LeaderStack& y, const Hyperparams&) const {
    return invert_gram(apply_phi_adjoint(y), y.scales);
}

AttributePair ZeroEstimator::estimate(const LeaderStack& y, const Hyperparams&) const {
    return AttributePair::zeros(y.rows(), y.cols());
}

double fd_step(const CovarianceModel& model, std::size_t P, double alpha) {
    if (P == 0) throw ConfigError("fd_step: P must be positive");
    double m = 0.0;
    for (int a = 0; a < model.size(); ++a) {
        const double c = model.C()(a, a);
        if (!(c > 0.0)) throw DataError("fd_step: non-positive variance");
        m = std::max(m, std::sqrt(c));
    }
    return 2.0 / std::pow(double(P), alpha) * m;
}

RiskProblem RiskProblem::make(const LeaderStack& y, const CovarianceModel& model, double nu,
                              const ProbeVector& probe) {
    if (!(nu > 0.0)) throw ConfigError("finite-difference step nu must be positive");
    if (!(probe.values.scales == y.scales) || probe.values.rows() != y.rows() || probe.values.cols() != y.cols())
        throw DataError("probe shape does not match observations");
    if (!(model.scales() == y.scales)) throw DataError("covariance scale range does not match observations");
    RiskProblem p;
    p.y = y;
    p.model = model;
    p.nu = nu;
    p.probe = probe;
    p.y_perturbed = y + nu * probe.values;
    p.s_eps = apply_S(model, probe.values);
    p.a_s_eps = apply_A(p.s_eps);
    p.trace = trace_term(model, y.scales, 2 * std::size_t(y.rows() * y.cols()));
    return p;
}

RiskProblem RiskProblem::make(const LeaderStack& y, const CovarianceModel& model, std::uint64_t probe_seed) {
    const double nu = fd_step(model, y.total_size());
    return make(y, model, nu, ProbeVector::draw(y.scales, y.rows(), y.cols(), probe_seed));
}

RiskProblem RiskProblem::with_model(const CovarianceModel& other) const {
    RiskProblem p = *this;
    p.model = other;
    p.s_eps = apply_S(other, probe.values);
    p.a_s_eps = apply_A(p.s_eps);
    p.trace = trace_term(other, y.scales, 2 * std::size_t(y.rows() * y.cols()));
    return p;
}

SureReport assemble_sure(const RiskProblem& problem, const Hyperparams& lambda, const AttributePair& x,
                         const AttributePair& x_perturbed) {
    SureReport r;
    r.lambda = lambda;
    r.nu = problem.nu;
    r.probe_seed = problem.probe.seed;
    r.term_fidelity = squared_norm(apply_A(apply_phi(x, problem.y.scales) - problem.y));
    // <A* Pi dx, S eps> = <Pi dx, A S eps>
    r.term_dof = 2.0 / problem.nu * dot(apply_projection(x_perturbed - x), problem.a_s_eps);
    r.term_trace = problem.trace;
    r.value = r.term_fidelity + r.term_dof - r.term_trace;
    return r;
}

SugarReport assemble_sugar(const RiskProblem& problem, const JacobianSolution& at_y,
                           const JacobianSolution& at_perturbed) {
    SugarReport g;
    g.nu = problem.nu;
    g.probe_seed = problem.probe.seed;
    const AttributePair residual = apply_A(apply_phi(at_y.x, problem.y.scales) - problem.y);
    for (int k = 0; k < 2; ++k) {
        const AttributePair a_phi_dx = apply_A(apply_phi(at_y.jacobian[k], problem.y.scales));
        g.gradient[k] = 2.0 * dot(a_phi_dx, residual) +
                        2.0 / problem.nu *
                            dot(apply_projection(at_perturbed.jacobian[k] - at_y.jacobian[k]), problem.a_s_eps);
    }
    return g;
}

SureReport sure(const RiskProblem& problem, const Hyperparams& lambda, const Estimator& estimator) {
    const AttributePair x = estimator.estimate(problem.y, lambda);
    const AttributePair xp = estimator.estimate(problem.y_perturbed, lambda);
    SureReport r = assemble_sure(problem, lambda, x, xp);
    r.solver_calls = 2;
    return r;
}

std::pair<SureReport, SugarReport> sure_and_sugar(const RiskProblem& problem, const Hyperparams& lambda,
                                         const Estimator& estimator) {
    const JacobianSolution a = estimator.estimate_with_jacobian(problem.y, lambda);
    const JacobianSolution b = estimator.estimate_with_jacobian(problem.y_perturbed, lambda);
    SureReport r = assemble_sure(problem, lambda, a.x, b.x);
    r.solver_calls = 2;
    return {r, assemble_sugar(problem, a, b)};
}

double true_risk(const AttributePair& x_hat, const AttributePair& x_bar) {
    return (x_hat.h - x_bar.h).square().sum();
}

std::string sure_csv_header() { return "lambda_h,lambda_v,sure,term_fidelity,term_dof,term_trace,nu,probe_seed"; }

std::string to_csv_row(const SureReport& r) {
    std::ostringstream os;
    os << fmt_double(r.lambda.lambda_h) << ',' << fmt_double(r.lambda.lambda_v) << ',' << fmt_double(r.value) << ','
       << fmt_double(r.term_fidelity) << ',' << fmt_double(r.term_dof) << ',' << fmt_double(r.term_trace) << ','
       << fmt_double(r.nu) << ',' << r.probe_seed;
    return os.str();
}

}  // namespace sugar

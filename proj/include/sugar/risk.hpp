#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>

#include "sugar/covariance.hpp"
#include "sugar/pd_solver.hpp"

namespace sugar {

// x_hat(y; Lambda) together with its Jacobian in Lambda.
class Estimator {
public:
    virtual ~Estimator() = default;
    virtual AttributePair estimate(const LeaderStack& y, const Hyperparams& lambda) const = 0;
    // Default: a Lambda-independent estimator with zero Jacobian.
    virtual JacobianSolution estimate_with_jacobian(const LeaderStack& y, const Hyperparams& lambda) const;
};

class PrimalDualEstimator : public Estimator {
public:
    explicit PrimalDualEstimator(SolverConfig cfg = {}) : cfg_(cfg) {}
    AttributePair estimate(const LeaderStack& y, const Hyperparams& lambda) const override;
    JacobianSolution estimate_with_jacobian(const LeaderStack& y, const Hyperparams& lambda) const override;
    const SolverConfig& config() const { return cfg_; }

private:
    SolverConfig cfg_;
};

class LinearRegressionEstimator : public Estimator {
public:
    AttributePair estimate(const LeaderStack& y, const Hyperparams& lambda) const override;
};

class ZeroEstimator : public Estimator {
public:
    AttributePair estimate(const LeaderStack& y, const Hyperparams& lambda) const override;
};

// nu = (2 / P^alpha) * max_j sqrt(C(j, j))
double fd_step(const CovarianceModel& model, std::size_t P, double alpha = 0.3);

// Everything a SURE/SUGAR evaluation needs that does not depend on Lambda,
// computed once per tuner run: y + nu*eps, S*eps, A*S*eps, Tr(A S A*).
struct RiskProblem {
    LeaderStack y;
    CovarianceModel model;
    double nu = 0.0;
    ProbeVector probe;
    LeaderStack y_perturbed;
    LeaderStack s_eps;
    AttributePair a_s_eps;
    double trace = 0.0;

    static RiskProblem make(const LeaderStack& y, const CovarianceModel& model, double nu, const ProbeVector& probe);
    // nu from fd_step and a probe drawn from probe_seed.
    static RiskProblem make(const LeaderStack& y, const CovarianceModel& model, std::uint64_t probe_seed);
    // Same y, nu, probe; a different covariance model (reuses the perturbed solves).
    RiskProblem with_model(const CovarianceModel& other) const;
};

struct SureReport {
    Hyperparams lambda;
    double value = 0.0;
    double term_fidelity = 0.0;
    double term_dof = 0.0;
    double term_trace = 0.0;
    double nu = 0.0;
    std::uint64_t probe_seed = 0;
    int solver_calls = 0;
};

struct SugarReport {
    Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
    double nu = 0.0;
    std::uint64_t probe_seed = 0;
};

SureReport sure(const RiskProblem& problem, const Hyperparams& lambda, const Estimator& estimator);
std::pair<SureReport, SugarReport> sure_and_sugar(const RiskProblem& problem, const Hyperparams& lambda,
                                         const Estimator& estimator);

// Assembly from precomputed estimates (x_hat(y), x_hat(y + nu*eps)) so that callers can
// share solves between covariance variants.
SureReport assemble_sure(const RiskProblem& problem, const Hyperparams& lambda, const AttributePair& x,
                         const AttributePair& x_perturbed);
SugarReport assemble_sugar(const RiskProblem& problem, const JacobianSolution& at_y,
                           const JacobianSolution& at_perturbed);

// ||Pi (x_hat - x_bar)||^2
double true_risk(const AttributePair& x_hat, const AttributePair& x_bar);

std::string sure_csv_header();
std::string to_csv_row(const SureReport& r);

}  // namespace sugar

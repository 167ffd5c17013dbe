#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "sugar/risk.hpp"

namespace sugar {

struct Evaluation {
    double value = 0.0;
    Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
    SureReport report;  // filled by SURE-backed objectives
    int solver_calls = 0;
};

using Objective = std::function<Evaluation(const Eigen::Vector2d&)>;

struct WolfeParams {
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_trials = 20;
    // One extra cubic-interpolation trial after a Wolfe point whose cubic model has its
    // minimizer elsewhere (relative distance above polish_threshold); exact on quadratics.
    bool polish = true;
    double polish_threshold = 1e-6;
};

struct LineSearchResult {
    double alpha = 0.0;
    Evaluation eval;
    int trials = 0;
    bool wolfe = false;      // both conditions hold at alpha
    bool exhausted = false;  // trial budget ran out; alpha is the best point seen
    bool decreased = false;  // eval.value < value at alpha = 0
};

// Searches along d from x for a strong-Wolfe step, capping alpha so that x + alpha*d >= lower_bound.
LineSearchResult line_search(const Eigen::Vector2d& x, const Eigen::Vector2d& d, const Evaluation& at_x,
                             const Objective& f, const WolfeParams& params, double lower_bound = 1e-8);

// H+ = (I - d u^T / u^T d) H (I - u d^T / u^T d) + alpha d d^T / u^T d
Eigen::Matrix2d bfgs_update(const Eigen::Matrix2d& H, const Eigen::Vector2d& d, const Eigen::Vector2d& u,
                            double alpha, bool* skipped = nullptr);

Hyperparams init_hyperparams(const LeaderStack& l, const CovarianceModel& model);
Eigen::Matrix2d init_inverse_hessian(const Eigen::Vector2d& lambda0, const Eigen::Vector2d& g0, double kappa);

struct TunerConfig {
    double kappa = 0.5;
    int max_iterations = 250;
    double grad_tolerance = 1e-6;
    // Stop once the accepted step is below step_tolerance relative to |Lambda| (0 disables).
    double step_tolerance = 1e-3;
    bool log_space = false;
    double lower_bound = 1e-8;
    WolfeParams wolfe;
};

struct TraceRecord {
    int iteration = 0;
    Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
    double value = 0.0;
    double term_fidelity = 0.0;
    double term_dof = 0.0;
    double term_trace = 0.0;
    double grad_norm = 0.0;
    double alpha = 0.0;
    long solver_calls = 0;  // cumulative
    int line_trials = 0;
    bool update_skipped = false;
    bool hessian_reset = false;
};

struct TunerState {
    Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
    Eigen::Matrix2d H = Eigen::Matrix2d::Identity();
    Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
    double value = 0.0;
    SureReport report;
    std::vector<TraceRecord> trace;
    long solver_calls = 0;
    int skipped_updates = 0;
    std::string stop_reason;
};

// Quasi-Newton minimization over Lambda > 0 starting from lambda0.
TunerState minimize(const Objective& f, const Eigen::Vector2d& lambda0, const TunerConfig& cfg);

struct TuneResult {
    Hyperparams lambda;
    AttributePair estimate;
    TunerState state;
};

// Full tuning: Lambda0 from the data, BFGS on SURE with SUGAR gradients, final solve.
TuneResult tune(const RiskProblem& problem, const Estimator& estimator, const TunerConfig& cfg);
TuneResult tune(const LeaderStack& y, const CovarianceModel& model, std::uint64_t probe_seed,
                const TunerConfig& cfg, const Estimator& estimator);

Objective sure_objective(const RiskProblem& problem, const Estimator& estimator);

std::string trace_csv_header();
std::string to_csv_row(const TraceRecord& r);

}  // namespace sugar

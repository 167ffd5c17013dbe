#pragma once

#include <array>
#include <utility>
#include <vector>

#include "sugar/forward_model.hpp"
#include "sugar/prox.hpp"

namespace sugar {

struct Hyperparams {
    double lambda_h = 1.0;
    double lambda_v = 1.0;

    void validate() const;
    double operator[](int k) const { return k == 0 ? lambda_h : lambda_v; }
    double& operator[](int k) { return k == 0 ? lambda_h : lambda_v; }
};

enum class SolverInit { LinearRegression, Zero };

struct SolverConfig {
    double gap_tolerance = 1e-4;
    long max_iterations = 500000;
    int gap_check_interval = 10;
    double step_safety = 0.99;
    SolverInit init = SolverInit::LinearRegression;
};

struct SolverStats {
    long iterations = 0;
    double gap = 0.0;
    bool converged = false;
};

struct Solution {
    AttributePair x;
    SolverStats stats;
};

struct JacobianSolution {
    AttributePair x;
    std::array<AttributePair, 2> jacobian;  // d x / d lambda_h, d x / d lambda_v
    SolverStats stats;
};

// Accelerated primal-dual iteration for
//   min_x ||Phi x - y||^2 + lambda_h TV(h) + lambda_v TV(v),
// optionally propagating d/dLambda of every iterate alongside.
class PrimalDualSolver {
public:
    PrimalDualSolver(const LeaderStack& y, const Hyperparams& lambda, const SolverConfig& cfg,
                     bool differentiate = false);

    void step();
    // Iterates until the normalized gap reaches tolerance or the iteration budget runs out.
    SolverStats run();

    double gap() const;
    double primal() const;
    double dual() const;

    AttributePair x() const { return {xh_, xv_}; }
    AttributePair w() const { return {wh_, wv_}; }
    DualVariable z() const { return {{zh1_, zh2_}, {zv1_, zv2_}}; }
    AttributePair jacobian(int k) const { return {dxh_[k], dxv_[k]}; }
    double tau1() const { return tau1_; }
    double tau2() const { return tau2_; }
    double theta() const { return theta_; }
    double operator_norm() const { return op_norm_; }
    long iteration() const { return iter_; }
    const std::vector<std::pair<long, double>>& gap_history() const { return gaps_; }

private:
    void dual_step();
    void primal_step();

    ScaleRange s_;
    LeaderStack y_;
    Hyperparams lam_;
    SolverConfig cfg_;
    bool diff_;
    int rows_, cols_;
    double gamma_, op_norm_;
    double tau1_, tau2_, theta_ = 1.0;
    long iter_ = 0;
    ImageField bh_, bv_;
    ImageField xh_, xv_, wh_, wv_, zh1_, zh2_, zv1_, zv2_;
    std::array<ImageField, 2> dxh_, dxv_, dwh_, dwv_, dzh1_, dzh2_, dzv1_, dzv2_;
    std::vector<std::pair<long, double>> gaps_;
};

Solution solve(const LeaderStack& y, const Hyperparams& lambda, const SolverConfig& cfg = {});
JacobianSolution solve_with_jacobian(const LeaderStack& y, const Hyperparams& lambda,
                                     const SolverConfig& cfg = {});

double primal_objective(const AttributePair& x, const LeaderStack& y, const Hyperparams& lambda);
double dual_objective(const DualVariable& z, const LeaderStack& y, const Hyperparams& lambda);
// (P(x) - D(z)) / (P(x) + 1); z must lie in the unit dual ball.
double duality_gap(const AttributePair& x, const DualVariable& z, const LeaderStack& y,
                   const Hyperparams& lambda);

}  // namespace sugar

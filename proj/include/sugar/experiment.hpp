#pragma once

#include <cstdint>
#include <vector>

#include "sugar/covariance.hpp"
#include "sugar/risk.hpp"
#include "sugar/texture.hpp"

namespace sugar {

struct Observation {
    TextureSpec spec;
    ImageField texture;
    LeaderStack leaders;  // log-leaders
    ImageField h_bar;
};

Observation observe(const TextureSpec& spec, const ScaleRange& s);

// Mean of single-sample estimates over Q independent syntheses of `spec`'s model
// (sample q is drawn with a seed derived from spec.seed and q).
CovarianceModel sample_averaged_covariance(const TextureSpec& spec, const ScaleRange& s, int Q,
                                           const CovarianceOptions& opt = {});

// n log-spaced values from center*lo to center*hi.
std::vector<double> log_axis(double center, double lo, double hi, int n);

struct GridConfig {
    double lo = 1e-2;
    double hi = 1e2;
    int n = 15;
    int threads = 0;  // 0: hardware concurrency
};

struct GridNode {
    int ih = 0, iv = 0;
    Hyperparams lambda;
    std::vector<SureReport> sure;  // one per covariance variant
    double risk = 0.0;             // ||h_hat - h_bar||^2 when ground truth is given
    double misclassified = 0.0;
};

struct GridResult {
    std::vector<double> axis_h, axis_v;
    std::vector<GridNode> nodes;  // row-major: index = ih * n_v + iv
    bool has_truth = false;

    std::size_t argmin_sure(std::size_t variant) const;
    std::size_t argmin_risk() const;
    long solver_calls() const { return 2 * long(nodes.size()); }
};

struct GroundTruth {
    ImageField h_bar;
    ImageField mask;
    int regions = 2;
    std::uint64_t segmentation_seed = 0;
};

// Evaluates SURE for every variant at every node, sharing the two solves per node.
// All variants must share y, nu and the probe.
GridResult grid_search(const std::vector<RiskProblem>& variants, const std::vector<double>& axis_h,
                       const std::vector<double>& axis_v, const Estimator& estimator, const GroundTruth* truth,
                       int threads = 0);

// Grid-cell distance max(|di|, |dj|) between two node indices.
int cell_distance(const GridResult& g, std::size_t a, std::size_t b);

}  // namespace sugar

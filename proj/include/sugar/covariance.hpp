#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sugar/forward_model.hpp"

namespace sugar {

enum class CovarianceKind { Var, Inter, Full };

std::string to_string(CovarianceKind k);
CovarianceKind parse_covariance_kind(const std::string& s);

// Finite 2-D window indexed by lag (dr, dc) with |dr| <= radius_rows, |dc| <= radius_cols.
struct LagKernel {
    int radius_rows = 0;
    int radius_cols = 0;
    ImageField taps = ImageField::Ones(1, 1);

    static LagKernel delta();
    static LagKernel zeros(int radius_rows, int radius_cols);
    double at(int dr, int dc) const;
    double& ref(int dr, int dc) { return taps(dr + radius_rows, dc + radius_cols); }
    LagKernel mirrored() const;  // K(-dr, -dc)
};

// Stationary covariance of log-leader noise:
//   cov(l_a(n), l_b(n + delta)) = C(a, b) * kernel(a, b)(delta)
// where a, b index planes of the scale range.
class CovarianceModel {
public:
    CovarianceModel() = default;
    CovarianceModel(CovarianceKind kind, ScaleRange scales);

    static CovarianceModel identity(const ScaleRange& s);

    CovarianceKind kind() const { return kind_; }
    const ScaleRange& scales() const { return scales_; }
    int size() const { return scales_.size(); }
    const Eigen::MatrixXd& C() const { return C_; }
    const LagKernel& kernel(int a, int b) const { return kernels_[a * size() + b]; }

    // Sets pair (a, b) and its mirror (b, a) so that S stays exactly symmetric.
    void set_pair(int a, int b, double c, const LagKernel& k);

    void validate() const;

private:
    CovarianceKind kind_ = CovarianceKind::Full;
    ScaleRange scales_;
    Eigen::MatrixXd C_;
    std::vector<LagKernel> kernels_;
};

struct CovarianceOptions {
    double radius_factor = 4.0;  // radius = factor * max(2^j, 2^j')
    int max_radius = -1;         // < 0: clamp to (min(rows, cols) - 1) / 2
};

int lag_radius(int j, int jp, int rows, int cols, const CovarianceOptions& opt = {});

CovarianceModel estimate_covariance(const LeaderStack& l, const CovarianceOptions& opt = {});
CovarianceModel average_covariance(const std::vector<CovarianceModel>& samples);
CovarianceModel restrict_model(const CovarianceModel& model, CovarianceKind kind);

struct ProbeVector {
    LeaderStack values;
    std::uint64_t seed = 0;

    static ProbeVector draw(const ScaleRange& s, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);
};

// (S eps)_a(n) = sum_b sum_delta C(a,b) Xi_ab(delta) eps_b(n + delta), periodic.
LeaderStack apply_S(const CovarianceModel& model, const LeaderStack& eps);

// Tr(A S A*) for an attribute space of total dimension N = 2 * rows * cols.
double trace_term(const CovarianceModel& model, const ScaleRange& s, std::size_t N);

// tr(S) = rows * cols * sum_j C(j, j).
double total_variance(const CovarianceModel& model, Eigen::Index rows, Eigen::Index cols);

}  // namespace sugar

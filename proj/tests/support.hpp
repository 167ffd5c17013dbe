#pragma once

// Generators and dense reference operators shared by the unit and acceptance tests.

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sugar/covariance.hpp"
#include "sugar/fields.hpp"
#include "sugar/forward_model.hpp"
#include "sugar/prox.hpp"
#include "sugar/rng.hpp"

namespace testing {

using sugar::AttributePair;
using sugar::CovarianceModel;
using sugar::ImageField;
using sugar::LeaderStack;
using sugar::ScaleRange;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline ImageField random_field(sugar::Rng& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    ImageField f(rows, cols);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = n(rng);
    return f;
}

inline AttributePair random_pair(sugar::Rng& rng, int rows, int cols, double scale = 1.0) {
    return {random_field(rng, rows, cols, scale), random_field(rng, rows, cols, scale)};
}

inline LeaderStack random_stack(sugar::Rng& rng, const ScaleRange& s, int rows, int cols, double scale = 1.0) {
    std::vector<ImageField> planes;
    for (int a = 0; a < s.size(); ++a) planes.push_back(random_field(rng, rows, cols, scale));
    return LeaderStack(s, std::move(planes));
}

inline sugar::GradientPair random_gradient(sugar::Rng& rng, int rows, int cols) {
    return {random_field(rng, rows, cols), random_field(rng, rows, cols)};
}

inline double uniform(sugar::Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(sugar::Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Piecewise-constant pair: a centered rectangle on a flat background, per channel.
inline AttributePair blocky_pair(int rows, int cols, double h_out, double h_in, double v_out, double v_in) {
    AttributePair x = AttributePair::zeros(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const bool in = r >= rows / 4 && r < 3 * rows / 4 && c >= cols / 4 && c < 3 * cols / 4;
            x.h(r, c) = in ? h_in : h_out;
            x.v(r, c) = in ? v_in : v_out;
        }
    return x;
}

// ---- vectorization (row-major pixels; planes/slots concatenated) ----

inline VectorXd vec(const ImageField& f) { return Eigen::Map<const VectorXd>(f.data(), f.size()); }

inline VectorXd vec(const AttributePair& x) {
    VectorXd v(2 * x.h.size());
    v << vec(x.h), vec(x.v);
    return v;
}

inline VectorXd vec(const LeaderStack& y) {
    const Eigen::Index n = y.rows() * y.cols();
    VectorXd v(n * Eigen::Index(y.planes.size()));
    for (std::size_t a = 0; a < y.planes.size(); ++a) v.segment(Eigen::Index(a) * n, n) = vec(y.planes[a]);
    return v;
}

inline ImageField unvec_field(const VectorXd& v, int rows, int cols) {
    ImageField f(rows, cols);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = v[i];
    return f;
}

inline LeaderStack unvec_stack(const VectorXd& v, const ScaleRange& s, int rows, int cols) {
    std::vector<ImageField> planes;
    const Eigen::Index n = Eigen::Index(rows) * cols;
    for (int a = 0; a < s.size(); ++a) planes.push_back(unvec_field(v.segment(a * n, n), rows, cols));
    return LeaderStack(s, std::move(planes));
}

// ---- dense operators, built entry by entry from their definitions ----

// Forward differences with Neumann boundary; rows 0..n-1 are d1, n..2n-1 are d2.
inline MatrixXd dense_gradient(int rows, int cols) {
    const int n = rows * cols;
    MatrixXd D = MatrixXd::Zero(2 * n, n);
    auto idx = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                D(idx(r, c), idx(r, c + 1)) = 1.0;
                D(idx(r, c), idx(r, c)) = -1.0;
            }
            if (r + 1 < rows) {
                D(n + idx(r, c), idx(r + 1, c)) = 1.0;
                D(n + idx(r, c), idx(r, c)) = -1.0;
            }
        }
    return D;
}

// Phi: attribute vector (h; v) -> stacked planes, plane j = j h + v.
inline MatrixXd dense_phi(const ScaleRange& s, int rows, int cols) {
    const int n = rows * cols, J = s.size();
    MatrixXd M = MatrixXd::Zero(J * n, 2 * n);
    for (int a = 0; a < J; ++a)
        for (int i = 0; i < n; ++i) {
            M(a * n + i, i) = s.scale(a);
            M(a * n + i, n + i) = 1.0;
        }
    return M;
}

inline MatrixXd dense_projection(int rows, int cols) {
    const int n = rows * cols;
    MatrixXd P = MatrixXd::Zero(2 * n, 2 * n);
    P.topLeftCorner(n, n).setIdentity();
    return P;
}

// A = Pi (Phi* Phi)^-1 Phi*, inverted numerically rather than via the closed form.
inline MatrixXd dense_A(const ScaleRange& s, int rows, int cols) {
    const MatrixXd F = dense_phi(s, rows, cols);
    const MatrixXd G = F.transpose() * F;
    return dense_projection(rows, cols) * G.ldlt().solve(F.transpose());
}

// S from its defining formula cov(l_a(n), l_b(n + delta)) = C_ab Xi_ab(delta), periodic.
inline MatrixXd dense_S(const CovarianceModel& m, int rows, int cols) {
    const int n = rows * cols, J = m.size();
    MatrixXd S = MatrixXd::Zero(J * n, J * n);
    for (int a = 0; a < J; ++a)
        for (int b = 0; b < J; ++b) {
            const auto& k = m.kernel(a, b);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    for (int dr = -k.radius_rows; dr <= k.radius_rows; ++dr)
                        for (int dc = -k.radius_cols; dc <= k.radius_cols; ++dc) {
                            const int r2 = ((r + dr) % rows + rows) % rows;
                            const int c2 = ((c + dc) % cols + cols) % cols;
                            S(a * n + r * cols + c, b * n + r2 * cols + c2) += m.C()(a, b) * k.at(dr, dc);
                        }
        }
    return S;
}

// Random symmetric model: C = B B^T + eps I, kernels with Xi(0) = 1 and arbitrary other taps
// (the pair (b, a) is the mirror of (a, b)).
inline CovarianceModel random_model(sugar::Rng& rng, const ScaleRange& s, int max_radius, double tap_scale = 0.3) {
    const int J = s.size();
    MatrixXd B(J, J);
    for (int i = 0; i < J; ++i)
        for (int j = 0; j < J; ++j) B(i, j) = uniform(rng, -1.0, 1.0);
    const MatrixXd C = B * B.transpose() + 0.1 * MatrixXd::Identity(J, J);
    CovarianceModel m(sugar::CovarianceKind::Full, s);
    for (int a = 0; a < J; ++a)
        for (int b = a; b < J; ++b) {
            auto k = sugar::LagKernel::zeros(uniform_int(rng, 0, max_radius), uniform_int(rng, 0, max_radius));
            for (Eigen::Index i = 0; i < k.taps.size(); ++i) k.taps.data()[i] = uniform(rng, -tap_scale, tap_scale);
            k.ref(0, 0) = 1.0;
            m.set_pair(a, b, C(a, b), k);
        }
    return m;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double rel_err(const VectorXd& a, const VectorXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace testing

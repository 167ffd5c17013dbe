#pragma once

#include <cmath>

#include "sugar/fields.hpp"
#include "sugar/forward_model.hpp"

namespace sugar {

// Dual variable of the TV term: one 2-vector group per pixel and per channel.
struct DualVariable {
    GradientPair h, v;

    static DualVariable zeros(Eigen::Index rows, Eigen::Index cols);
};

double dot(const DualVariable& a, const DualVariable& b);

// Per-group kernels, shared by the field-level wrappers and the fused solver loops.
namespace group {

inline void prox_l21(double& a, double& b, double tau) {
    const double n = std::sqrt(a * a + b * b);
    if (n <= tau) {
        a = b = 0.0;
        return;
    }
    const double s = 1.0 - tau / n;
    a *= s;
    b *= s;
}

inline void dprox_l21(double xa, double xb, double tau, double& da, double& db) {
    const double n2 = xa * xa + xb * xb;
    const double n = std::sqrt(n2);
    if (n <= tau) {
        da = db = 0.0;
        return;
    }
    const double proj = (da * xa + db * xb) / n2;
    const double ra = da - proj * xa, rb = db - proj * xb;
    da -= tau / n * ra;
    db -= tau / n * rb;
}

inline void project_unit_ball(double& a, double& b) {
    const double n2 = a * a + b * b;
    if (n2 <= 1.0) return;
    const double inv = 1.0 / std::sqrt(n2);
    a *= inv;
    b *= inv;
}

// Differential of the projection evaluated at the pre-projection point (za, zb).
inline void dproject_unit_ball(double za, double zb, double& da, double& db) {
    const double n2 = za * za + zb * zb;
    if (n2 < 1.0) return;
    const double n = std::sqrt(n2);
    const double proj = (da * za + db * zb) / n2;
    da = (da - proj * za) / n;
    db = (db - proj * zb) / n;
}

}  // namespace group

GradientPair prox_l21(const GradientPair& x, double tau);
GradientPair dprox_l21(const GradientPair& x, double tau, const GradientPair& delta);
GradientPair prox_l21_conjugate(const GradientPair& z, double tau);
GradientPair dprox_l21_conjugate(const GradientPair& z, double tau, const GradientPair& delta);

DualVariable prox_l21_conjugate(const DualVariable& z, double tau);
DualVariable dprox_l21_conjugate(const DualVariable& z, double tau, const DualVariable& delta);

// argmin_x ||x - xt||^2 / (2 tau) + ||Phi x - y||^2, solved per pixel.
AttributePair prox_data_fidelity(const AttributePair& xt, double tau, const LeaderStack& y);
// Same map with a precomputed Phi*y.
AttributePair prox_data_fidelity(const AttributePair& xt, double tau, const AttributePair& phi_adj_y,
                                 const ScaleRange& s);
AttributePair dprox_data_fidelity(const AttributePair& delta, double tau, const ScaleRange& s);

}  // namespace sugar

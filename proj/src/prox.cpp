#include "sugar/prox.hpp"

#include "sugar/errors.hpp"

namespace sugar {

DualVariable DualVariable::zeros(Eigen::Index rows, Eigen::Index cols) {
    const ImageField z = ImageField::Zero(rows, cols);
    return DualVariable{GradientPair{z, z}, GradientPair{z, z}};
}

double dot(const DualVariable& a, const DualVariable& b) {
    return (a.h.d1 * b.h.d1).sum() + (a.h.d2 * b.h.d2).sum() + (a.v.d1 * b.v.d1).sum() +
           (a.v.d2 * b.v.d2).sum();
}

namespace {

template <class F>
GradientPair map_groups(const GradientPair& x, F f) {
    GradientPair out = x;
    for (Eigen::Index i = 0; i < out.d1.size(); ++i) f(i, out.d1.data()[i], out.d2.data()[i]);
    return out;
}

}  // namespace

GradientPair prox_l21(const GradientPair& x, double tau) {
    return map_groups(x, [tau](Eigen::Index, double& a, double& b) { group::prox_l21(a, b, tau); });
}

GradientPair dprox_l21(const GradientPair& x, double tau, const GradientPair& delta) {
    return map_groups(delta, [&](Eigen::Index i, double& a, double& b) {
        group::dprox_l21(x.d1.data()[i], x.d2.data()[i], tau, a, b);
    });
}

// The conjugate of the l21 norm is the indicator of the unit l2 ball per group,
// so its prox is a projection for every tau > 0.
GradientPair prox_l21_conjugate(const GradientPair& z, double tau) {
    if (!(tau > 0.0)) throw ConfigError("prox_l21_conjugate: tau must be positive");
    return map_groups(z, [](Eigen::Index, double& a, double& b) { group::project_unit_ball(a, b); });
}

GradientPair dprox_l21_conjugate(const GradientPair& z, double tau, const GradientPair& delta) {
    if (!(tau > 0.0)) throw ConfigError("dprox_l21_conjugate: tau must be positive");
    return map_groups(delta, [&](Eigen::Index i, double& a, double& b) {
        group::dproject_unit_ball(z.d1.data()[i], z.d2.data()[i], a, b);
    });
}

DualVariable prox_l21_conjugate(const DualVariable& z, double tau) {
    return DualVariable{prox_l21_conjugate(z.h, tau), prox_l21_conjugate(z.v, tau)};
}

DualVariable dprox_l21_conjugate(const DualVariable& z, double tau, const DualVariable& delta) {
    return DualVariable{dprox_l21_conjugate(z.h, tau, delta.h), dprox_l21_conjugate(z.v, tau, delta.v)};
}

AttributePair prox_data_fidelity(const AttributePair& xt, double tau, const AttributePair& phi_adj_y,
                                 const ScaleRange& s) {
    return dprox_data_fidelity(xt + (2.0 * tau) * phi_adj_y, tau, s);
}

AttributePair prox_data_fidelity(const AttributePair& xt, double tau, const LeaderStack& y) {
    return prox_data_fidelity(xt, tau, apply_phi_adjoint(y), y.scales);
}

AttributePair dprox_data_fidelity(const AttributePair& delta, double tau, const ScaleRange& s) {
    if (tau < 0.0) throw ConfigError("prox_data_fidelity: tau must be nonnegative");
    const double a = 1.0 + 2.0 * tau * s.f2(), b = 2.0 * tau * s.f1(), d = 1.0 + 2.0 * tau * s.f0();
    const double det = a * d - b * b;
    return AttributePair((d * delta.h - b * delta.v) / det, (a * delta.v - b * delta.h) / det);
}

}  // namespace sugar

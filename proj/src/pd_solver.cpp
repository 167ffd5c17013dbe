#include "sugar/pd_solver.hpp"

#include <algorithm>
#include <cmath>

#include "sugar/errors.hpp"

namespace sugar {

void Hyperparams::validate() const {
    if (!(lambda_h > 0.0) || !(lambda_v > 0.0) || !std::isfinite(lambda_h) || !std::isfinite(lambda_v))
        throw ConfigError("hyperparameters must be positive and finite");
}

namespace {

double fidelity(const ImageField& h, const ImageField& v, const LeaderStack& y) {
    double s = 0.0;
    for (int i = 0; i < y.scales.size(); ++i)
        s += (double(y.scales.scale(i)) * h + v - y.planes[i]).square().sum();
    return s;
}

double dual_value(const ImageField& zh1, const ImageField& zh2, const ImageField& zv1, const ImageField& zv2,
                  const LeaderStack& y, const Hyperparams& lam) {
    ImageField div_h = divergence(GradientPair{zh1, zh2});
    ImageField div_v = divergence(GradientPair{zv1, zv2});
    AttributePair rhs = apply_phi_adjoint(y);
    rhs.h += 0.5 * lam.lambda_h * div_h;
    rhs.v += 0.5 * lam.lambda_v * div_v;
    AttributePair xz = invert_gram(rhs, y.scales);
    return fidelity(xz.h, xz.v, y) - lam.lambda_h * (xz.h * div_h).sum() - lam.lambda_v * (xz.v * div_v).sum();
}

}  // namespace

double primal_objective(const AttributePair& x, const LeaderStack& y, const Hyperparams& lambda) {
    return fidelity(x.h, x.v, y) + lambda.lambda_h * tv(x.h) + lambda.lambda_v * tv(x.v);
}

double dual_objective(const DualVariable& z, const LeaderStack& y, const Hyperparams& lambda) {
    return dual_value(z.h.d1, z.h.d2, z.v.d1, z.v.d2, y, lambda);
}

double duality_gap(const AttributePair& x, const DualVariable& z, const LeaderStack& y,
                   const Hyperparams& lambda) {
    const double p = primal_objective(x, y, lambda);
    return (p - dual_objective(z, y, lambda)) / (std::abs(p) + 1.0);
}

PrimalDualSolver::PrimalDualSolver(const LeaderStack& y, const Hyperparams& lambda, const SolverConfig& cfg,
                                   bool differentiate)
    : s_(y.scales), y_(y), lam_(lambda), cfg_(cfg), diff_(differentiate) {
    lam_.validate();
    s_.require_regular();
    if (cfg_.gap_check_interval < 1) throw ConfigError("gap_check_interval must be >= 1");
    if (!(cfg_.step_safety > 0.0 && cfg_.step_safety < 1.0)) throw ConfigError("step_safety must lie in (0,1)");
    for (const auto& p : y.planes)
        if (!all_finite(p)) throw DataError("observation contains non-finite values");
    rows_ = int(y.rows());
    cols_ = int(y.cols());
    gamma_ = strong_convexity_modulus(s_);
    op_norm_ = std::max(lam_.lambda_h, lam_.lambda_v) * std::sqrt(gradient_norm_sq(rows_, cols_));
    tau1_ = tau2_ = op_norm_ > 0.0 ? cfg_.step_safety / op_norm_ : 1.0;

    AttributePair b = apply_phi_adjoint(y);
    bh_ = std::move(b.h);
    bv_ = std::move(b.v);
    if (cfg_.init == SolverInit::LinearRegression) {
        AttributePair lr = invert_gram(AttributePair(bh_, bv_), s_);
        xh_ = std::move(lr.h);
        xv_ = std::move(lr.v);
    } else {
        xh_ = ImageField::Zero(rows_, cols_);
        xv_ = ImageField::Zero(rows_, cols_);
    }
    wh_ = xh_;
    wv_ = xv_;
    const ImageField zero = ImageField::Zero(rows_, cols_);
    zh1_ = zh2_ = zv1_ = zv2_ = zero;
    if (diff_)
        for (int k = 0; k < 2; ++k)
            dxh_[k] = dxv_[k] = dwh_[k] = dwv_[k] = dzh1_[k] = dzh2_[k] = dzv1_[k] = dzv2_[k] = zero;
}

void PrimalDualSolver::dual_step() {
    const int R = rows_, C = cols_;
    const double sh = tau1_ * lam_.lambda_h, sv = tau1_ * lam_.lambda_v;
    const double* wh = wh_.data();
    const double* wv = wv_.data();
    double *zh1 = zh1_.data(), *zh2 = zh2_.data(), *zv1 = zv1_.data(), *zv2 = zv2_.data();
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            const int i = r * C + c;
            const bool rc = c + 1 < C, rr = r + 1 < R;
            const double gh1 = rc ? wh[i + 1] - wh[i] : 0.0, gh2 = rr ? wh[i + C] - wh[i] : 0.0;
            const double gv1 = rc ? wv[i + 1] - wv[i] : 0.0, gv2 = rr ? wv[i + C] - wv[i] : 0.0;
            const double th1 = zh1[i] + sh * gh1, th2 = zh2[i] + sh * gh2;
            const double tv1 = zv1[i] + sv * gv1, tv2 = zv2[i] + sv * gv2;
            if (diff_) {
                for (int k = 0; k < 2; ++k) {
                    const double* dwh = dwh_[k].data();
                    const double* dwv = dwv_[k].data();
                    double dh1 = dzh1_[k].data()[i] + sh * (rc ? dwh[i + 1] - dwh[i] : 0.0);
                    double dh2 = dzh2_[k].data()[i] + sh * (rr ? dwh[i + C] - dwh[i] : 0.0);
                    double dv1 = dzv1_[k].data()[i] + sv * (rc ? dwv[i + 1] - dwv[i] : 0.0);
                    double dv2 = dzv2_[k].data()[i] + sv * (rr ? dwv[i + C] - dwv[i] : 0.0);
                    if (k == 0) {
                        dh1 += tau1_ * gh1;
                        dh2 += tau1_ * gh2;
                    } else {
                        dv1 += tau1_ * gv1;
                        dv2 += tau1_ * gv2;
                    }
                    group::dproject_unit_ball(th1, th2, dh1, dh2);
                    group::dproject_unit_ball(tv1, tv2, dv1, dv2);
                    dzh1_[k].data()[i] = dh1;
                    dzh2_[k].data()[i] = dh2;
                    dzv1_[k].data()[i] = dv1;
                    dzv2_[k].data()[i] = dv2;
                }
            }
            double a = th1, b = th2;
            group::project_unit_ball(a, b);
            zh1[i] = a;
            zh2[i] = b;
            a = tv1;
            b = tv2;
            group::project_unit_ball(a, b);
            zv1[i] = a;
            zv2[i] = b;
        }
    }
}

namespace {

inline double div_at(const double* p1, const double* p2, int r, int c, int R, int C) {
    const int i = r * C + c;
    return (c + 1 < C ? p1[i] : 0.0) - (c > 0 ? p1[i - 1] : 0.0) + (r + 1 < R ? p2[i] : 0.0) -
           (r > 0 ? p2[i - C] : 0.0);
}

}  // namespace

void PrimalDualSolver::primal_step() {
    const int R = rows_, C = cols_;
    const double t = tau2_;
    const double ph = t * lam_.lambda_h, pv = t * lam_.lambda_v;
    // (I + 2t Phi*Phi)^{-1} as a 2x2 cofactor inverse
    const double m11 = 1.0 + 2.0 * t * s_.f2(), m12 = 2.0 * t * s_.f1(), m22 = 1.0 + 2.0 * t * s_.f0();
    const double det = m11 * m22 - m12 * m12;
    const double i11 = m22 / det, i12 = -m12 / det, i22 = m11 / det;
    const double theta = 1.0 / std::sqrt(1.0 + 2.0 * gamma_ * t);
    double *xh = xh_.data(), *xv = xv_.data(), *wh = wh_.data(), *wv = wv_.data();
    const double *bh = bh_.data(), *bv = bv_.data();
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            const int i = r * C + c;
            const double divh = div_at(zh1_.data(), zh2_.data(), r, c, R, C);
            const double divv = div_at(zv1_.data(), zv2_.data(), r, c, R, C);
            const double rh = xh[i] + ph * divh + 2.0 * t * bh[i];
            const double rv = xv[i] + pv * divv + 2.0 * t * bv[i];
            const double nh = i11 * rh + i12 * rv, nv = i12 * rh + i22 * rv;
            if (diff_) {
                for (int k = 0; k < 2; ++k) {
                    double* dxh = dxh_[k].data();
                    double* dxv = dxv_[k].data();
                    double eh = dxh[i] + ph * div_at(dzh1_[k].data(), dzh2_[k].data(), r, c, R, C);
                    double ev = dxv[i] + pv * div_at(dzv1_[k].data(), dzv2_[k].data(), r, c, R, C);
                    if (k == 0)
                        eh += t * divh;
                    else
                        ev += t * divv;
                    const double dnh = i11 * eh + i12 * ev, dnv = i12 * eh + i22 * ev;
                    dwh_[k].data()[i] = dnh + theta * (dnh - dxh[i]);
                    dwv_[k].data()[i] = dnv + theta * (dnv - dxv[i]);
                    dxh[i] = dnh;
                    dxv[i] = dnv;
                }
            }
            wh[i] = nh + theta * (nh - xh[i]);
            wv[i] = nv + theta * (nv - xv[i]);
            xh[i] = nh;
            xv[i] = nv;
        }
    }
    theta_ = theta;
    tau1_ /= theta;
    tau2_ *= theta;
}

void PrimalDualSolver::step() {
    dual_step();
    primal_step();
    ++iter_;
}

double PrimalDualSolver::primal() const {
    return fidelity(xh_, xv_, y_) + lam_.lambda_h * tv(xh_) + lam_.lambda_v * tv(xv_);
}

double PrimalDualSolver::dual() const { return dual_value(zh1_, zh2_, zv1_, zv2_, y_, lam_); }

double PrimalDualSolver::gap() const {
    const double p = primal();
    return (p - dual()) / (std::abs(p) + 1.0);
}

SolverStats PrimalDualSolver::run() {
    SolverStats st;
    if (op_norm_ == 0.0) {  // 1x1 grid: no penalty acts, the LR initialization is optimal
        st.converged = true;
        st.gap = gap();
        gaps_.emplace_back(iter_, st.gap);
        return st;
    }
    while (iter_ < cfg_.max_iterations) {
        step();
        if (iter_ % cfg_.gap_check_interval == 0 || iter_ == cfg_.max_iterations) {
            const double g = gap();
            if (!std::isfinite(g)) throw SolverError("primal-dual iteration diverged", iter_);
            gaps_.emplace_back(iter_, g);
            if (g <= cfg_.gap_tolerance) {
                st.converged = true;
                break;
            }
        }
    }
    st.iterations = iter_;
    st.gap = gaps_.empty() ? gap() : gaps_.back().second;
    return st;
}

Solution solve(const LeaderStack& y, const Hyperparams& lambda, const SolverConfig& cfg) {
    PrimalDualSolver pd(y, lambda, cfg, false);
    SolverStats st = pd.run();
    return {pd.x(), st};
}

JacobianSolution solve_with_jacobian(const LeaderStack& y, const Hyperparams& lambda, const SolverConfig& cfg) {
    PrimalDualSolver pd(y, lambda, cfg, true);
    SolverStats st = pd.run();
    return {pd.x(), {pd.jacobian(0), pd.jacobian(1)}, st};
}

}  // namespace sugar

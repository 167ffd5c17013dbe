#include "sugar/tuner.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sugar/errors.hpp"
#include "sugar/format.hpp"

namespace sugar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Minimizer of the cubic matching values and slopes at a and b.
double cubic_min(double a, double fa, double ga, double b, double fb, double gb) {
    const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - ga * gb;
    if (!(disc >= 0.0)) return kNaN;
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double den = gb - ga + 2.0 * d2;
    if (den == 0.0) return kNaN;
    return b - (b - a) * (gb + d2 - d1) / den;
}

Eigen::Vector2d clamp_below(Eigen::Vector2d x, double lb) {
    for (int k = 0; k < 2; ++k) x[k] = std::max(x[k], lb);
    return x;
}

struct Searcher {
    const Eigen::Vector2d& x;
    const Eigen::Vector2d& d;
    const Objective& f;
    const WolfeParams& p;
    double lb, phi0, dphi0, amax;
    LineSearchResult res;
    double best_alpha = 0.0;
    Evaluation best_eval;
    bool have_best = false;
    long calls = 0;

    Evaluation eval(double a) {
        ++res.trials;
        Evaluation e = f(clamp_below(x + a * d, lb));
        calls += e.solver_calls;
        if (!have_best || e.value < best_eval.value) {
            best_eval = e;
            best_alpha = a;
            have_best = true;
        }
        return e;
    }
    bool armijo(double a, double fa) const { return fa <= phi0 + p.c1 * a * dphi0; }
    bool curvature(double ga) const { return std::abs(ga) <= -p.c2 * dphi0; }

    LineSearchResult finish(double a, const Evaluation& e, bool wolfe) {
        res.alpha = a;
        res.eval = e;
        res.wolfe = wolfe;
        res.decreased = e.value < phi0;
        return res;
    }

    LineSearchResult exhausted() {
        res.exhausted = true;
        if (!have_best) return finish(0.0, Evaluation{}, false);
        return finish(best_alpha, best_eval, false);
    }

    LineSearchResult accept(double a, const Evaluation& e) {
        const double ga = e.gradient.dot(d);
        if (p.polish && res.trials < p.max_trials) {
            const double ac = cubic_min(0.0, phi0, dphi0, a, e.value, ga);
            if (std::isfinite(ac) && ac > 0.0 && ac <= amax && std::abs(ac - a) > p.polish_threshold * a) {
                Evaluation ec = eval(ac);
                if (ec.value < e.value && armijo(ac, ec.value))
                    return finish(ac, ec, curvature(ec.gradient.dot(d)));
            }
        }
        return finish(a, e, armijo(a, e.value) && curvature(ga));
    }

    LineSearchResult zoom(double lo, double flo, double glo, double hi, double fhi, double ghi) {
        while (res.trials < p.max_trials) {
            const double left = std::min(lo, hi), right = std::max(lo, hi), w = right - left;
            double a = cubic_min(lo, flo, glo, hi, fhi, ghi);
            if (!std::isfinite(a) || a < left + 0.1 * w || a > right - 0.1 * w) a = 0.5 * (lo + hi);
            Evaluation e = eval(a);
            const double ga = e.gradient.dot(d);
            if (!armijo(a, e.value) || e.value >= flo) {
                hi = a;
                fhi = e.value;
                ghi = ga;
            } else {
                if (curvature(ga)) return accept(a, e);
                if (ga * (hi - lo) >= 0.0) {
                    hi = lo;
                    fhi = flo;
                    ghi = glo;
                }
                lo = a;
                flo = e.value;
                glo = ga;
            }
        }
        return exhausted();
    }

    LineSearchResult run() {
        if (amax <= 0.0) return exhausted();
        double a_prev = 0.0, f_prev = phi0, g_prev = dphi0;
        double a = std::min(1.0, amax);
        for (int i = 0; res.trials < p.max_trials; ++i) {
            Evaluation e = eval(a);
            const double fa = e.value, ga = e.gradient.dot(d);
            if (!armijo(a, fa) || (i > 0 && fa >= f_prev)) return zoom(a_prev, f_prev, g_prev, a, fa, ga);
            if (curvature(ga)) return accept(a, e);
            if (ga >= 0.0) return zoom(a, fa, ga, a_prev, f_prev, g_prev);
            if (a >= amax) return finish(a, e, false);  // box cap reached with sufficient decrease
            double next = cubic_min(a_prev, f_prev, g_prev, a, fa, ga);
            if (!std::isfinite(next) || next < 2.0 * a) next = 2.0 * a;
            next = std::min({next, 10.0 * a, amax});
            a_prev = a;
            f_prev = fa;
            g_prev = ga;
            a = next;
        }
        return exhausted();
    }
};

}  // namespace

LineSearchResult line_search(const Eigen::Vector2d& x, const Eigen::Vector2d& d, const Evaluation& at_x,
                             const Objective& f, const WolfeParams& params, double lower_bound) {
    const double dphi0 = at_x.gradient.dot(d);
    if (!(dphi0 < 0.0)) throw TunerError("line search: direction is not a descent direction");
    double amax = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2; ++k)
        if (d[k] < 0.0) amax = std::min(amax, (x[k] - lower_bound) / -d[k]);
    Searcher s{x, d, f, params, lower_bound, at_x.value, dphi0, amax, {}, 0.0, {}, false, 0};
    LineSearchResult r = s.run();
    r.eval.solver_calls = int(s.calls);
    return r;
}

Eigen::Matrix2d bfgs_update(const Eigen::Matrix2d& H, const Eigen::Vector2d& d, const Eigen::Vector2d& u,
                            double alpha, bool* skipped) {
    const double ud = u.dot(d);
    if (std::abs(ud) < 1e-12 * u.norm() * d.norm() || ud == 0.0) {
        if (skipped) *skipped = true;
        return H;
    }
    if (skipped) *skipped = false;
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d L = I - d * u.transpose() / ud;
    Eigen::Matrix2d out = L * H * L.transpose() + alpha * d * d.transpose() / ud;
    out = 0.5 * (out + out.transpose());
    return out;
}

Hyperparams init_hyperparams(const LeaderStack& l, const CovarianceModel& model) {
    const AttributePair lr = invert_gram(apply_phi_adjoint(l), l.scales);
    const double tv_h = tv(lr.h), tv_v = tv(lr.v);
    if (!(tv_h > 0.0) || !(tv_v > 0.0))
        throw DegenerateDataError("initial hyperparameters: linear-regression estimate has zero total variation");
    const double trs = total_variance(model, l.rows(), l.cols());
    return Hyperparams{trs / (2.0 * tv_h), trs / (2.0 * tv_v)};
}

Eigen::Matrix2d init_inverse_hessian(const Eigen::Vector2d& lambda0, const Eigen::Vector2d& g0, double kappa) {
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    for (int k = 0; k < 2; ++k) {
        const double g = g0[k] != 0.0 ? g0[k] : g0.norm() + 1e-12;
        H(k, k) = std::abs(kappa * lambda0[k] / g);
    }
    return H;
}

TunerState minimize(const Objective& f, const Eigen::Vector2d& lambda0, const TunerConfig& cfg) {
    if (!(lambda0.array() > 0.0).all()) throw TunerError("initial hyperparameters must be positive");
    const bool logs = cfg.log_space;
    auto to_lambda = [&](const Eigen::Vector2d& u) -> Eigen::Vector2d {
        return logs ? Eigen::Vector2d(u.array().exp()) : u;
    };
    Objective F = f;
    if (logs)
        F = [&](const Eigen::Vector2d& u) {
            const Eigen::Vector2d lam = u.array().exp();
            Evaluation e = f(lam);
            e.gradient = e.gradient.cwiseProduct(lam);
            return e;
        };
    const double lb = logs ? std::log(cfg.lower_bound) : cfg.lower_bound;
    Eigen::Vector2d u = logs ? Eigen::Vector2d(lambda0.array().log()) : lambda0;
    auto h0 = [&](const Eigen::Vector2d& at, const Eigen::Vector2d& g) {
        return logs ? init_inverse_hessian(Eigen::Vector2d::Ones(), g, cfg.kappa) : init_inverse_hessian(at, g, cfg.kappa);
    };

    TunerState st;
    Evaluation e = F(u);
    if (!std::isfinite(e.value) || !e.gradient.allFinite()) throw TunerError("objective is not finite at the start");
    st.solver_calls += e.solver_calls;
    Eigen::Matrix2d H = h0(u, e.gradient);

    auto record = [&](int it, double alpha, int trials, bool skipped, bool reset) {
        TraceRecord r;
        r.iteration = it;
        r.lambda = to_lambda(u);
        r.value = e.value;
        r.term_fidelity = e.report.term_fidelity;
        r.term_dof = e.report.term_dof;
        r.term_trace = e.report.term_trace;
        r.grad_norm = e.gradient.norm();
        r.alpha = alpha;
        r.solver_calls = st.solver_calls;
        r.line_trials = trials;
        r.update_skipped = skipped;
        r.hessian_reset = reset;
        st.trace.push_back(r);
    };
    record(0, 0.0, 0, false, false);

    st.stop_reason = "max iterations";
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        if (e.gradient.norm() <= cfg.grad_tolerance) {
            st.stop_reason = "gradient tolerance";
            break;
        }
        Eigen::Vector2d d = -H * e.gradient;
        bool reset = false;
        if (!(e.gradient.dot(d) < 0.0)) {
            H = h0(u, e.gradient);
            d = -H * e.gradient;
            reset = true;
        }
        LineSearchResult ls = line_search(u, d, e, F, cfg.wolfe, lb);
        st.solver_calls += ls.eval.solver_calls;
        if (!ls.decreased) {
            st.stop_reason = "line search found no decrease";
            break;
        }
        const Eigen::Vector2d lam_old = to_lambda(u);
        const Eigen::Vector2d u_new = clamp_below(u + ls.alpha * d, lb);
        const Eigen::Vector2d du = ls.eval.gradient - e.gradient;
        bool skipped = false;
        H = bfgs_update(H, d, du, ls.alpha, &skipped);
        if (skipped) ++st.skipped_updates;
        u = u_new;
        const int calls = ls.eval.solver_calls;
        e = ls.eval;
        e.solver_calls = calls;
        record(it, ls.alpha, ls.trials, skipped, reset);
        const Eigen::Vector2d lam_new = to_lambda(u);
        if (cfg.step_tolerance > 0.0 && (lam_new - lam_old).norm() <= cfg.step_tolerance * lam_old.norm()) {
            st.stop_reason = "step tolerance";
            break;
        }
    }
    st.lambda = to_lambda(u);
    st.H = H;
    st.gradient = e.gradient;
    st.value = e.value;
    st.report = e.report;
    return st;
}

Objective sure_objective(const RiskProblem& problem, const Estimator& estimator) {
    return [&problem, &estimator](const Eigen::Vector2d& lam) {
        auto [rep, grad] = sure_and_sugar(problem, Hyperparams{lam[0], lam[1]}, estimator);
        Evaluation e;
        e.value = rep.value;
        e.gradient = grad.gradient;
        e.report = rep;
        e.solver_calls = rep.solver_calls;
        return e;
    };
}

TuneResult tune(const RiskProblem& problem, const Estimator& estimator, const TunerConfig& cfg) {
    const Hyperparams lam0 = init_hyperparams(problem.y, problem.model);
    TunerState st = minimize(sure_objective(problem, estimator), Eigen::Vector2d(lam0.lambda_h, lam0.lambda_v), cfg);
    const Hyperparams lam{st.lambda[0], st.lambda[1]};
    AttributePair x = estimator.estimate(problem.y, lam);
    st.solver_calls += 1;
    return {lam, std::move(x), std::move(st)};
}

TuneResult tune(const LeaderStack& y, const CovarianceModel& model, std::uint64_t probe_seed, const TunerConfig& cfg,
                const Estimator& estimator) {
    const RiskProblem problem = RiskProblem::make(y, model, probe_seed);
    return tune(problem, estimator, cfg);
}

std::string trace_csv_header() {
    return "iteration,lambda_h,lambda_v,sure,term_fidelity,term_dof,term_trace,grad_norm,alpha,solver_calls,"
           "line_trials,update_skipped,hessian_reset";
}

std::string to_csv_row(const TraceRecord& r) {
    std::ostringstream os;
    os << r.iteration << ',' << fmt_double(r.lambda[0]) << ',' << fmt_double(r.lambda[1]) << ',' << fmt_double(r.value)
       << ',' << fmt_double(r.term_fidelity) << ',' << fmt_double(r.term_dof) << ',' << fmt_double(r.term_trace) << ','
       << fmt_double(r.grad_norm) << ',' << fmt_double(r.alpha) << ',' << r.solver_calls << ',' << r.line_trials << ','
       << int(r.update_skipped) << ',' << int(r.hessian_reset);
    return os.str();
}

}  // namespace sugar

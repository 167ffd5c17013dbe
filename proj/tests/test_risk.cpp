#include <limits>

#include "doctest.h"
#include "support.hpp"
#include "sugar/errors.hpp"
#include "sugar/risk.hpp"
#include "sugar/tuner.hpp"

using namespace sugar;
using namespace testing;

namespace {

CovarianceModel scaled_identity(const ScaleRange& s, double var) {
    CovarianceModel m(CovarianceKind::Var, s);
    for (int a = 0; a < s.size(); ++a) m.set_pair(a, a, var, LagKernel::delta());
    return m;
}

// Smooth nonlinear estimator used to probe the finite-difference step.
class WarpedRegression : public Estimator {
public:
    AttributePair estimate(const LeaderStack& y, const Hyperparams& lambda) const override {
        AttributePair x = invert_gram(apply_phi_adjoint(y), y.scales);
        x.h = x.h + lambda.lambda_h * x.h.sin();
        x.v = x.v * (1.0 + lambda.lambda_v * x.v.square()).inverse();
        return x;
    }
};

}  // namespace

TEST_CASE("finite-difference step") {
    const ScaleRange s(1, 3);
    CHECK(fd_step(CovarianceModel::identity(s), 3 * 64 * 64) == doctest::Approx(0.1186275701565888).epsilon(1e-12));
    Rng rng(61);
    const auto m = random_model(rng, s, 1);
    CovarianceModel m4(CovarianceKind::Full, s);
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) m4.set_pair(a, b, 4 * m.C()(a, b), m.kernel(a, b));
    CHECK(fd_step(m4, 1000) == doctest::Approx(2 * fd_step(m, 1000)).epsilon(1e-14));
    double last = fd_step(m, 1);
    for (std::size_t P = 10; P < 100000000; P *= 10) {
        CHECK(fd_step(m, P) < last);
        last = fd_step(m, P);
    }
    CHECK(last < 0.1 * fd_step(m, 1));
    CHECK_THROWS_AS(fd_step(m, 0), ConfigError);
}

TEST_CASE("zero estimator: no degrees of freedom") {
    Rng rng(62);
    const ScaleRange s(1, 3);
    const auto y = random_stack(rng, s, 6, 6);
    const auto m = random_model(rng, s, 2);
    const auto p = RiskProblem::make(y, m, 5);
    const auto r = sure(p, {1.0, 1.0}, ZeroEstimator{});
    CHECK(r.term_dof == 0.0);
    CHECK(r.value == doctest::Approx(squared_norm(apply_A(y)) - trace_term(m, s, 72)).epsilon(1e-13));
    CHECK(r.solver_calls == 2);
}

TEST_CASE("report terms recompose exactly and carry lineage") {
    Rng rng(63);
    const ScaleRange s(1, 3);
    const auto y = apply_phi(blocky_pair(10, 10, 0.5, 0.9, 0, 1), s) + random_stack(rng, s, 10, 10, 0.4);
    const auto m = scaled_identity(s, 0.16);
    const auto p = RiskProblem::make(y, m, 99);
    const auto r = sure(p, {0.7, 0.4}, PrimalDualEstimator{});
    CHECK(r.value == r.term_fidelity + r.term_dof - r.term_trace);
    CHECK(r.nu == p.nu);
    CHECK(r.probe_seed == 99);
    CHECK(r.lambda.lambda_h == 0.7);
    CHECK(p.nu == fd_step(m, y.total_size()));
}

TEST_CASE("probe reuse between SURE and SUGAR") {
    Rng rng(64);
    const ScaleRange s(1, 3);
    const auto y = apply_phi(blocky_pair(10, 10, 0.5, 0.9, 0, 1), s) + random_stack(rng, s, 10, 10, 0.4);
    const auto m = scaled_identity(s, 0.16);
    // an injected probe and nu are used as given
    const auto probe = ProbeVector::draw(s, 10, 10, 4242);
    const auto p = RiskProblem::make(y, m, 0.05, probe);
    CHECK(squared_norm(p.y_perturbed - (y + 0.05 * probe.values)) == 0.0);
    CHECK(squared_norm(p.s_eps - apply_S(m, probe.values)) == 0.0);
    const PrimalDualEstimator est;
    const auto r = sure(p, {0.5, 0.5}, est);
    const auto [r2, g] = sure_and_sugar(p, {0.5, 0.5}, est);
    CHECK(r.value == r2.value);
    CHECK(g.probe_seed == 4242);
    CHECK(g.nu == 0.05);
    CHECK(std::isfinite(g.gradient[0]));
    CHECK(std::isfinite(g.gradient[1]));
}

TEST_CASE("lambda-independent estimators have zero SUGAR") {
    Rng rng(65);
    const ScaleRange s(1, 2);
    const auto y = random_stack(rng, s, 8, 8);
    const auto p = RiskProblem::make(y, scaled_identity(s, 1.0), 1);
    const LinearRegressionEstimator lr;
    const ZeroEstimator zero;
    for (const Estimator* e : {static_cast<const Estimator*>(&lr), static_cast<const Estimator*>(&zero)}) {
        const auto [r, g] = sure_and_sugar(p, {2.0, 3.0}, *e);
        CHECK(g.gradient.norm() == 0.0);
    }
}

TEST_CASE("SUGAR matches central differences of SURE with frozen probe") {
    Rng rng(66);
    const ScaleRange s(1, 3);
    const auto y = apply_phi(blocky_pair(12, 12, 0.5, 0.9, 0, 1), s) + random_stack(rng, s, 12, 12, 0.4);
    const auto p = RiskProblem::make(y, scaled_identity(s, 0.16), 17);
    SolverConfig cfg;
    cfg.gap_tolerance = 1e-11;
    cfg.max_iterations = 2000000;
    const PrimalDualEstimator est(cfg);
    const Hyperparams lam{0.6, 0.9};
    const auto [r, g] = sure_and_sugar(p, lam, est);
    Eigen::Vector2d fd;
    for (int k = 0; k < 2; ++k) {
        const double h = 1e-3 * lam[k];
        Hyperparams lp = lam, lm = lam;
        lp[k] += h;
        lm[k] -= h;
        fd[k] = (sure(p, lp, est).value - sure(p, lm, est).value) / (2 * h);
    }
    CHECK((g.gradient - fd).norm() <= 1e-3 * fd.norm());
}

TEST_CASE("oversmoothing raises the risk estimate in lambda_h") {
    const ScaleRange s(1, 3);
    int positive = 0;
    for (int seed = 0; seed < 10; ++seed) {
        Rng rng(100 + std::uint64_t(seed));
        const auto m = scaled_identity(s, 0.25);
        const auto y = apply_phi(blocky_pair(16, 16, 0.5, 0.9, 0.0, 1.0), s) + random_stack(rng, s, 16, 16, 0.5);
        const auto l0 = init_hyperparams(y, m);
        const auto p = RiskProblem::make(y, m, derive_seed(std::uint64_t(seed), stream::probe));
        const auto [r, g] = sure_and_sugar(p, {10 * l0.lambda_h, 10 * l0.lambda_v}, PrimalDualEstimator{});
        if (g.gradient[0] > 0) ++positive;
    }
    CHECK(positive > 5);
}

TEST_CASE("white-noise SURE has the classical trace structure") {
    const ScaleRange s(1, 3);
    const double rho2 = 0.37;
    const auto m = scaled_identity(s, rho2);
    const MatrixXd A = dense_A(s, 8, 8);
    Rng rng(67);
    const auto p = RiskProblem::make(random_stack(rng, s, 8, 8), m, 3);
    CHECK(p.trace == doctest::Approx(rho2 * (A * A.transpose()).trace()).epsilon(1e-12));
    const auto r = sure(p, {1, 1}, LinearRegressionEstimator{});
    CHECK(r.term_trace == p.trace);
    // for a linear estimator the difference quotient is exact: 2 <A eps, A S eps>
    const VectorXd ae = A * vec(p.probe.values);
    const double expect = 2.0 * rho2 * ae.squaredNorm();
    CHECK(r.term_dof == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("finite-difference SURE converges as nu shrinks") {
    Rng rng(68);
    const ScaleRange s(1, 3);
    const auto y = random_stack(rng, s, 8, 8, 0.8);
    const auto m = scaled_identity(s, 0.5);
    const auto probe = ProbeVector::draw(s, 8, 8, 5);
    const WarpedRegression est;
    double last = std::numeric_limits<double>::infinity();
    for (double nu = 0.4; nu > 1e-3; nu /= 2) {
        const double a = sure(RiskProblem::make(y, m, nu, probe), {0.3, 0.2}, est).value;
        const double b = sure(RiskProblem::make(y, m, nu / 2, probe), {0.3, 0.2}, est).value;
        CHECK(std::abs(a - b) < last);
        last = std::abs(a - b);
    }
}

TEST_CASE("linear regression SURE is unbiased") {
    const ScaleRange s(1, 2);
    const int n = 8;
    const auto xbar = blocky_pair(n, n, 0.5, 0.9, 0.0, 1.0);
    const double sigma2 = 0.3;
    const auto m = scaled_identity(s, sigma2);
    const LinearRegressionEstimator est;
    constexpr int draws = 300;
    double ss = 0, ss2 = 0, rr = 0, rr2 = 0;
    for (int d = 0; d < draws; ++d) {
        Rng rng(derive_seed(5, stream::noise, std::uint64_t(d)));
        const auto y = apply_phi(xbar, s) + random_stack(rng, s, n, n, std::sqrt(sigma2));
        const auto r = sure(RiskProblem::make(y, m, derive_seed(5, stream::probe, std::uint64_t(d))), {1, 1}, est);
        const double t = true_risk(est.estimate(y, {1, 1}), xbar);
        ss += r.value;
        ss2 += r.value * r.value;
        rr += t;
        rr2 += t * t;
    }
    const double ms = ss / draws, mr = rr / draws;
    const double se = std::sqrt((ss2 / draws - ms * ms) / (draws - 1) + (rr2 / draws - mr * mr) / (draws - 1));
    CHECK(std::abs(ms - mr) <= 3 * se);
    // the exact risk of regression under white noise is sigma^2 Tr(A A*)
    CHECK(mr == doctest::Approx(sigma2 * n * n * s.size() / s.gram_det()).epsilon(0.05));
}

TEST_CASE("problem construction and model swap") {
    Rng rng(69);
    const ScaleRange s(1, 3);
    const auto y = random_stack(rng, s, 6, 7);
    const auto m = random_model(rng, s, 2);
    CHECK_THROWS_AS(RiskProblem::make(y, m, 0.0, ProbeVector::draw(s, 6, 7, 1)), ConfigError);
    CHECK_THROWS_AS(RiskProblem::make(y, m, 0.1, ProbeVector::draw(s, 7, 6, 1)), DataError);
    CHECK_THROWS_AS(RiskProblem::make(y, CovarianceModel::identity(ScaleRange(1, 2)), 0.1, ProbeVector::draw(s, 6, 7, 1)),
                    DataError);
    const auto p = RiskProblem::make(y, m, 8);
    const auto var = restrict_model(m, CovarianceKind::Var);
    const auto q = p.with_model(var);
    CHECK(squared_norm(q.y_perturbed - p.y_perturbed) == 0.0);
    CHECK(q.nu == p.nu);
    CHECK(q.trace == trace_term(var, s, 84));
    CHECK(squared_norm(q.s_eps - apply_S(var, p.probe.values)) == 0.0);
}

TEST_CASE("true risk only sees the projected component") {
    Rng rng(70);
    const auto a = random_pair(rng, 4, 4), b = random_pair(rng, 4, 4);
    CHECK(true_risk(a, b) == doctest::Approx((a.h - b.h).square().sum()));
    CHECK(true_risk(a, {a.h, b.v}) == 0.0);
}

TEST_CASE("csv rows") {
    SureReport r;
    r.lambda = {0.5, 2.0};
    r.value = -1.25;
    r.term_fidelity = 3.0;
    r.term_dof = 0.75;
    r.term_trace = 5.0;
    r.nu = 0.1;
    r.probe_seed = 18446744073709551615ULL;
    CHECK(sure_csv_header() == "lambda_h,lambda_v,sure,term_fidelity,term_dof,term_trace,nu,probe_seed");
    CHECK(to_csv_row(r) == "0.5,2,-1.25,3,0.75,5,0.1,18446744073709551615");
    r.value = 0.1 + 0.2;
    CHECK(std::stod(to_csv_row(r).substr(6, 19)) == 0.1 + 0.2);
}

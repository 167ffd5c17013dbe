#include "doctest.h"
#include "support.hpp"
#include "sugar/errors.hpp"
#include "sugar/forward_model.hpp"

using namespace sugar;
using namespace testing;

TEST_CASE("scale range constants") {
    const ScaleRange s(1, 3);
    CHECK(s.size() == 3);
    CHECK(s.f0() == 3);
    CHECK(s.f1() == 6);
    CHECK(s.f2() == 14);
    CHECK(s.gram_det() == 6);
    const ScaleRange t(2, 5);
    CHECK(t.f1() == 2 + 3 + 4 + 5);
    CHECK(t.f2() == 4 + 9 + 16 + 25);
    CHECK_THROWS_AS(ScaleRange(0, 2), ConfigError);
    CHECK_THROWS_AS(ScaleRange(3, 2), ConfigError);
    CHECK_NOTHROW(ScaleRange(2, 2));
    CHECK_THROWS_AS(ScaleRange(2, 2).require_regular(), SingularGramError);
}

TEST_CASE("property: Gram determinant is positive for J >= 2") {
    for (int j1 = 1; j1 <= 6; ++j1)
        for (int j2 = j1 + 1; j2 <= 9; ++j2) {
            const ScaleRange s(j1, j2);
            CHECK(s.gram_det() > 0.0);
            CHECK(strong_convexity_modulus(s) > 0.0);
        }
}

TEST_CASE("apply_phi examples") {
    const ScaleRange s(1, 3);
    const auto y = apply_phi({ImageField::Ones(2, 3), ImageField::Zero(2, 3)}, s);
    REQUIRE(y.planes.size() == 3);
    for (int a = 0; a < 3; ++a) CHECK((y.planes[a] - double(a + 1)).abs().maxCoeff() == 0.0);
    const auto z = apply_phi({ImageField::Zero(2, 3), ImageField::Constant(2, 3, 2.5)}, s);
    for (const auto& p : z.planes) CHECK((p - 2.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("apply_phi and its adjoint match the dense matrix") {
    Rng rng(21);
    const ScaleRange s(1, 3);
    const MatrixXd F = dense_phi(s, 4, 4);
    const auto x = random_pair(rng, 4, 4);
    CHECK((vec(apply_phi(x, s)) - F * vec(x)).cwiseAbs().maxCoeff() < 1e-14);
    const auto y = random_stack(rng, s, 4, 4);
    CHECK((vec(apply_phi_adjoint(y)) - F.transpose() * vec(y)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("apply_phi_adjoint examples") {
    const ScaleRange s(1, 3);
    const auto ones = LeaderStack(s, {ImageField::Ones(2, 2), ImageField::Ones(2, 2), ImageField::Ones(2, 2)});
    const auto x = apply_phi_adjoint(ones);
    CHECK((x.h - 6.0).abs().maxCoeff() == 0.0);
    CHECK((x.v - 3.0).abs().maxCoeff() == 0.0);
    const auto z = apply_phi_adjoint(LeaderStack::zeros(s, 3, 3));
    CHECK(squared_norm(z) == 0.0);
}

TEST_CASE("invert_gram closed form") {
    const ScaleRange s(1, 3);
    const auto x = invert_gram({ImageField::Constant(1, 1, 1.0), ImageField::Constant(1, 1, 0.0)}, s);
    CHECK(x.h(0, 0) == doctest::Approx(3.0 / 6.0));
    CHECK(x.v(0, 0) == doctest::Approx(-6.0 / 6.0));
    const auto y = invert_gram({ImageField::Constant(1, 1, 0.0), ImageField::Constant(1, 1, 1.0)}, s);
    CHECK(y.h(0, 0) == doctest::Approx(-6.0 / 6.0));
    CHECK(y.v(0, 0) == doctest::Approx(14.0 / 6.0));
    CHECK(squared_norm(invert_gram(AttributePair::zeros(3, 3), s)) == 0.0);
    CHECK_THROWS_AS(invert_gram(AttributePair::zeros(2, 2), ScaleRange(3, 3)), SingularGramError);
}

TEST_CASE("property: gram and its inverse") {
    Rng rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const int j1 = uniform_int(rng, 1, 4);
        const ScaleRange s(j1, j1 + uniform_int(rng, 1, 4));
        const int rows = uniform_int(rng, 1, 7), cols = uniform_int(rng, 1, 7);
        const auto x = random_pair(rng, rows, cols);
        // the Gram block form [[F2, F1], [F1, F0]]
        const auto g = apply_gram(x, s);
        CHECK((g.h - (s.f2() * x.h + s.f1() * x.v)).abs().maxCoeff() < 1e-12 * s.f2());
        CHECK((g.v - (s.f1() * x.h + s.f0() * x.v)).abs().maxCoeff() < 1e-12 * s.f2());
        const auto viaphi = apply_phi_adjoint(apply_phi(x, s));
        CHECK(max_abs_diff(g, viaphi) < 1e-12 * s.f2() * (1 + x.h.abs().maxCoeff() + x.v.abs().maxCoeff()));
        CHECK(std::sqrt(squared_norm(invert_gram(g, s) - x)) <= 1e-10 * std::sqrt(squared_norm(x)));
        CHECK(std::sqrt(squared_norm(apply_gram(invert_gram(x, s), s) - x)) <= 1e-10 * std::sqrt(squared_norm(x)));
    }
}

TEST_CASE("projection") {
    Rng rng(23);
    const auto x = random_pair(rng, 3, 4);
    const auto p = apply_projection(x);
    CHECK((p.h - x.h).abs().maxCoeff() == 0.0);
    CHECK(p.v.abs().maxCoeff() == 0.0);
    CHECK(max_abs_diff(apply_projection(p), p) == 0.0);
    CHECK(squared_norm(apply_projection({ImageField::Zero(3, 4), x.v})) == 0.0);
}

TEST_CASE("A matches the compositional dense definition and its coefficients") {
    Rng rng(24);
    for (auto [j1, j2] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 5}}) {
        const ScaleRange s(j1, j2);
        const MatrixXd A = dense_A(s, 3, 4);
        const auto y = random_stack(rng, s, 3, 4);
        CHECK((vec(apply_A(y)) - A * vec(y)).cwiseAbs().maxCoeff() < 1e-12);
        const auto x = random_pair(rng, 3, 4);
        CHECK((vec(apply_A_adjoint(x, s)) - A.transpose() * vec(x)).cwiseAbs().maxCoeff() < 1e-12);
        for (int a = 0; a < s.size(); ++a) {
            const int j = s.scale(a);
            CHECK(a_coefficient(s, j) == doctest::Approx(A(0, a * 12)).epsilon(1e-12));
            CHECK(a_coefficient(s, j) == doctest::Approx((s.f0() * j - s.f1()) / s.gram_det()));
        }
    }
    CHECK(squared_norm(apply_A(LeaderStack::zeros(ScaleRange(1, 3), 2, 2))) == 0.0);
    CHECK_THROWS_AS(apply_A(LeaderStack::zeros(ScaleRange(2, 2), 2, 2)), SingularGramError);
}

TEST_CASE("property: A Phi = Pi and adjoint identities") {
    Rng rng(25);
    for (int trial = 0; trial < 100; ++trial) {
        const int j1 = uniform_int(rng, 1, 3);
        const ScaleRange s(j1, j1 + uniform_int(rng, 1, 4));
        const int rows = uniform_int(rng, 1, 8), cols = uniform_int(rng, 1, 8);
        const auto x = random_pair(rng, rows, cols);
        const auto y = random_stack(rng, s, rows, cols);
        const auto pix = apply_projection(x);
        CHECK(std::sqrt(squared_norm(apply_A(apply_phi(x, s)) - pix)) <= 1e-10 * std::sqrt(squared_norm(pix)));
        const double nx = std::sqrt(squared_norm(x)), ny = std::sqrt(squared_norm(y));
        CHECK(std::abs(dot(apply_phi(x, s), y) - dot(x, apply_phi_adjoint(y))) <= 1e-12 * s.f2() * nx * ny);
        CHECK(std::abs(dot(apply_A(y), x) - dot(y, apply_A_adjoint(x, s))) <= 1e-12 * s.f2() * nx * ny);
    }
}

TEST_CASE("property: operators are linear") {
    Rng rng(26);
    const ScaleRange s(1, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = uniform(rng, -2, 2), b = uniform(rng, -2, 2);
        const auto x1 = random_pair(rng, 4, 3), x2 = random_pair(rng, 4, 3);
        const auto y1 = random_stack(rng, s, 4, 3), y2 = random_stack(rng, s, 4, 3);
        const double tol = 1e-12 * 50;
        CHECK(std::sqrt(squared_norm(apply_phi(a * x1 + b * x2, s) - (a * apply_phi(x1, s) + b * apply_phi(x2, s)))) < tol);
        CHECK(max_abs_diff(apply_phi_adjoint(a * y1 + b * y2),
                           a * apply_phi_adjoint(y1) + b * apply_phi_adjoint(y2)) < tol);
        CHECK(max_abs_diff(invert_gram(a * x1 + b * x2, s), a * invert_gram(x1, s) + b * invert_gram(x2, s)) < tol);
        CHECK(max_abs_diff(apply_projection(a * x1 + b * x2), a * apply_projection(x1) + b * apply_projection(x2)) <
              tol);
        CHECK(max_abs_diff(apply_A(a * y1 + b * y2), a * apply_A(y1) + b * apply_A(y2)) < tol);
    }
}

TEST_CASE("strong convexity modulus equals twice the smallest Gram eigenvalue") {
    for (int j2 = 2; j2 <= 6; ++j2) {
        const ScaleRange s(1, j2);
        Eigen::Matrix2d G;
        G << s.f2(), s.f1(), s.f1(), s.f0();
        const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(G).eigenvalues().minCoeff();
        CHECK(strong_convexity_modulus(s) == doctest::Approx(2 * lmin).epsilon(1e-12));
    }
}

TEST_CASE("strong convexity table") {
    const double published[] = {0.29, 0.72, 1.20, 1.69};
    for (int j2 = 2; j2 <= 5; ++j2)
        CHECK(std::abs(strong_convexity_modulus(ScaleRange(1, j2)) - published[j2 - 2]) <= 0.005);
    // j2 = 6: 2 * (97/2 - sqrt(97^2/4 - 105)) = 2.18966..., published rounded as 2.20
    CHECK(strong_convexity_modulus(ScaleRange(1, 6)) == doctest::Approx(2.1896630108298805).epsilon(1e-13));
}

TEST_CASE("container arithmetic") {
    Rng rng(27);
    const ScaleRange s(1, 2);
    const auto x = random_pair(rng, 2, 3);
    CHECK(squared_norm(x - x) == 0.0);
    CHECK(dot(x, x) == doctest::Approx(squared_norm(x)));
    CHECK(squared_norm(2.0 * x) == doctest::Approx(4 * squared_norm(x)));
    const auto y = random_stack(rng, s, 2, 3);
    CHECK(squared_norm(y + y) == doctest::Approx(4 * squared_norm(y)));
    CHECK(y.total_size() == 12);
}

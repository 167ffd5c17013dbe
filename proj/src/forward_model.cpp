#include "sugar/forward_model.hpp"

#include <cmath>
#include <stdexcept>

#include "sugar/errors.hpp"

namespace sugar {

ScaleRange::ScaleRange(int j1, int j2) : j1_(j1), j2_(j2) {
    if (j1 < 1 || j2 < j1)
        throw ConfigError("invalid scale range: need 1 <= j1 <= j2, got j1=" + std::to_string(j1) +
                          " j2=" + std::to_string(j2));
    f0_ = f1_ = f2_ = 0.0;
    for (int j = j1; j <= j2; ++j) {
        f0_ += 1.0;
        f1_ += j;
        f2_ += double(j) * j;
    }
}

void ScaleRange::require_regular() const {
    if (size() < 2) throw SingularGramError();
}

AttributePair::AttributePair(ImageField h_, ImageField v_) : h(std::move(h_)), v(std::move(v_)) {
    if (h.rows() != v.rows() || h.cols() != v.cols())
        throw DataError("attribute pair: h and v shapes differ");
}

AttributePair AttributePair::zeros(Eigen::Index rows, Eigen::Index cols) {
    return AttributePair(ImageField::Zero(rows, cols), ImageField::Zero(rows, cols));
}

AttributePair& AttributePair::operator+=(const AttributePair& o) {
    h += o.h;
    v += o.v;
    return *this;
}
AttributePair& AttributePair::operator-=(const AttributePair& o) {
    h -= o.h;
    v -= o.v;
    return *this;
}
AttributePair& AttributePair::operator*=(double a) {
    h *= a;
    v *= a;
    return *this;
}
AttributePair operator+(AttributePair a, const AttributePair& b) { return a += b; }
AttributePair operator-(AttributePair a, const AttributePair& b) { return a -= b; }
AttributePair operator*(double s, AttributePair a) { return a *= s; }

double dot(const AttributePair& a, const AttributePair& b) {
    return (a.h * b.h).sum() + (a.v * b.v).sum();
}
double squared_norm(const AttributePair& a) { return dot(a, a); }
double max_abs_diff(const AttributePair& a, const AttributePair& b) {
    return std::max((a.h - b.h).abs().maxCoeff(), (a.v - b.v).abs().maxCoeff());
}

LeaderStack::LeaderStack(ScaleRange s, std::vector<ImageField> p) : scales(s), planes(std::move(p)) {
    if (static_cast<int>(planes.size()) != scales.size())
        throw DataError("leader stack: plane count does not match scale range");
    for (const auto& pl : planes)
        if (pl.rows() != planes.front().rows() || pl.cols() != planes.front().cols())
            throw DataError("leader stack: planes differ in shape");
}

LeaderStack LeaderStack::zeros(const ScaleRange& s, Eigen::Index rows, Eigen::Index cols) {
    return LeaderStack(s, std::vector<ImageField>(s.size(), ImageField::Zero(rows, cols)));
}

LeaderStack& LeaderStack::operator+=(const LeaderStack& o) {
    for (std::size_t i = 0; i < planes.size(); ++i) planes[i] += o.planes[i];
    return *this;
}
LeaderStack& LeaderStack::operator-=(const LeaderStack& o) {
    for (std::size_t i = 0; i < planes.size(); ++i) planes[i] -= o.planes[i];
    return *this;
}
LeaderStack& LeaderStack::operator*=(double a) {
    for (auto& p : planes) p *= a;
    return *this;
}
LeaderStack operator+(LeaderStack a, const LeaderStack& b) { return a += b; }
LeaderStack operator-(LeaderStack a, const LeaderStack& b) { return a -= b; }
LeaderStack operator*(double s, LeaderStack a) { return a *= s; }

double dot(const LeaderStack& a, const LeaderStack& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.planes.size(); ++i) s += (a.planes[i] * b.planes[i]).sum();
    return s;
}
double squared_norm(const LeaderStack& a) { return dot(a, a); }

LeaderStack apply_phi(const AttributePair& x, const ScaleRange& s) {
    std::vector<ImageField> planes;
    planes.reserve(s.size());
    for (int j = s.j1(); j <= s.j2(); ++j) planes.push_back(double(j) * x.h + x.v);
    return LeaderStack(s, std::move(planes));
}

AttributePair apply_phi_adjoint(const LeaderStack& y) {
    AttributePair out = AttributePair::zeros(y.rows(), y.cols());
    for (int i = 0; i < y.scales.size(); ++i) {
        out.h += double(y.scales.scale(i)) * y.planes[i];
        out.v += y.planes[i];
    }
    return out;
}

AttributePair apply_gram(const AttributePair& x, const ScaleRange& s) {
    return AttributePair(s.f2() * x.h + s.f1() * x.v, s.f1() * x.h + s.f0() * x.v);
}

AttributePair invert_gram(const AttributePair& x, const ScaleRange& s) {
    s.require_regular();
    const double det = s.gram_det();
    return AttributePair((s.f0() * x.h - s.f1() * x.v) / det, (s.f2() * x.v - s.f1() * x.h) / det);
}

AttributePair apply_projection(const AttributePair& x) {
    return AttributePair(x.h, ImageField::Zero(x.rows(), x.cols()));
}

double a_coefficient(const ScaleRange& s, int j) { return (s.f0() * j - s.f1()) / s.gram_det(); }

AttributePair apply_A(const LeaderStack& y) {
    y.scales.require_regular();
    AttributePair out = AttributePair::zeros(y.rows(), y.cols());
    for (int i = 0; i < y.scales.size(); ++i) out.h += a_coefficient(y.scales, y.scales.scale(i)) * y.planes[i];
    return out;
}

LeaderStack apply_A_adjoint(const AttributePair& x, const ScaleRange& s) {
    s.require_regular();
    std::vector<ImageField> planes;
    planes.reserve(s.size());
    for (int j = s.j1(); j <= s.j2(); ++j) planes.push_back(a_coefficient(s, j) * x.h);
    return LeaderStack(s, std::move(planes));
}

double strong_convexity_modulus(const ScaleRange& s) {
    s.require_regular();
    const double tr = s.f0() + s.f2();
    const double disc = std::sqrt((s.f2() - s.f0()) * (s.f2() - s.f0()) + 4.0 * s.f1() * s.f1());
    // smaller eigenvalue written as det / larger to avoid cancellation
    const double lmax = 0.5 * (tr + disc);
    return 2.0 * s.gram_det() / lmax;
}

}  // namespace sugar

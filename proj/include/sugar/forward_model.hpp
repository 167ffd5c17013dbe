#pragma once

#include <vector>

#include "sugar/fields.hpp"

namespace sugar {

class ScaleRange {
public:
    ScaleRange() = default;
    // j2 == j1 is representable so that callers get a SingularGramError where J >= 2 is needed.
    ScaleRange(int j1, int j2);

    int j1() const { return j1_; }
    int j2() const { return j2_; }
    int size() const { return j2_ - j1_ + 1; }
    int scale(int index) const { return j1_ + index; }
    double f0() const { return f0_; }
    double f1() const { return f1_; }
    double f2() const { return f2_; }
    double gram_det() const { return f0_ * f2_ - f1_ * f1_; }
    void require_regular() const;

    bool operator==(const ScaleRange& o) const { return j1_ == o.j1_ && j2_ == o.j2_; }

private:
    int j1_ = 1, j2_ = 2;
    double f0_ = 2, f1_ = 3, f2_ = 5;
};

struct AttributePair {
    ImageField h, v;

    AttributePair() = default;
    AttributePair(ImageField h_, ImageField v_);
    static AttributePair zeros(Eigen::Index rows, Eigen::Index cols);

    Eigen::Index rows() const { return h.rows(); }
    Eigen::Index cols() const { return h.cols(); }

    AttributePair& operator+=(const AttributePair& o);
    AttributePair& operator-=(const AttributePair& o);
    AttributePair& operator*=(double a);
};

AttributePair operator+(AttributePair a, const AttributePair& b);
AttributePair operator-(AttributePair a, const AttributePair& b);
AttributePair operator*(double s, AttributePair a);
double dot(const AttributePair& a, const AttributePair& b);
double squared_norm(const AttributePair& a);
double max_abs_diff(const AttributePair& a, const AttributePair& b);

struct LeaderStack {
    ScaleRange scales;
    std::vector<ImageField> planes;

    LeaderStack() = default;
    LeaderStack(ScaleRange s, std::vector<ImageField> p);
    static LeaderStack zeros(const ScaleRange& s, Eigen::Index rows, Eigen::Index cols);

    Eigen::Index rows() const { return planes.empty() ? 0 : planes.front().rows(); }
    Eigen::Index cols() const { return planes.empty() ? 0 : planes.front().cols(); }
    std::size_t total_size() const { return planes.size() * static_cast<std::size_t>(rows() * cols()); }

    LeaderStack& operator+=(const LeaderStack& o);
    LeaderStack& operator-=(const LeaderStack& o);
    LeaderStack& operator*=(double a);
};

LeaderStack operator+(LeaderStack a, const LeaderStack& b);
LeaderStack operator-(LeaderStack a, const LeaderStack& b);
LeaderStack operator*(double s, LeaderStack a);
double dot(const LeaderStack& a, const LeaderStack& b);
double squared_norm(const LeaderStack& a);

LeaderStack apply_phi(const AttributePair& x, const ScaleRange& s);
AttributePair apply_phi_adjoint(const LeaderStack& y);
AttributePair apply_gram(const AttributePair& x, const ScaleRange& s);
AttributePair invert_gram(const AttributePair& x, const ScaleRange& s);
AttributePair apply_projection(const AttributePair& x);
AttributePair apply_A(const LeaderStack& y);
LeaderStack apply_A_adjoint(const AttributePair& x, const ScaleRange& s);

// h-slot weight of A on plane j: (F0*j - F1) / (F0F2 - F1^2).
double a_coefficient(const ScaleRange& s, int j);

double strong_convexity_modulus(const ScaleRange& s);

}  // namespace sugar

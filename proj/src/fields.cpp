#include "sugar/fields.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace sugar {

void gradient_into(const ImageField& f, GradientPair& out) {
    const Eigen::Index rows = f.rows(), cols = f.cols();
    out.d1.resize(rows, cols);
    out.d2.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c + 1 < cols; ++c) out.d1(r, c) = f(r, c + 1) - f(r, c);
        out.d1(r, cols - 1) = 0.0;
    }
    for (Eigen::Index r = 0; r + 1 < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) out.d2(r, c) = f(r + 1, c) - f(r, c);
    out.d2.row(rows - 1).setZero();
}

GradientPair gradient(const ImageField& f) {
    GradientPair g;
    gradient_into(f, g);
    return g;
}

void divergence_into(const GradientPair& g, ImageField& out) {
    const Eigen::Index rows = g.d1.rows(), cols = g.d1.cols();
    out.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double a = (c + 1 < cols ? g.d1(r, c) : 0.0) - (c > 0 ? g.d1(r, c - 1) : 0.0);
            double b = (r + 1 < rows ? g.d2(r, c) : 0.0) - (r > 0 ? g.d2(r - 1, c) : 0.0);
            out(r, c) = a + b;
        }
    }
}

ImageField divergence(const GradientPair& g) {
    ImageField out;
    divergence_into(g, out);
    return out;
}

double tv(const ImageField& f) {
    GradientPair g = gradient(f);
    return (g.d1.square() + g.d2.square()).sqrt().sum();
}

bool all_finite(const ImageField& f) { return f.isFinite().all(); }

double gradient_norm_sq(int rows, int cols) {
    const double pi = std::numbers::pi;
    auto axis = [pi](int n) { return n > 1 ? 2.0 - 2.0 * std::cos(pi * (n - 1) / n) : 0.0; };
    return axis(rows) + axis(cols);
}

double gradient_norm_sq_power(int rows, int cols, int iterations, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ImageField x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    double est = 0.0;
    GradientPair g;
    ImageField y;
    for (int k = 0; k < iterations; ++k) {
        double n = std::sqrt(x.square().sum());
        if (n == 0.0) return 0.0;
        x /= n;
        gradient_into(x, g);
        divergence_into(g, y);
        x = -y;  // D^T D x
        est = std::sqrt(x.square().sum());
    }
    return est;
}

}  // namespace sugar

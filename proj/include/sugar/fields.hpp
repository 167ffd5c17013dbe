#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace sugar {

// Row-major so that data() walks pixels in lexicographic order.
using ImageField = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GradientPair {
    ImageField d1;  // horizontal: f(r, c+1) - f(r, c)
    ImageField d2;  // vertical:   f(r+1, c) - f(r, c)
};

GradientPair gradient(const ImageField& f);
void gradient_into(const ImageField& f, GradientPair& out);

// div such that <gradient(f), g> = -<f, divergence(g)>.
ImageField divergence(const GradientPair& g);
void divergence_into(const GradientPair& g, ImageField& out);

double tv(const ImageField& f);

bool all_finite(const ImageField& f);

// Exact ||D||^2 for the Neumann forward-difference gradient on a rows x cols grid.
double gradient_norm_sq(int rows, int cols);

// Power-iteration estimate of ||D||^2 (a lower bound that converges to the exact value).
double gradient_norm_sq_power(int rows, int cols, int iterations, std::uint64_t seed);

}  // namespace sugar

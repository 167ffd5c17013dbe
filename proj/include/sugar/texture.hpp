#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sugar/forward_model.hpp"

namespace sugar {

struct RegionParams {
    double hurst = 0.5;
    double variance = 1.0;
};

// Piecewise-homogeneous texture: region m (label m in the mask, 1-based) carries regions[m-1].
struct TextureSpec {
    ImageField mask;
    std::vector<RegionParams> regions;
    std::uint64_t seed = 0;

    int rows() const { return int(mask.rows()); }
    int cols() const { return int(mask.cols()); }
    void validate() const;
};

// Label 2 inside a centered ellipse with semi-axes (a_rows * rows, a_cols * cols), label 1 outside.
ImageField ellipse_mask(int rows, int cols, double a_rows = 0.3, double a_cols = 0.4);
TextureSpec preset_texture(const std::string& name, int rows, int cols, std::uint64_t seed);

// Zero-mean Gaussian field with spectral density ~ |f|^-(2H+2) and variance `variance`.
ImageField fractal_field(int rows, int cols, double hurst, double variance, std::uint64_t seed);
ImageField synthesize(const TextureSpec& spec);
ImageField ground_truth_h(const TextureSpec& spec);

// Least-asymmetric Daubechies filters with 3 vanishing moments (orthonormal, sum = sqrt 2).
const std::array<double, 6>& sym3_lowpass();
const std::array<double, 6>& sym3_highpass();

// Undecimated (a trous) separable transform, periodic boundary.
// bands[j-1][d] for j = 1..j_max; d = 0 approximation, 1 horizontal detail
// (wavelet along columns), 2 vertical detail, 3 diagonal.
struct WaveletCoefficients {
    int j_max = 0;
    std::vector<std::array<ImageField, 4>> bands;
    const ImageField& at(int j, int d) const { return bands[j - 1][d]; }
};

WaveletCoefficients uwt2d(const ImageField& X, const ScaleRange& s);

// L_j(n) = max over d in {1,2,3}, 1 <= j' <= j, |n' - n|_inf <= 2^j of |2^{-j'} chi_{j'}^{(d)}(n')|.
LeaderStack leaders(const WaveletCoefficients& chi, const ScaleRange& s);
LeaderStack log_leaders(const LeaderStack& raw);
LeaderStack texture_log_leaders(const ImageField& X, const ScaleRange& s);

AttributePair linear_regression(const LeaderStack& l);

struct SegmentationResult {
    ImageField labels;               // 1..M, ordered by increasing centroid
    std::vector<double> centroids;   // ascending
    bool reduced = false;            // fewer than the requested M distinct values
    ImageField piecewise() const;    // each pixel mapped to its centroid
};

SegmentationResult threshold_segment(const ImageField& h, int M, std::uint64_t seed, int restarts = 50);

struct SegmentationMetrics {
    double risk = 0.0;             // ||h_hat - h_bar||^2
    double misclassified = 0.0;    // fraction in [0, 1], best label permutation
    double normalized_risk = 0.0;  // risk / ||h_lr - h_bar||^2
};

double misclassification(const ImageField& labels, const ImageField& truth);
SegmentationMetrics metrics(const ImageField& h_hat, const SegmentationResult& seg, const ImageField& h_bar,
                            const ImageField& truth_mask, const ImageField& h_lr);

}  // namespace sugar

#include "sugar/texture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fft.hpp"
#include "sugar/errors.hpp"
#include "sugar/rng.hpp"

namespace sugar {

void TextureSpec::validate() const {
    if (mask.size() == 0) throw ConfigError("texture: empty mask");
    if (regions.empty()) throw ConfigError("texture: no regions");
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
        const double l = mask.data()[i];
        if (l != std::floor(l) || l < 1 || l > double(regions.size()))
            throw ConfigError("texture: mask labels must be integers in 1..M");
    }
    for (const auto& r : regions) {
        if (!(r.hurst > 0.0 && r.hurst < 1.0)) throw ConfigError("texture: Hurst exponent must lie in (0,1)");
        if (!(r.variance >= 0.0) || !std::isfinite(r.variance)) throw ConfigError("texture: variance must be >= 0");
    }
}

ImageField ellipse_mask(int rows, int cols, double a_rows, double a_cols) {
    ImageField m(rows, cols);
    const double cr = 0.5 * (rows - 1), cc = 0.5 * (cols - 1);
    const double ar = a_rows * rows, ac = a_cols * cols;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double u = (r - cr) / ar, v = (c - cc) / ac;
            m(r, c) = u * u + v * v <= 1.0 ? 2.0 : 1.0;
        }
    return m;
}

TextureSpec preset_texture(const std::string& name, int rows, int cols, std::uint64_t seed) {
    TextureSpec s;
    s.mask = ellipse_mask(rows, cols);
    s.seed = seed;
    if (name == "D")
        s.regions = {{0.5, 0.6}, {0.75, 0.7}};
    else if (name == "E")
        s.regions = {{0.5, 0.6}, {0.9, 1.1}};
    else
        throw ConfigError("unknown texture preset '" + name + "' (expected D or E)");
    return s;
}

ImageField fractal_field(int rows, int cols, double hurst, double variance, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    ImageField w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
    if (variance == 0.0) return ImageField::Zero(rows, cols);

    detail::Spectrum spec = detail::fft2(w);
    const int half = cols / 2 + 1;
    const double expo = -(hurst + 1.0);
    auto freq = [](int k, int n) { return double(k <= n / 2 ? k : k - n) / n; };
    auto filt = [&](int kr, int kc) {
        const double fr = freq(kr, rows), fc = freq(kc, cols);
        const double f = std::sqrt(fr * fr + fc * fc);
        return f == 0.0 ? 0.0 : std::pow(f, expo);
    };
    for (int kr = 0; kr < rows; ++kr)
        for (int kc = 0; kc < half; ++kc) spec[std::size_t(kr) * half + kc] *= filt(kr, kc);
    ImageField x = detail::ifft2(spec, rows, cols);
    // theoretical pointwise variance of the filtered unit white noise: (1/N) sum_k |F_k|^2
    double energy = 0.0;
    for (int kr = 0; kr < rows; ++kr)
        for (int kc = 0; kc < cols; ++kc) energy += filt(kr, kc) * filt(kr, kc);
    energy /= double(rows) * cols;
    return x * std::sqrt(variance / energy);
}

ImageField synthesize(const TextureSpec& spec) {
    spec.validate();
    ImageField out = ImageField::Zero(spec.rows(), spec.cols());
    for (std::size_t m = 0; m < spec.regions.size(); ++m) {
        const double label = double(m + 1);
        if (!(spec.mask == label).any()) continue;
        const ImageField f = fractal_field(spec.rows(), spec.cols(), spec.regions[m].hurst, spec.regions[m].variance,
                                           derive_seed(spec.seed, stream::texture, m));
        out = (spec.mask == label).select(f, out);
    }
    return out;
}

ImageField ground_truth_h(const TextureSpec& spec) {
    spec.validate();
    ImageField h(spec.rows(), spec.cols());
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = spec.regions[std::size_t(spec.mask.data()[i]) - 1].hurst;
    return h;
}

const std::array<double, 6>& sym3_lowpass() {
    static const std::array<double, 6> h = {0.035226291885709536603, -0.085441273882026661693,
                                            -0.1350110200102545887,  0.4598775021184915701,
                                            0.80689150931109257649,  0.332670552950082616};
    return h;
}

const std::array<double, 6>& sym3_highpass() {
    static const std::array<double, 6> g = [] {
        const auto& h = sym3_lowpass();
        std::array<double, 6> out{};
        for (int k = 0; k < 6; ++k) out[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[5 - k];
        return out;
    }();
    return g;
}

namespace {

// out(r, c) = sum_k f_k in(r, c - k*step), periodic along columns.
ImageField filter_cols(const ImageField& in, const std::array<double, 6>& f, int step) {
    const int R = int(in.rows()), C = int(in.cols());
    ImageField out = ImageField::Zero(R, C);
    for (int k = 0; k < 6; ++k) {
        const int sh = int((std::int64_t(k) * step) % C);
        for (int r = 0; r < R; ++r) {
            const double* src = in.data() + std::size_t(r) * C;
            double* dst = out.data() + std::size_t(r) * C;
            for (int c = 0; c < C; ++c) {
                int sc = c - sh;
                if (sc < 0) sc += C;
                dst[c] += f[k] * src[sc];
            }
        }
    }
    return out;
}

ImageField filter_rows(const ImageField& in, const std::array<double, 6>& f, int step) {
    const int R = int(in.rows()), C = int(in.cols());
    ImageField out = ImageField::Zero(R, C);
    for (int k = 0; k < 6; ++k) {
        const int sh = int((std::int64_t(k) * step) % R);
        for (int r = 0; r < R; ++r) {
            int sr = r - sh;
            if (sr < 0) sr += R;
            out.row(r) += f[k] * in.row(sr);
        }
    }
    return out;
}

// Separable window max with periodic wrap, |dr|, |dc| <= radius.
ImageField window_max(const ImageField& in, int radius) {
    const int R = int(in.rows()), C = int(in.cols());
    const int rr = std::min(radius, R / 2), rc = std::min(radius, C / 2);  // larger windows wrap fully
    ImageField tmp(R, C), out(R, C);
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
            double m = -std::numeric_limits<double>::infinity();
            for (int d = -rc; d <= rc; ++d) m = std::max(m, in(r, ((c + d) % C + C) % C));
            tmp(r, c) = m;
        }
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) {
            double m = -std::numeric_limits<double>::infinity();
            for (int d = -rr; d <= rr; ++d) m = std::max(m, tmp(((r + d) % R + R) % R, c));
            out(r, c) = m;
        }
    return out;
}

}  // namespace

WaveletCoefficients uwt2d(const ImageField& X, const ScaleRange& s) {
    const int need = (1 << s.j2()) * 6;
    if (X.rows() < need || X.cols() < need)
        throw DataError("uwt2d: image too small for j2=" + std::to_string(s.j2()) + " (need at least " +
                        std::to_string(need) + " pixels per side)");
    const auto& h = sym3_lowpass();
    const auto& g = sym3_highpass();
    WaveletCoefficients out;
    out.j_max = s.j2();
    ImageField approx = X;
    for (int j = 1; j <= s.j2(); ++j) {
        const int step = 1 << (j - 1);
        const ImageField lo_c = filter_cols(approx, h, step);
        const ImageField hi_c = filter_cols(approx, g, step);
        std::array<ImageField, 4> b;
        b[0] = filter_rows(lo_c, h, step);
        b[1] = filter_rows(hi_c, h, step);
        b[2] = filter_rows(lo_c, g, step);
        b[3] = filter_rows(hi_c, g, step);
        approx = b[0];
        out.bands.push_back(std::move(b));
    }
    return out;
}

LeaderStack leaders(const WaveletCoefficients& chi, const ScaleRange& s) {
    if (chi.j_max < s.j2()) throw DataError("leaders: coefficients do not reach scale j2");
    const ImageField& any = chi.at(1, 1);
    ImageField finest = ImageField::Zero(any.rows(), any.cols());
    std::vector<ImageField> planes;
    for (int j = 1; j <= s.j2(); ++j) {
        const double norm = std::ldexp(1.0, -j);
        for (int d = 1; d <= 3; ++d) finest = finest.max(norm * chi.at(j, d).abs());
        if (j >= s.j1()) planes.push_back(window_max(finest, 1 << j));
    }
    return LeaderStack(s, std::move(planes));
}

LeaderStack log_leaders(const LeaderStack& raw) {
    LeaderStack out = raw;
    for (auto& p : out.planes) p = p.max(1e-300).log() / std::log(2.0);
    return out;
}

LeaderStack texture_log_leaders(const ImageField& X, const ScaleRange& s) {
    return log_leaders(leaders(uwt2d(X, s), s));
}

AttributePair linear_regression(const LeaderStack& l) { return invert_gram(apply_phi_adjoint(l), l.scales); }

ImageField SegmentationResult::piecewise() const {
    ImageField out(labels.rows(), labels.cols());
    for (Eigen::Index i = 0; i < labels.size(); ++i) out.data()[i] = centroids[std::size_t(labels.data()[i]) - 1];
    return out;
}

namespace {

// Nearest centroid for sorted centroids (ties go to the lower one).
int nearest(const std::vector<double>& cs, double x) {
    int best = 0;
    double bd = std::abs(x - cs[0]);
    for (int m = 1; m < int(cs.size()); ++m) {
        const double dd = std::abs(x - cs[m]);
        if (dd < bd) {
            bd = dd;
            best = m;
        }
    }
    return best;
}

double lloyd(const std::vector<double>& v, std::vector<double>& cs, std::vector<int>& assign) {
    const std::size_t n = v.size();
    const int M = int(cs.size());
    assign.assign(n, -1);
    for (int it = 0; it < 300; ++it) {
        std::sort(cs.begin(), cs.end());
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int a = nearest(cs, v[i]);
            if (a != assign[i]) {
                assign[i] = a;
                changed = true;
            }
        }
        std::vector<double> sum(M, 0.0);
        std::vector<std::size_t> cnt(M, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[assign[i]] += v[i];
            ++cnt[assign[i]];
        }
        for (int m = 0; m < M; ++m) {
            if (cnt[m] > 0) {
                cs[m] = sum[m] / double(cnt[m]);
            } else {  // empty cluster: move it to the worst-fitted point
                std::size_t far = 0;
                double fd = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dd = std::abs(v[i] - cs[assign[i]]);
                    if (dd > fd) {
                        fd = dd;
                        far = i;
                    }
                }
                cs[m] = v[far];
                changed = true;
            }
        }
        if (!changed) break;
    }
    std::sort(cs.begin(), cs.end());
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        assign[i] = nearest(cs, v[i]);
        wcss += (v[i] - cs[assign[i]]) * (v[i] - cs[assign[i]]);
    }
    return wcss;
}

}  // namespace

SegmentationResult threshold_segment(const ImageField& h, int M, std::uint64_t seed, int restarts) {
    if (M < 1) throw ConfigError("threshold_segment: M must be >= 1");
    if (!all_finite(h)) throw DataError("threshold_segment: non-finite input");
    const std::vector<double> v(h.data(), h.data() + h.size());
    std::vector<double> distinct = v;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    SegmentationResult res;
    if (int(distinct.size()) < M) {
        M = int(distinct.size());
        res.reduced = true;
    }
    std::vector<double> best_cs;
    double best = std::numeric_limits<double>::infinity();
    if (M == 1) {
        best_cs = {std::accumulate(v.begin(), v.end(), 0.0) / double(v.size())};
    } else {
        std::vector<int> assign;
        for (int rs = 0; rs < restarts; ++rs) {
            Rng rng(derive_seed(seed, stream::kmeans, rs));
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            // k-means++ seeding
            std::vector<double> cs{v[std::size_t(unif(rng) * v.size()) % v.size()]};
            std::vector<double> d2(v.size());
            while (int(cs.size()) < M) {
                double total = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    double m = std::numeric_limits<double>::infinity();
                    for (double c : cs) m = std::min(m, (v[i] - c) * (v[i] - c));
                    d2[i] = m;
                    total += m;
                }
                double u = unif(rng) * total, acc = 0.0;
                std::size_t pick = v.size() - 1;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    acc += d2[i];
                    if (acc >= u && d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
                cs.push_back(v[pick]);
            }
            const double w = lloyd(v, cs, assign);
            if (w < best) {
                best = w;
                best_cs = cs;
            }
        }
    }
    res.centroids = best_cs;
    res.labels.resize(h.rows(), h.cols());
    for (std::size_t i = 0; i < v.size(); ++i) res.labels.data()[i] = nearest(best_cs, v[i]) + 1;
    return res;
}

double misclassification(const ImageField& labels, const ImageField& truth) {
    if (labels.rows() != truth.rows() || labels.cols() != truth.cols())
        throw DataError("misclassification: shape mismatch");
    const int M = int(std::max(labels.maxCoeff(), truth.maxCoeff()));
    if (M > 8) throw DataError("misclassification: too many labels for permutation matching");
    std::vector<int> perm(M);
    std::iota(perm.begin(), perm.end(), 1);
    std::size_t best = std::size_t(labels.size());
    do {
        std::size_t wrong = 0;
        for (Eigen::Index i = 0; i < labels.size(); ++i)
            if (perm[std::size_t(labels.data()[i]) - 1] != int(truth.data()[i])) ++wrong;
        best = std::min(best, wrong);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return double(best) / double(labels.size());
}

SegmentationMetrics metrics(const ImageField& h_hat, const SegmentationResult& seg, const ImageField& h_bar,
                            const ImageField& truth_mask, const ImageField& h_lr) {
    SegmentationMetrics m;
    m.risk = (h_hat - h_bar).square().sum();
    m.misclassified = misclassification(seg.labels, truth_mask);
    const double lr = (h_lr - h_bar).square().sum();
    m.normalized_risk = lr > 0.0 ? m.risk / lr : std::numeric_limits<double>::infinity();
    return m;
}

}  // namespace sugar

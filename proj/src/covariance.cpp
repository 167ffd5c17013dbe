#include "sugar/covariance.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "sugar/errors.hpp"
#include "sugar/rng.hpp"

namespace sugar {

namespace {
constexpr double kVarianceFloor = 1e-12;
constexpr double kTinyCorrelation = 1e-12;
}  // namespace

std::string to_string(CovarianceKind k) {
    switch (k) {
        case CovarianceKind::Var: return "var";
        case CovarianceKind::Inter: return "inter";
        case CovarianceKind::Full: return "full";
    }
    return "full";
}

CovarianceKind parse_covariance_kind(const std::string& s) {
    if (s == "var") return CovarianceKind::Var;
    if (s == "inter") return CovarianceKind::Inter;
    if (s == "full") return CovarianceKind::Full;
    throw ConfigError("unknown covariance kind '" + s + "' (expected var|inter|full)");
}

LagKernel LagKernel::delta() { return LagKernel{}; }

LagKernel LagKernel::zeros(int radius_rows, int radius_cols) {
    return LagKernel{radius_rows, radius_cols, ImageField::Zero(2 * radius_rows + 1, 2 * radius_cols + 1)};
}

double LagKernel::at(int dr, int dc) const {
    if (std::abs(dr) > radius_rows || std::abs(dc) > radius_cols) return 0.0;
    return taps(dr + radius_rows, dc + radius_cols);
}

LagKernel LagKernel::mirrored() const {
    LagKernel m = *this;
    m.taps = taps.reverse();
    return m;
}

CovarianceModel::CovarianceModel(CovarianceKind kind, ScaleRange scales)
    : kind_(kind), scales_(scales), C_(Eigen::MatrixXd::Zero(scales.size(), scales.size())),
      kernels_(std::size_t(scales.size()) * scales.size(), LagKernel::delta()) {}

CovarianceModel CovarianceModel::identity(const ScaleRange& s) {
    CovarianceModel m(CovarianceKind::Var, s);
    for (int a = 0; a < s.size(); ++a) m.set_pair(a, a, 1.0, LagKernel::delta());
    return m;
}

void CovarianceModel::set_pair(int a, int b, double c, const LagKernel& k) {
    C_(a, b) = C_(b, a) = c;
    if (a == b) {
        LagKernel sym = k;
        sym.taps = 0.5 * (k.taps + k.taps.reverse());
        kernels_[a * size() + a] = sym;
    } else {
        kernels_[a * size() + b] = k;
        kernels_[b * size() + a] = k.mirrored();
    }
}

void CovarianceModel::validate() const {
    const int J = size();
    if (C_.rows() != J || C_.cols() != J) throw DataError("covariance: C has wrong shape");
    for (int a = 0; a < J; ++a) {
        if (!(C_(a, a) > 0.0)) throw DataError("covariance: non-positive variance on the diagonal");
        for (int b = 0; b < J; ++b) {
            if (!std::isfinite(C_(a, b))) throw DataError("covariance: non-finite entry");
            if (C_(a, b) != C_(b, a)) throw DataError("covariance: C not symmetric");
            const LagKernel& k = kernel(a, b);
            if (std::abs(k.at(0, 0) - 1.0) > 1e-12) throw DataError("covariance: kernel not normalized at zero lag");
            if (!k.taps.isFinite().all()) throw DataError("covariance: non-finite kernel tap");
        }
    }
}

int lag_radius(int j, int jp, int rows, int cols, const CovarianceOptions& opt) {
    const double raw = opt.radius_factor * std::ldexp(1.0, std::max(j, jp));
    int r = int(std::floor(raw));
    const int clamp = opt.max_radius >= 0 ? opt.max_radius : (std::min(rows, cols) - 1) / 2;
    return std::max(0, std::min(r, clamp));
}

CovarianceModel estimate_covariance(const LeaderStack& l, const CovarianceOptions& opt) {
    const ScaleRange& s = l.scales;
    const int J = s.size(), R = int(l.rows()), Cc = int(l.cols());
    const double area = double(R) * Cc;
    std::vector<detail::Spectrum> spectra;
    std::vector<double> var;
    spectra.reserve(J);
    for (const auto& p : l.planes) {
        if (!all_finite(p)) throw DataError("estimate_covariance: non-finite log-leaders");
        const double mean = p.mean();
        ImageField centered = p - mean;
        const double var_p = centered.square().sum() / area;
        if (!(var_p > 1e-20 * (1.0 + mean * mean)))
            throw ZeroVarianceError("estimate_covariance: constant log-leader plane has zero variance");
        spectra.push_back(detail::fft2(centered));
        var.push_back(std::max(var_p, kVarianceFloor));
    }
    CovarianceModel m(CovarianceKind::Full, s);
    for (int a = 0; a < J; ++a) {
        for (int b = a; b < J; ++b) {
            detail::Spectrum cross(spectra[a].size());
            for (std::size_t k = 0; k < cross.size(); ++k) cross[k] = std::conj(spectra[a][k]) * spectra[b][k];
            // corr(d) = (1/|Omega|) sum_n a(n) b(n + d)
            ImageField corr = detail::ifft2(cross, R, Cc) / area;
            double c = corr(0, 0);
            if (a == b) c = std::max(c, kVarianceFloor);
            const int r = lag_radius(s.scale(a), s.scale(b), R, Cc, opt);
            LagKernel k = LagKernel::zeros(r, r);
            if (a != b && std::abs(c) < kTinyCorrelation * std::sqrt(var[a] * var[b])) {
                k = LagKernel::delta();
            } else {
                for (int dr = -r; dr <= r; ++dr)
                    for (int dc = -r; dc <= r; ++dc)
                        k.ref(dr, dc) = corr((dr + R) % R, (dc + Cc) % Cc) / corr(0, 0);
                k.ref(0, 0) = 1.0;
            }
            m.set_pair(a, b, c, k);
        }
    }
    return m;
}

CovarianceModel average_covariance(const std::vector<CovarianceModel>& samples) {
    if (samples.empty()) throw DataError("average_covariance: empty sample list");
    const CovarianceModel& first = samples.front();
    const int J = first.size();
    for (const auto& m : samples) {
        if (!(m.scales() == first.scales()) || m.kind() != first.kind())
            throw DataError("average_covariance: samples differ in scale range or kind");
    }
    if (samples.size() == 1) return first;
    const double q = double(samples.size());
    Eigen::MatrixXd cbar = Eigen::MatrixXd::Zero(J, J);
    for (const auto& m : samples) cbar += m.C();
    cbar /= q;
    CovarianceModel out(first.kind(), first.scales());
    for (int a = 0; a < J; ++a) {
        for (int b = a; b < J; ++b) {
            // average the covariances C * Xi, then renormalize by the mean C
            int rr = 0, rc = 0;
            for (const auto& m : samples) {
                rr = std::max(rr, m.kernel(a, b).radius_rows);
                rc = std::max(rc, m.kernel(a, b).radius_cols);
            }
            LagKernel k = LagKernel::zeros(rr, rc);
            for (const auto& m : samples) {
                const LagKernel& km = m.kernel(a, b);
                k.taps.block(rr - km.radius_rows, rc - km.radius_cols, km.taps.rows(), km.taps.cols()) +=
                    m.C()(a, b) * km.taps;
            }
            const ImageField cov = k.taps / q;
            const double c = cbar(a, b);
            if (a != b && std::abs(c) < kTinyCorrelation * std::sqrt(std::abs(cbar(a, a) * cbar(b, b)))) {
                k = LagKernel::delta();
            } else {
                k.taps = cov / c;
                k.ref(0, 0) = 1.0;
            }
            out.set_pair(a, b, c, k);
        }
    }
    return out;
}

CovarianceModel restrict_model(const CovarianceModel& model, CovarianceKind kind) {
    if (kind == CovarianceKind::Full) {
        if (model.kind() != CovarianceKind::Full) throw ConfigError("cannot widen a restricted covariance model");
        return model;
    }
    CovarianceModel out(kind, model.scales());
    const int J = model.size();
    for (int a = 0; a < J; ++a)
        for (int b = a; b < J; ++b)
            if (a == b || kind == CovarianceKind::Inter) out.set_pair(a, b, model.C()(a, b), LagKernel::delta());
    return out;
}

ProbeVector ProbeVector::draw(const ScaleRange& s, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    LeaderStack v = LeaderStack::zeros(s, rows, cols);
    for (auto& p : v.planes)
        for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = normal(rng);
    return ProbeVector{std::move(v), seed};
}

namespace {

// out += w * eps shifted so that out(n) picks eps(n + (dr, dc)) periodically.
void add_shifted(ImageField& out, const ImageField& eps, int dr, int dc, double w) {
    const int R = int(out.rows()), C = int(out.cols());
    const int sc = ((dc % C) + C) % C;
    for (int r = 0; r < R; ++r) {
        const int sr = (((r + dr) % R) + R) % R;
        double* o = out.data() + std::size_t(r) * C;
        const double* e = eps.data() + std::size_t(sr) * C;
        const int first = C - sc;
        for (int c = 0; c < first; ++c) o[c] += w * e[c + sc];
        for (int c = first; c < C; ++c) o[c] += w * e[c + sc - C];
    }
}

}  // namespace

LeaderStack apply_S(const CovarianceModel& model, const LeaderStack& eps) {
    if (!(eps.scales == model.scales())) throw DataError("apply_S: scale range mismatch");
    const int J = model.size();
    LeaderStack out = LeaderStack::zeros(eps.scales, eps.rows(), eps.cols());
    for (int a = 0; a < J; ++a) {
        for (int b = 0; b < J; ++b) {
            const double c = model.C()(a, b);
            if (c == 0.0) continue;
            const LagKernel& k = model.kernel(a, b);
            for (int dr = -k.radius_rows; dr <= k.radius_rows; ++dr)
                for (int dc = -k.radius_cols; dc <= k.radius_cols; ++dc) {
                    const double w = c * k.at(dr, dc);
                    if (w != 0.0) add_shifted(out.planes[a], eps.planes[b], dr, dc, w);
                }
        }
    }
    return out;
}

double trace_term(const CovarianceModel& model, const ScaleRange& s, std::size_t N) {
    s.require_regular();
    if (!(model.scales() == s)) throw DataError("trace_term: scale range mismatch");
    const double f0 = s.f0(), f1 = s.f1(), det = s.gram_det();
    double acc = 0.0;
    for (int a = 0; a < s.size(); ++a) {
        const double j = s.scale(a);
        for (int b = 0; b < s.size(); ++b) {
            const double jp = s.scale(b);
            const double c = model.C()(a, b);
            acc += f1 * f1 * c - f0 * f1 * j * c - f0 * f1 * jp * c + f0 * f0 * j * jp * c;
        }
    }
    return 0.5 * double(N) / (det * det) * acc;
}

double total_variance(const CovarianceModel& model, Eigen::Index rows, Eigen::Index cols) {
    return double(rows) * double(cols) * model.C().trace();
}

}  // namespace sugar

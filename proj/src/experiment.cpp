#include "sugar/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "sugar/errors.hpp"
#include "sugar/rng.hpp"

namespace sugar {

Observation observe(const TextureSpec& spec, const ScaleRange& s) {
    Observation o;
    o.spec = spec;
    o.texture = synthesize(spec);
    o.leaders = texture_log_leaders(o.texture, s);
    o.h_bar = ground_truth_h(spec);
    return o;
}

CovarianceModel sample_averaged_covariance(const TextureSpec& spec, const ScaleRange& s, int Q,
                                           const CovarianceOptions& opt) {
    if (Q < 1) throw ConfigError("sample-averaged covariance needs Q >= 1");
    std::vector<CovarianceModel> samples;
    samples.reserve(std::size_t(Q));
    for (int q = 0; q < Q; ++q) {
        TextureSpec sq = spec;
        sq.seed = derive_seed(spec.seed, stream::covariance, std::uint64_t(q));
        samples.push_back(estimate_covariance(texture_log_leaders(synthesize(sq), s), opt));
    }
    return average_covariance(samples);
}

std::vector<double> log_axis(double center, double lo, double hi, int n) {
    if (n < 1 || !(lo > 0.0) || !(hi >= lo) || !(center > 0.0)) throw ConfigError("invalid grid specification");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.5 : double(i) / (n - 1);
        out[std::size_t(i)] = center * std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    return out;
}

std::size_t GridResult::argmin_sure(std::size_t variant) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i].sure[variant].value < nodes[best].sure[variant].value) best = i;
    return best;
}

std::size_t GridResult::argmin_risk() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i].risk < nodes[best].risk) best = i;
    return best;
}

int cell_distance(const GridResult& g, std::size_t a, std::size_t b) {
    return std::max(std::abs(g.nodes[a].ih - g.nodes[b].ih), std::abs(g.nodes[a].iv - g.nodes[b].iv));
}

GridResult grid_search(const std::vector<RiskProblem>& variants, const std::vector<double>& axis_h,
                       const std::vector<double>& axis_v, const Estimator& estimator, const GroundTruth* truth,
                       int threads) {
    if (variants.empty()) throw ConfigError("grid search needs at least one covariance variant");
    GridResult g;
    g.axis_h = axis_h;
    g.axis_v = axis_v;
    g.has_truth = truth != nullptr;
    for (std::size_t ih = 0; ih < axis_h.size(); ++ih)
        for (std::size_t iv = 0; iv < axis_v.size(); ++iv) {
            GridNode n;
            n.ih = int(ih);
            n.iv = int(iv);
            n.lambda = Hyperparams{axis_h[ih], axis_v[iv]};
            g.nodes.push_back(n);
        }
    const RiskProblem& base = variants.front();
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= g.nodes.size()) return;
            GridNode& n = g.nodes[i];
            try {
                const AttributePair x = estimator.estimate(base.y, n.lambda);
                const AttributePair xp = estimator.estimate(base.y_perturbed, n.lambda);
                for (const auto& v : variants) {
                    SureReport r = assemble_sure(v, n.lambda, x, xp);
                    r.solver_calls = 2;
                    n.sure.push_back(r);
                }
                if (truth) {
                    n.risk = (x.h - truth->h_bar).square().sum();
                    const auto seg = threshold_segment(x.h, truth->regions, truth->segmentation_seed);
                    n.misclassified = misclassification(seg.labels, truth->mask);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(g.nodes.size());
                return;
            }
        }
    };
    int nt = threads > 0 ? threads : int(std::max(1u, std::thread::hardware_concurrency()));
    nt = std::min<int>(nt, int(g.nodes.size()));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return g;
}

}  // namespace sugar

#include "sugar/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "sugar/errors.hpp"
#include "sugar/format.hpp"
#include "sugar/io.hpp"
#include "sugar/rng.hpp"

namespace sugar::cli {

namespace fs = std::filesystem;

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys{
        {"texture", "E", "texture preset D or E, or custom (needs hurst, variance, mask)"},
        {"hurst", "", "custom texture: comma-separated Hurst exponent per region"},
        {"variance", "", "custom texture: comma-separated variance per region"},
        {"mask", "ellipse", "custom texture: ellipse (2 regions), stripes (vertical bands) or a PGM label map"},
        {"rows", "128", "image rows"},
        {"cols", "128", "image columns"},
        {"j1", "1", "finest scale used in the regression"},
        {"j2", "3", "coarsest scale used in the regression"},
        {"input", "", "raw texture file (.bin with sidecar) analysed instead of a synthesized one"},
        {"cov_source", "estimated", "covariance source: estimated (single sample), averaged (Q fresh samples) or file"},
        {"cov_file", "", "covariance file for cov_source=file"},
        {"cov_samples", "100", "Q, number of syntheses averaged for cov_source=averaged"},
        {"cov_kind", "full", "covariance structure kept: var, inter or full"},
        {"kappa", "0.5", "initial inverse-Hessian scale"},
        {"max_iterations", "250", "BFGS iteration budget (T_max)"},
        {"grad_tolerance", "1e-6", "BFGS stop when the gradient norm falls below this"},
        {"step_tolerance", "1e-3", "BFGS stop when a step is below this relative to |Lambda| (0 disables)"},
        {"log_space", "false", "run BFGS on log Lambda"},
        {"solver_tolerance", "1e-4", "primal-dual normalized duality-gap tolerance"},
        {"solver_max_iterations", "500000", "primal-dual iteration budget"},
        {"grid_lo", "1e-2", "grid lower bound relative to Lambda0"},
        {"grid_hi", "1e2", "grid upper bound relative to Lambda0"},
        {"grid_n", "15", "grid points per axis"},
        {"threads", "0", "grid worker threads (0: hardware concurrency)"},
        {"probes", "1", "number of Monte Carlo probes; above 1 adds averaged-SURE diagnostic columns"},
        {"regions", "0", "segmentation classes (0: number of texture regions)"},
        {"seed", "0", "master seed"},
        {"out", ".", "output directory"},
    };
    return keys;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool known_key(const std::string& k) {
    const auto& keys = config_keys();
    return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& c) { return c.name == k; });
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
    const long x = parse_long(key, v);
    if (x < -1000000000L || x > 1000000000L) throw ConfigError(key + ": out of range");
    return int(x);
}

std::uint64_t parse_seed(const std::string& v) {
    if (v.empty() || v[0] == '-') throw ConfigError("seed: expected a non-negative integer, got '" + v + "'");
    try {
        std::size_t pos = 0;
        const auto x = std::stoull(v, &pos);
        if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("seed: expected a non-negative integer, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos == v.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt_double(xs[i]);
    return s;
}

std::string cov_source_name(CovSource c) {
    switch (c) {
        case CovSource::Estimated: return "estimated";
        case CovSource::Averaged: return "averaged";
        case CovSource::File: return "file";
    }
    return "?";
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (!known_key(key)) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

RunConfig make_config(const std::map<std::string, std::string>& given) {
    std::map<std::string, std::string> v;
    for (const auto& k : config_keys()) v[k.name] = k.default_value;
    for (const auto& [k, val] : given) {
        if (!known_key(k)) throw ConfigError("unknown key '" + k + "'");
        v[k] = val;
    }

    RunConfig c;
    c.texture = v["texture"];
    if (c.texture != "D" && c.texture != "E" && c.texture != "custom")
        throw ConfigError("texture: expected D, E or custom, got '" + c.texture + "'");
    c.hurst = parse_list("hurst", v["hurst"]);
    c.variance = parse_list("variance", v["variance"]);
    c.mask = v["mask"];
    c.rows = parse_int("rows", v["rows"]);
    c.cols = parse_int("cols", v["cols"]);
    if (c.rows < 1 || c.cols < 1) throw ConfigError("rows and cols must be positive");
    c.j1 = parse_int("j1", v["j1"]);
    c.j2 = parse_int("j2", v["j2"]);
    c.scales();  // validates the range
    c.input = v["input"];

    const auto& src = v["cov_source"];
    if (src == "estimated") c.cov_source = CovSource::Estimated;
    else if (src == "averaged") c.cov_source = CovSource::Averaged;
    else if (src == "file") c.cov_source = CovSource::File;
    else throw ConfigError("cov_source: expected estimated, averaged or file, got '" + src + "'");
    c.cov_file = v["cov_file"];
    c.cov_samples = parse_int("cov_samples", v["cov_samples"]);
    if (c.cov_samples < 1) throw ConfigError("cov_samples must be >= 1");
    c.cov_kind = parse_covariance_kind(v["cov_kind"]);

    c.tuner.kappa = parse_double("kappa", v["kappa"]);
    if (!(c.tuner.kappa > 0)) throw ConfigError("kappa must be positive");
    c.tuner.max_iterations = parse_int("max_iterations", v["max_iterations"]);
    if (c.tuner.max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    c.tuner.grad_tolerance = parse_double("grad_tolerance", v["grad_tolerance"]);
    c.tuner.step_tolerance = parse_double("step_tolerance", v["step_tolerance"]);
    if (c.tuner.grad_tolerance < 0 || c.tuner.step_tolerance < 0) throw ConfigError("tolerances must be >= 0");
    c.tuner.log_space = parse_bool("log_space", v["log_space"]);
    c.solver.gap_tolerance = parse_double("solver_tolerance", v["solver_tolerance"]);
    if (!(c.solver.gap_tolerance > 0)) throw ConfigError("solver_tolerance must be positive");
    c.solver.max_iterations = parse_long("solver_max_iterations", v["solver_max_iterations"]);
    if (c.solver.max_iterations < 1) throw ConfigError("solver_max_iterations must be >= 1");

    c.grid.lo = parse_double("grid_lo", v["grid_lo"]);
    c.grid.hi = parse_double("grid_hi", v["grid_hi"]);
    c.grid.n = parse_int("grid_n", v["grid_n"]);
    if (!(c.grid.lo > 0) || c.grid.hi < c.grid.lo || c.grid.n < 1)
        throw ConfigError("grid: need 0 < grid_lo <= grid_hi and grid_n >= 1");
    c.grid.threads = parse_int("threads", v["threads"]);
    if (c.grid.threads < 0) throw ConfigError("threads must be >= 0");
    c.probes = parse_int("probes", v["probes"]);
    if (c.probes < 1) throw ConfigError("probes must be >= 1");
    c.regions = parse_int("regions", v["regions"]);
    if (c.regions < 0) throw ConfigError("regions must be >= 0");
    c.seed = parse_seed(v["seed"]);
    c.out = v["out"];
    if (c.out.empty()) throw ConfigError("out must not be empty");

    if (c.texture == "custom") {
        if (c.hurst.empty() || c.hurst.size() != c.variance.size())
            throw ConfigError("custom texture: hurst and variance need the same, non-zero number of entries");
        if (c.mask == "ellipse" && c.hurst.size() != 2)
            throw ConfigError("custom texture: the ellipse mask has exactly 2 regions");
        if (c.mask != "ellipse" && c.mask != "stripes" && !fs::exists(c.mask))
            throw ConfigError("mask file not found: " + c.mask);
    }
    if (!c.input.empty() && !fs::exists(c.input)) throw ConfigError("input file not found: " + c.input);
    if (c.cov_source == CovSource::File) {
        if (c.cov_file.empty()) throw ConfigError("cov_source=file needs cov_file");
        if (!fs::exists(c.cov_file)) throw ConfigError("covariance file not found: " + c.cov_file);
    }
    if (c.cov_source == CovSource::Averaged && !c.input.empty())
        throw ConfigError("cov_source=averaged needs a synthesized texture, not an input file");
    return c;
}

std::string RunConfig::canonical() const {
    // out and threads do not influence results and are left out on purpose
    std::map<std::string, std::string> v{
        {"texture", texture},
        {"hurst", join(hurst)},
        {"variance", join(variance)},
        {"mask", texture == "custom" ? mask : ""},
        {"rows", std::to_string(rows)},
        {"cols", std::to_string(cols)},
        {"j1", std::to_string(j1)},
        {"j2", std::to_string(j2)},
        {"input", input},
        {"cov_source", cov_source_name(cov_source)},
        {"cov_file", cov_file},
        {"cov_samples", std::to_string(cov_samples)},
        {"cov_kind", to_string(cov_kind)},
        {"kappa", fmt_double(tuner.kappa)},
        {"max_iterations", std::to_string(tuner.max_iterations)},
        {"grad_tolerance", fmt_double(tuner.grad_tolerance)},
        {"step_tolerance", fmt_double(tuner.step_tolerance)},
        {"log_space", tuner.log_space ? "true" : "false"},
        {"solver_tolerance", fmt_double(solver.gap_tolerance)},
        {"solver_max_iterations", std::to_string(solver.max_iterations)},
        {"grid_lo", fmt_double(grid.lo)},
        {"grid_hi", fmt_double(grid.hi)},
        {"grid_n", std::to_string(grid.n)},
        {"probes", std::to_string(probes)},
        {"regions", std::to_string(regions)},
        {"seed", std::to_string(seed)},
    };
    std::string s;
    for (const auto& [k, val] : v) s += k + "=" + val + "\n";
    return s;
}

TextureSpec texture_spec(const RunConfig& cfg) {
    const auto seed = derive_seed(cfg.seed, stream::texture);
    if (cfg.texture != "custom") return preset_texture(cfg.texture, cfg.rows, cfg.cols, seed);

    TextureSpec spec;
    const int M = int(cfg.hurst.size());
    if (cfg.mask == "ellipse") {
        spec.mask = ellipse_mask(cfg.rows, cfg.cols);
    } else if (cfg.mask == "stripes") {
        spec.mask = ImageField(cfg.rows, cfg.cols);
        for (int c = 0; c < cfg.cols; ++c) spec.mask.col(c).setConstant(1.0 + (long(c) * M) / cfg.cols);
    } else {
        spec.mask = read_pgm16(cfg.mask);
        if (spec.mask.rows() != cfg.rows || spec.mask.cols() != cfg.cols)
            throw ConfigError("mask file is " + std::to_string(spec.mask.rows()) + "x" +
                              std::to_string(spec.mask.cols()) + ", config asks for " + std::to_string(cfg.rows) +
                              "x" + std::to_string(cfg.cols));
    }
    for (int m = 0; m < M; ++m) spec.regions.push_back({cfg.hurst[std::size_t(m)], cfg.variance[std::size_t(m)]});
    spec.seed = seed;
    spec.validate();
    return spec;
}

Scene make_scene(const RunConfig& cfg) {
    Scene sc;
    if (!cfg.input.empty()) {
        sc.texture = read_field(cfg.input);
    } else {
        sc.spec = texture_spec(cfg);
        sc.texture = synthesize(sc.spec);
        sc.h_bar = ground_truth_h(sc.spec);
        sc.has_truth = true;
    }
    sc.leaders = texture_log_leaders(sc.texture, cfg.scales());
    return sc;
}

CovarianceModel make_covariance(const RunConfig& cfg, const Scene& scene) {
    CovarianceModel m;
    switch (cfg.cov_source) {
        case CovSource::Estimated: m = estimate_covariance(scene.leaders); break;
        case CovSource::Averaged: m = sample_averaged_covariance(scene.spec, cfg.scales(), cfg.cov_samples); break;
        case CovSource::File:
            m = load_covariance(cfg.cov_file);
            if (m.scales() != cfg.scales()) throw DataError("covariance file was built for a different scale range");
            break;
    }
    return m.kind() == cfg.cov_kind ? m : restrict_model(m, cfg.cov_kind);
}

namespace {

struct Context {
    RunConfig cfg;
    Provenance prov;
    std::ostream& log;

    std::string path(const std::string& name) const { return (fs::path(cfg.out) / name).string(); }
};

int segmentation_classes(const Context& ctx, const Scene& sc) {
    if (ctx.cfg.regions > 0) return ctx.cfg.regions;
    return sc.has_truth ? int(sc.spec.regions.size()) : 2;
}

struct ProbeStats {
    double mean = 0.0, sd = 0.0;
};

// SURE at lambda averaged over K independent probes (an extension; the method uses one).
ProbeStats multi_probe_sure(const Context& ctx, const Scene& sc, const CovarianceModel& model, const Hyperparams& lambda,
                            const Estimator& est) {
    const int K = ctx.cfg.probes;
    const auto x = est.estimate(sc.leaders, lambda);
    std::vector<double> vals;
    for (int k = 0; k < K; ++k) {
        const auto p = RiskProblem::make(sc.leaders, model, derive_seed(ctx.cfg.seed, stream::probe, std::uint64_t(k)));
        vals.push_back(assemble_sure(p, lambda, x, est.estimate(p.y_perturbed, lambda)).value);
    }
    ProbeStats st;
    st.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / K;
    for (double v : vals) st.sd += (v - st.mean) * (v - st.mean);
    st.sd = K > 1 ? std::sqrt(st.sd / (K - 1)) : 0.0;
    return st;
}

void write_scene_truth(const Context& ctx, const Scene& sc) {
    write_field(ctx.path("texture.bin"), sc.texture, ctx.prov);
    if (!sc.has_truth) return;
    write_field(ctx.path("h_bar.bin"), sc.h_bar, ctx.prov);
    write_pgm16(ctx.path("mask.pgm"), sc.spec.mask, ctx.prov);
}

int cmd_synthesize(const Context& ctx) {
    if (!ctx.cfg.input.empty()) throw ConfigError("synthesize does not take an input texture");
    const auto sc = make_scene(ctx.cfg);
    write_scene_truth(ctx, sc);
    ctx.log << "synthesized " << sc.texture.rows() << "x" << sc.texture.cols() << " texture with "
            << sc.spec.regions.size() << " regions\n";
    return exit_ok;
}

int cmd_leaders(const Context& ctx) {
    const auto sc = make_scene(ctx.cfg);
    write_leaders(ctx.path("leaders.bin"), sc.leaders, ctx.prov);
    ctx.log << "log-leaders j=" << ctx.cfg.j1 << ".." << ctx.cfg.j2 << " written\n";
    return exit_ok;
}

int cmd_covariance(const Context& ctx) {
    const auto sc = make_scene(ctx.cfg);
    const auto m = make_covariance(ctx.cfg, sc);
    save_covariance(ctx.path("covariance.cov"), m, ctx.prov, int(sc.leaders.rows()), int(sc.leaders.cols()));
    std::vector<std::string> rows;
    for (int a = 0; a < m.size(); ++a)
        for (int b = 0; b < m.size(); ++b) {
            const auto& k = m.kernel(a, b);
            rows.push_back(std::to_string(m.scales().scale(a)) + "," + std::to_string(m.scales().scale(b)) + "," +
                           fmt_double(m.C()(a, b)) + "," + std::to_string(k.radius_rows) + "," +
                           std::to_string(k.radius_cols));
        }
    write_csv(ctx.path("covariance.csv"), ctx.prov, "j,jp,C,radius_rows,radius_cols", rows);
    ctx.log << "covariance (" << to_string(m.kind()) << ", " << cov_source_name(ctx.cfg.cov_source) << ") written\n";
    return exit_ok;
}

std::string opt_field(bool present, double x) { return present ? fmt_double(x) : ""; }

GroundTruth truth_of(const Context& ctx, const Scene& sc) {
    return GroundTruth{sc.h_bar, sc.spec.mask, segmentation_classes(ctx, sc), derive_seed(ctx.cfg.seed, stream::kmeans)};
}

std::pair<std::vector<double>, std::vector<double>> grid_axes(const Context& ctx, const Scene& sc,
                                                              const CovarianceModel& model) {
    const auto l0 = init_hyperparams(sc.leaders, model);
    return {log_axis(l0.lambda_h, ctx.cfg.grid.lo, ctx.cfg.grid.hi, ctx.cfg.grid.n),
            log_axis(l0.lambda_v, ctx.cfg.grid.lo, ctx.cfg.grid.hi, ctx.cfg.grid.n)};
}

int cmd_gridsearch(const Context& ctx) {
    const auto sc = make_scene(ctx.cfg);
    const auto model = make_covariance(ctx.cfg, sc);
    const auto problem = RiskProblem::make(sc.leaders, model, derive_seed(ctx.cfg.seed, stream::probe));
    const PrimalDualEstimator est(ctx.cfg.solver);
    const auto [ah, av] = grid_axes(ctx, sc, model);
    const auto truth = truth_of(ctx, sc);
    const auto g = grid_search({problem}, ah, av, est, sc.has_truth ? &truth : nullptr, ctx.cfg.grid.threads);

    const auto best_sure = g.argmin_sure(0);
    const auto best_risk = g.has_truth ? g.argmin_risk() : g.nodes.size();
    const bool multi = ctx.cfg.probes > 1;
    std::string header = "ih,iv,lambda_h,lambda_v,sure,term_fidelity,term_dof,term_trace,risk,misclassified,marker";
    if (multi) header += ",sure_probe_mean,sure_probe_sd";
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        const auto& r = n.sure[0];
        std::string marker = std::string(i == best_risk ? "+" : "") + (i == best_sure ? "^" : "");
        std::string row = std::to_string(n.ih) + "," + std::to_string(n.iv) + "," + fmt_double(n.lambda.lambda_h) +
                          "," + fmt_double(n.lambda.lambda_v) + "," + fmt_double(r.value) + "," +
                          fmt_double(r.term_fidelity) + "," + fmt_double(r.term_dof) + "," +
                          fmt_double(r.term_trace) + "," + opt_field(g.has_truth, n.risk) + "," +
                          opt_field(g.has_truth, n.misclassified) + "," + marker;
        if (multi) {
            const auto st = multi_probe_sure(ctx, sc, model, n.lambda, est);
            row += "," + fmt_double(st.mean) + "," + fmt_double(st.sd);
        }
        rows.push_back(row);
    }
    write_csv(ctx.path("grid.csv"), ctx.prov, header, rows);
    const auto& b = g.nodes[best_sure];
    ctx.log << "grid " << ah.size() << "x" << av.size() << ", " << g.solver_calls() << " PD calls; SURE argmin ("
            << b.ih << "," << b.iv << ") Lambda=(" << fmt_double(b.lambda.lambda_h) << ","
            << fmt_double(b.lambda.lambda_v) << ")";
    if (g.has_truth) {
        const auto& t = g.nodes[best_risk];
        ctx.log << "; risk argmin (" << t.ih << "," << t.iv << "), distance " << cell_distance(g, best_risk, best_sure);
    }
    ctx.log << "\n";
    return exit_ok;
}

int cmd_tune(const Context& ctx) {
    const auto sc = make_scene(ctx.cfg);
    const auto model = make_covariance(ctx.cfg, sc);
    const auto problem = RiskProblem::make(sc.leaders, model, derive_seed(ctx.cfg.seed, stream::probe));
    const PrimalDualEstimator est(ctx.cfg.solver);
    const auto res = tune(problem, est, ctx.cfg.tuner);

    std::vector<std::string> trace;
    for (const auto& t : res.state.trace) trace.push_back(to_csv_row(t));
    write_csv(ctx.path("trace.csv"), ctx.prov, trace_csv_header(), trace);
    write_attributes(ctx.path("estimate.bin"), res.estimate, ctx.prov);

    const int M = segmentation_classes(ctx, sc);
    const auto seg = threshold_segment(res.estimate.h, M, derive_seed(ctx.cfg.seed, stream::kmeans));
    write_pgm16(ctx.path("labels.pgm"), seg.labels, ctx.prov);

    const long calls = res.state.solver_calls + 1;  // the final solve at the tuned Lambda
    std::string header = "lambda_h,lambda_v,sure,iterations,solver_calls,stop_reason,risk,misclassified,normalized_risk";
    std::string row = fmt_double(res.lambda.lambda_h) + "," + fmt_double(res.lambda.lambda_v) + "," +
                      fmt_double(res.state.value) + "," + std::to_string(res.state.trace.size() - 1) + "," +
                      std::to_string(calls) + "," + res.state.stop_reason + ",";
    SegmentationMetrics met;
    if (sc.has_truth) {
        met = metrics(res.estimate.h, seg, sc.h_bar, sc.spec.mask, linear_regression(sc.leaders).h);
        row += fmt_double(met.risk) + "," + (M == 2 ? fmt_double(met.misclassified) : "") + "," +
               fmt_double(met.normalized_risk);
    } else {
        row += ",,";
    }
    if (ctx.cfg.probes > 1) {
        header += ",sure_probe_mean,sure_probe_sd";
        const auto st = multi_probe_sure(ctx, sc, model, res.lambda, est);
        row += "," + fmt_double(st.mean) + "," + fmt_double(st.sd);
    }
    write_csv(ctx.path("summary.csv"), ctx.prov, header, {row});

    ctx.log << "tuned Lambda=(" << fmt_double(res.lambda.lambda_h) << "," << fmt_double(res.lambda.lambda_v)
            << ") SURE=" << fmt_double(res.state.value) << " after " << res.state.trace.size() - 1 << " iterations, "
            << calls << " PD calls (" << res.state.stop_reason << ")";
    if (sc.has_truth)
        ctx.log << "; R=" << fmt_double(met.risk) << " P=" << fmt_double(100 * met.misclassified)
                << "% Rtilde=" << fmt_double(met.normalized_risk);
    ctx.log << "\n";
    return exit_ok;
}

int cmd_ablate(const Context& ctx) {
    const auto sc = make_scene(ctx.cfg);
    auto full_cfg = ctx.cfg;
    full_cfg.cov_kind = CovarianceKind::Full;
    const auto full = make_covariance(full_cfg, sc);
    const auto base = RiskProblem::make(sc.leaders, full, derive_seed(ctx.cfg.seed, stream::probe));
    const std::vector<RiskProblem> variants{base, base.with_model(restrict_model(full, CovarianceKind::Inter)),
                                            base.with_model(restrict_model(full, CovarianceKind::Var))};
    const PrimalDualEstimator est(ctx.cfg.solver);
    const auto [ah, av] = grid_axes(ctx, sc, full);
    const auto truth = truth_of(ctx, sc);
    const auto g = grid_search(variants, ah, av, est, sc.has_truth ? &truth : nullptr, ctx.cfg.grid.threads);

    // markers: + risk argmin, ^ full, d inter, s var
    const char* marks[] = {"^", "d", "s"};
    const auto best_risk = g.has_truth ? g.argmin_risk() : g.nodes.size();
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        std::string marker = i == best_risk ? "+" : "";
        for (std::size_t v = 0; v < 3; ++v)
            if (i == g.argmin_sure(v)) marker += marks[v];
        rows.push_back(std::to_string(n.ih) + "," + std::to_string(n.iv) + "," + fmt_double(n.lambda.lambda_h) + "," +
                       fmt_double(n.lambda.lambda_v) + "," + fmt_double(n.sure[0].value) + "," +
                       fmt_double(n.sure[1].value) + "," + fmt_double(n.sure[2].value) + "," +
                       opt_field(g.has_truth, n.risk) + "," + opt_field(g.has_truth, n.misclassified) + "," + marker);
    }
    write_csv(ctx.path("ablate.csv"), ctx.prov,
              "ih,iv,lambda_h,lambda_v,sure_full,sure_inter,sure_var,risk,misclassified,marker", rows);

    ctx.log << "ablation grid " << ah.size() << "x" << av.size() << ", " << g.solver_calls() << " PD calls\n";
    const char* names[] = {"full", "inter", "var"};
    for (std::size_t v = 0; v < 3; ++v) {
        const auto& b = g.nodes[g.argmin_sure(v)];
        ctx.log << "  " << names[v] << ": SURE argmin (" << b.ih << "," << b.iv << ")";
        if (g.has_truth) ctx.log << ", distance to risk argmin " << cell_distance(g, best_risk, g.argmin_sure(v));
        ctx.log << "\n";
    }
    return exit_ok;
}

std::string read_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"sugartune: SURE/SUGAR hyperparameter tuning for TV-based texture segmentation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    app.add_option("--config", config_file, "flat key = value config file; flags override it");
    std::map<std::string, std::string> flags;
    std::vector<CLI::Option*> options;
    for (const auto& k : config_keys()) {
        std::string names = "--" + k.name;
        if (k.name.find('_') != std::string::npos) {
            auto dashed = k.name;
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            names += ",--" + dashed;
        }
        auto* o = app.add_option(names, flags[k.name], k.help + " [" + k.default_value + "]");
        options.push_back(o);
    }

    using Command = int (*)(const Context&);
    const std::vector<std::pair<std::string, std::pair<std::string, Command>>> commands{
        {"synthesize", {"synthesize a texture and its ground truth", cmd_synthesize}},
        {"leaders", {"compute log-leaders", cmd_leaders}},
        {"covariance", {"estimate, average or load the log-leader covariance", cmd_covariance}},
        {"gridsearch", {"evaluate SURE (and the true risk) on a log-spaced grid", cmd_gridsearch}},
        {"tune", {"BFGS tuning with SUGAR gradients, segmentation and metrics", cmd_tune}},
        {"ablate", {"grid comparison of full, inter and var covariance models", cmd_ablate}},
    };
    for (const auto& [name, info] : commands) app.add_subcommand(name, info.first);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }

    try {
        std::map<std::string, std::string> values;
        if (!config_file.empty()) values = parse_key_values(read_text(config_file));
        const auto& keys = config_keys();
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (options[i]->count() > 0) values[keys[i].name] = flags[keys[i].name];

        Context ctx{make_config(values), {}, out};
        const auto canonical = ctx.cfg.canonical();
        ctx.prov = Provenance{build_id(), ctx.cfg.seed, config_hash(canonical)};
        std::error_code ec;
        fs::create_directories(ctx.cfg.out, ec);
        if (ec) throw DataError("cannot create output directory " + ctx.cfg.out + ": " + ec.message());
        {
            std::ofstream os(ctx.path("config.txt"), std::ios::binary);
            if (!os) throw DataError("cannot write " + ctx.path("config.txt"));
            os << "# build_id=" << ctx.prov.build_id << "\n# seed=" << ctx.prov.seed
               << "\n# config_hash=" << ctx.prov.config_hash << "\n"
               << canonical;
        }
        for (const auto& [name, info] : commands)
            if (app.got_subcommand(name)) return info.second(ctx);
        return exit_other;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << "\n";
        return exit_solver;
    } catch (const TunerError& e) {
        err << "tuner error: " << e.what() << "\n";
        return exit_tuner;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_other;
    }
}

}  // namespace sugar::cli

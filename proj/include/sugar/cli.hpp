#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sugar/covariance.hpp"
#include "sugar/experiment.hpp"
#include "sugar/tuner.hpp"

namespace sugar::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_other = 1,
    exit_config = 2,
    exit_data = 3,
    exit_solver = 4,
    exit_tuner = 5,
};

enum class CovSource { Estimated, Averaged, File };

struct RunConfig {
    std::string texture = "E";  // D, E or custom
    std::vector<double> hurst;     // custom texture only
    std::vector<double> variance;  // custom texture only
    std::string mask = "ellipse";  // custom texture only: ellipse | stripes | path to a PGM label map
    int rows = 128, cols = 128;
    int j1 = 1, j2 = 3;
    std::string input;  // optional raw texture file replacing synthesis (no ground truth)

    CovSource cov_source = CovSource::Estimated;
    std::string cov_file;
    int cov_samples = 100;
    CovarianceKind cov_kind = CovarianceKind::Full;

    TunerConfig tuner;
    SolverConfig solver;
    GridConfig grid;
    int probes = 1;
    int regions = 0;  // segmentation classes; 0: number of texture regions

    std::uint64_t seed = 0;
    std::string out = ".";

    ScaleRange scales() const { return ScaleRange(j1, j2); }
    // Sorted key=value lines of every resolved setting; hashed into the provenance.
    std::string canonical() const;
};

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

const std::vector<ConfigKey>& config_keys();

// Flat "key = value" text, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_key_values(const std::string& text);
RunConfig make_config(const std::map<std::string, std::string>& values);

// The texture to analyse plus, when synthesized, its ground truth.
struct Scene {
    TextureSpec spec;
    ImageField texture;
    LeaderStack leaders;
    bool has_truth = false;
    ImageField h_bar;
};

TextureSpec texture_spec(const RunConfig& cfg);
Scene make_scene(const RunConfig& cfg);
CovarianceModel make_covariance(const RunConfig& cfg, const Scene& scene);

// Entry point of the sugartune tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sugar::cli

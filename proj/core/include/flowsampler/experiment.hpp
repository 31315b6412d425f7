#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowsampler/diagnostics.hpp"
#include "flowsampler/gaussian_flows.hpp"
#include "flowsampler/particle_flows.hpp"
#include "flowsampler/targets.hpp"

namespace flowsampler {

struct TargetSpec {
    std::string kind;
    double lambda = 1.0;
    int K = 1; // polynomial_even only
};

struct FlowSpec {
    std::string type;          // "particle" or "gaussian"
    std::string flow;          // langevin/ai_langevin/svgd/ai_svgd or a gaussian flow name
    int particles = 1000;      // particle type only
    double dt = 0.01;
    std::string kernel;        // empty = flow default
    double kappa = std::numeric_limits<double>::quiet_NaN(); // gaussian type, NaN = 3-N
    std::string hessian_mode = "auto"; // auto | analytic | stein_gradient
};

struct ExperimentConfig {
    TargetSpec target;
    FlowSpec flow;
    double horizon = 15.0;
    double report_interval = 0.1;
    std::uint64_t dynamics_seed = 0;
    std::uint64_t probe_seed = 0;
    std::filesystem::path output_dir = "out";
    std::filesystem::path source_path; // where the config came from, for messages

    std::string label() const;
};

/// Parse and validate a JSON experiment config. Seeds must be explicit.
ExperimentConfig load_config(const std::filesystem::path& file);

TargetModel make_target(const TargetSpec& spec);

/// Initial distribution of the convergence studies, per target kind:
/// gaussian from N((10,10), diag(1/2, 2)); logconcave from N((10,10), 4I);
/// rosenbrock from N((0,0), 4I).
GaussianMoments initial_moments(TargetKind kind);

struct TrajectoryRow {
    double t;
    double mean_err;
    double cov_rel_err;
    double cos_err;
};

struct Trajectory {
    std::string flow;
    std::string target;
    double lambda = 0.0;
    std::vector<TrajectoryRow> rows;
};

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory_csv(std::istream& in, const std::string& source_name = "csv");

std::filesystem::path trajectory_csv_path(const ExperimentConfig& cfg);

/// Run one experiment: initialize per target kind, advance to the horizon,
/// and report the three error metrics at every report time. The CSV under
/// cfg.output_dir is flushed row by row, so a failing run leaves the partial
/// trajectory behind. Gaussian-flow runs also export the moment trajectory
/// as <label>_moments.csv.
Trajectory run_experiment(const ExperimentConfig& cfg);

/// One experiment per lambda, in parallel.
std::vector<Trajectory> run_sweep(const ExperimentConfig& base, const std::vector<double>& lambdas);

} // namespace flowsampler

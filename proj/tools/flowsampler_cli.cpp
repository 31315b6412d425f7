// Command-line front end: run / sweep / reference / plot.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <glob.h>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowsampler/diagnostics.hpp"
#include "flowsampler/experiment.hpp"
#include "flowsampler/plot.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::vector<double> parse_lambda_list(const std::string& spec) {
    std::vector<double> out;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) {
        throw flowsampler::ArgumentError("sweep: empty lambda list '" + spec + "'");
    }
    return out;
}

std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), GLOB_TILDE, nullptr, &g);
    std::vector<std::filesystem::path> paths;
    if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) {
        throw flowsampler::ArgumentError("plot: glob failed for '" + pattern + "'");
    }
    return paths;
}

void print_trajectory_tail(const flowsampler::Trajectory& t) {
    if (t.rows.empty()) return;
    const flowsampler::TrajectoryRow& r = t.rows.back();
    std::printf("%s lambda=%g: t=%g mean_err=%.6g cov_rel_err=%.6g cos_err=%.6g\n",
                t.flow.c_str(), t.lambda, r.t, r.mean_err, r.cov_rel_err, r.cos_err);
}

void print_reference(const flowsampler::ReferenceStats& ref) {
    nlohmann::json j;
    j["mean"] = std::vector<double>(ref.mean.data(), ref.mean.data() + ref.mean.size());
    nlohmann::json cov = nlohmann::json::array();
    for (int i = 0; i < ref.cov.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < ref.cov.cols(); ++k) row.push_back(ref.cov(i, k));
        cov.push_back(row);
    }
    j["cov"] = cov;
    j["cos"] = ref.cos_values;
    std::cout << j.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-flow sampling toolkit"};
    app.require_subcommand(1);

    std::string config_file;
    std::string lambda_spec = "0.01,0.1,1";
    std::string ref_target;
    double ref_lambda = 1.0;
    long ref_points = 10'000'000;
    std::uint64_t ref_probe_seed = 0;
    std::string plot_input;
    std::string plot_output;
    bool log_y = false;

    CLI::App* run = app.add_subcommand("run", "Run one experiment from a JSON config");
    run->add_option("--config", config_file, "Experiment config file")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "Run the config once per lambda");
    sweep->add_option("--config", config_file, "Experiment config file")->required();
    sweep->add_option("--lambda", lambda_spec, "Comma-separated lambda values");

    CLI::App* reference =
        app.add_subcommand("reference", "Print (and cache) reference statistics for a target");
    reference->add_option("--target", ref_target, "Target kind")->required();
    reference->add_option("--lambda", ref_lambda, "Anisotropy parameter");
    reference->add_option("--points", ref_points, "Midpoint-rule node count");
    reference->add_option("--probe-seed", ref_probe_seed, "Probe seed");

    CLI::App* plot = app.add_subcommand("plot", "Render trajectory CSVs as an SVG grid");
    plot->add_option("--input", plot_input, "Glob of trajectory CSV files")->required();
    plot->add_option("--output", plot_output, "Output SVG path")->required();
    plot->add_flag("--log-y", log_y, "Log-scale the y axes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) {
            const flowsampler::ExperimentConfig cfg = flowsampler::load_config(config_file);
            const flowsampler::Trajectory t = flowsampler::run_experiment(cfg);
            print_trajectory_tail(t);
            std::printf("wrote %s\n", flowsampler::trajectory_csv_path(cfg).string().c_str());
        } else if (sweep->parsed()) {
            const flowsampler::ExperimentConfig cfg = flowsampler::load_config(config_file);
            const std::vector<double> lambdas = parse_lambda_list(lambda_spec);
            const auto trajectories = flowsampler::run_sweep(cfg, lambdas);
            for (const auto& t : trajectories) print_trajectory_tail(t);
        } else if (reference->parsed()) {
            flowsampler::TargetSpec spec;
            spec.kind = ref_target;
            spec.lambda = ref_lambda;
            const flowsampler::TargetModel target = flowsampler::make_target(spec);
            const auto probes = flowsampler::draw_probes(target.dim(), ref_probe_seed);
            flowsampler::ReferenceConfig rc;
            rc.points = ref_points;
            const auto ref =
                flowsampler::reference_statistics_cached(target, probes, ref_probe_seed, rc);
            print_reference(ref);
        } else if (plot->parsed()) {
            flowsampler::PlotStyle style;
            style.log_y = log_y;
            flowsampler::emit_plot(expand_glob(plot_input), plot_output, style);
            std::printf("wrote %s\n", plot_output.c_str());
        }
    } catch (const flowsampler::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}

#include "flowsampler/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

namespace flowsampler {

namespace {

std::string fmt_double(double v, const char* spec = "%.12g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

} // namespace

std::string ExperimentConfig::label() const {
    std::string name = flow.flow + "_" + target.kind;
    if (target.kind == "polynomial_even") {
        name += "_K" + std::to_string(target.K);
    } else {
        name += "_lambda" + fmt_double(target.lambda, "%g");
    }
    return name;
}

TargetModel make_target(const TargetSpec& spec) {
    if (spec.kind == "gaussian") return TargetModel::gaussian_benchmark(spec.lambda);
    if (spec.kind == "logconcave") return TargetModel::logconcave(spec.lambda);
    if (spec.kind == "rosenbrock") return TargetModel::rosenbrock(spec.lambda);
    if (spec.kind == "polynomial_even") return TargetModel::polynomial_even(spec.K);
    throw ArgumentError("config: unknown target kind '" + spec.kind + "'");
}

GaussianMoments initial_moments(TargetKind kind) {
    GaussianMoments g;
    switch (kind) {
        case TargetKind::gaussian:
            g.mean = Eigen::Vector2d(10.0, 10.0);
            g.cov = Eigen::Vector2d(0.5, 2.0).asDiagonal();
            return g;
        case TargetKind::logconcave:
            g.mean = Eigen::Vector2d(10.0, 10.0);
            g.cov = Eigen::Matrix2d::Identity() * 4.0;
            return g;
        case TargetKind::rosenbrock:
            g.mean = Eigen::Vector2d::Zero();
            g.cov = Eigen::Matrix2d::Identity() * 4.0;
            return g;
        default:
            throw ArgumentError("no initial distribution defined for target kind '" +
                                to_string(kind) + "'");
    }
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    using nlohmann::json;
    std::ifstream in(file);
    if (!in) {
        throw ArgumentError("config: cannot open '" + file.string() + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ArgumentError("config '" + file.string() + "': invalid JSON: " + e.what());
    }

    try {
        ExperimentConfig cfg;
        cfg.source_path = file;

        const json& jt = j.at("target");
        cfg.target.kind = jt.at("kind").get<std::string>();
        if (cfg.target.kind == "polynomial_even") {
            cfg.target.K = jt.at("K").get<int>();
        } else {
            cfg.target.lambda = jt.at("lambda").get<double>();
        }

        const json& jf = j.at("flow");
        cfg.flow.type = jf.at("type").get<std::string>();
        cfg.flow.flow = jf.at("flow").get<std::string>();
        if (jf.contains("particles")) cfg.flow.particles = jf.at("particles").get<int>();
        if (jf.contains("dt")) cfg.flow.dt = jf.at("dt").get<double>();
        if (jf.contains("kernel")) cfg.flow.kernel = jf.at("kernel").get<std::string>();
        if (jf.contains("kappa")) cfg.flow.kappa = jf.at("kappa").get<double>();
        if (jf.contains("hessian_mode")) {
            cfg.flow.hessian_mode = jf.at("hessian_mode").get<std::string>();
        }

        cfg.horizon = j.at("horizon").get<double>();
        if (j.contains("report_interval")) {
            cfg.report_interval = j.at("report_interval").get<double>();
        }
        const json& js = j.at("seeds");
        cfg.dynamics_seed = js.at("dynamics").get<std::uint64_t>();
        cfg.probe_seed = js.at("probe").get<std::uint64_t>();
        if (j.contains("output_dir")) {
            cfg.output_dir = j.at("output_dir").get<std::string>();
        }

        // Fail fast on anything the run would reject later.
        make_target(cfg.target);
        if (cfg.flow.type == "particle") {
            particle_flow_from_name(cfg.flow.flow);
            if (!cfg.flow.kernel.empty()) kernel_family_from_name(cfg.flow.kernel);
            if (cfg.flow.particles < 1) throw ArgumentError("config: particles must be >= 1");
        } else if (cfg.flow.type == "gaussian") {
            MomentFlow::from_name(cfg.flow.flow);
            if (cfg.flow.hessian_mode != "auto" && cfg.flow.hessian_mode != "analytic" &&
                cfg.flow.hessian_mode != "stein_gradient") {
                throw ArgumentError("config: unknown hessian_mode '" + cfg.flow.hessian_mode + "'");
            }
        } else {
            throw ArgumentError("config: flow type must be 'particle' or 'gaussian'");
        }
        if (cfg.flow.dt <= 0.0) throw ArgumentError("config: dt must be positive");
        if (cfg.horizon <= 0.0) throw ArgumentError("config: horizon must be positive");
        if (cfg.report_interval <= 0.0) {
            throw ArgumentError("config: report_interval must be positive");
        }
        const double ratio = cfg.report_interval / cfg.flow.dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
            throw ArgumentError("config: dt must divide the report interval");
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ArgumentError("config '" + file.string() + "': " + e.what());
    }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "flow,target,lambda,t,mean_err,cov_rel_err,cos_err\n";
    for (const TrajectoryRow& r : trajectory.rows) {
        out << trajectory.flow << ',' << trajectory.target << ','
            << fmt_double(trajectory.lambda, "%g") << ',' << fmt_double(r.t) << ','
            << fmt_double(r.mean_err) << ',' << fmt_double(r.cov_rel_err) << ','
            << fmt_double(r.cos_err) << "\n";
    }
}

Trajectory read_trajectory_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line) || line != "flow,target,lambda,t,mean_err,cov_rel_err,cos_err") {
        throw FormatError(source_name + ": unexpected trajectory CSV header");
    }
    Trajectory t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string flow;
        std::string target;
        std::string field;
        if (!std::getline(row, flow, ',') || !std::getline(row, target, ',')) {
            throw FormatError(source_name + ": malformed row '" + line + "'");
        }
        double values[5];
        for (double& v : values) {
            if (!std::getline(row, field, ',')) {
                throw FormatError(source_name + ": malformed row '" + line + "'");
            }
            try {
                v = std::stod(field);
            } catch (const std::exception&) {
                throw FormatError(source_name + ": bad number '" + field + "'");
            }
        }
        if (t.rows.empty()) {
            t.flow = flow;
            t.target = target;
            t.lambda = values[0];
        }
        t.rows.push_back({values[1], values[2], values[3], values[4]});
    }
    if (t.rows.empty()) {
        throw FormatError(source_name + ": no data rows");
    }
    return t;
}

std::filesystem::path trajectory_csv_path(const ExperimentConfig& cfg) {
    return cfg.output_dir / (cfg.label() + ".csv");
}

namespace {

TrajectoryRow make_row(double t, const SummaryStats& stats, const ReferenceStats& ref) {
    const ErrorReport e = error_report(stats, ref);
    return {t, e.mean_err, e.cov_rel_err, e.cos_err};
}

void append_row(std::ostream& out, const Trajectory& trajectory, const TrajectoryRow& r) {
    out << trajectory.flow << ',' << trajectory.target << ','
        << fmt_double(trajectory.lambda, "%g") << ',' << fmt_double(r.t) << ','
        << fmt_double(r.mean_err) << ',' << fmt_double(r.cov_rel_err) << ','
        << fmt_double(r.cos_err) << "\n";
    out.flush();
}

Trajectory run_particle_experiment(const ExperimentConfig& cfg, const TargetModel& target,
                                   const std::vector<CosProbe>& probes, const ReferenceStats& ref,
                                   std::ostream& csv) {
    Trajectory traj{cfg.flow.flow, cfg.target.kind, cfg.target.lambda, {}};

    const ParticleFlowKind kind = particle_flow_from_name(cfg.flow.flow);
    KernelSpec kernel = default_kernel(kind);
    if (!cfg.flow.kernel.empty()) kernel.family = kernel_family_from_name(cfg.flow.kernel);

    SdeConfig sde;
    sde.dt = cfg.flow.dt;
    sde.seed = cfg.dynamics_seed;
    sde.flow = kind;

    const int steps_per_report =
        static_cast<int>(std::llround(cfg.report_interval / cfg.flow.dt));
    const int reports = static_cast<int>(std::llround(cfg.horizon / cfg.report_interval));
    sde.steps = steps_per_report * reports;

    Ensemble e = sample_gaussian_ensemble(initial_moments(target.kind()), cfg.flow.particles,
                                          cfg.dynamics_seed);
    RngState rng{cfg.dynamics_seed, 1};

    TrajectoryRow row = make_row(0.0, summary_stats(e, probes), ref);
    traj.rows.push_back(row);
    append_row(csv, traj, row);
    for (int r = 1; r <= reports; ++r) {
        for (int s = 0; s < steps_per_report; ++s) {
            e = flow_step(e, target, sde, kernel, rng);
        }
        row = make_row(r * cfg.report_interval, summary_stats(e, probes), ref);
        traj.rows.push_back(row);
        append_row(csv, traj, row);
    }
    return traj;
}

Trajectory run_gaussian_experiment(const ExperimentConfig& cfg, const TargetModel& target,
                                   const std::vector<CosProbe>& probes, const ReferenceStats& ref,
                                   std::ostream& csv) {
    Trajectory traj{cfg.flow.flow, cfg.target.kind, cfg.target.lambda, {}};

    const MomentFlow flow = MomentFlow::from_name(cfg.flow.flow);
    HessianMode mode = default_hessian_mode(target);
    if (cfg.flow.hessian_mode == "analytic") mode = HessianMode::analytic;
    if (cfg.flow.hessian_mode == "stein_gradient") mode = HessianMode::stein_gradient;

    const int reports = static_cast<int>(std::llround(cfg.horizon / cfg.report_interval));
    GaussianMoments g = initial_moments(target.kind());

    MomentPath moments;
    moments.times.push_back(0.0);
    moments.states.push_back(g);

    TrajectoryRow row = make_row(0.0, summary_stats(g, probes), ref);
    traj.rows.push_back(row);
    append_row(csv, traj, row);
    for (int r = 1; r <= reports; ++r) {
        const MomentPath chunk = integrate_moment_flow(flow, g, target, cfg.flow.dt,
                                                       cfg.report_interval, cfg.flow.kappa, mode);
        g = chunk.states.back();
        const double t0 = moments.times.back();
        for (std::size_t i = 1; i < chunk.states.size(); ++i) {
            moments.times.push_back(t0 + chunk.times[i]);
            moments.states.push_back(chunk.states[i]);
        }
        row = make_row(r * cfg.report_interval, summary_stats(g, probes), ref);
        traj.rows.push_back(row);
        append_row(csv, traj, row);
    }

    std::ofstream mout(cfg.output_dir / (cfg.label() + "_moments.csv"));
    write_moment_csv(mout, moments);
    return traj;
}

} // namespace

Trajectory run_experiment(const ExperimentConfig& cfg) {
    const std::string context = cfg.source_path.empty()
                                    ? "experiment '" + cfg.label() + "'"
                                    : "experiment '" + cfg.label() + "' from " +
                                          cfg.source_path.string();
    try {
        const TargetModel target = make_target(cfg.target);
        const std::vector<CosProbe> probes = draw_probes(target.dim(), cfg.probe_seed);
        const ReferenceStats ref = reference_statistics_cached(target, probes, cfg.probe_seed);

        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream csv(trajectory_csv_path(cfg));
        if (!csv) {
            throw ArgumentError("cannot write trajectory CSV under '" +
                                cfg.output_dir.string() + "'");
        }
        csv << "flow,target,lambda,t,mean_err,cov_rel_err,cos_err\n";
        csv.flush();

        if (cfg.flow.type == "particle") {
            return run_particle_experiment(cfg, target, probes, ref, csv);
        }
        if (cfg.flow.type == "gaussian") {
            return run_gaussian_experiment(cfg, target, probes, ref, csv);
        }
        throw ArgumentError("flow type must be 'particle' or 'gaussian'");
    } catch (const ArgumentError& e) {
        throw ArgumentError(context + ": " + e.what());
    } catch (const FlowError& e) {
        throw FlowError(context + ": " + e.what());
    }
}

std::vector<Trajectory> run_sweep(const ExperimentConfig& base,
                                  const std::vector<double>& lambdas) {
    if (lambdas.empty()) throw ArgumentError("sweep: no lambda values given");
    std::vector<std::future<Trajectory>> jobs;
    jobs.reserve(lambdas.size());
    for (double lambda : lambdas) {
        ExperimentConfig cfg = base;
        cfg.target.lambda = lambda;
        jobs.push_back(std::async(std::launch::async, [cfg]() { return run_experiment(cfg); }));
    }
    std::vector<Trajectory> out;
    out.reserve(lambdas.size());
    for (auto& job : jobs) out.push_back(job.get());
    return out;
}

} // namespace flowsampler

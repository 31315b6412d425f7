#include "flowsampler/diagnostics.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flowsampler/rng.hpp"

namespace flowsampler {

std::vector<CosProbe> draw_probes(int dim, std::uint64_t probe_seed) {
    std::vector<CosProbe> probes;
    probes.reserve(kProbeCount);
    for (int i = 0; i < kProbeCount; ++i) {
        RandomStream stream(rng::mix(probe_seed, 0x70726f6265ULL, static_cast<std::uint64_t>(i)));
        CosProbe p;
        p.omega = stream.normal_vector(dim);
        p.b = 2.0 * M_PI * stream.uniform01();
        probes.push_back(std::move(p));
    }
    return probes;
}

double gaussian_cos_expectation(const GaussianMoments& g, const CosProbe& probe) {
    const double damp = std::exp(-0.5 * probe.omega.dot(g.cov * probe.omega));
    return damp * std::cos(probe.omega.dot(g.mean) + probe.b);
}

SummaryStats summary_stats(const Ensemble& e, const std::vector<CosProbe>& probes) {
    SummaryStats s;
    const GaussianMoments g = empirical_moments(e);
    s.mean = g.mean;
    s.cov = g.cov;
    s.cos_values.reserve(probes.size());
    for (const CosProbe& p : probes) {
        const Eigen::ArrayXd phase = (e.particles * p.omega).array() + p.b;
        s.cos_values.push_back(phase.cos().mean());
    }
    return s;
}

SummaryStats summary_stats(const GaussianMoments& g, const std::vector<CosProbe>& probes) {
    validate_moments(g, "summary stats");
    SummaryStats s;
    s.mean = g.mean;
    s.cov = g.cov;
    s.cos_values.reserve(probes.size());
    for (const CosProbe& p : probes) {
        s.cos_values.push_back(gaussian_cos_expectation(g, p));
    }
    return s;
}

namespace {

// Midpoint rule over [lo, hi] for a semi-analytic 2D reference: `weight` is
// the marginal of the outer variable up to a constant, `moments` returns the
// five conditional moments (E[t1], E[t2], E[t1^2], E[t1 t2], E[t2^2]).
struct OuterIntegrand {
    std::function<double(double)> weight;
    std::function<void(double, double out[5])> moments;
    std::function<double(double, const CosProbe&)> cosine; // conditional E[cos]
};

ReferenceStats integrate_reference(const OuterIntegrand& f, double lo, double hi, long points,
                                   const std::vector<CosProbe>& probes) {
    const double h = (hi - lo) / static_cast<double>(points);
    auto node = [&](long k) { return lo + (static_cast<double>(k) + 0.5) * h; };

    double mass = 0.0;
    double acc[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    double peak = 0.0;
    for (long k = 0; k < points; ++k) {
        const double u = node(k);
        const double w = f.weight(u);
        peak = std::max(peak, w);
        mass += w;
        double m[5];
        f.moments(u, m);
        for (int i = 0; i < 5; ++i) acc[i] += w * m[i];
    }
    if (!(mass > 0.0)) {
        throw ArgumentError("reference integration: zero mass on the interval");
    }
    if (f.weight(node(0)) > 1e-10 * peak || f.weight(node(points - 1)) > 1e-10 * peak) {
        throw TruncationError("reference integration: interval cuts off more than 1e-10 of "
                              "the peak density");
    }
    for (int i = 0; i < 5; ++i) acc[i] /= mass;

    ReferenceStats ref;
    ref.mean = Eigen::Vector2d(acc[0], acc[1]);
    ref.cov = Eigen::Matrix2d();
    ref.cov(0, 0) = acc[2] - acc[0] * acc[0];
    ref.cov(0, 1) = ref.cov(1, 0) = acc[3] - acc[0] * acc[1];
    ref.cov(1, 1) = acc[4] - acc[1] * acc[1];

    // One pass per probe; probes are independent, so run them concurrently.
    ref.cos_values.resize(probes.size());
    std::vector<std::future<double>> jobs;
    jobs.reserve(probes.size());
    for (const CosProbe& p : probes) {
        jobs.push_back(std::async(std::launch::async, [&, p]() {
            double acc_cos = 0.0;
            for (long k = 0; k < points; ++k) {
                const double u = node(k);
                acc_cos += f.weight(u) * f.cosine(u, p);
            }
            return acc_cos / mass;
        }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) ref.cos_values[i] = jobs[i].get();
    return ref;
}

ReferenceStats logconcave_reference(double lambda, const std::vector<CosProbe>& probes,
                                    const ReferenceConfig& cfg) {
    const double sl = std::sqrt(lambda);
    OuterIntegrand f;
    // Outer variable is theta2; theta1 | theta2 ~ N(theta2/sqrt(lambda), 10/lambda).
    f.weight = [](double u) { return std::exp(-std::pow(u, 4) / 20.0); };
    f.moments = [sl, lambda](double u, double out[5]) {
        out[0] = u / sl;
        out[1] = u;
        out[2] = (u * u + 10.0) / lambda;
        out[3] = u * u / sl;
        out[4] = u * u;
    };
    f.cosine = [sl, lambda](double u, const CosProbe& p) {
        const double w1 = p.omega[0];
        return std::exp(-5.0 * w1 * w1 / lambda) *
               std::cos(w1 * u / sl + p.omega[1] * u + p.b);
    };
    return integrate_reference(f, cfg.logconcave_lo, cfg.logconcave_hi, cfg.points, probes);
}

ReferenceStats rosenbrock_reference(double lambda, const std::vector<CosProbe>& probes,
                                    const ReferenceConfig& cfg) {
    OuterIntegrand f;
    // Outer variable is theta1; theta2 | theta1 ~ N(theta1^2, 10/lambda).
    f.weight = [](double s) { return std::exp(-std::pow(1.0 - s, 2) / 20.0); };
    f.moments = [lambda](double s, double out[5]) {
        const double s2 = s * s;
        out[0] = s;
        out[1] = s2;
        out[2] = s2;
        out[3] = s2 * s;
        out[4] = s2 * s2 + 10.0 / lambda;
    };
    f.cosine = [lambda](double s, const CosProbe& p) {
        const double w2 = p.omega[1];
        return std::exp(-5.0 * w2 * w2 / lambda) *
               std::cos(w2 * s * s + p.omega[0] * s + p.b);
    };
    ReferenceStats ref =
        integrate_reference(f, cfg.rosenbrock_lo, cfg.rosenbrock_hi, cfg.points, probes);

    // The mean and covariance also have closed forms; a disagreement means
    // the quadrature drifted.
    const Eigen::Vector2d mean_exact(1.0, 11.0);
    Eigen::Matrix2d cov_exact;
    cov_exact << 10.0, 20.0, 20.0, 10.0 / lambda + 240.0;
    if ((ref.mean - mean_exact).norm() > 1e-3 * mean_exact.norm() ||
        (ref.cov - cov_exact).norm() > 1e-3 * cov_exact.norm()) {
        throw FlowError("rosenbrock reference: integrated moments disagree with the closed form");
    }
    return ref;
}

} // namespace

ReferenceStats reference_statistics(const TargetModel& target, const std::vector<CosProbe>& probes,
                                    const ReferenceConfig& cfg) {
    if (probes.size() != kProbeCount) {
        throw ArgumentError("reference statistics: expected exactly 20 probes");
    }
    switch (target.kind()) {
        case TargetKind::gaussian:
            return summary_stats(GaussianMoments{target.gaussian_mean(), target.gaussian_cov()},
                                 probes);
        case TargetKind::logconcave:
            return logconcave_reference(target.lambda(), probes, cfg);
        case TargetKind::rosenbrock:
            return rosenbrock_reference(target.lambda(), probes, cfg);
        default:
            throw ArgumentError("reference statistics: no reference for target kind '" +
                                to_string(target.kind()) + "'");
    }
}

std::filesystem::path reference_cache_dir() {
    if (const char* env = std::getenv("FLOWSAMPLER_CACHE")) {
        return std::filesystem::path(env);
    }
    if (const char* xdg = std::getenv("XDG_CACHE_HOME")) {
        return std::filesystem::path(xdg) / "flowsampler";
    }
    if (const char* home = std::getenv("HOME")) {
        return std::filesystem::path(home) / ".cache" / "flowsampler";
    }
    return std::filesystem::path(".flowsampler-cache");
}

namespace {

std::string cache_key(const TargetModel& target, std::uint64_t probe_seed, long points) {
    std::ostringstream name;
    name << "ref_" << to_string(target.kind()) << "_lambda" << target.lambda() << "_probes"
         << probe_seed << "_n" << points << ".json";
    return name.str();
}

} // namespace

ReferenceStats reference_statistics_cached(const TargetModel& target,
                                           const std::vector<CosProbe>& probes,
                                           std::uint64_t probe_seed, const ReferenceConfig& cfg,
                                           const std::filesystem::path& cache_dir) {
    using nlohmann::json;
    const std::filesystem::path file = cache_dir / cache_key(target, probe_seed, cfg.points);

    if (std::filesystem::exists(file)) {
        std::ifstream in(file);
        json j;
        in >> j;
        const auto mean = j.at("mean").get<std::vector<double>>();
        const auto cov = j.at("cov").get<std::vector<double>>();
        const auto cosv = j.at("cos").get<std::vector<double>>();
        const int n = static_cast<int>(mean.size());
        ReferenceStats ref;
        ref.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), n);
        ref.cov = Eigen::Map<const Eigen::MatrixXd>(cov.data(), n, n);
        ref.cos_values = cosv;
        return ref;
    }

    const ReferenceStats ref = reference_statistics(target, probes, cfg);
    std::filesystem::create_directories(cache_dir);
    json j;
    j["kind"] = to_string(target.kind());
    j["lambda"] = target.lambda();
    j["probe_seed"] = probe_seed;
    j["points"] = cfg.points;
    j["mean"] = std::vector<double>(ref.mean.data(), ref.mean.data() + ref.mean.size());
    j["cov"] = std::vector<double>(ref.cov.data(), ref.cov.data() + ref.cov.size());
    j["cos"] = ref.cos_values;
    std::ofstream out(file);
    out << j.dump(2) << "\n";
    return ref;
}

ErrorReport error_report(const SummaryStats& stats, const ReferenceStats& reference) {
    if (stats.mean.size() != reference.mean.size() ||
        stats.cos_values.size() != reference.cos_values.size()) {
        throw ArgumentError("error report: statistics and reference do not match "
                            "(dimension or probe list)");
    }
    ErrorReport r;
    r.mean_err = (stats.mean - reference.mean).norm();
    r.cov_rel_err = (stats.cov - reference.cov).norm() / reference.cov.norm();
    double acc = 0.0;
    for (std::size_t i = 0; i < stats.cos_values.size(); ++i) {
        acc += std::abs(stats.cos_values[i] - reference.cos_values[i]);
    }
    r.cos_err = stats.cos_values.empty() ? 0.0 : acc / stats.cos_values.size();
    return r;
}

} // namespace flowsampler

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "flowsampler/moments.hpp"
#include "flowsampler/particle_flows.hpp"
#include "flowsampler/targets.hpp"

namespace flowsampler {

/// One cosine probe: reported statistic is E[cos(omega^T theta + b)].
struct CosProbe {
    Eigen::VectorXd omega;
    double b;
};

inline constexpr int kProbeCount = 20;

/// The fixed probe set of an experiment: 20 draws of omega ~ N(0, I),
/// b ~ Uniform(0, 2pi) from the probe seed.
std::vector<CosProbe> draw_probes(int dim, std::uint64_t probe_seed);

struct SummaryStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::vector<double> cos_values; // one per probe
};

/// Reference statistics share the summary layout.
using ReferenceStats = SummaryStats;

/// exp(-omega^T C omega / 2) cos(omega^T m + b).
double gaussian_cos_expectation(const GaussianMoments& g, const CosProbe& probe);

SummaryStats summary_stats(const Ensemble& e, const std::vector<CosProbe>& probes);
SummaryStats summary_stats(const GaussianMoments& g, const std::vector<CosProbe>& probes);

/// Reference integration knobs. The defaults reproduce the benchmark values:
/// one coordinate is integrated analytically, the midpoint rule with `points`
/// uniform nodes handles the remaining 1D integral on the stated interval.
struct ReferenceConfig {
    long points = 10'000'000;
    double logconcave_lo = -30.0;
    double logconcave_hi = 30.0;
    double rosenbrock_lo = -40.0;
    double rosenbrock_hi = 42.0;
};

/// Ground-truth mean, covariance and cosine expectations for the gaussian,
/// logconcave and rosenbrock kinds.
ReferenceStats reference_statistics(const TargetModel& target, const std::vector<CosProbe>& probes,
                                    const ReferenceConfig& cfg = {});

/// Cache directory: $FLOWSAMPLER_CACHE, else $XDG_CACHE_HOME/flowsampler,
/// else $HOME/.cache/flowsampler, else ./.flowsampler-cache.
std::filesystem::path reference_cache_dir();

/// Disk-cached variant, keyed by (kind, lambda, probe seed, point count).
ReferenceStats reference_statistics_cached(const TargetModel& target,
                                           const std::vector<CosProbe>& probes,
                                           std::uint64_t probe_seed,
                                           const ReferenceConfig& cfg = {},
                                           const std::filesystem::path& cache_dir =
                                               reference_cache_dir());

struct ErrorReport {
    double mean_err;    // ||m - m_ref||_2
    double cov_rel_err; // ||C - C_ref||_F / ||C_ref||_F
    double cos_err;     // mean |E cos - ref| over the probes
};

ErrorReport error_report(const SummaryStats& stats, const ReferenceStats& reference);

} // namespace flowsampler

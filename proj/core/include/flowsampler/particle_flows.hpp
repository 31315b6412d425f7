#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "flowsampler/moments.hpp"
#include "flowsampler/rng.hpp"
#include "flowsampler/targets.hpp"

namespace flowsampler {

/// J particles in R^N, one per row.
struct Ensemble {
    Eigen::MatrixXd particles;

    int count() const { return static_cast<int>(particles.rows()); }
    int dim() const { return static_cast<int>(particles.cols()); }
};

/// Population mean and covariance (1/J normalization). Requires J >= 2.
GaussianMoments empirical_moments(const Ensemble& e);

/// Median-heuristic bandwidth h = med^2 / log(J+1), where med is the median
/// Euclidean distance over the J(J-1)/2 distinct pairs (self-pairs excluded;
/// even counts take the lower middle value). Returns 0 when all particles
/// coincide; kernel consumers treat that as an error.
double median_bandwidth(const Ensemble& e);

/// Symmetric square root of an SPD matrix via eigendecomposition.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& C);

enum class ParticleFlowKind { langevin, ai_langevin, svgd, ai_svgd };

ParticleFlowKind particle_flow_from_name(const std::string& name);
std::string to_string(ParticleFlowKind kind);

enum class KernelFamily { median_gaussian, covariance_gaussian };

KernelFamily kernel_family_from_name(const std::string& name);
std::string to_string(KernelFamily family);

/// Kernel family plus a multiplier on its normalization-constant rule
/// (1 = the standard scaling; 0 gives the degenerate zero kernel).
struct KernelSpec {
    KernelFamily family = KernelFamily::median_gaussian;
    double scale_factor = 1.0;
};

/// The interaction kernel each flow uses unless the caller overrides it.
inline KernelSpec default_kernel(ParticleFlowKind kind) {
    if (kind == ParticleFlowKind::ai_svgd) {
        return {KernelFamily::covariance_gaussian, 1.0};
    }
    return {KernelFamily::median_gaussian, 1.0};
}

struct SdeConfig {
    double dt = 0.01;
    int steps = 1500;
    std::uint64_t seed = 0;
    ParticleFlowKind flow = ParticleFlowKind::langevin;
};

/// Counter-based noise stream state; flow_step advances the counter once per
/// call so per-particle draws are reproducible under any parallel schedule.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t counter = 1;
};

/// One step of the configured dynamics: forward Euler for the deterministic
/// kernel flows, Euler-Maruyama for the stochastic ones. The input ensemble
/// is never mutated.
Ensemble flow_step(const Ensemble& e, const TargetModel& target, const SdeConfig& cfg,
                   const KernelSpec& kernel, RngState& rng);

struct KernelCheck {
    double estimate;
    double std_error;
};

/// Monte-Carlo estimate of the kernel's double Gaussian integral
/// with paired independent draws from N(m, C); the standard scaling makes
/// the exact value 1. For the median kernel the bandwidth matrix is replaced
/// by N*C/log(J+1), which has a closed-form integral. `ensemble_size` is the
/// J entering the scaling constants.
KernelCheck kernel_normalization_check(const KernelSpec& kernel, const GaussianMoments& g,
                                       int samples, std::uint64_t seed, int ensemble_size);

/// J i.i.d. draws from N(g.mean, g.cov) on the seed's init stream (counter 0).
Ensemble sample_gaussian_ensemble(const GaussianMoments& g, int count, std::uint64_t seed);

} // namespace flowsampler

#include "flowsampler/particle_flows.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace flowsampler {

GaussianMoments empirical_moments(const Ensemble& e) {
    if (e.count() < 2) {
        throw ArgumentError("empirical moments: need at least 2 particles for a covariance");
    }
    const double j = static_cast<double>(e.count());
    GaussianMoments g;
    g.mean = e.particles.colwise().mean();
    const Eigen::MatrixXd centered = e.particles.rowwise() - g.mean.transpose();
    g.cov = symmetrize(centered.transpose() * centered / j);
    return g;
}

double median_bandwidth(const Ensemble& e) {
    const int j = e.count();
    if (j < 2) {
        throw ArgumentError("median bandwidth: need at least 2 particles");
    }
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(j) * (j - 1) / 2);
    for (int a = 0; a < j; ++a) {
        for (int b = a + 1; b < j; ++b) {
            dist.push_back((e.particles.row(a) - e.particles.row(b)).norm());
        }
    }
    // Lower-median convention: index (M-1)/2 covers both parities.
    const std::size_t mid = (dist.size() - 1) / 2;
    std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
    const double med = dist[mid];
    return med * med / std::log(static_cast<double>(j) + 1.0);
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& C) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(C));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
        throw DecompositionError("spd sqrt: matrix is not symmetric positive definite");
    }
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

ParticleFlowKind particle_flow_from_name(const std::string& name) {
    if (name == "langevin") return ParticleFlowKind::langevin;
    if (name == "ai_langevin") return ParticleFlowKind::ai_langevin;
    if (name == "svgd") return ParticleFlowKind::svgd;
    if (name == "ai_svgd") return ParticleFlowKind::ai_svgd;
    throw ArgumentError("unknown particle flow: " + name);
}

std::string to_string(ParticleFlowKind kind) {
    switch (kind) {
        case ParticleFlowKind::langevin: return "langevin";
        case ParticleFlowKind::ai_langevin: return "ai_langevin";
        case ParticleFlowKind::svgd: return "svgd";
        case ParticleFlowKind::ai_svgd: return "ai_svgd";
    }
    return "unknown";
}

KernelFamily kernel_family_from_name(const std::string& name) {
    if (name == "median_gaussian") return KernelFamily::median_gaussian;
    if (name == "covariance_gaussian") return KernelFamily::covariance_gaussian;
    throw ArgumentError("unknown kernel family: " + name);
}

std::string to_string(KernelFamily family) {
    return family == KernelFamily::median_gaussian ? "median_gaussian" : "covariance_gaussian";
}

namespace {

double median_kernel_scale(const KernelSpec& kernel, int j, int n) {
    return kernel.scale_factor *
           std::pow(1.0 + 4.0 * std::log(static_cast<double>(j) + 1.0) / n, 0.5 * n);
}

double covariance_kernel_scale(const KernelSpec& kernel, int n) {
    return kernel.scale_factor * std::pow(3.0, 0.5 * n);
}

Eigen::MatrixXd gradient_matrix(const Ensemble& e, const TargetModel& target) {
    Eigen::MatrixXd g(e.count(), e.dim());
    for (int i = 0; i < e.count(); ++i) {
        g.row(i) = target.grad_log_density(e.particles.row(i));
    }
    return g;
}

void check_finite(const Eigen::MatrixXd& particles) {
    if (particles.allFinite()) return;
    for (int i = 0; i < particles.rows(); ++i) {
        if (!particles.row(i).allFinite()) {
            throw DivergenceError("particle update diverged at particle " + std::to_string(i), i);
        }
    }
}

// Kernel-transport drift shared by svgd and ai_svgd. `precondition` applies
// the empirical covariance to both the transported gradients and the
// repulsion, which is what makes the dynamics affine invariant.
Eigen::MatrixXd kernel_drift(const Ensemble& e, const Eigen::MatrixXd& grads,
                             const KernelSpec& kernel, bool precondition) {
    const int j = e.count();
    const int n = e.dim();
    const Eigen::MatrixXd& x = e.particles;

    if (j == 1) {
        // Self-interaction only: the kernel gradient vanishes and the drift
        // degenerates to (preconditioned) gradient ascent times the scale.
        const double scale = kernel.family == KernelFamily::median_gaussian
                                 ? median_kernel_scale(kernel, j, n)
                                 : covariance_kernel_scale(kernel, n);
        if (precondition) {
            throw ArgumentError("particle flow: covariance preconditioning needs J >= dim+1");
        }
        return scale * grads;
    }

    Eigen::MatrixXd cov;
    Eigen::LLT<Eigen::MatrixXd> cov_llt;
    const bool needs_cov =
        precondition || kernel.family == KernelFamily::covariance_gaussian;
    if (needs_cov) {
        if (j < n + 1) {
            throw ArgumentError("particle flow: covariance preconditioning needs J >= dim+1");
        }
        cov = empirical_moments(e).cov;
        cov_llt.compute(cov);
        if (cov_llt.info() != Eigen::Success) {
            throw DecompositionError("particle flow: empirical covariance is not SPD");
        }
    }

    Eigen::MatrixXd k(j, j);
    double inv_bandwidth = 0.0;
    if (kernel.family == KernelFamily::median_gaussian) {
        const double h = median_bandwidth(e);
        if (h <= 0.0) {
            throw KernelError("particle flow: degenerate bandwidth (all particles coincide)");
        }
        inv_bandwidth = 1.0 / h;
        const Eigen::VectorXd sq = x.rowwise().squaredNorm();
        const Eigen::MatrixXd d2 = sq.replicate(1, j) + sq.transpose().replicate(j, 1) -
                                   2.0 * x * x.transpose();
        k = (-d2.cwiseMax(0.0) * inv_bandwidth).array().exp() *
            median_kernel_scale(kernel, j, n);
    } else {
        const Eigen::MatrixXd w = cov_llt.solve(x.transpose()).transpose(); // rows C^{-1} x_i
        const Eigen::MatrixXd q = x * w.transpose();                        // x_i^T C^{-1} x_j
        const Eigen::VectorXd diag = q.diagonal();
        const Eigen::MatrixXd d2 = diag.replicate(1, j) + diag.transpose().replicate(j, 1) -
                                   (q + q.transpose());
        k = (-0.5 * d2.cwiseMax(0.0)).array().exp() * covariance_kernel_scale(kernel, n);
    }

    const Eigen::VectorXd row_sums = k.rowwise().sum();
    const Eigen::MatrixXd pull = row_sums.asDiagonal() * x - k * x; // sum_j k_ij (x_i - x_j)

    Eigen::MatrixXd transported = k * grads;
    Eigen::MatrixXd repulsion;
    if (kernel.family == KernelFamily::median_gaussian) {
        repulsion = 2.0 * inv_bandwidth * pull;
        if (precondition) repulsion = repulsion * cov;
    } else {
        // grad' kappa = kappa C^{-1}(x_i - x_j); preconditioning by C cancels it.
        repulsion = precondition ? pull : cov_llt.solve(pull.transpose()).transpose();
    }
    if (precondition) transported = transported * cov;

    return (transported + repulsion) / static_cast<double>(j);
}

} // namespace

Ensemble flow_step(const Ensemble& e, const TargetModel& target, const SdeConfig& cfg,
                   const KernelSpec& kernel, RngState& rng) {
    const int j = e.count();
    const int n = e.dim();
    if (j < 1) throw ArgumentError("particle flow: empty ensemble");
    if (target.dim() != n) throw ArgumentError("particle flow: target dimension mismatch");
    if (cfg.dt <= 0.0) throw ArgumentError("particle flow: dt must be positive");

    const Eigen::MatrixXd grads = gradient_matrix(e, target);
    const std::uint64_t counter = rng.counter++;

    Ensemble next;
    switch (cfg.flow) {
        case ParticleFlowKind::langevin: {
            Eigen::MatrixXd noise(j, n);
            for (int i = 0; i < j; ++i) {
                noise.row(i) = particle_noise(rng.seed, counter, i, n);
            }
            next.particles =
                e.particles + cfg.dt * grads + std::sqrt(2.0 * cfg.dt) * noise;
            break;
        }
        case ParticleFlowKind::ai_langevin: {
            if (j < n + 1) {
                throw ArgumentError("particle flow: covariance preconditioning needs J >= dim+1");
            }
            const Eigen::MatrixXd cov = empirical_moments(e).cov;
            const Eigen::MatrixXd noise_factor = spd_sqrt(2.0 * cov);
            Eigen::MatrixXd noise(j, n);
            for (int i = 0; i < j; ++i) {
                noise.row(i) = particle_noise(rng.seed, counter, i, n);
            }
            next.particles = e.particles + cfg.dt * grads * cov +
                             std::sqrt(cfg.dt) * noise * noise_factor;
            break;
        }
        case ParticleFlowKind::svgd:
            next.particles = e.particles + cfg.dt * kernel_drift(e, grads, kernel, false);
            break;
        case ParticleFlowKind::ai_svgd:
            next.particles = e.particles + cfg.dt * kernel_drift(e, grads, kernel, true);
            break;
    }
    check_finite(next.particles);
    return next;
}

KernelCheck kernel_normalization_check(const KernelSpec& kernel, const GaussianMoments& g,
                                       int samples, std::uint64_t seed, int ensemble_size) {
    if (samples < 1000) {
        throw ArgumentError("kernel normalization check: need at least 1000 samples");
    }
    validate_moments(g, "kernel normalization check");
    const int n = g.dim();
    const Eigen::MatrixXd L = cholesky_spd(g.cov, "kernel check covariance").matrixL();

    double scale = 0.0;
    double exponent_factor = 0.0; // kappa = scale * exp(-exponent_factor * |z - z'|^2)
    if (kernel.family == KernelFamily::median_gaussian) {
        scale = median_kernel_scale(kernel, ensemble_size, n);
        exponent_factor = std::log(static_cast<double>(ensemble_size) + 1.0) / n;
    } else {
        scale = covariance_kernel_scale(kernel, n);
        exponent_factor = 0.5;
    }

    // With theta = m + L z the quadratic form (theta-theta')^T C^{-1} (theta-theta')
    // reduces to |z - z'|^2, so only the whitened draws are needed.
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < samples; ++i) {
        RandomStream stream(rng::mix(seed, 0x6b65726e656cULL, static_cast<std::uint64_t>(i)));
        const Eigen::VectorXd z1 = stream.normal_vector(n);
        const Eigen::VectorXd z2 = stream.normal_vector(n);
        const double value = scale * std::exp(-exponent_factor * (z1 - z2).squaredNorm());
        sum += value;
        sum_sq += value * value;
    }
    const double mean = sum / samples;
    const double var = std::max(0.0, sum_sq / samples - mean * mean);
    return {mean, std::sqrt(var / samples)};
}

Ensemble sample_gaussian_ensemble(const GaussianMoments& g, int count, std::uint64_t seed) {
    if (count < 1) throw ArgumentError("ensemble sampling: need at least one particle");
    validate_moments(g, "ensemble sampling");
    const Eigen::MatrixXd L = cholesky_spd(g.cov, "ensemble sampling covariance").matrixL();
    Ensemble e;
    e.particles.resize(count, g.dim());
    for (int i = 0; i < count; ++i) {
        const Eigen::VectorXd z = particle_noise(seed, 0, i, g.dim());
        e.particles.row(i) = g.mean + L * z;
    }
    return e;
}

} // namespace flowsampler

#pragma once

#include <Eigen/Dense>

#include "flowsampler/errors.hpp"

namespace flowsampler {

/// Mean and SPD covariance: the state of every Gaussian approximate flow.
struct GaussianMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    int dim() const { return static_cast<int>(mean.size()); }
};

/// Cholesky with a readable failure. `what` names the offending matrix.
inline Eigen::LLT<Eigen::MatrixXd> cholesky_spd(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw DecompositionError(std::string(what) + ": matrix is not symmetric positive definite");
    }
    return llt;
}

/// Symmetry to 1e-12 (relative) and SPD via Cholesky.
inline void validate_moments(const GaussianMoments& g, const char* what = "moments") {
    if (g.cov.rows() != g.dim() || g.cov.cols() != g.dim()) {
        throw ArgumentError(std::string(what) + ": covariance shape does not match mean dimension");
    }
    const double scale = std::max(1.0, g.cov.cwiseAbs().maxCoeff());
    if ((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ArgumentError(std::string(what) + ": covariance is not symmetric");
    }
    cholesky_spd(g.cov, what);
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

} // namespace flowsampler

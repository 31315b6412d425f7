#pragma once

#include <Eigen/Dense>

#include "flowsampler/moments.hpp"

namespace flowsampler {

/// Nodes (rows) and weights of a Gaussian quadrature rule.
struct QuadratureRule {
    Eigen::MatrixXd points;  // (node count) x dim
    Eigen::VectorXd weights; // sums to 1

    int count() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }
};

/// 2N+1 sigma points of the unscented transform for N(m, C):
///   {m} and {m +- sqrt(N + kappa) * L_i}, L L^T = C,
/// with weights kappa/(N+kappa) and 1/(2(N+kappa)).
/// Exact for all polynomials of total degree <= 3 under N(m, C).
QuadratureRule unscented_rule(const GaussianMoments& g, double kappa);

/// Default spread: kappa = 3 - N, which also matches the Gaussian fourth
/// moment along each axis.
inline double default_unscented_kappa(int dim) { return 3.0 - static_cast<double>(dim); }

/// n-point Gauss-Hermite rule transformed to N(mean, var), 1D.
QuadratureRule gauss_hermite_rule(double mean, double var, int n);

} // namespace flowsampler

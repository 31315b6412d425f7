#include "flowsampler/quadrature.hpp"

#include <cmath>

namespace flowsampler {

QuadratureRule unscented_rule(const GaussianMoments& g, double kappa) {
    const int n = g.dim();
    const double scale = static_cast<double>(n) + kappa;
    if (scale <= 0.0) {
        throw ArgumentError("unscented rule: need dim + kappa > 0");
    }
    validate_moments(g, "unscented rule");
    const Eigen::MatrixXd L = cholesky_spd(g.cov, "unscented rule covariance").matrixL();

    QuadratureRule rule;
    rule.points.resize(2 * n + 1, n);
    rule.weights.resize(2 * n + 1);
    rule.points.row(0) = g.mean;
    rule.weights[0] = kappa / scale;
    const double spread = std::sqrt(scale);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd offset = spread * L.col(i);
        rule.points.row(1 + 2 * i) = g.mean + offset;
        rule.points.row(2 + 2 * i) = g.mean - offset;
        rule.weights[1 + 2 * i] = 0.5 / scale;
        rule.weights[2 + 2 * i] = 0.5 / scale;
    }
    return rule;
}

// Golub-Welsch on the Hermite Jacobi matrix; weights from the first
// eigenvector components.
QuadratureRule gauss_hermite_rule(double mean, double var, int n) {
    if (n < 1) throw ArgumentError("gauss-hermite rule: need at least one node");
    if (var <= 0.0) throw ArgumentError("gauss-hermite rule: variance must be positive");

    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = std::sqrt(0.5 * k);
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success) {
        throw DecompositionError("gauss-hermite rule: eigen decomposition failed");
    }

    // Physicists' nodes x with weight e^{-x^2}; map theta = mean + sqrt(2 var) x.
    QuadratureRule rule;
    rule.points.resize(n, 1);
    rule.weights.resize(n);
    const double width = std::sqrt(2.0 * var);
    for (int i = 0; i < n; ++i) {
        rule.points(i, 0) = mean + width * es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0; // already normalized: sum of squares is 1
    }
    return rule;
}

} // namespace flowsampler

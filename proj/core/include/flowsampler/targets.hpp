#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowsampler/errors.hpp"

namespace flowsampler {

enum class TargetKind { gaussian, logconcave, rosenbrock, polynomial_even, custom };

std::string to_string(TargetKind kind);

/// An unnormalized target density exp(-phi(theta)) with analytic derivatives.
///
/// The API exposes log-density values only up to the (unknown) normalization
/// constant; nothing in this library ever needs that constant.
class TargetModel {
public:
    using ValueFn = std::function<double(const Eigen::VectorXd&)>;
    using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
    using HessFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

    /// 2D benchmark: phi(theta) = (theta1^2 + lambda*theta2^2) / 2.
    static TargetModel gaussian_benchmark(double lambda);

    /// General Gaussian N(mean, cov); cov must be SPD.
    static TargetModel gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    /// 2D benchmark: phi = (sqrt(lambda)*theta1 - theta2)^2/20 + theta2^4/20.
    static TargetModel logconcave(double lambda);

    /// 2D benchmark: phi = lambda*(theta2 - theta1^2)^2/20 + (1 - theta1)^2/20.
    static TargetModel rosenbrock(double lambda);

    /// 1D even polynomial phi = sum_k a_{2k} theta^{2k} with the
    /// slow-convergence coefficients for the given K.
    static TargetModel polynomial_even(int K);

    /// 1D even polynomial with explicit coefficients a_{2k}, k = 1..n.
    /// The leading coefficient must be positive (integrability).
    static TargetModel polynomial_even(std::vector<double> even_coefficients);

    /// User-supplied callables for phi, grad phi and (optionally) hess phi.
    static TargetModel custom(int dim, ValueFn phi, GradFn grad_phi, HessFn hess_phi = nullptr);

    int dim() const { return dim_; }
    TargetKind kind() const { return kind_; }
    bool has_hessian() const { return static_cast<bool>(hess_phi_); }

    /// Anisotropy parameter of the 2D benchmarks; NaN for other kinds.
    double lambda() const { return lambda_; }

    /// Exact mean / covariance, available for the gaussian kind only.
    const Eigen::VectorXd& gaussian_mean() const;
    const Eigen::MatrixXd& gaussian_cov() const;

    /// -phi(theta). Never includes a normalization constant.
    double log_density_unnorm(const Eigen::VectorXd& theta) const;

    /// -grad phi(theta), analytic for the built-in kinds.
    Eigen::VectorXd grad_log_density(const Eigen::VectorXd& theta) const;

    /// -hess phi(theta), symmetric. Throws UnsupportedError for custom
    /// targets without a Hessian callable.
    Eigen::MatrixXd hess_log_density(const Eigen::VectorXd& theta) const;

    /// Image of this target under theta -> A*theta + b (A invertible).
    /// Returned as a custom-kind target; the constant log|det A| offset is
    /// dropped since densities are unnormalized anyway.
    TargetModel pushforward(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const;

private:
    TargetModel(TargetKind kind, int dim, ValueFn phi, GradFn grad, HessFn hess)
        : kind_(kind), dim_(dim), phi_(std::move(phi)),
          grad_phi_(std::move(grad)), hess_phi_(std::move(hess)) {}

    void check_dim(const Eigen::VectorXd& theta) const;

    TargetKind kind_;
    int dim_;
    ValueFn phi_;
    GradFn grad_phi_;
    HessFn hess_phi_;
    double lambda_ = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd gaussian_mean_;
    Eigen::MatrixXd gaussian_cov_;
};

/// Coefficients a_{2k}, k = 1..2K+1, chosen so that the induced
/// f(C) = sum_k 2k(2k-1) a_{2k} C^{k-1} (2k-3)!! satisfies
/// 1 - f(C)*C = -(C-1)^{2K+1} identically.
std::vector<double> counterexample_coefficients(int K);

} // namespace flowsampler

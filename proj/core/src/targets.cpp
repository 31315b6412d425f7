#include "flowsampler/targets.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "flowsampler/moments.hpp"

namespace flowsampler {

std::string to_string(TargetKind kind) {
    switch (kind) {
        case TargetKind::gaussian: return "gaussian";
        case TargetKind::logconcave: return "logconcave";
        case TargetKind::rosenbrock: return "rosenbrock";
        case TargetKind::polynomial_even: return "polynomial_even";
        case TargetKind::custom: return "custom";
    }
    return "unknown";
}

void TargetModel::check_dim(const Eigen::VectorXd& theta) const {
    if (theta.size() != dim_) {
        throw ArgumentError("target: point has dimension " + std::to_string(theta.size()) +
                            ", expected " + std::to_string(dim_));
    }
}

double TargetModel::log_density_unnorm(const Eigen::VectorXd& theta) const {
    check_dim(theta);
    return -phi_(theta);
}

Eigen::VectorXd TargetModel::grad_log_density(const Eigen::VectorXd& theta) const {
    check_dim(theta);
    return -grad_phi_(theta);
}

Eigen::MatrixXd TargetModel::hess_log_density(const Eigen::VectorXd& theta) const {
    check_dim(theta);
    if (!hess_phi_) {
        throw UnsupportedError("target: custom target has no Hessian; use the gradient-based "
                               "Hessian estimator instead");
    }
    return -hess_phi_(theta);
}

const Eigen::VectorXd& TargetModel::gaussian_mean() const {
    if (kind_ != TargetKind::gaussian) {
        throw UnsupportedError("target: exact mean is only defined for the gaussian kind");
    }
    return gaussian_mean_;
}

const Eigen::MatrixXd& TargetModel::gaussian_cov() const {
    if (kind_ != TargetKind::gaussian) {
        throw UnsupportedError("target: exact covariance is only defined for the gaussian kind");
    }
    return gaussian_cov_;
}

TargetModel TargetModel::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    const int n = static_cast<int>(mean.size());
    if (cov.rows() != n || cov.cols() != n) {
        throw ArgumentError("gaussian target: covariance shape does not match mean");
    }
    auto llt = cholesky_spd(cov, "gaussian target covariance");
    Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(n, n));
    precision = symmetrize(precision);

    Eigen::VectorXd m = mean;
    TargetModel t(TargetKind::gaussian, n,
        [m, precision](const Eigen::VectorXd& x) {
            const Eigen::VectorXd d = x - m;
            return 0.5 * d.dot(precision * d);
        },
        [m, precision](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return precision * (x - m);
        },
        [precision](const Eigen::VectorXd&) -> Eigen::MatrixXd { return precision; });
    t.gaussian_mean_ = std::move(mean);
    t.gaussian_cov_ = std::move(cov);
    return t;
}

TargetModel TargetModel::gaussian_benchmark(double lambda) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = 1.0;
    cov(1, 1) = 1.0 / lambda;
    TargetModel t = gaussian(Eigen::VectorXd::Zero(2), std::move(cov));
    t.lambda_ = lambda;
    return t;
}

TargetModel TargetModel::logconcave(double lambda) {
    const double s = std::sqrt(lambda);
    TargetModel t(TargetKind::logconcave, 2,
        [s](const Eigen::VectorXd& x) {
            const double r = s * x[0] - x[1];
            return r * r / 20.0 + std::pow(x[1], 4) / 20.0;
        },
        [s](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            const double r = s * x[0] - x[1];
            Eigen::VectorXd g(2);
            g[0] = s * r / 10.0;
            g[1] = -r / 10.0 + std::pow(x[1], 3) / 5.0;
            return g;
        },
        [s](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
            Eigen::MatrixXd h(2, 2);
            h(0, 0) = s * s / 10.0;
            h(0, 1) = h(1, 0) = -s / 10.0;
            h(1, 1) = 0.1 + 0.6 * x[1] * x[1];
            return h;
        });
    t.lambda_ = lambda;
    return t;
}

TargetModel TargetModel::rosenbrock(double lambda) {
    TargetModel t(TargetKind::rosenbrock, 2,
        [lambda](const Eigen::VectorXd& x) {
            const double s = x[1] - x[0] * x[0];
            const double u = 1.0 - x[0];
            return lambda * s * s / 20.0 + u * u / 20.0;
        },
        [lambda](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            const double s = x[1] - x[0] * x[0];
            Eigen::VectorXd g(2);
            g[0] = -lambda * x[0] * s / 5.0 - (1.0 - x[0]) / 10.0;
            g[1] = lambda * s / 10.0;
            return g;
        },
        [lambda](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
            const double s = x[1] - x[0] * x[0];
            Eigen::MatrixXd h(2, 2);
            h(0, 0) = -lambda * (s - 2.0 * x[0] * x[0]) / 5.0 + 0.1;
            h(0, 1) = h(1, 0) = -lambda * x[0] / 5.0;
            h(1, 1) = lambda / 10.0;
            return h;
        });
    t.lambda_ = lambda;
    return t;
}

TargetModel TargetModel::polynomial_even(std::vector<double> even_coefficients) {
    if (even_coefficients.empty()) {
        throw ArgumentError("polynomial target: need at least one coefficient");
    }
    if (even_coefficients.back() <= 0.0) {
        throw ArgumentError("polynomial target: leading coefficient must be positive");
    }
    auto a = std::move(even_coefficients); // a[k-1] multiplies theta^{2k}
    return TargetModel(TargetKind::polynomial_even, 1,
        [a](const Eigen::VectorXd& x) {
            const double t2 = x[0] * x[0];
            double p = 0.0;
            for (int k = static_cast<int>(a.size()); k >= 1; --k) p = (p + a[k - 1]) * t2;
            return p;
        },
        [a](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            const double t2 = x[0] * x[0];
            double p = 0.0;
            for (int k = static_cast<int>(a.size()); k >= 1; --k) {
                p = p * t2 + 2.0 * k * a[k - 1];
            }
            Eigen::VectorXd g(1);
            g[0] = p * x[0];
            return g;
        },
        [a](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
            const double t2 = x[0] * x[0];
            double p = 0.0;
            for (int k = static_cast<int>(a.size()); k >= 1; --k) {
                p = p * t2 + 2.0 * k * (2.0 * k - 1.0) * a[k - 1];
            }
            Eigen::MatrixXd h(1, 1);
            h(0, 0) = p;
            return h;
        });
}

TargetModel TargetModel::polynomial_even(int K) {
    return polynomial_even(counterexample_coefficients(K));
}

TargetModel TargetModel::custom(int dim, ValueFn phi, GradFn grad_phi, HessFn hess_phi) {
    if (dim < 1) throw ArgumentError("custom target: dimension must be positive");
    if (!phi || !grad_phi) throw ArgumentError("custom target: value and gradient are required");
    return TargetModel(TargetKind::custom, dim, std::move(phi), std::move(grad_phi),
                       std::move(hess_phi));
}

TargetModel TargetModel::pushforward(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) const {
    if (A.rows() != dim_ || A.cols() != dim_ || b.size() != dim_) {
        throw ArgumentError("pushforward: transform shape does not match target dimension");
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (std::abs(lu.determinant()) < 1e-300) {
        throw ArgumentError("pushforward: transform is singular");
    }
    const Eigen::MatrixXd Ainv = lu.inverse();
    const Eigen::VectorXd shift = b;
    const TargetModel base = *this;

    ValueFn phi = [base, Ainv, shift](const Eigen::VectorXd& x) {
        return -base.log_density_unnorm(Ainv * (x - shift));
    };
    GradFn grad = [base, Ainv, shift](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return -(Ainv.transpose() * base.grad_log_density(Ainv * (x - shift)));
    };
    HessFn hess = nullptr;
    if (has_hessian()) {
        hess = [base, Ainv, shift](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
            return -(Ainv.transpose() * base.hess_log_density(Ainv * (x - shift)) * Ainv);
        };
    }
    return TargetModel(TargetKind::custom, dim_, std::move(phi), std::move(grad), std::move(hess));
}

std::vector<double> counterexample_coefficients(int K) {
    if (K < 1) throw ArgumentError("counterexample coefficients: K must be >= 1");
    const int n = 2 * K + 1;
    // a_{2k} = binom(2K+1, k) (-1)^{2K+1-k} 2^{k-1} (k-1)! / (2k)!
    std::vector<double> a(n);
    for (int k = 1; k <= n; ++k) {
        double binom = 1.0;
        for (int i = 1; i <= k; ++i) binom *= static_cast<double>(n - k + i) / i;
        const double sign = ((n - k) % 2 == 0) ? 1.0 : -1.0;
        double fact_ratio = 1.0; // 2^{k-1} (k-1)! / (2k)!
        for (int i = 1; i <= k - 1; ++i) fact_ratio *= 2.0 * i;
        for (int i = 1; i <= 2 * k; ++i) fact_ratio /= i;
        a[k - 1] = binom * sign * fact_ratio;
    }
    return a;
}

} // namespace flowsampler

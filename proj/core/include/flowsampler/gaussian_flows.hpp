#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowsampler/moments.hpp"
#include "flowsampler/quadrature.hpp"
#include "flowsampler/targets.hpp"

namespace flowsampler {

/// How the expected log-density Hessian is formed.
///  - analytic:       average the target's Hessian at the quadrature nodes.
///  - stein_gradient: gradient-only form E[grad (theta - m)^T] C^{-1},
///                    symmetrized; exact whenever the gradient is linear.
enum class HessianMode { analytic, stein_gradient };

/// analytic if the target provides Hessians, stein_gradient otherwise.
inline HessianMode default_hessian_mode(const TargetModel& target) {
    return target.has_hessian() ? HessianMode::analytic : HessianMode::stein_gradient;
}

struct MomentExpectations {
    Eigen::VectorXd grad_log;  // E[grad log rho_post] under N(m, C)
    Eigen::MatrixXd hess_log;  // E[hess log rho_post] under N(m, C), symmetric
};

MomentExpectations gaussian_expectations(const GaussianMoments& g, const TargetModel& target,
                                         const QuadratureRule& rule, HessianMode mode);

/// One of the closed mean/covariance evolutions. The bilinear-kernel flow
/// carries its preconditioner and kernel coefficient rules; the fixed kinds
/// are hard-coded special cases of it.
class MomentFlow {
public:
    enum class Kind { fisher_rao, wasserstein, kalman_wasserstein, stein_bilinear, galy, vanilla };

    using MatrixRule = std::function<Eigen::MatrixXd(const GaussianMoments&)>;
    using ScalarRule = std::function<double(const GaussianMoments&)>;

    static MomentFlow fisher_rao() { return MomentFlow(Kind::fisher_rao); }
    static MomentFlow wasserstein() { return MomentFlow(Kind::wasserstein); }
    static MomentFlow kalman_wasserstein() { return MomentFlow(Kind::kalman_wasserstein); }
    static MomentFlow galy() { return MomentFlow(Kind::galy); }
    static MomentFlow vanilla() { return MomentFlow(Kind::vanilla); }

    /// Bilinear-kernel flow with preconditioner P(rho), kernel matrix A(rho)
    /// and offset b(rho). Requires b != 0 and A nonsingular at evaluation.
    static MomentFlow stein_bilinear(MatrixRule P, MatrixRule A, ScalarRule b);

    static MomentFlow from_name(const std::string& name);

    Kind kind() const { return kind_; }
    std::string name() const;

    const MatrixRule& preconditioner() const { return P_; }
    const MatrixRule& kernel_matrix() const { return A_; }
    const ScalarRule& kernel_offset() const { return b_; }

private:
    explicit MomentFlow(Kind kind) : kind_(kind) {}
    Kind kind_;
    MatrixRule P_;
    MatrixRule A_;
    ScalarRule b_;
};

struct MomentRhs {
    Eigen::VectorXd dm;
    Eigen::MatrixXd dC; // exactly symmetric
};

/// Right-hand side of the chosen flow at state g. `rule` must be built from g.
MomentRhs moment_flow_rhs(const MomentFlow& flow, const GaussianMoments& g,
                          const TargetModel& target, const QuadratureRule& rule,
                          HessianMode mode);

/// Time-stamped mean/covariance trajectory on the integration grid.
struct MomentPath {
    std::vector<double> times;
    std::vector<GaussianMoments> states;
};

/// Thrown when the SPD step guard runs out of halvings; carries the last
/// valid state.
class IntegrationError : public FlowError {
public:
    IntegrationError(const std::string& what, double t, GaussianMoments last)
        : FlowError(what), t_last(t), last_state(std::move(last)) {}
    double t_last;
    GaussianMoments last_state;
};

/// Classic RK4 with fixed grid step dt. A step whose result (or internal
/// stage) loses positive definiteness is rejected and retried at half the
/// step, up to 20 halvings. States are recorded at the original grid times.
/// Pass kappa = NaN for the default 3 - N.
MomentPath integrate_moment_flow(const MomentFlow& flow, const GaussianMoments& g0,
                                 const TargetModel& target, double dt, double t_end,
                                 double kappa, HessianMode mode);

/// Closed-form state of the covariance-preconditioned flow toward a Gaussian
/// target:
///   C_t^{-1} = C*^{-1} + e^{-t} (C_0^{-1} - C*^{-1})
///   m_t = m* + e^{-t} ((1-e^{-t}) C*^{-1} + e^{-t} C_0^{-1})^{-1} C_0^{-1} (m_0 - m*)
GaussianMoments analytic_fisher_rao_gaussian(const Eigen::VectorXd& m0, const Eigen::MatrixXd& C0,
                                             const Eigen::VectorXd& m_star,
                                             const Eigen::MatrixXd& C_star, double t);

/// Linearization of the 1D covariance-preconditioned flow at its fixed point.
/// A1, A2 are Hessian moments against (theta - m*) and (theta - m*)^2;
/// lambda1 <= -1 and lambda2 in [lambda1, 0) are the Jacobian eigenvalues.
struct JacobianSpectrum1D {
    double A1;
    double A2;
    double lambda1;
    double lambda2;
};

/// Gauss-Hermite evaluation of the spectrum at a stationary point g_star.
/// Preconditions: 1D target, flow RHS residual at g_star below 1e-8.
JacobianSpectrum1D jacobian_spectrum_1d(const TargetModel& target, const GaussianMoments& g_star,
                                        int quad_points = 200);

/// Stationary point of the 1D covariance-preconditioned flow: integrate to
/// t = 200 with dt = 1e-2, then Newton-polish the stationarity residual on
/// the Gauss-Hermite expectations.
GaussianMoments find_vi_fixed_point_1d(const TargetModel& target, const GaussianMoments& g0,
                                       int quad_points = 200);

/// CSV export: header t,m_1,...,m_N,c_11,c_12,...,c_NN with the covariance
/// written row-major.
void write_moment_csv(std::ostream& out, const MomentPath& path);

} // namespace flowsampler

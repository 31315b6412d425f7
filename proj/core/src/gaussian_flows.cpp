#include "flowsampler/gaussian_flows.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace flowsampler {

MomentExpectations gaussian_expectations(const GaussianMoments& g, const TargetModel& target,
                                         const QuadratureRule& rule, HessianMode mode) {
    const int n = g.dim();
    if (target.dim() != n) {
        throw ArgumentError("gaussian expectations: target dimension mismatch");
    }
    if (rule.dim() != n) {
        throw ArgumentError("gaussian expectations: rule dimension mismatch");
    }

    MomentExpectations out;
    out.grad_log = Eigen::VectorXd::Zero(n);
    out.hess_log = Eigen::MatrixXd::Zero(n, n);

    if (mode == HessianMode::analytic && !target.has_hessian()) {
        throw UnsupportedError("gaussian expectations: analytic mode needs a target Hessian");
    }

    Eigen::MatrixXd grad_outer = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < rule.count(); ++i) {
        const Eigen::VectorXd point = rule.points.row(i);
        const Eigen::VectorXd grad = target.grad_log_density(point);
        const double w = rule.weights[i];
        out.grad_log += w * grad;
        if (mode == HessianMode::analytic) {
            out.hess_log += w * target.hess_log_density(point);
        } else {
            grad_outer += w * grad * (point - g.mean).transpose();
        }
    }
    if (mode == HessianMode::stein_gradient) {
        auto llt = cholesky_spd(g.cov, "gaussian expectations covariance");
        out.hess_log = grad_outer * llt.solve(Eigen::MatrixXd::Identity(n, n));
    }
    out.hess_log = symmetrize(out.hess_log);
    return out;
}

MomentFlow MomentFlow::stein_bilinear(MatrixRule P, MatrixRule A, ScalarRule b) {
    if (!P || !A || !b) {
        throw ArgumentError("stein_bilinear flow: preconditioner and kernel rules are required");
    }
    MomentFlow flow(Kind::stein_bilinear);
    flow.P_ = std::move(P);
    flow.A_ = std::move(A);
    flow.b_ = std::move(b);
    return flow;
}

std::string MomentFlow::name() const {
    switch (kind_) {
        case Kind::fisher_rao: return "fisher_rao";
        case Kind::wasserstein: return "wasserstein";
        case Kind::kalman_wasserstein: return "kalman_wasserstein";
        case Kind::stein_bilinear: return "stein_bilinear";
        case Kind::galy: return "galy";
        case Kind::vanilla: return "vanilla";
    }
    return "unknown";
}

MomentFlow MomentFlow::from_name(const std::string& name) {
    if (name == "fisher_rao") return fisher_rao();
    if (name == "wasserstein") return wasserstein();
    if (name == "kalman_wasserstein") return kalman_wasserstein();
    if (name == "galy") return galy();
    if (name == "vanilla") return vanilla();
    throw ArgumentError("unknown gaussian flow: " + name);
}

MomentRhs moment_flow_rhs(const MomentFlow& flow, const GaussianMoments& g,
                          const TargetModel& target, const QuadratureRule& rule,
                          HessianMode mode) {
    const int n = g.dim();
    const MomentExpectations e = gaussian_expectations(g, target, rule, mode);
    const Eigen::VectorXd& grad = e.grad_log;
    const Eigen::MatrixXd& hess = e.hess_log;
    const Eigen::MatrixXd& C = g.cov;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);

    MomentRhs rhs;
    switch (flow.kind()) {
        case MomentFlow::Kind::fisher_rao:
            rhs.dm = C * grad;
            rhs.dC = C + C * hess * C;
            break;
        case MomentFlow::Kind::wasserstein:
            rhs.dm = grad;
            rhs.dC = 2.0 * id + hess * C + C * hess;
            break;
        case MomentFlow::Kind::kalman_wasserstein:
            rhs.dm = C * grad;
            rhs.dC = 2.0 * C + 2.0 * C * hess * C;
            break;
        case MomentFlow::Kind::galy:
            rhs.dm = grad;
            rhs.dC = 2.0 * C + hess * C * C + C * C * hess;
            break;
        case MomentFlow::Kind::vanilla: {
            auto llt = cholesky_spd(C, "vanilla flow covariance");
            rhs.dm = grad;
            rhs.dC = 0.5 * llt.solve(id) + 0.5 * hess;
            break;
        }
        case MomentFlow::Kind::stein_bilinear: {
            const Eigen::MatrixXd P = flow.preconditioner()(g);
            const Eigen::MatrixXd A = flow.kernel_matrix()(g);
            const double b = flow.kernel_offset()(g);
            if (b == 0.0) {
                throw ArgumentError("stein_bilinear flow: kernel offset b must be nonzero");
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
            if (!lu.isInvertible()) {
                throw ArgumentError("stein_bilinear flow: kernel matrix A must be nonsingular");
            }
            rhs.dm = b * P * grad;
            const Eigen::MatrixXd CAC = C * A * C;
            rhs.dC = P * A * C + C * A * P + P * hess * CAC + CAC * hess * P;
            break;
        }
    }
    rhs.dC = symmetrize(rhs.dC);
    return rhs;
}

namespace {

bool finite_and_spd(const GaussianMoments& g) {
    if (!g.mean.allFinite() || !g.cov.allFinite()) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
    return llt.info() == Eigen::Success;
}

struct Rk4Stepper {
    const MomentFlow& flow;
    const TargetModel& target;
    double kappa;
    HessianMode mode;

    MomentRhs rhs_at(const GaussianMoments& g) const {
        const QuadratureRule rule = unscented_rule(g, kappa);
        return moment_flow_rhs(flow, g, target, rule, mode);
    }

    static GaussianMoments advanced(const GaussianMoments& g, const MomentRhs& k, double h) {
        return {g.mean + h * k.dm, symmetrize(g.cov + h * k.dC)};
    }

    // One RK4 step; false when a stage or the result leaves the SPD cone.
    bool try_step(const GaussianMoments& g, double h, GaussianMoments& out) const {
        try {
            const MomentRhs k1 = rhs_at(g);
            const MomentRhs k2 = rhs_at(advanced(g, k1, 0.5 * h));
            const MomentRhs k3 = rhs_at(advanced(g, k2, 0.5 * h));
            const MomentRhs k4 = rhs_at(advanced(g, k3, h));
            out.mean = g.mean + (h / 6.0) * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm);
            out.cov = symmetrize(g.cov + (h / 6.0) * (k1.dC + 2.0 * k2.dC + 2.0 * k3.dC + k4.dC));
        } catch (const DecompositionError&) {
            return false;
        }
        return finite_and_spd(out);
    }

    // Advances by h, bisecting on SPD failures up to the halving budget.
    GaussianMoments advance(const GaussianMoments& g, double h, int halvings_left,
                            double t_now) const {
        GaussianMoments next;
        if (try_step(g, h, next)) return next;
        if (halvings_left == 0) {
            throw IntegrationError("moment flow integration: covariance left the SPD cone at t=" +
                                       std::to_string(t_now) + " after 20 step halvings",
                                   t_now, g);
        }
        const GaussianMoments mid = advance(g, 0.5 * h, halvings_left - 1, t_now);
        return advance(mid, 0.5 * h, halvings_left - 1, t_now + 0.5 * h);
    }
};

} // namespace

MomentPath integrate_moment_flow(const MomentFlow& flow, const GaussianMoments& g0,
                                 const TargetModel& target, double dt, double t_end,
                                 double kappa, HessianMode mode) {
    if (dt <= 0.0) throw ArgumentError("moment flow integration: dt must be positive");
    if (t_end < 0.0) throw ArgumentError("moment flow integration: t_end must be nonnegative");
    validate_moments(g0, "moment flow initial state");
    if (std::isnan(kappa)) kappa = default_unscented_kappa(g0.dim());

    const Rk4Stepper stepper{flow, target, kappa, mode};
    constexpr int kMaxHalvings = 20;

    MomentPath path;
    path.times.push_back(0.0);
    path.states.push_back(g0);

    GaussianMoments state = g0;
    double t = 0.0;
    while (t < t_end - 1e-12 * std::max(1.0, t_end)) {
        const double h = std::min(dt, t_end - t);
        state = stepper.advance(state, h, kMaxHalvings, t);
        t += h;
        path.times.push_back(t);
        path.states.push_back(state);
    }
    return path;
}

GaussianMoments analytic_fisher_rao_gaussian(const Eigen::VectorXd& m0, const Eigen::MatrixXd& C0,
                                             const Eigen::VectorXd& m_star,
                                             const Eigen::MatrixXd& C_star, double t) {
    const int n = static_cast<int>(m0.size());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd C0_inv = cholesky_spd(C0, "initial covariance").solve(id);
    const Eigen::MatrixXd Cs_inv = cholesky_spd(C_star, "target covariance").solve(id);
    const double decay = std::exp(-t);

    const Eigen::MatrixXd Ct_inv = symmetrize(Cs_inv + decay * (C0_inv - Cs_inv));
    const Eigen::MatrixXd Ct = cholesky_spd(Ct_inv, "interpolated precision").solve(id);

    const Eigen::MatrixXd blend = (1.0 - decay) * Cs_inv + decay * C0_inv;
    const Eigen::VectorXd shift =
        cholesky_spd(blend, "interpolated blend").solve(C0_inv * (m0 - m_star));

    return {m_star + decay * shift, symmetrize(Ct)};
}

namespace {

// Fisher-Rao-form stationarity residual on Gauss-Hermite expectations.
MomentRhs fixed_point_residual_1d(const TargetModel& target, const GaussianMoments& g,
                                  int quad_points) {
    const QuadratureRule rule = gauss_hermite_rule(g.mean[0], g.cov(0, 0), quad_points);
    return moment_flow_rhs(MomentFlow::fisher_rao(), g, target, rule,
                           default_hessian_mode(target));
}

} // namespace

GaussianMoments find_vi_fixed_point_1d(const TargetModel& target, const GaussianMoments& g0,
                                       int quad_points) {
    if (target.dim() != 1) {
        throw UnsupportedError("fixed point search: 1D targets only");
    }
    const HessianMode mode = default_hessian_mode(target);
    const MomentPath path =
        integrate_moment_flow(MomentFlow::fisher_rao(), g0, target, 1e-2, 200.0, NAN, mode);
    GaussianMoments g = path.states.back();

    // Newton on (m, C) -> (dm, dC) with a finite-difference Jacobian.
    for (int iter = 0; iter < 50; ++iter) {
        const MomentRhs r = fixed_point_residual_1d(target, g, quad_points);
        const double res = std::hypot(r.dm[0], r.dC(0, 0));
        if (res < 1e-13) break;

        Eigen::Vector2d f(r.dm[0], r.dC(0, 0));
        Eigen::Matrix2d jac;
        const double hm = 1e-6 * std::max(1.0, std::abs(g.mean[0]));
        const double hc = 1e-6 * std::max(1.0, g.cov(0, 0));
        for (int j = 0; j < 2; ++j) {
            GaussianMoments gp = g;
            GaussianMoments gm = g;
            if (j == 0) {
                gp.mean[0] += hm;
                gm.mean[0] -= hm;
            } else {
                gp.cov(0, 0) += hc;
                gm.cov(0, 0) -= hc;
            }
            const MomentRhs rp = fixed_point_residual_1d(target, gp, quad_points);
            const MomentRhs rm = fixed_point_residual_1d(target, gm, quad_points);
            const double h = (j == 0) ? hm : hc;
            jac(0, j) = (rp.dm[0] - rm.dm[0]) / (2.0 * h);
            jac(1, j) = (rp.dC(0, 0) - rm.dC(0, 0)) / (2.0 * h);
        }
        const Eigen::Vector2d step = jac.partialPivLu().solve(f);
        g.mean[0] -= step[0];
        g.cov(0, 0) = std::max(g.cov(0, 0) - step[1], 1e-12);
    }
    return g;
}

JacobianSpectrum1D jacobian_spectrum_1d(const TargetModel& target, const GaussianMoments& g_star,
                                        int quad_points) {
    if (target.dim() != 1 || g_star.dim() != 1) {
        throw UnsupportedError("jacobian spectrum: 1D targets only");
    }
    validate_moments(g_star, "jacobian spectrum state");

    const MomentRhs r = fixed_point_residual_1d(target, g_star, quad_points);
    if (std::hypot(r.dm[0], r.dC(0, 0)) >= 1e-8) {
        throw ArgumentError("jacobian spectrum: state is not a stationary point "
                            "(residual >= 1e-8)");
    }

    const double m_star = g_star.mean[0];
    const double c_star = g_star.cov(0, 0);
    const QuadratureRule rule = gauss_hermite_rule(m_star, c_star, quad_points);

    double a1 = 0.0;
    double a2 = 0.0;
    for (int i = 0; i < rule.count(); ++i) {
        const Eigen::VectorXd point = rule.points.row(i);
        const double neg_hess = -target.hess_log_density(point)(0, 0);
        const double d = point[0] - m_star;
        a1 += rule.weights[i] * neg_hess * d;
        a2 += rule.weights[i] * neg_hess * d * d;
    }

    const double half_sum = 1.5 + 0.5 * a2;
    const double disc = std::sqrt(std::pow(0.5 - 0.5 * a2, 2) + 2.0 * a1 * a1 * c_star);

    JacobianSpectrum1D s;
    s.A1 = a1;
    s.A2 = a2;
    s.lambda1 = 0.5 * (-half_sum - disc);
    // Conjugate form: immune to cancellation when the root is near the sum.
    s.lambda2 = -(1.0 + a2 - a1 * a1 * c_star) / (half_sum + disc);
    return s;
}

void write_moment_csv(std::ostream& out, const MomentPath& path) {
    if (path.states.empty()) {
        throw ArgumentError("moment csv: empty trajectory");
    }
    const int n = path.states.front().dim();
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",m_" << i;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) out << ",c_" << i << j;
    }
    out << "\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out << ',' << buf;
    };
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.12g", path.times[k]);
        out << buf;
        const GaussianMoments& g = path.states[k];
        for (int i = 0; i < n; ++i) put(g.mean[i]);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) put(g.cov(i, j));
        }
        out << "\n";
    }
}

} // namespace flowsampler

#include "flowsampler/fisher_rao_grid.hpp"

#include <cmath>
#include <limits>

namespace flowsampler {

namespace {

void check_axes(const std::vector<GridAxis>& axes) {
    if (axes.empty() || axes.size() > 2) {
        throw ArgumentError("density grid: 1D and 2D grids only");
    }
    for (const GridAxis& a : axes) {
        if (a.n < 2 || !(a.hi > a.lo)) {
            throw ArgumentError("density grid: axis needs hi > lo and at least 2 cells");
        }
    }
}

std::size_t total_cells(const std::vector<GridAxis>& axes) {
    std::size_t n = 1;
    for (const GridAxis& a : axes) n *= static_cast<std::size_t>(a.n);
    return n;
}

} // namespace

DensityGrid::DensityGrid(std::vector<GridAxis> axes, Eigen::ArrayXd values)
    : axes_(std::move(axes)), values_(std::move(values)) {
    check_axes(axes_);
    if (static_cast<std::size_t>(values_.size()) != total_cells(axes_)) {
        throw ArgumentError("density grid: value count does not match grid size");
    }
    if ((values_ < 0.0).any()) {
        throw ArgumentError("density grid: negative density values");
    }
    cell_volume_ = 1.0;
    for (const GridAxis& a : axes_) cell_volume_ *= a.step();
    normalize();
}

void DensityGrid::normalize() {
    const double mass = values_.sum() * cell_volume_;
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw ArgumentError("density grid: cannot normalize zero or non-finite mass");
    }
    values_ /= mass;
}

Eigen::VectorXd DensityGrid::point(std::size_t flat_index) const {
    Eigen::VectorXd p(dims());
    if (dims() == 1) {
        p[0] = axes_[0].center(static_cast<int>(flat_index));
    } else {
        const int n1 = axes_[1].n;
        p[0] = axes_[0].center(static_cast<int>(flat_index) / n1);
        p[1] = axes_[1].center(static_cast<int>(flat_index) % n1);
    }
    return p;
}

DensityGrid DensityGrid::from_log_density(
    std::vector<GridAxis> axes, const std::function<double(const Eigen::VectorXd&)>& logd) {
    check_axes(axes);
    Eigen::ArrayXd logv(total_cells(axes));
    if (axes.size() == 1) {
        for (int i = 0; i < axes[0].n; ++i) {
            Eigen::VectorXd p(1);
            p[0] = axes[0].center(i);
            logv[i] = logd(p);
        }
    } else {
        std::size_t idx = 0;
        for (int i = 0; i < axes[0].n; ++i) {
            for (int j = 0; j < axes[1].n; ++j, ++idx) {
                Eigen::VectorXd p(2);
                p[0] = axes[0].center(i);
                p[1] = axes[1].center(j);
                logv[idx] = logd(p);
            }
        }
    }
    const double shift = logv.maxCoeff();
    return DensityGrid(std::move(axes), (logv - shift).exp());
}

DensityGrid DensityGrid::from_target(std::vector<GridAxis> axes, const TargetModel& target) {
    return from_log_density(std::move(axes),
                            [&](const Eigen::VectorXd& p) { return target.log_density_unnorm(p); });
}

DensityGrid DensityGrid::gaussian(std::vector<GridAxis> axes, const GaussianMoments& g) {
    validate_moments(g, "gridded gaussian");
    const TargetModel t = TargetModel::gaussian(g.mean, g.cov);
    return from_target(std::move(axes), t);
}

GridAxis DensityGrid::default_axis(double mean, double sigma, int n) {
    return {mean - 12.0 * sigma, mean + 12.0 * sigma, n};
}

double DensityGrid::boundary_mass() const {
    double mass = 0.0;
    if (dims() == 1) {
        mass = (values_[0] + values_[values_.size() - 1]) * cell_volume_;
    } else {
        const int n0 = axes_[0].n;
        const int n1 = axes_[1].n;
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j < n1; ++j) {
                if (i == 0 || i == n0 - 1 || j == 0 || j == n1 - 1) {
                    mass += values_[static_cast<std::size_t>(i) * n1 + j] * cell_volume_;
                }
            }
        }
    }
    return mass;
}

double DensityGrid::second_moment() const {
    double m2 = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        m2 += values_[i] * point(i).squaredNorm();
    }
    return m2 * cell_volume_;
}

DensityGrid fr_density(const DensityGrid& rho0, const TargetModel& target, double t) {
    if (t < 0.0) throw ArgumentError("interpolation flow: t must be nonnegative");
    if (target.dim() != rho0.dims()) {
        throw ArgumentError("interpolation flow: target dimension does not match grid");
    }
    const double w0 = std::exp(-t);
    const double w1 = 1.0 - w0;

    Eigen::ArrayXd logv(rho0.size());
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        logv[i] = w0 * std::log(rho0.values()[i]) + w1 * target.log_density_unnorm(rho0.point(i));
    }
    const double shift = logv.maxCoeff();
    DensityGrid out(rho0.axes(), (logv - shift).exp());
    if (out.boundary_mass() > 1e-6) {
        throw TruncationError("interpolation flow: more than 1e-6 relative mass on the grid "
                              "boundary; widen the grid");
    }
    return out;
}

namespace {

double kl_sum(const DensityGrid& rho, const Eigen::ArrayXd& ref_values) {
    double kl = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double p = rho.values()[i];
        if (p == 0.0) continue; // 0 log 0 := 0
        kl += p * (std::log(p) - std::log(ref_values[i]));
    }
    return kl * rho.cell_volume();
}

} // namespace

double grid_kl(const DensityGrid& rho, const TargetModel& target) {
    if (target.dim() != rho.dims()) {
        throw ArgumentError("grid kl: target dimension does not match grid");
    }
    const DensityGrid ref = DensityGrid::from_target(rho.axes(), target);
    return kl_sum(rho, ref.values());
}

double grid_kl(const DensityGrid& rho, const DensityGrid& reference) {
    if (rho.dims() != reference.dims() || rho.size() != reference.size()) {
        throw ArgumentError("grid kl: grids do not match");
    }
    for (int d = 0; d < rho.dims(); ++d) {
        const GridAxis& a = rho.axes()[d];
        const GridAxis& b = reference.axes()[d];
        if (a.lo != b.lo || a.hi != b.hi || a.n != b.n) {
            throw ArgumentError("grid kl: grids do not match");
        }
    }
    return kl_sum(rho, reference.values());
}

FrBoundConstants fr_bound_constants(const DensityGrid& rho0, const TargetModel& target) {
    const DensityGrid post = DensityGrid::from_target(rho0.axes(), target);
    double k = 0.0;
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        const double log_ratio = std::log(rho0.values()[i]) - std::log(post.values()[i]);
        k = std::max(k, std::abs(log_ratio) / (1.0 + rho0.point(i).squaredNorm()));
    }
    const double b = std::max(rho0.second_moment(), post.second_moment());
    return {k, b, std::log((1.0 + b) * k)};
}

std::vector<FrDecayPoint> fr_kl_curve(const DensityGrid& rho0, const TargetModel& target,
                                      const std::vector<double>& times) {
    const FrBoundConstants c = fr_bound_constants(rho0, target);
    const double prefactor = (2.0 + c.B + std::exp(1.0) * c.B) * c.K;
    std::vector<FrDecayPoint> curve;
    curve.reserve(times.size());
    for (double t : times) {
        const DensityGrid rho_t = fr_density(rho0, target, t);
        curve.push_back({t, grid_kl(rho_t, target), prefactor * std::exp(-t)});
    }
    return curve;
}

} // namespace flowsampler

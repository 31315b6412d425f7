#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "flowsampler/moments.hpp"
#include "flowsampler/targets.hpp"

namespace flowsampler {

/// One uniform grid axis with n cell centers between lo and hi.
struct GridAxis {
    double lo;
    double hi;
    int n;

    double step() const { return (hi - lo) / n; }
    double center(int i) const { return lo + (i + 0.5) * step(); }
};

/// A nonnegative density sampled at the cell centers of a 1D or 2D uniform
/// grid, normalized so that sum(values) * cell_volume = 1. Values are stored
/// row-major (axis 0 outermost).
class DensityGrid {
public:
    DensityGrid(std::vector<GridAxis> axes, Eigen::ArrayXd values);

    /// Build from an unnormalized log density (max-shift, exponentiate,
    /// normalize by the Riemann sum).
    static DensityGrid from_log_density(std::vector<GridAxis> axes,
                                        const std::function<double(const Eigen::VectorXd&)>& logd);

    static DensityGrid from_target(std::vector<GridAxis> axes, const TargetModel& target);

    /// Gridded N(m, C).
    static DensityGrid gaussian(std::vector<GridAxis> axes, const GaussianMoments& g);

    /// Default 1D axis: 4096 cells spanning mean +- 12 sigma.
    static GridAxis default_axis(double mean, double sigma, int n = 4096);

    int dims() const { return static_cast<int>(axes_.size()); }
    const std::vector<GridAxis>& axes() const { return axes_; }
    const Eigen::ArrayXd& values() const { return values_; }
    double cell_volume() const { return cell_volume_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

    Eigen::VectorXd point(std::size_t flat_index) const;

    /// Relative mass sitting in the outermost layer of cells.
    double boundary_mass() const;

    /// sum values * theta_i^2 * cell_volume summed over coordinates.
    double second_moment() const;

private:
    void normalize();

    std::vector<GridAxis> axes_;
    Eigen::ArrayXd values_;
    double cell_volume_;
};

/// Closed-form geometric interpolation at time t:
/// log rho_t = e^{-t} log rho_0 + (1 - e^{-t}) log rho_post, renormalized on
/// the grid. Errors out if more than 1e-6 of the resulting mass touches the
/// grid boundary.
DensityGrid fr_density(const DensityGrid& rho0, const TargetModel& target, double t);

/// Riemann-sum KL divergence against the grid-normalized target.
double grid_kl(const DensityGrid& rho, const TargetModel& target);

/// Riemann-sum KL divergence between two densities on the same grid.
double grid_kl(const DensityGrid& rho, const DensityGrid& reference);

/// Decay-bound constants fitted on the grid: the smallest K with
/// |log(rho_0/rho_post)| <= K (1 + |theta|^2), the larger second moment B,
/// and the time log((1+B)K) after which the bound applies.
struct FrBoundConstants {
    double K;
    double B;
    double t_min;
};

FrBoundConstants fr_bound_constants(const DensityGrid& rho0, const TargetModel& target);

struct FrDecayPoint {
    double t;
    double kl;
    double bound; // (2 + B + eB) K e^{-t}
};

/// KL-vs-t curve of the interpolation flow together with the decay bound.
std::vector<FrDecayPoint> fr_kl_curve(const DensityGrid& rho0, const TargetModel& target,
                                      const std::vector<double>& times);

} // namespace flowsampler

#ifndef WICKSELL_GP_LIMIT_HPP_
#define WICKSELL_GP_LIMIT_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "wicksell/dist_models.hpp"
#include "wicksell/isotonic.hpp"

namespace wicksell {

/// Mean/sd fit of a sample together with its KS distance from the fitted
/// normal and the asymptotic Kolmogorov p-value.
struct NormalFit {
    double mean = 0.0;
    double sd = 0.0;
    double ks = 0.0;
    double p_value = 0.0;
};

/// Fits mean and sd (denominator n-1), returns the sup distance between the
/// empirical cdf and the fitted normal cdf and the Kolmogorov p-value of
/// sqrt(n) * KS (fitted-parameter p-values are conservative approximations).
NormalFit ks_fit_normal(std::span<const double> values);

/// Simulated draws of the limit variable L_x.
struct LxSample {
    std::vector<double> values;
    std::uint64_t seed = 0;
};

/// Cov(Z(s), Z(t)) of the limit process for any observation model:
/// E[phi_s phi_t] - U(s)U(t)/4 with phi_t(z) = sqrt(z+) - sqrt((z-t)+).
double gp_base_kernel(const ObservationModel& obs, double s, double t, double rel_tol = 1e-9);

/// E(sqrt((Z-x)+) - sqrt((Z-x-eps)+))^2 divided by eps^2 log(1/eps) g(x)/4,
/// evaluated in scaled coordinates so that eps down to 1e-9 stays accurate.
/// Approaches 1 as eps -> 0 when g is continuous and positive at x.
double sqrt_increment_second_moment_ratio(const ObservationModel& obs, double x, double eps);

/// The limiting Gaussian process Z_x of the flat regime: grid over the flat
/// interval K_x (with a visualization margin), anchored covariance kernel,
/// and path/L_x simulation. F must be constant on [x_lo, x_hi] around x.
///
/// Scaling: U_n averages 2 phi_t per observation, so the weak limit of
/// sqrt(n)(U_n - U) has covariance 4 Cov(phi_s, phi_t). covariance(),
/// sample_paths and l_x_distribution use that process scale; base_kernel
/// and anchored_kernel return the plain phi forms.
class GpLimit {
public:
    GpLimit(ObservationModel obs, double x, double x_lo, double x_hi,
            int grid_points = 241, double margin = 0.25);

    /// Cov(Z(s), Z(t)) of the unanchored process, by quadrature against g.
    double base_kernel(double s, double t) const;
    /// Cov of the anchored process Z_x(s) = Z(s) - Z(x); vanishes at s = x.
    double anchored_kernel(double s, double t) const;

    const std::vector<double>& grid() const { return grid_; }
    double anchor() const { return x_; }
    double flat_lo() const { return x_lo_; }
    double flat_hi() const { return x_hi_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }

    /// Gaussian paths on the grid with the anchored kernel; row p is path p.
    /// Every path is exactly 0 at the anchor. Deterministic given the seed;
    /// path p uses substream p.
    Eigen::MatrixXd sample_paths(int n_paths, std::uint64_t seed, int threads = 1) const;

    /// Right derivative at x of the least concave majorant of each path
    /// restricted to the flat interval K_x.
    LxSample l_x_distribution(int n_paths, std::uint64_t seed, int threads = 1) const;

    /// L_x of a single path (values on the full grid), via the hull over the
    /// K_x-restricted grid points.
    double l_x_of_path(std::span<const double> path) const;

    /// Switch-relation route for P(L_x <= a) of a single path: smallest grid
    /// argmax of path(s) - a s over K_x, compared against x.
    bool l_x_leq_by_switch(std::span<const double> path, double a) const;

private:
    ObservationModel obs_;
    double x_, x_lo_, x_hi_;
    std::vector<double> grid_;
    std::vector<std::size_t> flat_idx_;  // grid indices inside [x_lo, x_hi]
    std::size_t anchor_idx_ = 0;
    Eigen::MatrixXd cov_;       // anchored kernel on the grid
    Eigen::MatrixXd factor_;    // lower-triangular factor of the reduced matrix
    std::vector<double> u_half_;  // cached U(grid)/2 values
};

}  // namespace wicksell

#endif  // WICKSELL_GP_LIMIT_HPP_

#ifndef WICKSELL_ISOTONIC_HPP_
#define WICKSELL_ISOTONIC_HPP_

#include <span>
#include <vector>

#include "wicksell/sampler.hpp"

namespace wicksell {

/// Knot/slope form of a least concave majorant. `knots` are the hull
/// vertices (strictly increasing), `values` the majorant there, and
/// `slopes[i]` the right slope on [knots[i], knots[i+1]); the right
/// derivative is 0 beyond the last knot.
struct ConcaveMajorant {
    std::vector<double> knots;
    std::vector<double> values;
    std::vector<double> slopes;

    /// Right derivative at x: slope of the segment whose half-open interval
    /// contains x, 0 for x at or beyond the last knot. For x left of the
    /// first knot this extends constantly with the first slope.
    double slope_at(double x) const;
    /// Majorant value at x (linear interpolation; constant extension).
    double value_at(double x) const;
};

/// Upper concave hull of points with strictly increasing xs. Collinear
/// interior points are dropped, so every remaining vertex is an exact
/// touch point.
ConcaveMajorant concave_majorant_of(std::span<const double> xs, std::span<const double> ys);

/// Plug-in estimator V_n(x) = (1/n) sum_{Z_i > x} (Z_i - x)^(-1/2).
/// Returns +infinity when x coincides with an observation.
double v_n(const SampleSet& sample, double x);

/// U_n(x) = (2/n) sum_i (sqrt(Z_i) - sqrt((Z_i - x)+)), the primitive of V_n.
double u_n(const SampleSet& sample, double x);

/// Least concave majorant of U_n on [0, infinity). U_n is convex between
/// consecutive order statistics (its derivative V_n increases there), so the
/// majorant equals the upper hull of {(0,0)} and the knot values, extended
/// horizontally past the largest observation.
ConcaveMajorant lcm(const SampleSet& sample);

/// Right derivative of the majorant at x.
double v_hat(const ConcaveMajorant& majorant, double x);

/// Isotonic inverse estimator F_hat(x) = 1 - V_hat(x) / V_hat(0);
/// 0 for x < 0. Throws if every observation is zero.
double f_hat(const ConcaveMajorant& majorant, double x);
double f_hat(const SampleSet& sample, double x);

/// Naive plug-in estimator 1 - V_n(x)/V_n(0); may leave [0,1] and is
/// non-monotone. Throws when x or 0 coincides with an observation (V_n
/// infinite there).
double f_naive(const SampleSet& sample, double x);

/// Test oracle for the switch relation: smallest maximizer of U_n(t) - a t
/// over a grid of the given resolution, refined near the sample knots.
double argmax_t(const SampleSet& sample, double a, double grid_step);

namespace detail {

/// out[k] = sum_{i > k} w[i] * sqrt(z[k] subtracted), for strictly
/// increasing z. Exact quadratic-cost reference.
void tail_sqrt_sums_exact(std::span<const double> z, std::span<const double> w,
                          std::span<double> out);

/// Same sums via a dual-tree Chebyshev treecode; error below ~1e-12 of the
/// result scale. Falls back to the exact kernel for small inputs.
void tail_sqrt_sums(std::span<const double> z, std::span<const double> w,
                    std::span<double> out);

}  // namespace detail

}  // namespace wicksell

#endif  // WICKSELL_ISOTONIC_HPP_

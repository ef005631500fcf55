#ifndef WICKSELL_STATS_HPP_
#define WICKSELL_STATS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace wicksell {

double normal_cdf(double z);

/// Inverse standard normal cdf (Acklam's rational approximation plus one
/// Halley refinement); accurate to ~1e-13 in (0,1).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a,x).
double gamma_p(double a, double x);

/// Asymptotic Kolmogorov tail probability 2*sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
/// truncated at 100 terms and clamped to [0,1].
double kolmogorov_p(double lambda);

double mean(std::span<const double> v);
/// Sample variance with denominator n-1.
double variance(std::span<const double> v);
double skewness(std::span<const double> v);

/// Two-sample Kolmogorov-Smirnov sup distance between the empirical cdfs.
double two_sample_ks(std::span<const double> a, std::span<const double> b);

/// One-sample KS sup distance of sorted data against the standard normal
/// after the affine transform (v - mu) / sigma.
double ks_vs_normal(std::span<const double> values, double mu, double sigma);

}  // namespace wicksell

#endif  // WICKSELL_STATS_HPP_

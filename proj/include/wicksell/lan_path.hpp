#ifndef WICKSELL_LAN_PATH_HPP_
#define WICKSELL_LAN_PATH_HPP_

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "wicksell/dist_models.hpp"
#include "wicksell/sampler.hpp"

namespace wicksell {

/// zeta(x) = integral_x^inf 1{delta <= |v| <= eta} / (v sqrt(v - x)) dv,
/// in closed form (arctan branch for x > 0, log branches for x < 0).
/// Requires 0 < delta < eta.
double zeta_n(double x, double delta, double eta);

/// Diagonal 2x2 information matrix J of the LAN expansion:
/// (pi^2 / 8 m0^2) diag(1/(gamma0 g(0)), 1/(gammax g(x))).
struct Diag2 {
    double d0 = 0.0;
    double d1 = 0.0;
};
Diag2 j_matrix(const ObservationModel& obs, double x, double gamma0, double gammax);

/// Derivative of h -> F_{h_n}(x): ((1-F(x))/(2 gamma0), -1/(2 gammax)).
std::pair<double, double> psi_dot(const CdfModel& model, double x, double gamma0,
                                  double gammax);

/// Efficient asymptotic variance
/// (4 m0^2 / pi^2) (g(x)/(2 gammax) + (1-F(x))^2 g(0)/(2 gamma0));
/// equals psi_dot^T J^-1 psi_dot identically.
double efficient_variance(const ObservationModel& obs, double x, double gamma0,
                          double gammax);

/// The least-favorable perturbation path F_{h_n} of the LAN analysis:
/// direction functions chi_1 (window [delta0, eta] at 0) and chi_2 (window
/// of half-width [deltax, eta] around x), normalizer D_{h_n}, perturbed
/// density g_n, log-likelihood ratios and the score Delta_n.
class PerturbationPath {
public:
    /// eta defaults to 1/sqrt(log n). Throws if n < 3, eta is outside (0,1],
    /// or a truncation point n^(-1/(2 gamma)) reaches eta.
    PerturbationPath(ObservationModel obs, double x, std::pair<double, double> h, double n,
                     double gamma0, double gammax,
                     std::optional<double> eta = std::nullopt);

    const ObservationModel& obs() const { return obs_; }
    double x() const { return x_; }
    double n() const { return n_; }
    double eta() const { return eta_; }
    std::pair<double, double> h() const { return h_; }
    std::pair<double, double> h_n() const { return {h1n_, h2n_}; }
    double delta0() const { return delta0_; }
    double deltax() const { return deltax_; }

    /// integral_0^u chi_{1,n}(v) dv (log plateau form).
    double chi1_primitive(double u) const;
    /// integral_0^u chi_{2,n}(v - x) dv; 0 outside [x - eta, x + eta].
    double chi2_primitive(double u) const;

    /// D_{h_n} = 1 + h_{1,n} * integral chi_1; throws if nonpositive.
    double d_hn() const { return d_; }
    /// m_{h_n} D_{h_n} = m0 + h_{1,n} I1 + h_{2,n} I2 with
    /// I_j = integral sqrt(v) chi_j dv (closed forms).
    double mhn_dhn() const { return mhn_dhn_; }
    double sqrt_chi1_integral() const { return i1_; }
    double sqrt_chi2_integral() const { return i2_; }

    /// Perturbed cdf F_{h_n}(u); monotone only for n past a model-dependent
    /// threshold (checked by check_monotone, not assumed).
    double cdf(double u) const;
    /// Returns the first grid point where F_{h_n} decreases, if any.
    std::optional<double> check_monotone(const std::vector<double>& grid) const;

    /// Perturbed observation density g_n(z); throws (with the offending z in
    /// the message) if the value is not positive.
    double g(double z) const;

    /// zeta_{1,n}(z) and zeta_{2,n}(z - x).
    double zeta1(double z) const { return zeta_n(z, delta0_, eta_); }
    double zeta2(double z) const { return zeta_n(z - x_, deltax_, eta_); }

    /// sum_i log(g_n(Z_i) / g(Z_i)).
    double loglik_sum(const SampleSet& sample) const;

    /// The score Delta_n of the LAN expansion (two components).
    std::array<double, 2> delta_n(const SampleSet& sample) const;

private:
    ObservationModel obs_;
    double x_;
    std::pair<double, double> h_;
    double n_;
    double gamma0_, gammax_;
    double eta_;
    double h1n_, h2n_;
    double delta0_, deltax_;
    double d_;
    double i1_, i2_;
    double mhn_dhn_;
    double g0_;  // cached g(0) and g(x) for diagnostics
    double gx_;
};

/// Deterministic Hadamard-derivative ladder: for each n in ns evaluates
/// sqrt(n / log n) (F_{h_n}(x) - F(x)); the limit is h . psi_dot.
std::vector<double> hadamard_ladder(const ObservationModel& obs, double x,
                                    std::pair<double, double> h, double gamma0, double gammax,
                                    const std::vector<double>& ns,
                                    std::optional<double> eta = std::nullopt);

}  // namespace wicksell

#endif  // WICKSELL_LAN_PATH_HPP_

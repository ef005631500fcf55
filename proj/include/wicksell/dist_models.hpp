#ifndef WICKSELL_DIST_MODELS_HPP_
#define WICKSELL_DIST_MODELS_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wicksell {

/// Declared local smoothness of F: exponents and constants of the local
/// modulus H_x at 0 and at the anchor x. Declared by the caller, never
/// estimated from data.
struct SmoothnessSpec {
    double gamma0 = 1.0;
    double gammax = 1.0;
    double k0 = 0.0;
    double kx = 0.0;
    double x = 0.0;
};

struct FlatPiece {
    double lo = 0.0;
    double hi = 0.0;
    double density = 0.0;
};

/// Parametric sphere squared-radius distribution F. All kinds share the
/// conventions F(u) = 0 for u < 0 and F(u) -> 1 as u -> infinity, and carry
/// enough structure (density pieces, atoms, substitutions) for the moment
/// and Abel-type integrals downstream to reach 1e-10 relative accuracy.
class CdfModel {
public:
    enum class Kind { kUniform01, kGamma, kFlatMixture, kHolderPoint, kDiscreteExample, kPointMass };

    static CdfModel uniform01();
    static CdfModel gamma_model(double shape, double rate);
    static CdfModel flat_mixture(std::vector<FlatPiece> pieces);
    static CdfModel flat_default();
    static CdfModel holder_point(double x0, double gamma, double k, double base);
    static CdfModel discrete_example(double x0, double gamma);
    static CdfModel point_mass(double at);

    /// Model-spec grammar: `uniform01`, `gamma:<shape>:<rate>`,
    /// `flat:default`, `flat:<a1>,<b1>,<d1>;<a2>,<b2>,<d2>`,
    /// `holder:x0=<v>,gamma=<v>,K=<v>,base=<v>`, `discrete:x0=<v>,gamma=<v>`.
    static CdfModel parse(const std::string& spec);

    Kind kind() const { return kind_; }
    std::string describe() const;

    /// Right-continuous cdf. 0 for u < 0.
    double cdf(double u) const;
    /// Smallest x with cdf(x) >= p (inverse-cdf; bisection to ~1e-13 of the
    /// support scale for kinds without a closed-form inverse).
    double quantile(double p) const;

    /// Point beyond which F == 1 up to 1e-15 (exact for bounded supports).
    double support_upper() const;

    bool has_atoms() const;
    /// Atom table (location, mass), sorted by location. For the discrete
    /// example the table is truncated; the residual mass sits at x0 and the
    /// analytic tail corrections below account for it.
    const std::vector<std::pair<double, double>>& atoms() const;

    /// Integral of f against dF (density pieces, atoms and analytic tails).
    double integrate_dF(const std::function<double(double)>& f,
                        double rel_tol = 1e-10) const;

    /// Expected sphere radius m0 = integral of sqrt(y) dF(y).
    double moment_sqrt() const;
    /// Integral of y^(3/2) dF(y); must be finite for a valid model.
    double moment_three_halves() const;
    /// Integral of F over [0, x].
    double integral_cdf(double x) const;
    /// Integral of sqrt(y) dF(y) over [0, x] (the unnormalized size-biased
    /// cdf); closed form where available.
    double biased_integral(double x) const;

    /// Local modulus H_x(delta) = integral_0^1 (F(x + u delta) - F(x)) du.
    double h_smooth(double x, double delta) const;

    const std::optional<SmoothnessSpec>& smoothness() const { return smoothness_; }
    void set_smoothness(SmoothnessSpec s) { smoothness_ = s; }

    // Internals shared with the observation-side integrals.
    double density(double u) const;
    std::vector<double> density_breakpoints() const;

private:
    friend class ObservationModel;

    struct Impl;
    CdfModel(Kind kind, std::shared_ptr<const Impl> impl)
        : kind_(kind), impl_(std::move(impl)) {}

    Kind kind_;
    std::shared_ptr<const Impl> impl_;
    std::optional<SmoothnessSpec> smoothness_;
};

/// F together with the induced observation density
///   g(z) = (1 / 2 m0) * integral_z^inf dF(x) / sqrt(x - z)
/// and the exact functionals V, U used as oracles. m0 is cached at
/// construction; all queries are pure functions of immutable state and are
/// safe to call from many threads concurrently.
class ObservationModel {
public:
    explicit ObservationModel(CdfModel model);

    const CdfModel& model() const { return model_; }
    double m0() const { return m0_; }

    /// Observation density; may be +infinity when approaching an atom from
    /// below. Throws std::domain_error for z < 0.
    double g(double z) const;

    /// V(x) = pi (1 - F(x)) / (2 m0).
    double v_exact(double x) const;
    /// U(x) = (pi / 2 m0) * integral_0^x (1 - F).
    double u_exact(double x) const;

    /// V(x) evaluated the long way, as integral_x^inf g(z)/sqrt(z-x) dz by
    /// quadrature. Cross-oracle for v_exact.
    double v_by_quadrature(double x, double rel_tol = 1e-8) const;

    /// E f(Z) with Z ~ g; `kinks` lists points where f is not smooth.
    double expect_z(const std::function<double(double)>& f,
                    const std::vector<double>& kinks = {},
                    double rel_tol = 1e-9) const;

    /// Upper end of the observation support (equals the model's).
    double z_upper() const { return z_upper_; }

private:
    double expect_z_continuous(const std::function<double(double)>& f,
                               const std::vector<double>& kinks, double rel_tol) const;

    CdfModel model_;
    double m0_ = 0.0;
    double z_upper_ = 0.0;
};

}  // namespace wicksell

#endif  // WICKSELL_DIST_MODELS_HPP_

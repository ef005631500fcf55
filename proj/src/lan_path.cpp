#include "wicksell/lan_path.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wicksell {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Antiderivative of sqrt(v)/(v - x) for x > 0, valid on both sides of x.
double sqrt_over_linear_antideriv(double v, double x) {
    const double sv = std::sqrt(v);
    const double sx = std::sqrt(x);
    return 2.0 * sv + sx * std::log(std::fabs(sv - sx) / (sv + sx));
}

}  // namespace

double zeta_n(double x, double delta, double eta) {
    if (!(delta > 0.0) || !(delta < eta))
        throw std::invalid_argument("zeta_n: need 0 < delta < eta");
    if (x > eta) return 0.0;
    if (x == 0.0) return 2.0 * (1.0 / std::sqrt(delta) - 1.0 / std::sqrt(eta));
    if (x > 0.0) {
        // integral over [max(x, delta), eta] of 1/(v sqrt(v-x)).
        const double lo = std::max(x, delta);
        const double sx = std::sqrt(x);
        const auto prim = [&](double v) { return (2.0 / sx) * std::atan(std::sqrt((v - x) / x)); };
        return prim(eta) - prim(lo);
    }
    // x < 0. Positive branch [delta, eta] plus negative branch [max(x,-eta), -delta].
    const double a = -x;
    const double sa = std::sqrt(a);
    const auto prim_pos = [&](double v) {
        const double r = std::sqrt(v + a);
        return (1.0 / sa) * std::log((r - sa) / (r + sa));
    };
    const auto prim_neg = [&](double v) {
        const double r = std::sqrt(v + a);
        return (1.0 / sa) * std::log((sa - r) / (sa + r));
    };
    double val = prim_pos(eta) - prim_pos(delta);
    if (a > delta) {
        const double lo = std::max(x, -eta);
        val += prim_neg(-delta) - prim_neg(lo);
    }
    return val;
}

Diag2 j_matrix(const ObservationModel& obs, double x, double gamma0, double gammax) {
    if (!(gamma0 > 0.5) || !(gammax > 0.5))
        throw std::invalid_argument("j_matrix: gammas must exceed 1/2");
    const double g0 = obs.g(0.0);
    const double gx = obs.g(x);
    if (!(g0 > 0.0) || !(gx > 0.0) || !std::isfinite(g0) || !std::isfinite(gx))
        throw std::invalid_argument("j_matrix: g must be positive and finite at 0 and x");
    const double c = kPi * kPi / (8.0 * obs.m0() * obs.m0());
    return {c / (gamma0 * g0), c / (gammax * gx)};
}

std::pair<double, double> psi_dot(const CdfModel& model, double x, double gamma0,
                                  double gammax) {
    if (!(x > 0.0)) throw std::invalid_argument("psi_dot: x must be positive");
    return {(1.0 - model.cdf(x)) / (2.0 * gamma0), -1.0 / (2.0 * gammax)};
}

double efficient_variance(const ObservationModel& obs, double x, double gamma0,
                          double gammax) {
    const double g0 = obs.g(0.0);
    const double gx = obs.g(x);
    if (!std::isfinite(g0) || !std::isfinite(gx))
        throw std::invalid_argument("efficient_variance: g must be finite at 0 and x");
    const double fx = obs.model().cdf(x);
    const double m0 = obs.m0();
    return (4.0 * m0 * m0 / (kPi * kPi)) *
           (gx / (2.0 * gammax) + (1.0 - fx) * (1.0 - fx) * g0 / (2.0 * gamma0));
}

PerturbationPath::PerturbationPath(ObservationModel obs, double x, std::pair<double, double> h,
                                   double n, double gamma0, double gammax,
                                   std::optional<double> eta)
    : obs_(std::move(obs)), x_(x), h_(h), n_(n), gamma0_(gamma0), gammax_(gammax) {
    if (!(x > 0.0)) throw std::invalid_argument("perturbation path: x must be positive");
    if (!(n >= 3.0)) throw std::invalid_argument("perturbation path: n must be >= 3");
    if (!(gamma0 > 0.5) || !(gammax > 0.5))
        throw std::invalid_argument("perturbation path: gammas must exceed 1/2");
    if (!std::isfinite(h.first) || !std::isfinite(h.second))
        throw std::invalid_argument("perturbation path: h must be finite");
    const double logn = std::log(n);
    eta_ = eta.value_or(1.0 / std::sqrt(logn));
    if (!(eta_ > 0.0) || eta_ > 1.0)
        throw std::invalid_argument("perturbation path: eta must lie in (0,1]");
    delta0_ = std::pow(n, -1.0 / (2.0 * gamma0));
    deltax_ = std::pow(n, -1.0 / (2.0 * gammax));
    if (delta0_ >= eta_ || deltax_ >= eta_)
        throw std::invalid_argument(
            "perturbation path: truncation level n^(-1/(2 gamma)) reaches eta; increase n");
    const double root = std::sqrt(n * logn);
    h1n_ = h.first / root;
    h2n_ = h.second / root;

    const double chi1_total = std::log(eta_ / delta0_);
    // integral_0^inf chi_2(v - x) dv vanishes when the window is symmetric;
    // it is clipped at 0 when eta > x.
    const double lo2 = std::max(x_ - eta_, 0.0);
    const double chi2_total = std::log(eta_ / (x_ - lo2));
    d_ = 1.0 + h1n_ * chi1_total + h2n_ * chi2_total;
    if (!(d_ > 0.0))
        throw std::invalid_argument("perturbation path: normalizer D is nonpositive at this n");

    i1_ = 2.0 * (std::sqrt(eta_) - std::sqrt(delta0_));
    double i2 = 0.0;
    if (x_ - deltax_ > lo2)
        i2 += sqrt_over_linear_antideriv(x_ - deltax_, x_) -
              sqrt_over_linear_antideriv(lo2, x_);
    i2 += sqrt_over_linear_antideriv(x_ + eta_, x_) -
          sqrt_over_linear_antideriv(x_ + deltax_, x_);
    i2_ = i2;
    mhn_dhn_ = obs_.m0() + h1n_ * i1_ + h2n_ * i2_;
    if (!(mhn_dhn_ > 0.0))
        throw std::invalid_argument("perturbation path: m_{h_n} D_{h_n} is nonpositive");
    g0_ = obs_.g(0.0);
    gx_ = obs_.g(x_);
}

double PerturbationPath::chi1_primitive(double u) const {
    if (u <= delta0_) return 0.0;
    if (u >= eta_) return std::log(eta_ / delta0_);
    return std::log(u / delta0_);
}

double PerturbationPath::chi2_primitive(double u) const {
    const double lo = std::max(x_ - eta_, 0.0);
    if (u <= lo) return 0.0;
    const double width_left = x_ - lo;
    if (u <= x_ - deltax_) return std::log((x_ - u) / width_left);
    if (u <= x_ + deltax_) return std::log(deltax_ / width_left);
    if (u <= x_ + eta_) return std::log((u - x_) / width_left);
    return std::log(eta_ / width_left);
}

double PerturbationPath::cdf(double u) const {
    if (u <= 0.0) return 0.0;
    return (obs_.model().cdf(u) + h1n_ * chi1_primitive(u) + h2n_ * chi2_primitive(u)) / d_;
}

std::optional<double> PerturbationPath::check_monotone(const std::vector<double>& grid) const {
    double prev = -1.0;
    bool first = true;
    for (double u : grid) {
        const double v = cdf(u);
        if (!first && v < prev - 1e-12 * (1.0 + std::fabs(prev))) return u;
        prev = v;
        first = false;
    }
    return std::nullopt;
}

double PerturbationPath::g(double z) const {
    const double base = obs_.g(z);
    const double val =
        (2.0 * obs_.m0() * base + h1n_ * zeta1(z) + h2n_ * zeta2(z)) / (2.0 * mhn_dhn_);
    if (!(val > 0.0) && z <= obs_.z_upper()) {
        std::ostringstream msg;
        msg << "perturbed density nonpositive at z=" << z << " (value " << val
            << "); n=" << n_ << " is below the monotonicity threshold for this h";
        throw std::runtime_error(msg.str());
    }
    return std::max(val, 0.0);
}

double PerturbationPath::loglik_sum(const SampleSet& sample) const {
    long double s = 0.0L;
    const double log_norm = std::log(mhn_dhn_);
    for (double z : sample.values) {
        const double gz = obs_.g(z);
        if (!(gz > 0.0))
            throw std::runtime_error("loglik_sum: g vanishes at an observation");
        const double num = obs_.m0() + (h1n_ * zeta1(z) + h2n_ * zeta2(z)) / (2.0 * gz);
        if (!(num > 0.0))
            throw std::runtime_error("loglik_sum: perturbed likelihood ratio nonpositive");
        s += std::log(num) - log_norm;
    }
    return static_cast<double>(s);
}

std::array<double, 2> PerturbationPath::delta_n(const SampleSet& sample) const {
    long double s1 = 0.0L;
    long double s2 = 0.0L;
    for (double z : sample.values) {
        const double gz = obs_.g(z);
        if (!(gz > 0.0)) throw std::runtime_error("delta_n: g vanishes at an observation");
        s1 += zeta1(z) / (2.0 * gz) - i1_;
        s2 += zeta2(z) / (2.0 * gz) - i2_;
    }
    const double scale = 1.0 / (mhn_dhn_ * std::sqrt(n_ * std::log(n_)));
    return {static_cast<double>(s1) * scale, static_cast<double>(s2) * scale};
}

std::vector<double> hadamard_ladder(const ObservationModel& obs, double x,
                                    std::pair<double, double> h, double gamma0, double gammax,
                                    const std::vector<double>& ns, std::optional<double> eta) {
    std::vector<double> out;
    out.reserve(ns.size());
    const double fx = obs.model().cdf(x);
    for (double n : ns) {
        PerturbationPath path(obs, x, h, n, gamma0, gammax, eta);
        out.push_back(std::sqrt(n / std::log(n)) * (path.cdf(x) - fx));
    }
    return out;
}

}  // namespace wicksell

#include "wicksell/gp_limit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wicksell/parallel.hpp"
#include "wicksell/quadrature.hpp"
#include "wicksell/rng.hpp"
#include "wicksell/stats.hpp"

namespace wicksell {

NormalFit ks_fit_normal(std::span<const double> values) {
    if (values.size() < 3)
        throw std::invalid_argument("ks_fit_normal: need at least 3 values");
    NormalFit fit;
    fit.mean = mean(values);
    fit.sd = std::sqrt(variance(values));
    if (!(fit.sd > 0.0)) throw std::invalid_argument("ks_fit_normal: zero standard deviation");
    fit.ks = ks_vs_normal(values, fit.mean, fit.sd);
    fit.p_value = kolmogorov_p(std::sqrt(static_cast<double>(values.size())) * fit.ks);
    return fit;
}

namespace {

// phi_t(z) = sqrt(z+) - sqrt((z-t)+)
double phi(double z, double t) {
    const double a = z > 0.0 ? std::sqrt(z) : 0.0;
    const double b = z > t ? std::sqrt(z - t) : 0.0;
    return a - b;
}

}  // namespace

double gp_base_kernel(const ObservationModel& obs, double s, double t, double rel_tol) {
    if (s < 0.0 || t < 0.0) throw std::domain_error("base kernel: s,t must be nonnegative");
    if (s == 0.0 || t == 0.0) return 0.0;
    const double cross =
        obs.expect_z([&](double z) { return phi(z, s) * phi(z, t); }, {s, t}, rel_tol);
    return cross - 0.25 * obs.u_exact(s) * obs.u_exact(t);
}

double sqrt_increment_second_moment_ratio(const ObservationModel& obs, double x, double eps) {
    if (!(eps > 0.0) || !(x >= 0.0))
        throw std::invalid_argument("increment ratio: need x >= 0 and eps > 0");
    const double gx = obs.g(x);
    if (!(gx > 0.0)) throw std::invalid_argument("increment ratio: g(x) must be positive");
    // E D^2 / eps^2 split at z = x + eps; the far part integrates in
    // log(z - x) coordinates where the integrand is bounded.
    const double near_part =
        integrate([&](double s) { return s * obs.g(x + eps * s); }, 0.0, 1.0, 1e-10);
    const double y_max = std::log((obs.z_upper() - x) / eps);
    const double far_part = integrate(
        [&](double y) {
            const double w = std::exp(y);
            const double denom = std::sqrt(w) + std::sqrt(w - 1.0);
            return obs.g(x + eps * w) * w / (denom * denom);
        },
        0.0, y_max, 1e-9);
    return (near_part + far_part) / (std::log(1.0 / eps) * gx / 4.0);
}

GpLimit::GpLimit(ObservationModel obs, double x, double x_lo, double x_hi, int grid_points,
                 double margin)
    : obs_(std::move(obs)), x_(x), x_lo_(x_lo), x_hi_(x_hi) {
    if (!(x_lo <= x && x <= x_hi))
        throw std::invalid_argument("gp limit: anchor must lie in the flat interval");
    if (grid_points < 5) throw std::invalid_argument("gp limit: grid too coarse");
    const double f_lo = obs_.model().cdf(x_lo);
    const double f_hi = obs_.model().cdf(x_hi);
    if (std::fabs(f_hi - f_lo) > 1e-12)
        throw std::invalid_argument("gp limit: F is not constant on the flat interval");

    const double lo = std::max(x_lo - margin, 0.0);
    const double hi = x_hi + margin;
    grid_.resize(grid_points);
    for (int i = 0; i < grid_points; ++i)
        grid_[i] = lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1);
    // Snap the nearest grid point to the anchor.
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid_.size(); ++i)
        if (std::fabs(grid_[i] - x) < std::fabs(grid_[best] - x)) best = i;
    grid_[best] = x;
    anchor_idx_ = best;
    for (std::size_t i = 0; i < grid_.size(); ++i)
        if (grid_[i] >= x_lo_ && grid_[i] <= x_hi_) flat_idx_.push_back(i);
    if (flat_idx_.size() < 3)
        throw std::invalid_argument("gp limit: flat interval holds too few grid points");

    u_half_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) u_half_[i] = 0.5 * obs_.u_exact(grid_[i]);

    // Anchored kernel K_x(s,t) = Cov(phi_s - phi_x, phi_t - phi_x), built
    // entry by entry as a single quadrature so machine noise stays well
    // under the eigenvalue floor (assembling it from four base-kernel
    // evaluations loses too many digits on fine grids).
    const std::size_t m = grid_.size();
    cov_.resize(m, m);
    const double ux_half = u_half_[anchor_idx_];
    for (std::size_t i = 0; i < m; ++i) {
        const double si = grid_[i];
        for (std::size_t j = 0; j <= i; ++j) {
            const double tj = grid_[j];
            double v = 0.0;
            if (i != anchor_idx_ && j != anchor_idx_) {
                const double cross = obs_.expect_z(
                    [&](double z) {
                        return (phi(z, si) - phi(z, x_)) * (phi(z, tj) - phi(z, x_));
                    },
                    {si, tj, x_}, 3e-12);
                v = cross - (u_half_[i] - ux_half) * (u_half_[j] - ux_half);
            }
            cov_(i, j) = v;
            cov_(j, i) = v;
        }
    }
    // U_n averages 2 phi per observation, so sqrt(n)(U_n - U) converges to
    // twice the phi-covariance process: the simulated process carries 4x the
    // anchored phi-kernel. (The plain phi form stays available through
    // base_kernel / anchored_kernel.)
    cov_ *= 4.0;

    // PSD sanity before jitter.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
    const double floor = -1e-8 * cov_.trace() / static_cast<double>(m);
    if (es.eigenvalues().minCoeff() < floor)
        throw std::runtime_error("gp limit: covariance fails the eigenvalue floor");

    // Factor the anchor-free submatrix; paths at the anchor are set to 0.
    Eigen::MatrixXd reduced(m - 1, m - 1);
    for (std::size_t i = 0, ri = 0; i < m; ++i) {
        if (i == anchor_idx_) continue;
        for (std::size_t j = 0, rj = 0; j < m; ++j) {
            if (j == anchor_idx_) continue;
            reduced(ri, rj) = cov_(i, j);
            ++rj;
        }
        ++ri;
    }
    double jitter = 1e-10 * reduced.trace() / static_cast<double>(m - 1);
    bool ok = false;
    for (int attempt = 0; attempt <= 3 && !ok; ++attempt) {
        Eigen::MatrixXd trial = reduced;
        if (attempt > 0) {
            trial.diagonal().array() += jitter;
            jitter *= 10.0;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) {
            factor_ = llt.matrixL();
            ok = true;
        }
    }
    if (!ok) throw std::runtime_error("gp limit: covariance factorization failed after jitter");
}

double GpLimit::base_kernel(double s, double t) const { return gp_base_kernel(obs_, s, t); }

double GpLimit::anchored_kernel(double s, double t) const {
    return base_kernel(s, t) - base_kernel(s, x_) - base_kernel(x_, t) + base_kernel(x_, x_);
}

Eigen::MatrixXd GpLimit::sample_paths(int n_paths, std::uint64_t seed, int threads) const {
    if (n_paths < 1) throw std::invalid_argument("sample_paths: need n_paths >= 1");
    const std::size_t m = grid_.size();
    Eigen::MatrixXd paths(n_paths, m);
    parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t p) {
        RngStream rng(seed, p);
        Eigen::VectorXd xi(m - 1);
        for (std::size_t i = 0; i + 1 < m; ++i) xi(i) = rng.next_normal();
        const Eigen::VectorXd y = factor_ * xi;
        for (std::size_t i = 0, ri = 0; i < m; ++i) {
            if (i == anchor_idx_) {
                paths(p, i) = 0.0;
            } else {
                paths(p, i) = y(ri);
                ++ri;
            }
        }
    });
    return paths;
}

double GpLimit::l_x_of_path(std::span<const double> path) const {
    std::vector<double> xs, ys;
    xs.reserve(flat_idx_.size());
    ys.reserve(flat_idx_.size());
    for (std::size_t j : flat_idx_) {
        xs.push_back(grid_[j]);
        ys.push_back(path[j]);
    }
    if (!(x_ < xs.back()))
        throw std::invalid_argument("l_x: anchor must be interior to the flat interval");
    const ConcaveMajorant hull = concave_majorant_of(xs, ys);
    // Right derivative at the anchor; the hull ends at x_hi, beyond which
    // slope_at would report 0, but the anchor is interior.
    if (x_ >= hull.knots.back()) return hull.slopes.back();
    return hull.slope_at(x_);
}

bool GpLimit::l_x_leq_by_switch(std::span<const double> path, double a) const {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = flat_idx_.front();
    for (std::size_t j : flat_idx_) {
        const double v = path[j] - a * grid_[j];
        if (v > best) {
            best = v;
            arg = j;
        }
    }
    return grid_[arg] <= x_;
}

LxSample GpLimit::l_x_distribution(int n_paths, std::uint64_t seed, int threads) const {
    const Eigen::MatrixXd paths = sample_paths(n_paths, seed, threads);
    LxSample out;
    out.seed = seed;
    out.values.resize(n_paths);
    std::vector<double> row(grid_.size());
    for (int p = 0; p < n_paths; ++p) {
        for (std::size_t i = 0; i < grid_.size(); ++i) row[i] = paths(p, i);
        out.values[p] = l_x_of_path(row);
    }
    return out;
}

}  // namespace wicksell

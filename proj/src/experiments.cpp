#include "wicksell/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wicksell/parallel.hpp"
#include "wicksell/stats.hpp"

namespace wicksell {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) {
    std::uint64_t state = seed ^ (0xD1B54A32D192ED03ULL * (purpose + 1));
    return splitmix64(state);
}

std::pair<double, double> flat_interval_around(const CdfModel& model, double x) {
    if (model.kind() != CdfModel::Kind::kFlatMixture)
        throw std::invalid_argument("model is not flat at x=" + std::to_string(x));
    // Flat stretches are [0, first.lo], the gaps between pieces, and
    // [last.hi, infinity).
    const auto breaks = model.density_breakpoints();  // lo,hi per piece, sorted
    double lo = 0.0;
    for (std::size_t j = 0; j + 1 < breaks.size(); j += 2) {
        const double piece_lo = breaks[j];
        const double piece_hi = breaks[j + 1];
        if (x < piece_lo) return {lo, piece_lo};
        if (x <= piece_hi && x >= piece_lo && model.density(0.5 * (piece_lo + piece_hi)) > 0.0) {
            if (x == piece_lo) return {lo, piece_lo};
            throw std::invalid_argument("model is not flat at x=" + std::to_string(x));
        }
        lo = piece_hi;
    }
    return {lo, std::numeric_limits<double>::infinity()};
}

std::vector<EstimateRow> run_estimate(const SampleSet& sample,
                                      const std::vector<double>& grid) {
    const ConcaveMajorant maj = lcm(sample);
    std::vector<EstimateRow> rows;
    rows.reserve(grid.size());
    for (double x : grid) {
        EstimateRow row;
        row.x = x;
        row.f_hat = f_hat(maj, x);
        row.v_hat = v_hat(maj, x);
        try {
            row.f_naive = f_naive(sample, x);
        } catch (const std::invalid_argument&) {
            row.f_naive = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }
    return rows;
}

McVarianceReport run_mc_variance(const McVarianceConfig& config) {
    if (config.n < 1 || config.reps < 1)
        throw std::invalid_argument("mc-variance: n and reps must be >= 1");
    const ObservationModel obs(CdfModel::parse(config.model_spec));
    const ForwardSampler sampler(obs);
    const double fx = obs.model().cdf(config.x);
    const double scale = std::sqrt(static_cast<double>(config.n) /
                                   std::log(static_cast<double>(config.n)));

    McVarianceReport report;
    report.err_iie.resize(config.reps);
    report.err_naive.resize(config.reps);
    parallel_for(config.reps, config.threads, [&](std::size_t r) {
        try {
            const SampleSet ds = sampler.sample_dataset(config.n, config.seed, r);
            const ConcaveMajorant maj = lcm(ds);
            report.err_iie[r] = scale * (f_hat(maj, config.x) - fx);
            report.err_naive[r] = scale * (f_naive(ds, config.x) - fx);
        } catch (const std::exception& e) {
            throw std::runtime_error("replication " + std::to_string(r) + ": " + e.what());
        }
    });
    report.theory_variance = efficient_variance(obs, config.x, config.gamma0, config.gammax);
    report.has_variance = config.reps >= 2;
    if (report.has_variance) {
        report.var_iie = variance(report.err_iie);
        report.var_naive = variance(report.err_naive);
        report.ratio_naive_iie = report.var_naive / report.var_iie;
    }
    if (config.reps >= 3) report.ks = ks_fit_normal(report.err_iie);
    return report;
}

namespace {

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxy / sxx;
}

}  // namespace

FlatRateReport run_flat_rate(const FlatRateConfig& config) {
    const ObservationModel obs(CdfModel::parse(config.model_spec));
    const auto [lo, hi] = flat_interval_around(obs.model(), config.x);
    if (!std::isfinite(hi))
        throw std::invalid_argument("flat-rate: x lies in the unbounded right plateau");
    const ForwardSampler sampler(obs);
    const double vx = obs.v_exact(config.x);

    FlatRateReport report;
    report.flat_lo = lo;
    report.flat_hi = hi;
    report.ns = config.ns;
    std::vector<double> log_n, log_sd, log_sd_scaled;
    for (std::size_t ni = 0; ni < config.ns.size(); ++ni) {
        const std::size_t n = config.ns[ni];
        const std::uint64_t sub = derive_seed(config.seed, ni);
        std::vector<double> dev(config.reps);
        parallel_for(config.reps, config.threads, [&](std::size_t r) {
            const SampleSet ds = sampler.sample_dataset(n, sub, r);
            dev[r] = v_hat(lcm(ds), config.x) - vx;
        });
        const double sd = std::sqrt(variance(dev));
        report.sd_raw.push_back(sd);
        report.sd_scaled.push_back(sd * std::sqrt(static_cast<double>(n)));
        log_n.push_back(std::log(static_cast<double>(n)));
        log_sd.push_back(std::log(sd));
        log_sd_scaled.push_back(std::log(report.sd_scaled.back()));
    }
    if (config.ns.size() >= 2) {
        report.slope_raw = ols_slope(log_n, log_sd);
        report.slope_scaled = ols_slope(log_n, log_sd_scaled);
    }

    // Distributional check at n_ks against simulated L_x draws.
    const std::uint64_t seed_ks = derive_seed(config.seed, 1000);
    report.scaled_errors.resize(config.reps_ks);
    const double root_nks = std::sqrt(static_cast<double>(config.n_ks));
    parallel_for(config.reps_ks, config.threads, [&](std::size_t r) {
        const SampleSet ds = sampler.sample_dataset(config.n_ks, seed_ks, r);
        report.scaled_errors[r] = root_nks * (v_hat(lcm(ds), config.x) - vx);
    });
    const GpLimit gp(obs, config.x, lo, hi, config.grid_points);
    report.lx_draws =
        gp.l_x_distribution(config.lx_paths, derive_seed(config.seed, 2000), config.threads)
            .values;
    report.ks_vs_lx = two_sample_ks(report.scaled_errors, report.lx_draws);
    return report;
}

GpLimitReport run_gp_limit(const GpLimitConfig& config) {
    const ObservationModel obs(CdfModel::parse(config.model_spec));
    const auto [lo, hi] = flat_interval_around(obs.model(), config.x);
    if (!std::isfinite(hi))
        throw std::invalid_argument("gp-limit: x lies in the unbounded right plateau");
    const GpLimit gp(obs, config.x, lo, hi, config.grid_points, config.margin);
    GpLimitReport report;
    report.grid = gp.grid();
    report.flat_lo = lo;
    report.flat_hi = hi;
    report.kernel = gp.covariance();
    report.paths = gp.sample_paths(config.n_paths, config.seed, config.threads);
    report.lx = gp.l_x_distribution(config.lx_paths, derive_seed(config.seed, 2000),
                                    config.threads);
    report.diagnostics = ks_fit_normal(report.lx.values);
    return report;
}

LanCheckReport run_lan_check(const LanCheckConfig& config) {
    const ObservationModel obs(CdfModel::parse(config.model_spec));
    const PerturbationPath path(obs, config.x, config.h, static_cast<double>(config.n),
                                config.gamma0, config.gammax, config.eta);

    // The perturbed cdf is only eventually monotone; the experiment only
    // makes sense at an n where it already is.
    std::vector<double> grid(10000);
    const double zu = obs.model().support_upper();
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = zu * 1.05 * static_cast<double>(i + 1) / grid.size();
    if (auto bad = path.check_monotone(grid))
        throw std::runtime_error(
            "lan-check: perturbed cdf decreases near u=" + std::to_string(*bad) +
            "; n=" + std::to_string(config.n) + " is below the monotonicity threshold, "
            "increase n or shrink h");

    const ForwardSampler sampler(obs);
    LanCheckReport report;
    report.logliks.resize(config.reps);
    report.deltas.resize(config.reps);
    parallel_for(config.reps, config.threads, [&](std::size_t r) {
        try {
            const SampleSet ds = sampler.sample_dataset(config.n, config.seed, r);
            report.logliks[r] = path.loglik_sum(ds);
            report.deltas[r] = path.delta_n(ds);
        } catch (const std::exception& e) {
            throw std::runtime_error("replication " + std::to_string(r) + ": " + e.what());
        }
    });

    report.j = j_matrix(obs, config.x, config.gamma0, config.gammax);
    const double h1 = config.h.first, h2 = config.h.second;
    report.theory_var = h1 * h1 * report.j.d0 + h2 * h2 * report.j.d1;
    report.theory_mean = -0.5 * report.theory_var;
    report.loglik_mean = mean(report.logliks);
    if (config.reps >= 2) report.loglik_var = variance(report.logliks);

    for (const auto& d : report.deltas) {
        report.delta_mean[0] += d[0];
        report.delta_mean[1] += d[1];
    }
    report.delta_mean[0] /= config.reps;
    report.delta_mean[1] /= config.reps;
    if (config.reps >= 2) {
        for (const auto& d : report.deltas) {
            const double a = d[0] - report.delta_mean[0];
            const double b = d[1] - report.delta_mean[1];
            report.delta_cov[0][0] += a * a;
            report.delta_cov[0][1] += a * b;
            report.delta_cov[1][1] += b * b;
        }
        const double denom = config.reps - 1;
        report.delta_cov[0][0] /= denom;
        report.delta_cov[0][1] /= denom;
        report.delta_cov[1][1] /= denom;
        report.delta_cov[1][0] = report.delta_cov[0][1];
    }

    report.ladder_ns = config.ladder_ns;
    report.ladder_values = hadamard_ladder(obs, config.x, config.h, config.gamma0,
                                           config.gammax, config.ladder_ns, config.eta);
    const auto psi = psi_dot(obs.model(), config.x, config.gamma0, config.gammax);
    report.ladder_limit = h1 * psi.first + h2 * psi.second;
    report.eta_used = path.eta();
    return report;
}

}  // namespace wicksell

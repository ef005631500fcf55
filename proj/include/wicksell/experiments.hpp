#ifndef WICKSELL_EXPERIMENTS_HPP_
#define WICKSELL_EXPERIMENTS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wicksell/gp_limit.hpp"
#include "wicksell/isotonic.hpp"
#include "wicksell/lan_path.hpp"
#include "wicksell/sampler.hpp"

namespace wicksell {

/// Deterministic per-purpose sub-seed so different experiment stages never
/// share replication streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose);

/// Maximal interval around x on which F is constant; throws if F is not
/// locally constant at x (only flat mixtures have such intervals here).
std::pair<double, double> flat_interval_around(const CdfModel& model, double x);

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateRow {
    double x = 0.0;
    double f_hat = 0.0;
    double v_hat = 0.0;
    double f_naive = 0.0;  // NaN where x collides with an observation
};

std::vector<EstimateRow> run_estimate(const SampleSet& sample, const std::vector<double>& grid);

// ---------------------------------------------------------------------------
// mc-variance
// ---------------------------------------------------------------------------

struct McVarianceConfig {
    std::string model_spec = "uniform01";
    double x = 0.5;
    std::size_t n = 1000;
    int reps = 100;
    std::uint64_t seed = 1;
    double gamma0 = 1.0;
    double gammax = 1.0;
    int threads = 1;
};

struct McVarianceReport {
    std::vector<double> err_iie;    // sqrt(n/log n) (F_hat(x) - F(x)) per replication
    std::vector<double> err_naive;  // same for the plug-in estimator
    bool has_variance = false;      // false when reps == 1
    double var_iie = 0.0;
    double var_naive = 0.0;
    double ratio_naive_iie = 0.0;
    double theory_variance = 0.0;  // efficient variance at the declared gammas
    NormalFit ks;                  // fitted-normal KS of the IIE errors
};

McVarianceReport run_mc_variance(const McVarianceConfig& config);

// ---------------------------------------------------------------------------
// flat-rate
// ---------------------------------------------------------------------------

struct FlatRateConfig {
    std::string model_spec = "flat:0.5,2,0.4;3,4,0.4";
    double x = 2.5;
    std::vector<std::size_t> ns = {1000, 10000, 100000};
    int reps = 500;
    std::size_t n_ks = 10000;
    int reps_ks = 2000;
    int lx_paths = 2000;
    int grid_points = 241;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct FlatRateReport {
    std::vector<std::size_t> ns;
    std::vector<double> sd_raw;     // sd of V_hat(x) - V(x) per ladder point
    std::vector<double> sd_scaled;  // sd of sqrt(n) (V_hat(x) - V(x))
    double slope_raw = 0.0;         // log-log OLS slope of sd_raw vs n
    double slope_scaled = 0.0;
    std::vector<double> scaled_errors;  // sqrt(n_ks) (V_hat - V), reps_ks draws
    std::vector<double> lx_draws;
    double ks_vs_lx = 0.0;
    double flat_lo = 0.0, flat_hi = 0.0;
};

FlatRateReport run_flat_rate(const FlatRateConfig& config);

// ---------------------------------------------------------------------------
// gp-limit
// ---------------------------------------------------------------------------

struct GpLimitConfig {
    std::string model_spec = "flat:0.5,2,0.4;3,4,0.4";
    double x = 2.5;
    int grid_points = 241;
    double margin = 0.25;
    int n_paths = 200;
    int lx_paths = 2000;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct GpLimitReport {
    std::vector<double> grid;
    double flat_lo = 0.0, flat_hi = 0.0;
    Eigen::MatrixXd kernel;  // anchored covariance on the grid
    Eigen::MatrixXd paths;   // n_paths x grid
    LxSample lx;
    NormalFit diagnostics;  // fitted-normal KS of the L_x draws
};

GpLimitReport run_gp_limit(const GpLimitConfig& config);

// ---------------------------------------------------------------------------
// lan-check
// ---------------------------------------------------------------------------

struct LanCheckConfig {
    std::string model_spec = "uniform01";
    double x = 0.5;
    std::pair<double, double> h = {1.0, 1.0};
    std::size_t n = 100000;
    int reps = 500;
    std::uint64_t seed = 1;
    double gamma0 = 1.0;
    double gammax = 1.0;
    std::optional<double> eta;
    int threads = 1;
    std::vector<double> ladder_ns = {1e4, 1e6, 1e8, 1e10};
};

struct LanCheckReport {
    std::vector<double> logliks;
    std::vector<std::array<double, 2>> deltas;
    double loglik_mean = 0.0;
    double loglik_var = 0.0;
    double theory_mean = 0.0;  // -1/2 h'Jh
    double theory_var = 0.0;   // h'Jh
    Diag2 j;
    std::array<double, 2> delta_mean = {0.0, 0.0};
    std::array<std::array<double, 2>, 2> delta_cov = {{{0.0, 0.0}, {0.0, 0.0}}};
    std::vector<double> ladder_ns;
    std::vector<double> ladder_values;
    double ladder_limit = 0.0;  // h . psi_dot
    double eta_used = 0.0;
};

LanCheckReport run_lan_check(const LanCheckConfig& config);

}  // namespace wicksell

#endif  // WICKSELL_EXPERIMENTS_HPP_

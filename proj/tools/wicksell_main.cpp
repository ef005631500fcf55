// Command-line harness: estimation runs, forward simulation, and the Monte
// Carlo reproduction experiments, with deterministic outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wicksell/experiments.hpp"
#include "wicksell/io.hpp"
#include "wicksell/svg.hpp"

namespace {

using json = nlohmann::json;
using namespace wicksell;

std::vector<double> parse_grid(const std::string& spec) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0 ||
        hi < lo)
        throw std::invalid_argument("--grid: expected lo:hi:step with step > 0");
    std::vector<double> g;
    for (double x = lo; x <= hi + 1e-12 * step; x += step) g.push_back(x);
    return g;
}

std::pair<double, double> parse_h(const std::string& spec) {
    double h1 = 0.0, h2 = 0.0;
    if (std::sscanf(spec.c_str(), "%lf,%lf", &h1, &h2) != 2)
        throw std::invalid_argument("--h: expected h1,h2");
    return {h1, h2};
}

std::vector<std::size_t> parse_ns(const std::string& spec) {
    std::vector<std::size_t> ns;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t next = spec.find(',', pos);
        if (next == std::string::npos) next = spec.size();
        ns.push_back(static_cast<std::size_t>(std::stoull(spec.substr(pos, next - pos))));
        pos = next + 1;
    }
    if (ns.empty()) throw std::invalid_argument("--ns: expected n1,n2,...");
    return ns;
}

// Merges a JSON config file into argv form so that explicit flags override
// config values (they come later on the synthetic command line).
std::vector<std::string> merge_config_args(int argc, char** argv) {
    std::string config_path;
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (config_path.empty()) return args;
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    json cfg = json::parse(in);
    std::vector<std::string> merged;
    // Keep the subcommand (first positional) in front.
    std::size_t insert_at = 0;
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
        merged.push_back(args[0]);
        insert_at = 1;
    }
    for (const auto& [key, value] : cfg.items()) {
        if (value.is_boolean()) {
            if (value.get<bool>()) merged.push_back("--" + key);
        } else if (value.is_string()) {
            merged.push_back("--" + key + "=" + value.get<std::string>());
        } else {
            merged.push_back("--" + key + "=" + value.dump());
        }
    }
    for (std::size_t i = insert_at; i < args.size(); ++i) merged.push_back(args[i]);
    return merged;
}

json normal_fit_json(const NormalFit& fit) {
    return json{{"mean", fit.mean}, {"sd", fit.sd}, {"ks", fit.ks}, {"p", fit.p_value}};
}

void write_json(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

struct CommonOpts {
    std::string model = "uniform01";
    double x = 0.5;
    std::size_t n = 1000;
    int reps = 100;
    std::uint64_t seed = 1;
    std::string out = "out";
    std::string format = "csv";
    int threads = 1;
};

// All options take the last occurrence so config-file values can be
// overridden by explicit flags.
CLI::Option* opt(CLI::Option* o) {
    return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

int run(int argc, char** argv) {
    CLI::App app{"Isotonic estimation in Wicksell's sphere-unfolding problem"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // ------------------------------------------------------------------ estimate
    auto* est = app.add_subcommand("estimate", "Estimate F from observations");
    std::string est_in, est_grid;
    bool est_squared = false;
    CommonOpts eo;
    opt(est->add_option("--in", est_in, "input CSV of observed circle radii"));
    opt(est->add_option("--model", eo.model, "simulate input from this model instead"));
    opt(est->add_option("--n", eo.n, "sample size when simulating"));
    opt(est->add_option("--seed", eo.seed, "RNG seed"));
    opt(est->add_option("--grid", est_grid, "evaluation grid lo:hi:step"));
    opt(est->add_option("--out", eo.out, "output CSV path"));
    opt(est->add_option("--format", eo.format, "csv or svg (svg adds a plot)"));
    est->add_flag("--squared", est_squared, "input values are already squared radii");

    // ------------------------------------------------------------------ simulate
    auto* sim = app.add_subcommand("simulate", "Draw observations from a model");
    CommonOpts so;
    opt(sim->add_option("--model", so.model, "model spec"));
    opt(sim->add_option("--n", so.n, "sample size"));
    opt(sim->add_option("--seed", so.seed, "RNG seed"));
    opt(sim->add_option("--out", so.out, "output CSV path"));

    // ------------------------------------------------------------------ mc-variance
    auto* mcv = app.add_subcommand("mc-variance", "Monte Carlo check of the CLT variance");
    McVarianceConfig mc;
    std::string mc_out = "mc_variance.json", mc_format = "json";
    opt(mcv->add_option("--model", mc.model_spec, "model spec"));
    opt(mcv->add_option("--x", mc.x, "estimation point"));
    opt(mcv->add_option("--n", mc.n, "sample size per replication"));
    opt(mcv->add_option("--reps", mc.reps, "replications"));
    opt(mcv->add_option("--seed", mc.seed, "RNG seed"));
    opt(mcv->add_option("--gamma0", mc.gamma0, "declared smoothness exponent at 0"));
    opt(mcv->add_option("--gammax", mc.gammax, "declared smoothness exponent at x"));
    opt(mcv->add_option("--threads", mc.threads, "replication-level threads"));
    opt(mcv->add_option("--out", mc_out, "output path"));
    opt(mcv->add_option("--format", mc_format, "json or csv"));

    // ------------------------------------------------------------------ flat-rate
    auto* fr = app.add_subcommand("flat-rate", "Rate and limit law in the flat regime");
    FlatRateConfig fc;
    std::string fr_ns = "1000,10000,100000", fr_out = "flat_rate.json";
    opt(fr->add_option("--model", fc.model_spec, "model spec (flat at x)"));
    opt(fr->add_option("--x", fc.x, "estimation point inside the plateau"));
    opt(fr->add_option("--ns", fr_ns, "ladder sample sizes n1,n2,..."));
    opt(fr->add_option("--reps", fc.reps, "replications per ladder point"));
    opt(fr->add_option("--n-ks", fc.n_ks, "sample size for the limit-law KS check"));
    opt(fr->add_option("--reps-ks", fc.reps_ks, "replications for the KS check"));
    opt(fr->add_option("--lx-paths", fc.lx_paths, "simulated L_x draws"));
    opt(fr->add_option("--seed", fc.seed, "RNG seed"));
    opt(fr->add_option("--threads", fc.threads, "replication-level threads"));
    opt(fr->add_option("--out", fr_out, "output JSON path"));

    // ------------------------------------------------------------------ gp-limit
    auto* gp = app.add_subcommand("gp-limit", "Simulate the limiting Gaussian process");
    GpLimitConfig gc;
    std::string gp_out = "gp", gp_format = "csv";
    opt(gp->add_option("--model", gc.model_spec, "model spec (flat at x)"));
    opt(gp->add_option("--x", gc.x, "anchor point inside the plateau"));
    opt(gp->add_option("--grid-points", gc.grid_points, "grid resolution"));
    opt(gp->add_option("--margin", gc.margin, "grid margin beyond the plateau"));
    opt(gp->add_option("--paths", gc.n_paths, "number of stored sample paths"));
    opt(gp->add_option("--lx-paths", gc.lx_paths, "number of L_x draws"));
    opt(gp->add_option("--seed", gc.seed, "RNG seed"));
    opt(gp->add_option("--threads", gc.threads, "path-level threads"));
    opt(gp->add_option("--out", gp_out, "output path prefix"));
    opt(gp->add_option("--format", gp_format, "csv or svg (svg adds plots)"));

    // ------------------------------------------------------------------ lan-check
    auto* lan = app.add_subcommand("lan-check", "Verify the LAN expansion numerically");
    lan->set_help_flag("--help", "print help");  // frees -h for the direction flag
    LanCheckConfig lc;
    std::string lan_h = "1,1", lan_out = "lan_check.json";
    double lan_eta = -1.0;
    opt(lan->add_option("--model", lc.model_spec, "model spec"));
    opt(lan->add_option("--x", lc.x, "perturbation anchor"));
    opt(lan->add_option("--h", lan_h, "perturbation direction h1,h2"));
    opt(lan->add_option("--n", lc.n, "sample size per replication"));
    opt(lan->add_option("--reps", lc.reps, "replications"));
    opt(lan->add_option("--seed", lc.seed, "RNG seed"));
    opt(lan->add_option("--gamma0", lc.gamma0, "smoothness exponent at 0"));
    opt(lan->add_option("--gammax", lc.gammax, "smoothness exponent at x"));
    opt(lan->add_option("--eta", lan_eta, "window width (default (log n)^-1/2)"));
    opt(lan->add_option("--threads", lc.threads, "replication-level threads"));
    opt(lan->add_option("--out", lan_out, "output JSON path"));

    auto merged = merge_config_args(argc, argv);
    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& a : merged) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (est->parsed()) {
        SampleSet sample;
        if (!est_in.empty()) {
            std::vector<double> vals = read_observation_csv(est_in);
            if (!est_squared)
                for (double& v : vals) v = v * v;
            sample = ingest_sample(std::move(vals), "ingested:" + est_in);
        } else {
            const ObservationModel obs(CdfModel::parse(eo.model));
            sample = ForwardSampler(obs).sample_dataset(eo.n, eo.seed);
        }
        std::vector<double> grid;
        if (!est_grid.empty()) {
            grid = parse_grid(est_grid);
        } else {
            const double top = sample.values.back() * 1.05;
            for (int i = 0; i <= 100; ++i) grid.push_back(top * i / 100.0);
        }
        const auto rows = run_estimate(sample, grid);
        std::vector<std::vector<double>> cells;
        for (const auto& r : rows) cells.push_back({r.x, r.f_hat, r.v_hat, r.f_naive});
        write_csv(eo.out, "x,f_hat,v_hat,f_naive", cells);
        if (eo.format == "svg") {
            PlotSeries fhat{"f_hat", {}, PlotSeries::Style::kStep};
            PlotSeries fnaive{"f_naive", {}, PlotSeries::Style::kLine};
            for (const auto& r : rows) {
                fhat.points.push_back({r.x, r.f_hat});
                if (std::isfinite(r.f_naive)) fnaive.points.push_back({r.x, r.f_naive});
            }
            emit_plot({fhat, fnaive}, eo.out + ".svg", "estimated cdf", "x", "F");
        }
        return 0;
    }

    if (sim->parsed()) {
        const ObservationModel obs(CdfModel::parse(so.model));
        const SampleSet sample = ForwardSampler(obs).sample_dataset(so.n, so.seed);
        std::vector<std::vector<double>> cells;
        for (double z : sample.values) cells.push_back({z});
        write_csv(so.out, "z", cells);
        return 0;
    }

    if (mcv->parsed()) {
        const McVarianceReport r = run_mc_variance(mc);
        if (mc_format == "csv") {
            std::vector<std::vector<double>> cells;
            for (std::size_t i = 0; i < r.err_iie.size(); ++i)
                cells.push_back({static_cast<double>(i), r.err_iie[i], r.err_naive[i]});
            write_csv(mc_out, "rep,err_iie,err_naive", cells);
        } else {
            json j{{"model", mc.model_spec},
                   {"x", mc.x},
                   {"n", mc.n},
                   {"reps", mc.reps},
                   {"seed", mc.seed},
                   {"gamma0", mc.gamma0},
                   {"gammax", mc.gammax},
                   {"theory_variance", r.theory_variance},
                   {"err_iie", r.err_iie},
                   {"err_naive", r.err_naive}};
            if (r.has_variance) {
                j["var_iie"] = r.var_iie;
                j["var_naive"] = r.var_naive;
                j["ratio_naive_iie"] = r.ratio_naive_iie;
                j["ks_iie_vs_normal"] = normal_fit_json(r.ks);
            }
            write_json(mc_out, j);
        }
        return 0;
    }

    if (fr->parsed()) {
        fc.ns = parse_ns(fr_ns);
        const FlatRateReport r = run_flat_rate(fc);
        json j{{"model", fc.model_spec},
               {"x", fc.x},
               {"flat_interval", {r.flat_lo, r.flat_hi}},
               {"ns", r.ns},
               {"reps", fc.reps},
               {"seed", fc.seed},
               {"sd_raw", r.sd_raw},
               {"sd_scaled", r.sd_scaled},
               {"slope_raw", r.slope_raw},
               {"slope_scaled", r.slope_scaled},
               {"n_ks", fc.n_ks},
               {"reps_ks", fc.reps_ks},
               {"lx_paths", fc.lx_paths},
               {"ks_vs_lx", r.ks_vs_lx}};
        write_json(fr_out, j);
        return 0;
    }

    if (gp->parsed()) {
        const GpLimitReport r = run_gp_limit(gc);
        // Kernel matrix: header s, then one row per grid point.
        {
            std::vector<std::vector<double>> cells;
            for (std::size_t i = 0; i < r.grid.size(); ++i) {
                std::vector<double> row{r.grid[i]};
                for (std::size_t jj = 0; jj < r.grid.size(); ++jj)
                    row.push_back(r.kernel(i, jj));
                cells.push_back(std::move(row));
            }
            write_csv(gp_out + "_kernel.csv", "s", cells);
        }
        {
            std::string header = "s";
            for (int p = 0; p < gc.n_paths; ++p) header += ",path_" + std::to_string(p);
            std::vector<std::vector<double>> cells;
            for (std::size_t i = 0; i < r.grid.size(); ++i) {
                std::vector<double> row{r.grid[i]};
                for (int p = 0; p < gc.n_paths; ++p) row.push_back(r.paths(p, i));
                cells.push_back(std::move(row));
            }
            write_csv(gp_out + "_paths.csv", header, cells);
        }
        {
            std::vector<std::vector<double>> cells;
            for (double v : r.lx.values) cells.push_back({v});
            write_csv(gp_out + "_lx.csv", "l_x", cells);
        }
        write_json(gp_out + "_diag.json", normal_fit_json(r.diagnostics));
        if (gp_format == "svg") {
            std::vector<PlotSeries> ps;
            const int shown = std::min(gc.n_paths, 15);
            for (int p = 0; p < shown; ++p) {
                PlotSeries s{"path " + std::to_string(p), {}, PlotSeries::Style::kLine};
                for (std::size_t i = 0; i < r.grid.size(); ++i)
                    s.points.push_back({r.grid[i], r.paths(p, i)});
                ps.push_back(std::move(s));
            }
            emit_plot(ps, gp_out + "_paths.svg", "limiting process sample paths", "s", "Z_x");
        }
        return 0;
    }

    if (lan->parsed()) {
        lc.h = parse_h(lan_h);
        if (lan_eta > 0.0) lc.eta = lan_eta;
        const LanCheckReport r = run_lan_check(lc);
        json j{{"model", lc.model_spec},
               {"x", lc.x},
               {"n", lc.n},
               {"reps", lc.reps},
               {"seed", lc.seed},
               {"h", {lc.h.first, lc.h.second}},
               {"gamma0", lc.gamma0},
               {"gammax", lc.gammax},
               {"eta", r.eta_used},
               {"loglik_mean", r.loglik_mean},
               {"loglik_var", r.loglik_var},
               {"theory_mean", r.theory_mean},
               {"theory_var", r.theory_var},
               {"J", {r.j.d0, r.j.d1}},
               {"delta_mean", r.delta_mean},
               {"delta_cov",
                {{r.delta_cov[0][0], r.delta_cov[0][1]},
                 {r.delta_cov[1][0], r.delta_cov[1][1]}}},
               {"ladder_ns", r.ladder_ns},
               {"ladder_values", r.ladder_values},
               {"ladder_limit", r.ladder_limit}};
        write_json(lan_out, j);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
}

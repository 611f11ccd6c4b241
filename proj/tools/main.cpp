// Configuration-driven front end: one binary, one `run` subcommand, the
// experiment tag in the config selects what happens.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergolang/config.hpp"
#include "ergolang/diagnostics.hpp"
#include "ergolang/errors.hpp"
#include "ergolang/lyapunov.hpp"
#include "ergolang/orbit.hpp"
#include "ergolang/potential.hpp"
#include "ergolang/report.hpp"
#include "ergolang/simulate.hpp"

namespace {

using ergolang::ExperimentConfig;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitAssertFailed = 2;

template <class T>
T param_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

ergolang::ValidatedSpec validate_from(const ExperimentConfig& c) {
    return c.allow_marginal_exponent ? ergolang::validate_spec_marginal(c.potential)
                                     : ergolang::validate_spec(c.potential);
}

std::string out_path(const ExperimentConfig& c, const std::string& name) {
    return c.output.directory + "/" + name;
}

struct RunResult {
    bool pass = true;
    std::string line;   // one-line summary
    json payload;
};

RunResult run_tabulate_lambda(const ExperimentConfig& c) {
    const auto spec = validate_from(c);
    const auto& p = c.experiment_params;
    const auto es = ergolang::eta_star(spec);
    const ergolang::LambdaTable table(spec, es, c.quadrature);

    const double eta_min = param_or(p, "eta_min", es.value);
    const double eta_max = param_or(p, "eta_max", 1e6 * es.value);
    const int count = param_or(p, "count", 64);

    std::string csv = "eta,lambda_of_eta,period,A_P2\n";
    for (int i = 0; i < count; ++i) {
        const double eta = eta_min * std::pow(eta_max / eta_min, i / (count - 1.0));
        const auto avg = ergolang::orbit_average(
            spec, [](double, double pp) { return pp * pp; }, eta, 1.0, c.quadrature);
        csv += ergolang::format_double(eta) + "," + ergolang::format_double(table(eta)) +
               "," + ergolang::format_double(avg.period) + "," +
               ergolang::format_double(avg.mean) + "\n";
    }
    if (c.output.write_csv) ergolang::write_text_file(out_path(c, "lambda_table.csv"), csv);

    RunResult r;
    r.payload = {{"eta_star", es.value},
                 {"lambda_star", ergolang::lambda_star(spec.alpha1())},
                 {"lambda_at_top", table(eta_max)},
                 {"rows", count}};
    char buf[160];
    std::snprintf(buf, sizeof(buf), "tabulate-lambda: %d rows, Lambda(top)=%.6f -> %s", count,
                  table(eta_max), out_path(c, "lambda_table.csv").c_str());
    r.line = buf;
    return r;
}

RunResult run_certify(const ExperimentConfig& c) {
    const auto spec = validate_from(c);
    ergolang::LyapunovModel model(spec, c.langevin, c.quadrature);
    ergolang::DriftGrid grid;
    const auto& p = c.experiment_params;
    grid.h_max = param_or(p, "h_max", 1e6);
    grid.shells = param_or(p, "shells", 64);
    grid.angles = param_or(p, "angles", 128);
    const double delta = param_or(p, "delta", 0.2);
    const std::string expect = param_or<std::string>(p, "expect", "valid");

    const auto cert = model.drift_certificate(grid, delta);

    json j = {{"delta", cert.delta},
              {"C", cert.C},
              {"delta_H", cert.delta_H},
              {"C_H", cert.C_H},
              {"grid", cert.grid_description},
              {"worst_point", {{"q", cert.worst_point.q}, {"p", cert.worst_point.p}}},
              {"worst_ratio", cert.worst_ratio},
              {"boundary_growth", cert.boundary_growth},
              {"valid", cert.valid}};
    ergolang::write_text_file(out_path(c, "certificate.json"), j.dump(2) + "\n");

    RunResult r;
    r.payload = j;
    const bool expected_valid = expect == "valid";
    r.pass = cert.valid == expected_valid;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "certify: %s (C=%.4g, delta_H=%.3f, C_H=%.4g) expected %s -> %s",
                  cert.valid ? "VALID" : "BOUNDARY-GROWTH", cert.C, cert.delta_H, cert.C_H,
                  expect.c_str(), r.pass ? "pass" : "FAIL");
    r.line = buf;
    return r;
}

RunResult run_decay(const ExperimentConfig& c) {
    const auto spec = validate_from(c);
    const auto& p = c.experiment_params;
    const double h0 = param_or(p, "h0", 1e4);
    const int n_paths = param_or(p, "n_paths", 64);
    const double t_end = param_or(p, "t_end", 0.0);
    const double tolerance = param_or(p, "tolerance", 0.10);
    const bool deterministic = param_or(p, "deterministic", false);

    const double lam_star = ergolang::lambda_star(spec.alpha1());
    const double expected = -c.langevin.gamma * lam_star;

    RunResult r;
    if (deterministic) {
        const auto fit = ergolang::deterministic_decay_check(spec, c.langevin.gamma, h0,
                                                             c.integrator);
        r.pass = std::abs(fit.slope - expected) <= tolerance * std::abs(expected);
        r.payload = {{"slope", fit.slope},
                     {"expected", expected},
                     {"stderr", fit.std_error},
                     {"tolerance", tolerance},
                     {"pass", r.pass}};
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "decay(det): slope=%.5f expected=%.5f (+-%.0f%%) -> %s", fit.slope,
                      expected, tolerance * 100, r.pass ? "pass" : "FAIL");
        r.line = buf;
        return r;
    }

    const double horizon =
        t_end > 0.0 ? t_end
                    : 1.15 * std::log(h0) / (c.langevin.gamma * lam_star);
    const auto res = ergolang::energy_decay_experiment(spec, c.langevin, h0, n_paths, horizon,
                                                       c.integrator, c.master_seed);
    r.pass = std::abs(res.fit.slope - expected) <= tolerance * std::abs(expected) &&
             res.blowups == 0;

    if (c.output.write_csv) {
        std::string csv = "t,mean_H,median_H,predicted_star,predicted_eta\n";
        for (std::size_t k = 0; k < res.times.size(); ++k) {
            csv += ergolang::format_double(res.times[k]) + "," +
                   ergolang::format_double(res.mean_h[k]) + "," +
                   ergolang::format_double(res.median_h[k]) + "," +
                   ergolang::format_double(res.predicted_star.eta[k]) + "," +
                   ergolang::format_double(res.predicted_eta.eta[k]) + "\n";
        }
        ergolang::write_text_file(out_path(c, "decay_data.csv"), csv);
    }
    if (c.output.write_overlay) {
        std::vector<double> lm(res.times.size()), lp(res.times.size());
        for (std::size_t k = 0; k < res.times.size(); ++k) {
            lm[k] = std::log(std::max(res.mean_h[k], 1e-300));
            lp[k] = std::log(std::max(res.predicted_star.eta[k], 1e-300));
        }
        ergolang::write_text_file(out_path(c, "decay_overlay.dat"),
                                  ergolang::overlay_table(res.times, lm, lp));
    }

    r.payload = {{"slope", res.fit.slope},       {"expected", expected},
                 {"stderr", res.fit.std_error},  {"window_lo", res.fit.window_lo},
                 {"window_hi", res.fit.window_hi}, {"n_paths", n_paths},
                 {"blowups", res.blowups},       {"tolerance", tolerance},
                 {"pass", r.pass}};
    char buf[200];
    std::snprintf(buf, sizeof(buf), "decay: slope=%.5f expected=%.5f (+-%.0f%%) -> %s",
                  res.fit.slope, expected, tolerance * 100, r.pass ? "pass" : "FAIL");
    r.line = buf;
    return r;
}

RunResult run_gibbs(const ExperimentConfig& c) {
    const auto spec = validate_from(c);
    const auto& p = c.experiment_params;
    ergolang::HistogramSpec bins;
    bins.nx = param_or(p, "bins_q", 128);
    bins.ny = param_or(p, "bins_p", 128);
    const double t_end = param_or(p, "t_end", 20000.0);
    const double burn_in = param_or(p, "burn_in", t_end / 10.0);
    const double interval = param_or(p, "sample_interval", 1.0);

    const auto rep = ergolang::gibbs_compare(spec, c.langevin, burn_in, t_end, bins,
                                             c.master_seed, c.integrator, interval);

    const double temp = c.langevin.temperature;
    const bool var_ok = std::abs(rep.p_variance - temp) <= 3.0 * rep.p_variance_se;
    const bool ks_ok = rep.ks_q < rep.ks_critical_1pct;
    const bool tv_ok = rep.checkpoint_tv.size() == 3 &&
                       rep.checkpoint_tv[0] > rep.checkpoint_tv[1] &&
                       rep.checkpoint_tv[1] > rep.checkpoint_tv[2];

    if (c.output.write_csv) {
        std::string csv = "checkpoint_t,tv\n";
        for (std::size_t k = 0; k < rep.checkpoint_times.size(); ++k) {
            csv += ergolang::format_double(rep.checkpoint_times[k]) + "," +
                   ergolang::format_double(rep.checkpoint_tv[k]) + "\n";
        }
        ergolang::write_text_file(out_path(c, "gibbs_checkpoints.csv"), csv);
    }

    RunResult r;
    r.pass = var_ok && ks_ok && tv_ok;
    r.payload = {{"p_variance", rep.p_variance},
                 {"p_variance_se", rep.p_variance_se},
                 {"ks_q", rep.ks_q},
                 {"ks_p", rep.ks_p},
                 {"ks_critical_1pct", rep.ks_critical_1pct},
                 {"tv", rep.tv},
                 {"checkpoint_tv", rep.checkpoint_tv},
                 {"q_mode", rep.q_mode},
                 {"mass_outside", rep.mass_outside},
                 {"n_samples", rep.n_samples},
                 {"pass", r.pass}};
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "gibbs: var(p)=%.4f (T=%.4f), KS(q)=%.4f (crit %.4f), TV %.3f->%.3f->%.3f -> %s",
                  rep.p_variance, temp, rep.ks_q, rep.ks_critical_1pct, rep.checkpoint_tv[0],
                  rep.checkpoint_tv[1], rep.checkpoint_tv[2], r.pass ? "pass" : "FAIL");
    r.line = buf;
    return r;
}

RunResult run_exp_moment(const ExperimentConfig& c) {
    const auto spec = validate_from(c);
    const auto& p = c.experiment_params;
    const double lam_star = ergolang::lambda_star(spec.alpha1());
    const double beta = param_or(p, "beta", 1.0 / c.langevin.temperature);
    const int n_paths = param_or(p, "n_paths", 256);
    const double t_end = param_or(p, "t_end", 15.0);
    const double h0 = param_or(p, "h0", 30.0);

    const auto series = ergolang::exp_moment_check(spec, c.langevin, beta, n_paths, t_end, h0,
                                                   c.master_seed, c.integrator, lam_star);
    if (c.output.write_csv) {
        std::string csv = "t,log_mean_exp_beta_H\n";
        for (std::size_t k = 0; k < series.times.size(); ++k) {
            csv += ergolang::format_double(series.times[k]) + "," +
                   ergolang::format_double(series.log_mean[k]) + "\n";
        }
        ergolang::write_text_file(out_path(c, "exp_moment.csv"), csv);
    }

    RunResult r;
    r.pass = series.bounded;
    r.payload = {{"beta", beta},           {"kappa", series.kappa},
                 {"K", series.big_k},      {"bounded", series.bounded},
                 {"n_paths", n_paths},     {"h0", h0},
                 {"pass", r.pass}};
    char buf[200];
    std::snprintf(buf, sizeof(buf), "exp-moment: beta=%.3f kappa=%.3f K=%.3g bounded=%s -> %s",
                  beta, series.kappa, series.big_k, series.bounded ? "yes" : "no",
                  r.pass ? "pass" : "FAIL");
    r.line = buf;
    return r;
}

RunResult run_minorization(const ExperimentConfig& c) {
    const auto spec = validate_from(c);
    const auto& p = c.experiment_params;
    const double eta = param_or(p, "eta", 4.0);
    const int n_paths = param_or(p, "n_paths", 20000);
    std::vector<double> horizons = param_or(p, "horizons", std::vector<double>{0.5, 1.0, 2.0, 4.0});
    const double probe_t = param_or(p, "probe_t", 2.0);
    ergolang::HistogramSpec bins;
    bins.nx = param_or(p, "bins_q", 64);
    bins.ny = param_or(p, "bins_p", 64);

    const auto est = ergolang::minorization_probe(spec, c.langevin, eta, horizons, n_paths,
                                                  bins, c.master_seed, c.integrator);

    if (c.output.write_csv) {
        std::string csv = "t,overlap\n";
        for (std::size_t k = 0; k < est.horizons.size(); ++k) {
            csv += ergolang::format_double(est.horizons[k]) + "," +
                   ergolang::format_double(est.overlap[k]) + "\n";
        }
        ergolang::write_text_file(out_path(c, "minorization.csv"), csv);
    }

    double probe_overlap = 0.0;
    for (std::size_t k = 0; k < est.horizons.size(); ++k) {
        if (std::abs(est.horizons[k] - probe_t) < 1e-12) probe_overlap = est.overlap[k];
    }
    bool monotone = true;
    for (std::size_t k = 1; k < est.overlap.size(); ++k) {
        if (est.overlap[k] < est.overlap[k - 1] - 3.0 * est.mc_error) monotone = false;
    }

    RunResult r;
    r.pass = probe_overlap > 0.0 && monotone;
    r.payload = {{"eta", eta},
                 {"horizons", est.horizons},
                 {"overlap", est.overlap},
                 {"probe_t", probe_t},
                 {"probe_overlap", probe_overlap},
                 {"mc_error", est.mc_error},
                 {"pass", r.pass}};
    char buf[200];
    std::snprintf(buf, sizeof(buf), "minorization: overlap(t=%.2g)=%.4f monotone=%s -> %s",
                  probe_t, probe_overlap, monotone ? "yes" : "no", r.pass ? "pass" : "FAIL");
    r.line = buf;
    return r;
}

RunResult run_windowed(const ExperimentConfig& c) {
    const auto spec = validate_from(c);
    const auto& p = c.experiment_params;
    const double h0 = param_or(p, "h0", 1e4);
    const double gamma = param_or(p, "gamma", c.langevin.gamma);

    // tau_* from the high-energy period limit.
    const auto avg = ergolang::orbit_average(
        spec, [](double, double) { return 1.0; }, 1e6, 1.0, c.quadrature);
    const double tau_star = avg.period;

    ergolang::LangevinParams params{gamma, 0.0};
    const ergolang::ReducedIntegrator integrator(spec, params, c.integrator, c.quadrature);
    const auto tp = ergolang::turning_points(spec, h0, 1.0);
    const double lam = ergolang::lambda_star(spec.alpha1());
    const double t_end = std::log(100.0) / (gamma * lam) * 1.2;
    const auto rec = integrator.integrate({tp.q_minus, 0.0}, t_end, {c.master_seed, 0});

    const auto win = ergolang::windowed_energy_average(rec, tau_star);

    // Window-differenced decay against the averaged prediction.
    std::string csv = "t,V,minus_gamma_lambda_V,window_diff\n";
    for (std::size_t k = 1; k < win.times.size(); ++k) {
        const double t = win.times[k];
        const double dt = win.times[k] - win.times[k - 1];
        const double diff = (win.values[k] - win.values[k - 1]) / dt;
        const double pred = -gamma * lam * win.values[k];
        csv += ergolang::format_double(t) + "," + ergolang::format_double(win.values[k]) +
               "," + ergolang::format_double(pred) + "," + ergolang::format_double(diff) +
               "\n";
    }

    // Smoothing check: the windowed series wiggles far less than H itself.
    const double t_lo = win.times.front();
    const double t_hi = std::min(win.times.back(), t_lo + 20.0 * tau_star);
    const double osc_v =
        ergolang::detrended_oscillation(win.times, win.values, tau_star, t_lo, t_hi);
    const double osc_h =
        ergolang::detrended_oscillation(rec.times, rec.energies, tau_star, t_lo, t_hi);
    const double ratio_osc = osc_h > 0.0 ? osc_v / osc_h : 0.0;

    if (c.output.write_csv) ergolang::write_text_file(out_path(c, "windowed.csv"), csv);

    RunResult r;
    r.pass = ratio_osc < 0.25 && rec.terminated == ergolang::Termination::completed;
    r.payload = {{"tau_star", tau_star},
                 {"oscillation_V", osc_v},
                 {"oscillation_H", osc_h},
                 {"oscillation_ratio", ratio_osc},
                 {"pass", r.pass}};
    char buf[200];
    std::snprintf(buf, sizeof(buf), "windowed: tau*=%.4f osc(V)/osc(H)=%.3f -> %s", tau_star,
                  ratio_osc, r.pass ? "pass" : "FAIL");
    r.line = buf;
    return r;
}

RunResult run_simulate(const ExperimentConfig& c, const std::string& hash) {
    const auto spec = validate_from(c);
    const auto& p = c.experiment_params;
    const std::string system = param_or<std::string>(p, "system", "reduced");
    const double t_end = param_or(p, "t_end", 100.0);

    RunResult r;
    if (system == "full") {
        ergolang::FullState start;
        start.q1 = param_or(p, "q1", 0.5);
        start.q2 = param_or(p, "q2", -0.5);
        start.p1 = param_or(p, "p1", 0.0);
        start.p2 = param_or(p, "p2", 0.0);
        const ergolang::FullIntegrator integrator(spec, c.langevin, c.integrator, c.quadrature);
        const auto rec = integrator.integrate(start, t_end, {c.master_seed, 0});
        if (c.output.write_csv) {
            ergolang::write_text_file(out_path(c, "trajectory_full.csv"),
                                      ergolang::trajectory_csv(rec, hash));
        }
        r.pass = rec.terminated == ergolang::Termination::completed;
        r.payload = {{"system", system},
                     {"records", rec.times.size()},
                     {"terminated", static_cast<int>(rec.terminated)},
                     {"pass", r.pass}};
    } else {
        ergolang::PhasePoint start{param_or(p, "q", 1.0), param_or(p, "p", 0.0)};
        const ergolang::ReducedIntegrator integrator(spec, c.langevin, c.integrator,
                                                     c.quadrature);
        const auto rec = integrator.integrate(start, t_end, {c.master_seed, 0});
        if (c.output.write_csv) {
            ergolang::write_text_file(out_path(c, "trajectory.csv"),
                                      ergolang::trajectory_csv(rec, hash));
        }
        r.pass = rec.terminated == ergolang::Termination::completed;
        r.payload = {{"system", system},
                     {"records", rec.times.size()},
                     {"terminated", static_cast<int>(rec.terminated)},
                     {"pass", r.pass}};
    }
    r.line = std::string("simulate(") + system + "): " + (r.pass ? "completed" : "TERMINATED EARLY");
    return r;
}

RunResult run_levelsets(const ExperimentConfig& c) {
    const auto spec = validate_from(c);
    const auto& p = c.experiment_params;
    const std::vector<double> etas = param_or(p, "eta", std::vector<double>{1.0, 2.0, 4.0});
    const double lambda = param_or(p, "lambda", 1.0);
    const int samples = param_or(p, "samples", 256);

    std::string csv = "eta,q,p\n";
    json domains = json::array();
    for (double eta : etas) {
        const auto tp = ergolang::turning_points(spec, eta, lambda);
        domains.push_back({{"eta", eta}, {"q_minus", tp.q_minus}, {"q_plus", tp.q_plus}});
        for (int i = 0; i < samples; ++i) {
            const double q = tp.q_minus + (tp.q_plus - tp.q_minus) * i / (samples - 1.0);
            const double rr = ergolang::rho(spec, q, eta, lambda);
            csv += ergolang::format_double(eta) + "," + ergolang::format_double(q) + "," +
                   ergolang::format_double(rr) + "\n";
        }
    }
    if (c.output.write_csv) ergolang::write_text_file(out_path(c, "levelsets.csv"), csv);

    RunResult r;
    r.payload = {{"lambda", lambda}, {"domains", domains}};
    r.line = "levelsets: " + std::to_string(etas.size()) + " levels at lambda=" +
             ergolang::format_double(lambda);
    return r;
}

int run_command(const std::string& config_path, const std::vector<std::string>& overrides,
                long long seed_override, const std::string& out_override) {
    ExperimentConfig config = ergolang::load_config(config_path, overrides);
    if (seed_override >= 0) config.master_seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) config.output.directory = out_override;

    const json canonical = ergolang::serialize_config(config);
    // The hash identifies the experiment; where the files land is not part
    // of it, so runs into different directories stay byte-identical.
    json hashable = canonical;
    hashable.erase("output");
    const std::string hash = ergolang::config_hash_hex(hashable);

    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    if (config.experiment == "tabulate-lambda") {
        result = run_tabulate_lambda(config);
    } else if (config.experiment == "certify") {
        result = run_certify(config);
    } else if (config.experiment == "decay") {
        result = run_decay(config);
    } else if (config.experiment == "gibbs") {
        result = run_gibbs(config);
    } else if (config.experiment == "exp-moment") {
        result = run_exp_moment(config);
    } else if (config.experiment == "minorization") {
        result = run_minorization(config);
    } else if (config.experiment == "windowed") {
        result = run_windowed(config);
    } else if (config.experiment == "simulate") {
        result = run_simulate(config, hash);
    } else if (config.experiment == "levelsets") {
        result = run_levelsets(config);
    } else {
        throw ergolang::UnknownExperiment("unknown experiment '" + config.experiment + "'");
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json summary = ergolang::report_envelope(config.experiment, hash, config.master_seed,
                                             wall, result.payload);
    summary["config"] = canonical;
    ergolang::write_text_file(out_path(config, config.experiment + "_summary.json"),
                              summary.dump(2) + "\n");

    std::cout << result.line << "\n";
    return result.pass ? kExitPass : kExitAssertFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Langevin dynamics with singular potentials: simulation and certification"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the experiment named in a config file");
    std::string config_path;
    std::vector<std::string> overrides;
    long long seed_override = -1;
    std::string out_override;
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--set", overrides, "override config fields, e.g. langevin.gamma=2");
    run->add_option("--seed", seed_override, "override the master seed");
    run->add_option("--out", out_override, "override the output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        return run_command(config_path, overrides, seed_override, out_override);
    } catch (const ergolang::ConfigParse& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitError;
    } catch (const ergolang::UnknownExperiment& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitError;
    } catch (const ergolang::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

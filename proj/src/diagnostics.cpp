#include "ergolang/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ergolang/errors.hpp"
#include "ergolang/parallel.hpp"
#include "ergolang/lyapunov.hpp"
#include "ergolang/quadrature.hpp"

namespace ergolang {

namespace {

double interp_series(const std::vector<double>& ts, const std::vector<double>& vs, double t) {
    if (t <= ts.front()) return vs.front();
    if (t >= ts.back()) return vs.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return vs[i - 1] + w * (vs[i] - vs[i - 1]);
}

double log_sum_exp(const std::vector<double>& xs) {
    const double m = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

double normal_cdf(double x, double sd) {
    return 0.5 * std::erfc(-x / (sd * std::numbers::sqrt2));
}

}  // namespace

PredictedCurve predicted_energy_curve(const ValidatedSpec& spec, const LangevinParams& params,
                                      double h0, double t_end, PredictionMode mode,
                                      const LambdaTable& table) {
    const double lam_star = lambda_star(spec.alpha1());
    const double gamma = params.gamma;
    const double sigma2 = params.sigma_squared();

    PredictedCurve out;
    const int n_grid = 400;
    out.times.resize(n_grid + 1);
    out.eta.resize(n_grid + 1);
    for (int k = 0; k <= n_grid; ++k) out.times[k] = t_end * k / n_grid;

    auto rate = [&](double eta) {
        const double lam = mode == PredictionMode::lambda_star ? lam_star : table(eta);
        return -gamma * lam * eta + 0.5 * sigma2;
    };

    // RK4 on a fixed fine step, sampled onto the output grid.
    const double dt = 1e-3 * std::min(1.0, 1.0 / (gamma * lam_star));
    double eta = h0;
    double t = 0.0;
    std::size_t k_out = 0;
    double max_dev = 0.0;
    auto emit = [&](double t_now, double value) {
        while (k_out < out.times.size() && out.times[k_out] <= t_now + 1e-12) {
            if (mode == PredictionMode::lambda_star) {
                const double eta_inf = 0.5 * sigma2 / (gamma * lam_star);
                const double closed =
                    (h0 - eta_inf) * std::exp(-gamma * lam_star * out.times[k_out]) + eta_inf;
                out.eta[k_out] = closed;
                max_dev = std::max(max_dev, std::abs(closed - value) / std::max(closed, 1e-12));
            } else {
                out.eta[k_out] = value;
            }
            ++k_out;
        }
    };
    emit(0.0, eta);
    while (t < t_end && k_out < out.times.size()) {
        const double h = std::min(dt, t_end - t);
        const double k1 = rate(eta);
        const double k2 = rate(eta + 0.5 * h * k1);
        const double k3 = rate(eta + 0.5 * h * k2);
        const double k4 = rate(eta + h * k3);
        eta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        emit(t, eta);
    }
    out.ode_deviation = max_dev;
    return out;
}

std::vector<PhasePoint> orbit_phase_points(const ValidatedSpec& spec, double h0, int n,
                                           const QuadratureSettings& quadrature) {
    const auto tp = turning_points(spec, h0, 1.0);
    const auto avg =
        orbit_average(spec, [](double, double) { return 1.0; }, h0, 1.0, quadrature);
    const double period = avg.period;

    // March the deterministic dynamics (velocity Verlet) over one period.
    const ScaledPotential pot = spec.scaled(1.0);
    const int fine = 512;
    const double dt = period / (n * fine);
    std::vector<PhasePoint> points;
    points.reserve(n);
    PhasePoint x{tp.q_minus, 0.0};
    for (int i = 0; i < n; ++i) {
        points.push_back(x);
        for (int s = 0; s < fine; ++s) {
            x.p += 0.5 * dt * -pot.derivative(x.q);
            x.q += dt * x.p;
            x.p += 0.5 * dt * -pot.derivative(x.q);
        }
    }
    return points;
}

DecayFit fit_log_slope(const std::vector<double>& times, const std::vector<double>& values,
                       double window_lo, double window_hi) {
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (values[k] >= window_lo && values[k] <= window_hi && values[k] > 0.0) {
            ts.push_back(times[k]);
            ys.push_back(std::log(values[k]));
        }
    }
    if (ts.size() < 3) {
        std::ostringstream os;
        os << "log-slope fit window [" << window_lo << ", " << window_hi << "] holds only "
           << ts.size() << " samples";
        throw Error(os.str());
    }
    const double n = static_cast<double>(ts.size());
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        mt += ts[k];
        my += ys[k];
    }
    mt /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        sxx += (ts[k] - mt) * (ts[k] - mt);
        sxy += (ts[k] - mt) * (ys[k] - my);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double r = ys[k] - my - slope * (ts[k] - mt);
        ss_res += r * r;
    }
    DecayFit fit;
    fit.slope = slope;
    fit.std_error = std::sqrt(ss_res / (n - 2.0) / sxx);
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    fit.n_paths = 1;
    return fit;
}

EnergyDecayResult energy_decay_experiment(const ValidatedSpec& spec,
                                          const LangevinParams& params, double h0,
                                          int n_paths, double t_end,
                                          const IntegratorSettings& settings,
                                          std::uint64_t master_seed, double window_hi_frac,
                                          double window_lo) {
    const QuadratureSettings quad;
    const EtaStar es = eta_star(spec);
    const LambdaTable table(spec, es, quad);
    const ReducedIntegrator integrator(spec, params, settings, quad);

    EnergyDecayResult out;
    const int n_grid = 400;
    out.times.resize(n_grid + 1);
    for (int k = 0; k <= n_grid; ++k) out.times[k] = t_end * k / n_grid;

    const auto phases = orbit_phase_points(spec, h0, n_paths, quad);
    std::vector<std::vector<double>> grid_h(
        static_cast<std::size_t>(n_paths), std::vector<double>(out.times.size(), 0.0));
    std::vector<Termination> ends(static_cast<std::size_t>(n_paths), Termination::completed);
    parallel_for_index(n_paths, [&](int i) {
        const auto rec = integrator.integrate(phases[static_cast<std::size_t>(i)], t_end,
                                              {master_seed, static_cast<std::uint64_t>(i)});
        ends[static_cast<std::size_t>(i)] = rec.terminated;
        for (std::size_t k = 0; k < out.times.size(); ++k) {
            grid_h[static_cast<std::size_t>(i)][k] =
                interp_series(rec.times, rec.energies, out.times[k]);
        }
    });
    for (Termination t : ends) {
        if (t == Termination::blowup_detected) ++out.blowups;
        if (t == Termination::step_floor_hit) ++out.floor_hits;
    }

    out.mean_h.resize(out.times.size());
    out.median_h.resize(out.times.size());
    std::vector<double> column(static_cast<std::size_t>(n_paths));
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        double s = 0.0;
        for (int i = 0; i < n_paths; ++i) {
            column[static_cast<std::size_t>(i)] = grid_h[static_cast<std::size_t>(i)][k];
            s += column[static_cast<std::size_t>(i)];
        }
        out.mean_h[k] = s / n_paths;
        std::nth_element(column.begin(), column.begin() + n_paths / 2, column.end());
        out.median_h[k] = column[static_cast<std::size_t>(n_paths) / 2];
    }

    const double lo = window_lo > 0.0 ? window_lo : 100.0 * es.value;
    out.fit = fit_log_slope(out.times, out.mean_h, lo, window_hi_frac * h0);
    out.fit.n_paths = n_paths;
    out.predicted_star =
        predicted_energy_curve(spec, params, h0, t_end, PredictionMode::lambda_star, table);
    out.predicted_eta =
        predicted_energy_curve(spec, params, h0, t_end, PredictionMode::lambda_of_eta, table);
    return out;
}

DecayFit deterministic_decay_check(const ValidatedSpec& spec, double gamma, double h0,
                                   const IntegratorSettings& settings, double window_hi_frac,
                                   double window_lo_frac) {
    LangevinParams params{gamma, 0.0};  // sigma = 0: purely damped dynamics
    const ReducedIntegrator integrator(spec, params, settings);
    const auto tp = turning_points(spec, h0, 1.0);
    // Integrate until the energy has fallen below the fit window.
    const double lam = lambda_star(spec.alpha1());
    const double t_end = std::log(1.0 / window_lo_frac) / (gamma * lam) * 1.3;
    const auto rec = integrator.integrate({tp.q_minus, 0.0}, t_end, {0, 0});
    DecayFit fit =
        fit_log_slope(rec.times, rec.energies, window_lo_frac * h0, window_hi_frac * h0);
    fit.n_paths = 1;
    return fit;
}

GibbsReport gibbs_compare(const ValidatedSpec& spec, const LangevinParams& params,
                          double burn_in, double t_end, HistogramSpec bins,
                          std::uint64_t seed, const IntegratorSettings& settings,
                          double sample_interval) {
    const double temp = params.temperature;
    const Minimum mn = global_minimum(spec);
    const ScaledPotential pot = spec.scaled(1.0);
    const QuadratureSettings quad;

    if (bins.x_lo == bins.x_hi) {
        const auto tp = turning_points(spec, mn.value + 18.0 * temp, 1.0);
        bins.x_lo = tp.q_minus;
        bins.x_hi = tp.q_plus;
        const double p_max = 8.0 * std::sqrt(temp);
        bins.y_lo = -p_max;
        bins.y_hi = p_max;
    }

    // Analytic q-marginal over a wide reference domain, for normalisation and
    // the domain-mass check.
    auto boltz = [&](double q) { return std::exp(-(pot.value(q) - mn.value) / temp); };
    const auto tp_wide = turning_points(spec, mn.value + 45.0 * temp, 1.0);
    const double zq_wide = integrate_adaptive(boltz, tp_wide.q_minus, tp_wide.q_plus, quad);
    const double zq_dom = integrate_adaptive(boltz, bins.x_lo, bins.x_hi, quad);
    const double p_sd = std::sqrt(temp);
    const double zp_dom = normal_cdf(bins.y_hi, p_sd) - normal_cdf(bins.y_lo, p_sd);

    GibbsReport rep;
    rep.bins = bins;
    rep.mass_outside = 1.0 - (zq_dom / zq_wide) * zp_dom;

    // Per-bin target masses; the density factorises, so the 2D bin mass is a
    // product of 1D integrals (conditioned on the binned domain).
    std::vector<double> q_bin(static_cast<std::size_t>(bins.nx), 0.0);
    std::vector<double> p_bin(static_cast<std::size_t>(bins.ny), 0.0);
    const GaussRule& rule = gauss_legendre(8);
    const double dq = (bins.x_hi - bins.x_lo) / bins.nx;
    for (int i = 0; i < bins.nx; ++i) {
        const double a = bins.x_lo + i * dq;
        double s = 0.0;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            s += rule.weights[g] * 0.5 * dq * boltz(a + 0.5 * dq * (1.0 + rule.nodes[g]));
        }
        q_bin[static_cast<std::size_t>(i)] = s / zq_dom;
    }
    const double dp = (bins.y_hi - bins.y_lo) / bins.ny;
    for (int j = 0; j < bins.ny; ++j) {
        const double a = bins.y_lo + j * dp;
        p_bin[static_cast<std::size_t>(j)] =
            (normal_cdf(a + dp, p_sd) - normal_cdf(a, p_sd)) / zp_dom;
    }

    // One long path, sampled on a fixed time lattice.
    const ReducedIntegrator integrator(spec, params, settings, quad);
    const auto tp0 = turning_points(spec, mn.value + 25.0 * temp, 1.0);
    const auto rec = integrator.integrate({tp0.q_minus, 0.0}, t_end, {seed, 0});
    if (rec.terminated != Termination::completed) {
        throw Error("gibbs_compare trajectory terminated early");
    }

    Histogram2D hist_cum(bins), hist_eq(bins);
    std::vector<double> q_samples, p_samples;
    rep.checkpoint_times = {t_end / 16.0, t_end / 4.0, t_end};
    std::size_t checkpoint_idx = 0;

    double next_sample = 0.0;
    std::size_t rec_idx = 0;
    while (next_sample <= t_end + 1e-12) {
        while (rec_idx + 1 < rec.times.size() && rec.times[rec_idx + 1] <= next_sample) {
            ++rec_idx;
        }
        const PhasePoint& x = rec.states[rec_idx];
        hist_cum.add(x.q, x.p);
        if (next_sample >= burn_in) {
            hist_eq.add(x.q, x.p);
            q_samples.push_back(x.q);
            p_samples.push_back(x.p);
        }
        while (checkpoint_idx < rep.checkpoint_times.size() &&
               next_sample + sample_interval > rep.checkpoint_times[checkpoint_idx]) {
            double tv = 0.0;
            for (int i = 0; i < bins.nx; ++i) {
                for (int j = 0; j < bins.ny; ++j) {
                    tv += std::abs(hist_cum.mass(i, j) -
                                   q_bin[static_cast<std::size_t>(i)] *
                                       p_bin[static_cast<std::size_t>(j)]);
                }
            }
            rep.checkpoint_tv.push_back(tv);
            ++checkpoint_idx;
        }
        next_sample += sample_interval;
    }

    rep.n_samples = q_samples.size();
    if (rep.n_samples < 64) throw InsufficientSamples("gibbs_compare needs at least 64 samples");
    // Even the modal bins must see a healthy expected count.
    const double max_q = *std::max_element(q_bin.begin(), q_bin.end());
    const double max_p = *std::max_element(p_bin.begin(), p_bin.end());
    if (static_cast<double>(rep.n_samples) * max_q * max_p < 5.0) {
        throw InsufficientSamples("expected bin counts below 5 even in the modal bin");
    }

    double tv = 0.0;
    for (int i = 0; i < bins.nx; ++i) {
        for (int j = 0; j < bins.ny; ++j) {
            tv += std::abs(hist_eq.mass(i, j) - q_bin[static_cast<std::size_t>(i)] *
                                                    p_bin[static_cast<std::size_t>(j)]);
        }
    }
    rep.tv = tv;

    double mean_p = 0.0;
    for (double p : p_samples) mean_p += p;
    mean_p /= static_cast<double>(p_samples.size());
    double var = 0.0;
    for (double p : p_samples) var += (p - mean_p) * (p - mean_p);
    var /= static_cast<double>(p_samples.size() - 1);
    rep.p_variance = var;
    rep.p_variance_se = var * std::sqrt(2.0 / (static_cast<double>(p_samples.size()) - 1.0));

    // Marginal CDFs: q by cumulative quadrature, p analytic.
    const int n_cdf = 4096;
    std::vector<double> cdf_x(n_cdf + 1), cdf_v(n_cdf + 1);
    double acc = 0.0;
    cdf_x[0] = bins.x_lo;
    cdf_v[0] = 0.0;
    double prev = boltz(bins.x_lo);
    for (int k = 1; k <= n_cdf; ++k) {
        const double x = bins.x_lo + (bins.x_hi - bins.x_lo) * k / n_cdf;
        const double cur = boltz(x);
        acc += 0.5 * (prev + cur) * (bins.x_hi - bins.x_lo) / n_cdf;
        cdf_x[static_cast<std::size_t>(k)] = x;
        cdf_v[static_cast<std::size_t>(k)] = acc;
        prev = cur;
    }
    for (auto& v : cdf_v) v /= acc;
    rep.ks_q = ks_statistic(q_samples, [&](double x) { return interp_series(cdf_x, cdf_v, x); });
    rep.ks_p = ks_statistic(p_samples, [&](double x) {
        return (normal_cdf(x, p_sd) - normal_cdf(bins.y_lo, p_sd)) / zp_dom;
    });
    rep.ks_critical_1pct = 1.628 / std::sqrt(static_cast<double>(rep.n_samples));

    // Mode of the q marginal histogram.
    int best_i = 0;
    double best_mass = -1.0;
    for (int i = 0; i < bins.nx; ++i) {
        double m = 0.0;
        for (int j = 0; j < bins.ny; ++j) m += hist_eq.mass(i, j);
        if (m > best_mass) {
            best_mass = m;
            best_i = i;
        }
    }
    rep.q_mode = hist_eq.x_center(best_i);
    return rep;
}

ExpMomentSeries exp_moment_check(const ValidatedSpec& spec, const LangevinParams& params,
                                 double beta, int n_paths, double t_end, double h0,
                                 std::uint64_t seed, const IntegratorSettings& settings,
                                 double lambda_star_value) {
    const double beta_max = 2.0 * lambda_star_value / params.temperature;
    if (!(beta >= 0.0 && beta < beta_max)) {
        std::ostringstream os;
        os << "beta=" << beta << " outside [0, 2 Lambda_*/T) = [0, " << beta_max << ")";
        throw DomainError(os.str());
    }

    ExpMomentSeries out;
    out.beta = beta;
    const int n_grid = 200;
    out.times.resize(n_grid + 1);
    for (int k = 0; k <= n_grid; ++k) out.times[k] = t_end * k / n_grid;

    const QuadratureSettings quad;
    const ReducedIntegrator integrator(spec, params, settings, quad);
    const auto phases = orbit_phase_points(spec, h0, n_paths, quad);

    std::vector<std::vector<double>> beta_h(
        out.times.size(), std::vector<double>(static_cast<std::size_t>(n_paths), 0.0));
    parallel_for_index(n_paths, [&](int i) {
        const auto rec = integrator.integrate(phases[static_cast<std::size_t>(i)], t_end,
                                              {seed, static_cast<std::uint64_t>(i)});
        for (std::size_t k = 0; k < out.times.size(); ++k) {
            beta_h[k][static_cast<std::size_t>(i)] =
                beta * interp_series(rec.times, rec.energies, out.times[k]);
        }
    });
    out.log_mean.resize(out.times.size());
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        out.log_mean[k] = log_sum_exp(beta_h[k]) - std::log(static_cast<double>(n_paths));
    }

    // Envelope fit m(t) <= e^{-kappa t} m(0) + K t, least squares in log
    // domain over a kappa grid, K forced to the smallest admissible value.
    const double lm0 = out.log_mean.front();
    double best_obj = std::numeric_limits<double>::infinity();
    for (int g = 0; g < 64; ++g) {
        const double kappa = std::pow(10.0, -3.0 + 5.0 * g / 63.0);
        double log_k = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < out.times.size(); ++k) {
            const double decay = -kappa * out.times[k] + lm0;
            if (out.log_mean[k] <= decay) continue;
            const double log_num =
                out.log_mean[k] + std::log1p(-std::exp(decay - out.log_mean[k]));
            log_k = std::max(log_k, log_num - std::log(out.times[k]));
        }
        double obj = 0.0;
        for (std::size_t k = 1; k < out.times.size(); ++k) {
            const double decay = -kappa * out.times[k] + lm0;
            double log_env = decay;
            if (std::isfinite(log_k)) {
                const double lin = log_k + std::log(out.times[k]);
                log_env = std::max(decay, lin) +
                          std::log1p(std::exp(-std::abs(decay - lin)));
            }
            const double r = log_env - out.log_mean[k];
            obj += r * r;
        }
        if (obj < best_obj) {
            best_obj = obj;
            out.kappa = kappa;
            out.big_k = std::isfinite(log_k) ? std::exp(log_k) : 0.0;
        }
    }

    // Boundedness: sup_t mean <= mean(0) + K t_end, five percent slack in log.
    out.bounded = true;
    const double lin = out.big_k > 0.0
                           ? std::log(out.big_k) + std::log(t_end)
                           : -std::numeric_limits<double>::infinity();
    const double log_bound =
        std::max(lm0, lin) + std::log1p(std::exp(-std::abs(lm0 - lin))) + 0.05;
    for (double lm : out.log_mean) {
        if (!(lm <= log_bound) || !std::isfinite(lm)) out.bounded = false;
    }
    return out;
}

MinorizationEstimate minorization_probe(const ValidatedSpec& spec,
                                        const LangevinParams& params, double eta,
                                        std::vector<double> horizons, int n_paths,
                                        HistogramSpec bins, std::uint64_t seed,
                                        const IntegratorSettings& settings) {
    std::sort(horizons.begin(), horizons.end());
    const Minimum mn = global_minimum(spec);
    const auto tp = turning_points(spec, eta, 1.0);
    const double p_corner = std::sqrt(2.0 * (eta - mn.value));

    if (n_paths < 100) {
        throw InsufficientSamples("minorization probe needs at least 100 paths per start");
    }

    MinorizationEstimate est;
    est.eta = eta;
    est.horizons = horizons;
    est.n_paths_per_start = n_paths;
    est.starts = {{tp.q_minus, 0.0},
                  {tp.q_plus, 0.0},
                  {mn.location, p_corner},
                  {mn.location, -p_corner}};

    if (bins.x_lo == bins.x_hi) {
        const double cap = eta + 10.0 * params.temperature;
        const auto tpc = turning_points(spec, cap, 1.0);
        bins.x_lo = tpc.q_minus * 0.9;
        bins.x_hi = tpc.q_plus * 1.1;
        const double pm = std::sqrt(2.0 * cap) * 1.05;
        bins.y_lo = -pm;
        bins.y_hi = pm;
    }
    est.bins = bins;

    const QuadratureSettings quad;
    const ReducedIntegrator integrator(spec, params, settings, quad);
    const double t_max = horizons.back();

    // One histogram per (start, horizon).
    std::vector<std::vector<Histogram2D>> hists(est.starts.size());
    for (auto& row : hists) {
        row.assign(horizons.size(), Histogram2D(bins));
    }

    // Snapshot states per (path, horizon), filled in parallel, then binned
    // serially so the histograms stay schedule-independent.
    const std::size_t n_starts = est.starts.size();
    std::vector<PhasePoint> snaps(n_starts * static_cast<std::size_t>(n_paths) *
                                  horizons.size());
    parallel_for_index(static_cast<int>(n_starts) * n_paths, [&](int flat) {
        const std::size_t s = static_cast<std::size_t>(flat) / n_paths;
        const auto rec = integrator.integrate(est.starts[s], t_max,
                                              {seed, static_cast<std::uint64_t>(flat)});
        std::size_t idx = 0;
        for (std::size_t h = 0; h < horizons.size(); ++h) {
            while (idx + 1 < rec.times.size() && rec.times[idx] < horizons[h]) ++idx;
            snaps[static_cast<std::size_t>(flat) * horizons.size() + h] = rec.states[idx];
        }
    });
    for (std::size_t s = 0; s < n_starts; ++s) {
        for (int i = 0; i < n_paths; ++i) {
            const std::size_t flat = s * static_cast<std::size_t>(n_paths) +
                                     static_cast<std::size_t>(i);
            for (std::size_t h = 0; h < horizons.size(); ++h) {
                const PhasePoint& x = snaps[flat * horizons.size() + h];
                hists[s][h].add(x.q, x.p);
            }
        }
    }

    std::size_t occupied = 0;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        double overlap = 0.0;
        for (int i = 0; i < bins.nx; ++i) {
            for (int j = 0; j < bins.ny; ++j) {
                double m = std::numeric_limits<double>::infinity();
                for (std::size_t s = 0; s < est.starts.size(); ++s) {
                    m = std::min(m, hists[s][h].mass(i, j));
                }
                if (m > 0.0) {
                    overlap += m;
                    ++occupied;
                }
            }
        }
        est.overlap.push_back(overlap);
    }
    est.mc_error =
        std::sqrt(static_cast<double>(occupied) / horizons.size() / n_paths);
    return est;
}

WindowedSeries windowed_energy_average(const TrajectoryRecord& record, double tau_star) {
    const auto& ts = record.times;
    const auto& hs = record.energies;
    if (ts.size() < 2 || tau_star >= ts.back() - ts.front()) {
        throw WindowTooLong("window exceeds the trajectory horizon");
    }
    // Prefix trapezoid integral of H.
    std::vector<double> prefix(ts.size(), 0.0);
    for (std::size_t k = 1; k < ts.size(); ++k) {
        prefix[k] = prefix[k - 1] + 0.5 * (hs[k] + hs[k - 1]) * (ts[k] - ts[k - 1]);
    }
    auto integral_at = [&](double t) {
        if (t <= ts.front()) return 0.0;
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - ts.begin());
        if (i >= ts.size()) return prefix.back();
        const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
        const double h_t = hs[i - 1] + w * (hs[i] - hs[i - 1]);
        return prefix[i - 1] + 0.5 * (hs[i - 1] + h_t) * (t - ts[i - 1]);
    };

    WindowedSeries out;
    out.tau_star = tau_star;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (ts[k] < ts.front() + tau_star) continue;
        out.times.push_back(ts[k]);
        out.values.push_back((integral_at(ts[k]) - integral_at(ts[k] - tau_star)) / tau_star);
    }
    return out;
}

double detrended_oscillation(const std::vector<double>& times,
                             const std::vector<double>& values, double window, double t_lo,
                             double t_hi) {
    double total = 0.0;
    int windows = 0;
    for (double start = t_lo; start + window <= t_hi; start += 0.5 * window) {
        std::vector<double> ts, ys;
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (times[k] >= start && times[k] <= start + window && values[k] > 0.0) {
                ts.push_back(times[k]);
                ys.push_back(std::log(values[k]));
            }
        }
        if (ts.size() < 8) continue;
        const double n = static_cast<double>(ts.size());
        double mt = 0.0, my = 0.0;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            mt += ts[k];
            my += ys[k];
        }
        mt /= n;
        my /= n;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            sxx += (ts[k] - mt) * (ts[k] - mt);
            sxy += (ts[k] - mt) * (ys[k] - my);
        }
        const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const double r = ys[k] - my - slope * (ts[k] - mt);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        total += hi - lo;
        ++windows;
    }
    return windows > 0 ? total / windows : 0.0;
}

}  // namespace ergolang

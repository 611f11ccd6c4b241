#pragma once

#include <cstdint>
#include <vector>

#include "ergolang/histogram.hpp"
#include "ergolang/orbit.hpp"
#include "ergolang/potential.hpp"
#include "ergolang/simulate.hpp"

namespace ergolang {

struct DecayFit {
    double slope = 0.0;        // d(log E[H])/dt
    double std_error = 0.0;
    double window_hi = 0.0;    // energy window of the fit
    double window_lo = 0.0;
    int n_paths = 0;
};

enum class PredictionMode { lambda_star, lambda_of_eta };

// Mean-energy prediction d eta/dt = -gamma Lambda eta + sigma^2/2 with
// Lambda = Lambda_* (closed form, cross-checked against an RK4 solve) or
// Lambda = Lambda(eta) (RK4 on the memoized table).
struct PredictedCurve {
    std::vector<double> times;
    std::vector<double> eta;
    double ode_deviation = 0.0;  // closed form vs RK4, lambda_star mode only
};

PredictedCurve predicted_energy_curve(const ValidatedSpec& spec, const LangevinParams& params,
                                      double h0, double t_end, PredictionMode mode,
                                      const LambdaTable& table);

// n points on the H = h0 deterministic orbit, equally spaced in time.
std::vector<PhasePoint> orbit_phase_points(const ValidatedSpec& spec, double h0, int n,
                                           const QuadratureSettings& quadrature = {});

struct EnergyDecayResult {
    std::vector<double> times;    // common grid
    std::vector<double> mean_h;   // ensemble mean (interpolated per path)
    std::vector<double> median_h;
    DecayFit fit;
    PredictedCurve predicted_star;
    PredictedCurve predicted_eta;
    int blowups = 0;
    int floor_hits = 0;
};

// Launches n_paths trajectories from uniformly phased points on the H = h0
// orbit, averages H on a common grid, and fits the log-energy slope over the
// energy window [window_lo, window_hi_frac * h0]. window_lo <= 0 selects
// 100 * eta_star.
EnergyDecayResult energy_decay_experiment(const ValidatedSpec& spec,
                                          const LangevinParams& params, double h0,
                                          int n_paths, double t_end,
                                          const IntegratorSettings& settings,
                                          std::uint64_t master_seed,
                                          double window_hi_frac = 0.9,
                                          double window_lo = 0.0);

// Single deterministic damped trajectory (sigma = 0); the orbit-averaged
// theory predicts a log-energy slope of about -gamma * Lambda_*.
DecayFit deterministic_decay_check(const ValidatedSpec& spec, double gamma, double h0,
                                   const IntegratorSettings& settings,
                                   double window_hi_frac = 1.0, double window_lo_frac = 0.01);

struct GibbsReport {
    HistogramSpec bins;
    double tv = 0.0;
    std::vector<double> checkpoint_times;
    std::vector<double> checkpoint_tv;  // cumulative-histogram TV at checkpoints
    double p_variance = 0.0;
    double p_variance_se = 0.0;
    double ks_q = 0.0;
    double ks_p = 0.0;
    double ks_critical_1pct = 0.0;
    double q_mode = 0.0;       // peak of the q marginal histogram
    double mass_outside = 0.0; // analytic Gibbs mass outside the binned domain
    std::size_t n_samples = 0;
};

// Long single-path ergodic histogram against the analytic Gibbs density.
// Bin ranges are computed from the potential when bins.x_lo == bins.x_hi.
// Samples are taken every sample_interval time units after burn_in (the
// checkpoint TV series uses the cumulative, un-discarded history).
GibbsReport gibbs_compare(const ValidatedSpec& spec, const LangevinParams& params,
                          double burn_in, double t_end, HistogramSpec bins,
                          std::uint64_t seed, const IntegratorSettings& settings,
                          double sample_interval = 1.0);

struct ExpMomentSeries {
    double beta = 0.0;
    std::vector<double> times;
    std::vector<double> log_mean;  // ln of the ensemble mean of exp(beta H_t)
    double kappa = 0.0;            // envelope fit: m(t) <= e^{-kappa t} m(0) + K t
    double big_k = 0.0;
    bool bounded = false;
};

// Tracks the ensemble mean of exp(beta H_t) in log-sum-exp form from a
// uniformly phased start on the H = h0 orbit.
ExpMomentSeries exp_moment_check(const ValidatedSpec& spec, const LangevinParams& params,
                                 double beta, int n_paths, double t_end, double h0,
                                 std::uint64_t seed, const IntegratorSettings& settings,
                                 double lambda_star_value);

struct MinorizationEstimate {
    double eta = 0.0;
    std::vector<double> horizons;
    std::vector<double> overlap;  // common-mass proxy per horizon
    std::vector<PhasePoint> starts;
    int n_paths_per_start = 0;
    HistogramSpec bins;
    double mc_error = 0.0;
};

// Runs ensembles from the most-separated starts on the H = eta level set
// ((Q-,0), (Q+,0) and the two momentum corners above the potential minimum)
// and measures the overlap of the transition histograms at each horizon.
// The overlap is a lower-bound proxy for the minorization mass, not the
// constant of the theory; its contract is positivity.
MinorizationEstimate minorization_probe(const ValidatedSpec& spec,
                                        const LangevinParams& params, double eta,
                                        std::vector<double> horizons, int n_paths,
                                        HistogramSpec bins, std::uint64_t seed,
                                        const IntegratorSettings& settings);

struct WindowedSeries {
    std::vector<double> times;
    std::vector<double> values;
    double tau_star = 0.0;
};

// Trapezoidal moving-window average V_t = (1/tau) int_{t-tau}^t H_s ds of a
// recorded energy series. Throws WindowTooLong if tau exceeds the horizon.
WindowedSeries windowed_energy_average(const TrajectoryRecord& record, double tau_star);

// Least-squares slope of ln(values) against time, restricted to samples with
// values inside [window_lo, window_hi].
DecayFit fit_log_slope(const std::vector<double>& times, const std::vector<double>& values,
                       double window_lo, double window_hi);

// Peak-to-trough amplitude of the detrended log series over sliding windows
// of the given length; used to compare wiggle sizes across energy levels.
double detrended_oscillation(const std::vector<double>& times,
                             const std::vector<double>& values, double window,
                             double t_lo, double t_hi);

}  // namespace ergolang

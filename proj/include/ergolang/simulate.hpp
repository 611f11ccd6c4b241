#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ergolang/orbit.hpp"
#include "ergolang/potential.hpp"

namespace ergolang {

enum class Scheme { euler_maruyama, baoab_splitting };

struct IntegratorSettings {
    Scheme scheme = Scheme::baoab_splitting;
    double dt_max = 0.05;
    int steps_per_period = 200;  // adaptive target, >= 32
    double h_floor = 1e-9;
    int record_stride = 1;
};

enum class Termination { completed, blowup_detected, step_floor_hit };

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    std::vector<double> energies;  // H(q,p;1)
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
    LangevinParams params;
    IntegratorSettings integrator;
    Termination terminated = Termination::completed;
};

struct FullTrajectoryRecord {
    std::vector<double> times;
    std::vector<FullState> states;
    std::vector<double> energies;  // H0 = p1^2/2 + p2^2/2 + U(q1-q2)
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
    LangevinParams params;
    IntegratorSettings integrator;
    Termination terminated = Termination::completed;
};

// Per-path stream: splitmix64 applied to master_seed advanced by path_index
// seeds an mt19937_64. Identical (master_seed, path_index) reproduce the
// trajectory bit for bit on one platform.
struct RngSeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::mt19937_64 make_stream(const RngSeedSpec& seed);

// One step of the reduced SDE dq = p dt, dp = -U'(q) dt - gamma p dt + sigma dW.
// euler_maruyama discretises directly; baoab_splitting does half-kick,
// half-drift, exact Ornstein-Uhlenbeck, half-drift, half-kick. `noise` is a
// standard normal draw.
PhasePoint step_reduced(const ScaledPotential& pot, const LangevinParams& params,
                        const PhasePoint& x, double dt, double noise,
                        Scheme scheme = Scheme::baoab_splitting);

// Same stepping with an arbitrary force field and noise scale; the relative
// pair of the two-particle system drives this with force -U'(2q) and noise
// scale sigma/sqrt(2).
PhasePoint step_with_force(const std::function<double(double)>& force, double noise_sigma,
                           const LangevinParams& params, const PhasePoint& x, double dt,
                           double noise, Scheme scheme = Scheme::baoab_splitting);

// dt = clamp(tau(H)/steps_per_period, h_floor, dt_max), then capped by the
// force-limited step 0.1|p|/|U'(q)| (itself floored at h_floor so turning
// points do not stall). Throws StepFloorHit when the period-based step is
// already below the floor.
double adaptive_dt(const ScaledPotential& pot, const PhasePoint& x,
                   const IntegratorSettings& settings, const PeriodTable& periods);

// Reusable integrator for one spec at lambda = 1: builds the period table
// once, then runs trajectories.
class ReducedIntegrator {
public:
    ReducedIntegrator(const ValidatedSpec& spec, LangevinParams params,
                      IntegratorSettings settings, QuadratureSettings quadrature = {});

    TrajectoryRecord integrate(const PhasePoint& start, double t_end,
                               const RngSeedSpec& seed) const;

    const PeriodTable& periods() const { return periods_; }
    double eta_star_value() const { return eta_star_; }
    const ValidatedSpec& spec() const { return spec_; }
    const LangevinParams& params() const { return params_; }
    const IntegratorSettings& settings() const { return settings_; }

private:
    ValidatedSpec spec_;
    ScaledPotential pot_;
    LangevinParams params_;
    IntegratorSettings settings_;
    PeriodTable periods_;
    double eta_star_ = 0.0;
};

// Integrates the two-particle system by driving two independent Wiener
// streams: the centre-of-mass momentum is an exact Ornstein-Uhlenbeck update
// with noise (W1+W2)/2 and its position a trapezoidal integral, while the
// relative pair steps with force -U'(2q) and noise (W1-W2)/2.
class FullIntegrator {
public:
    FullIntegrator(const ValidatedSpec& spec, LangevinParams params,
                   IntegratorSettings settings, QuadratureSettings quadrature = {});

    FullTrajectoryRecord integrate(const FullState& start, double t_end,
                                   const RngSeedSpec& seed) const;

private:
    ValidatedSpec spec_;
    ScaledPotential pot_;
    LangevinParams params_;
    IntegratorSettings settings_;
    PeriodTable periods_;
    double eta_star_ = 0.0;
};

}  // namespace ergolang

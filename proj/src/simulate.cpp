#include "ergolang/simulate.hpp"

#include <cmath>
#include <sstream>

#include "ergolang/errors.hpp"

namespace ergolang {

namespace {

bool finite_point(double q, double p) { return std::isfinite(q) && std::isfinite(p); }

// Exact Ornstein-Uhlenbeck update factors over dt for dp = -gamma p dt + s dW.
struct OuFactors {
    double decay;
    double kick;
};

OuFactors ou_factors(double gamma, double noise_sigma, double dt) {
    if (gamma > 0.0) {
        const double c = std::exp(-gamma * dt);
        return {c, noise_sigma * std::sqrt(-std::expm1(-2.0 * gamma * dt) / (2.0 * gamma))};
    }
    return {1.0, noise_sigma * std::sqrt(dt)};
}

template <class Force>
PhasePoint step_generic(Force&& force, double noise_sigma, const LangevinParams& params,
                        const PhasePoint& x, double dt, double noise, Scheme scheme) {
    double q = x.q, p = x.p;
    if (scheme == Scheme::euler_maruyama) {
        const double f = force(q);
        const double qn = q + p * dt;
        const double pn = p + (f - params.gamma * p) * dt + noise_sigma * std::sqrt(dt) * noise;
        return {qn, pn};
    }
    // BAOAB: half kick, half drift, exact OU, half drift, half kick.
    p += 0.5 * dt * force(q);
    q += 0.5 * dt * p;
    const OuFactors ou = ou_factors(params.gamma, noise_sigma, dt);
    p = ou.decay * p + ou.kick * noise;
    q += 0.5 * dt * p;
    p += 0.5 * dt * force(q);
    return {q, p};
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 make_stream(const RngSeedSpec& seed) {
    const std::uint64_t mixed =
        splitmix64(seed.master_seed + 0x9E3779B97F4A7C15ULL * (seed.path_index + 1));
    return std::mt19937_64(mixed);
}

PhasePoint step_reduced(const ScaledPotential& pot, const LangevinParams& params,
                        const PhasePoint& x, double dt, double noise, Scheme scheme) {
    return step_generic([&pot](double q) { return -pot.derivative(q); }, params.sigma(),
                        params, x, dt, noise, scheme);
}

PhasePoint step_with_force(const std::function<double(double)>& force, double noise_sigma,
                           const LangevinParams& params, const PhasePoint& x, double dt,
                           double noise, Scheme scheme) {
    return step_generic(force, noise_sigma, params, x, dt, noise, scheme);
}

double adaptive_dt(const ScaledPotential& pot, const PhasePoint& x,
                   const IntegratorSettings& settings, const PeriodTable& periods) {
    const double eta = 0.5 * x.p * x.p + pot.value(x.q);
    const double tau = periods(eta);
    const double dt_period = tau / settings.steps_per_period;
    if (dt_period < settings.h_floor) {
        std::ostringstream os;
        os << "resolving the orbit at H=" << eta << " needs dt=" << dt_period
           << " below the floor " << settings.h_floor;
        throw StepFloorHit(os.str());
    }
    double dt = std::clamp(dt_period, settings.h_floor, settings.dt_max);
    // Near the singular wall the local stiffness outruns the orbit-period
    // step. Engage the refinement only when the wall is stiffer than the
    // step (dt^2 U'' > 1/4) or the step would move a large fraction of the
    // distance to the singularity; softer stretches keep the constant orbit
    // step, which preserves the splitting's near-conservation.
    const double ddu = pot.second_derivative(x.q);
    const double p = std::abs(x.p);
    const bool stiff = ddu > 0.0 && dt * dt * ddu > 0.25;
    const bool fast = dt * p > 0.2 * x.q;
    if (stiff || fast) {
        const double du = std::abs(pot.derivative(x.q));
        // Momentum change <= 10% of |p|, with the curvature time taking
        // over where that degenerates, all capped by a displacement of 5%
        // of the wall thickness q/|alpha_K|. The tight constants keep the
        // energy error of a wall bounce far below the per-period dissipation
        // even at weak damping, where a sloppier bounce visibly pumps the
        // energy.
        double ref = 0.0;
        if (du > 0.0 && p > 0.0) ref = 0.1 * p / du;
        if (ddu > 0.0) ref = std::max(ref, 0.02 / std::sqrt(ddu));
        if (ref == 0.0) ref = dt;
        if (p > 0.0) {
            ref = std::min(ref, 0.05 * x.q / (p * std::abs(pot.alpha_min())));
        }
        dt = std::min(dt, std::max(ref, settings.h_floor));
    }
    return dt;
}

ReducedIntegrator::ReducedIntegrator(const ValidatedSpec& spec, LangevinParams params,
                                     IntegratorSettings settings,
                                     QuadratureSettings quadrature)
    : spec_(spec), pot_(spec.scaled(1.0)), params_(params), settings_(settings) {
    eta_star_ = eta_star(spec_).value;
    periods_ = PeriodTable(spec_, eta_star_, quadrature);
}

TrajectoryRecord ReducedIntegrator::integrate(const PhasePoint& start, double t_end,
                                              const RngSeedSpec& seed) const {
    if (!(start.q > 0.0)) throw DomainError("reduced trajectory must start at q > 0");
    TrajectoryRecord rec;
    rec.master_seed = seed.master_seed;
    rec.path_index = seed.path_index;
    rec.params = params_;
    rec.integrator = settings_;

    std::mt19937_64 rng = make_stream(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = params_.sigma();

    auto record = [&](double t, const PhasePoint& x) {
        rec.times.push_back(t);
        rec.states.push_back(x);
        rec.energies.push_back(0.5 * x.p * x.p + pot_.value(x.q));
    };

    PhasePoint x = start;
    double t = 0.0;
    record(t, x);
    long step = 0;
    // The step target is re-read every step but adopted with hysteresis:
    // O(dt^2) wobble of the numerical energy (and the grazing touches of the
    // force limiter) must not modulate dt along an orbit, or the splitting
    // loses its near-conservation. Genuine changes (wall approach, decay of
    // the energy) pass the 30 percent gate immediately.
    double dt_current = 0.0;
    while (t < t_end) {
        try {
            const double target = adaptive_dt(pot_, x, settings_, periods_);
            if (dt_current == 0.0 || target < 0.7 * dt_current || target > 1.3 * dt_current) {
                dt_current = target;
            }
        } catch (const StepFloorHit&) {
            rec.terminated = Termination::step_floor_hit;
            return rec;
        }
        const double dt = std::min(dt_current, t_end - t);
        const double noise = sigma > 0.0 ? normal(rng) : 0.0;
        const PhasePoint next = step_reduced(pot_, params_, x, dt, noise, settings_.scheme);
        if (!(next.q > 0.0) || !finite_point(next.q, next.p)) {
            rec.terminated = Termination::blowup_detected;
            return rec;
        }
        x = next;
        t += dt;
        ++step;
        if (step % settings_.record_stride == 0 || t >= t_end) record(t, x);
    }
    rec.terminated = Termination::completed;
    return rec;
}

FullIntegrator::FullIntegrator(const ValidatedSpec& spec, LangevinParams params,
                               IntegratorSettings settings, QuadratureSettings quadrature)
    : spec_(spec), pot_(spec.scaled(1.0)), params_(params), settings_(settings) {
    eta_star_ = eta_star(spec_).value;
    periods_ = PeriodTable(spec_, eta_star_, quadrature);
}

FullTrajectoryRecord FullIntegrator::integrate(const FullState& start, double t_end,
                                               const RngSeedSpec& seed) const {
    if (start.q1 == start.q2) throw DomainError("two-particle state needs q1 != q2");
    FullTrajectoryRecord rec;
    rec.master_seed = seed.master_seed;
    rec.path_index = seed.path_index;
    rec.params = params_;
    rec.integrator = settings_;

    std::mt19937_64 rng = make_stream(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = params_.sigma();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    // W = (W1 - W2)/2 and B = (W1 + W2)/2 are (1/sqrt2)-scaled standard
    // Wiener processes, so both pairs see noise scale sigma/sqrt(2).
    const double pair_sigma = sigma * inv_sqrt2;

    ComCoords c = to_com(start);
    const double rel_sign = c.rel.q >= 0.0 ? 1.0 : -1.0;
    auto rel_force = [&](double qr) {
        // Force -U'(2 q_rel); U is even, so U'(R) = sign(R) U'(|R|).
        const double r = 2.0 * qr;
        return -(r >= 0.0 ? 1.0 : -1.0) * pot_.derivative(std::abs(r));
    };

    auto energy_full = [&](const FullState& s) {
        return 0.5 * s.p1 * s.p1 + 0.5 * s.p2 * s.p2 + pot_.value(std::abs(s.q1 - s.q2));
    };
    auto record = [&](double t, const ComCoords& com) {
        const FullState s = from_com(com);
        rec.times.push_back(t);
        rec.states.push_back(s);
        rec.energies.push_back(energy_full(s));
    };

    double t = 0.0;
    record(t, c);
    long step = 0;
    double dt_current = 0.0;
    while (t < t_end) {
        // Step control from the equivalent one-particle motion of
        // y = 2 q_rel (doubled force halves the period; take the safe side),
        // adopted with the same hysteresis as the reduced integrator.
        try {
            const PhasePoint equivalent{2.0 * std::abs(c.rel.q), 2.0 * c.rel.p};
            const double target = std::max(
                0.5 * adaptive_dt(pot_, equivalent, settings_, periods_), settings_.h_floor);
            if (dt_current == 0.0 || target < 0.7 * dt_current || target > 1.3 * dt_current) {
                dt_current = target;
            }
        } catch (const StepFloorHit&) {
            rec.terminated = Termination::step_floor_hit;
            return rec;
        }
        const double dt = std::min(dt_current, t_end - t);

        const double xi1 = sigma > 0.0 ? normal(rng) : 0.0;
        const double xi2 = sigma > 0.0 ? normal(rng) : 0.0;
        const double xi_rel = (xi1 - xi2) * inv_sqrt2;
        const double xi_com = (xi1 + xi2) * inv_sqrt2;

        const PhasePoint rel_next = step_generic(rel_force, pair_sigma, params_, c.rel, dt,
                                                 xi_rel, settings_.scheme);
        // Centre of mass: exact OU for the momentum, trapezoid for position.
        const OuFactors ou = ou_factors(params_.gamma, pair_sigma, dt);
        const double p_com_next = ou.decay * c.com.p + ou.kick * xi_com;
        const double q_com_next = c.com.q + 0.5 * dt * (c.com.p + p_com_next);

        const bool crossed = rel_next.q == 0.0 || (rel_next.q > 0.0) != (rel_sign > 0.0);
        if (crossed || !finite_point(rel_next.q, rel_next.p) ||
            !finite_point(q_com_next, p_com_next)) {
            rec.terminated = Termination::blowup_detected;
            return rec;
        }
        c.rel = rel_next;
        c.com = {q_com_next, p_com_next};
        t += dt;
        ++step;
        if (step % settings_.record_stride == 0 || t >= t_end) record(t, c);
    }
    rec.terminated = Termination::completed;
    return rec;
}

}  // namespace ergolang

#pragma once

#include <cmath>
#include <random>

#include "ergolang/potential.hpp"

namespace ergolang::testing {

// The quartic-plus-inverse-square potential used throughout: U = Q^4 + Q^-2/10.
inline PotentialSpec fig1_raw() {
    return PotentialSpec{{{1.0, 4.0}, {0.1, -2.0}}, 0.0};
}
inline ValidatedSpec fig1_spec() { return validate_spec(fig1_raw()); }

// Two-term family with a steep singular wall, alpha2 = -12 by default.
inline PotentialSpec model_raw(double alpha1, double alpha2 = -12.0, double a2 = 0.1) {
    return PotentialSpec{{{1.0, alpha1}, {a2, alpha2}}, 0.0};
}
inline ValidatedSpec model_spec(double alpha1, double alpha2 = -12.0, double a2 = 0.1) {
    return validate_spec(model_raw(alpha1, alpha2, a2));
}

// Double-well potential with an interior barrier near U = 1.49: the level
// sets between the wells split into two loops.
inline ValidatedSpec barrier_spec() {
    return validate_spec(
        PotentialSpec{{{1.0, 4.0}, {-5.2, 2.0}, {4.4, 1.0}, {0.005, -2.0}}, 0.5});
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Random valid spec for property tests: two or three terms, well-behaved
// exponent ranges, retried until the positivity check passes.
inline ValidatedSpec random_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
        PotentialSpec spec;
        const double alpha1 = 2.5 + 5.5 * u(rng);
        const double alpha_k = -0.5 - 11.0 * u(rng);
        const double a1 = 0.1 + 4.9 * u(rng);
        const double ak = 0.1 + 4.9 * u(rng);
        spec.terms.push_back({a1, alpha1});
        if (u(rng) < 0.5) {
            const double mid = alpha_k + 0.4 + (alpha1 - alpha_k - 0.8) * u(rng);
            const double am = (u(rng) - 0.5) * 0.4 * a1;
            spec.terms.push_back({am, mid});
        }
        spec.terms.push_back({ak, alpha_k});
        try {
            return validate_spec(spec);
        } catch (const SpecError&) {
            continue;
        }
    }
    return fig1_spec();
}

}  // namespace ergolang::testing

#pragma once

#include <vector>

#include "ergolang/errors.hpp"

namespace ergolang {

// One power-law term a * |R|^alpha of the interaction potential.
struct Term {
    double coefficient = 0.0;
    double exponent = 0.0;
};

// Raw, unvalidated description of the potential family
//   U(R; lambda) = a0/lambda^2 + a1 |R|^a1exp + sum_{k>=2} ak |R|^akexp * lambda^{2(akexp/a1exp - 1)}.
// Terms must be ordered by strictly decreasing exponent.
struct PotentialSpec {
    std::vector<Term> terms;
    double offset = 0.0;  // a0
};

// A point of the reduced phase space (upper half plane q > 0).
struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
};

// Two-particle state, positions and momenta.
struct FullState {
    double q1 = 0.0, q2 = 0.0;
    double p1 = 0.0, p2 = 0.0;
};

// Centre-of-mass coordinates of a FullState:
//   rel = ((q1-q2)/2, (p1-p2)/2), com = ((q1+q2)/2, (p1+p2)/2).
struct ComCoords {
    PhasePoint rel;
    PhasePoint com;
};

ComCoords to_com(const FullState& s);
FullState from_com(const ComCoords& c);

// Friction/temperature pair; the noise scale is always derived as
// sigma^2 = 2*gamma*T.
struct LangevinParams {
    double gamma = 1.0;
    double temperature = 1.0;

    double sigma() const;
    double sigma_squared() const { return 2.0 * gamma * temperature; }
};

class ValidatedSpec;

// Potential with lambda folded in: U(R) = c0 + sum ck |R|^ak. This is the
// hot-path object for quadrature and time stepping.
class ScaledPotential {
public:
    double value(double r) const;
    double derivative(double r) const;         // dU/dR
    double second_derivative(double r) const;  // d2U/dR2
    double lambda() const { return lambda_; }
    double alpha_min() const { return expo_.back(); }  // most negative exponent

private:
    friend class ValidatedSpec;
    ScaledPotential() = default;
    std::vector<double> coeff_;
    std::vector<double> expo_;
    double offset_ = 0.0;
    double lambda_ = 1.0;
};

// A PotentialSpec whose invariants have been checked. All downstream code
// consumes this type; construct via validate_spec().
class ValidatedSpec {
public:
    const PotentialSpec& spec() const { return spec_; }
    const std::vector<Term>& terms() const { return spec_.terms; }
    double offset() const { return spec_.offset; }
    double alpha1() const { return spec_.terms.front().exponent; }
    double leading_coefficient() const { return spec_.terms.front().coefficient; }
    double alpha_min() const { return spec_.terms.back().exponent; }

    // lambda exponent 2(alpha_k/alpha_1 - 1) of term k (zero for k = 0).
    double lambda_exponent(std::size_t k) const { return lambda_expo_[k]; }

    ScaledPotential scaled(double lambda) const;

private:
    friend ValidatedSpec validate_spec(const PotentialSpec&);
    friend ValidatedSpec validate_spec_marginal(const PotentialSpec&);
    ValidatedSpec(PotentialSpec spec, std::vector<double> lambda_expo)
        : spec_(std::move(spec)), lambda_expo_(std::move(lambda_expo)) {}

    PotentialSpec spec_;
    std::vector<double> lambda_expo_;
};

// Checks the full set of invariants: strictly decreasing exponents,
// alpha_1 > 2, alpha_K < 0, a_1 > 0, a_K > 0, and U(.;1) > 0 everywhere
// (probed on a log grid plus at all critical points).
// Throws SpecError naming the violated constraint.
ValidatedSpec validate_spec(const PotentialSpec& spec);

// Same checks but admits alpha_1 = 2, used only by the boundary-case
// experiments that probe where the drift construction stops working.
ValidatedSpec validate_spec_marginal(const PotentialSpec& spec);

// U(R; lambda). Throws DomainError for R <= 0.
double eval_potential(const ValidatedSpec& spec, double r, double lambda = 1.0);

// dU/dR(R; lambda), analytic term-by-term derivative.
double potential_derivative(const ValidatedSpec& spec, double r, double lambda = 1.0);

// Force on the momentum equation, -dU/dR.
double eval_force(const ValidatedSpec& spec, double r, double lambda = 1.0);

// H(Q,P; lambda) = P^2/2 + U(Q; lambda).
double eval_hamiltonian(const ValidatedSpec& spec, const PhasePoint& x, double lambda = 1.0);

// The scaling map S_ell : (Q,P) -> (ell^{2/alpha1} Q, ell P). Satisfies
// H(S_ell x; lambda) = ell^2 H(x; ell*lambda) exactly for the family above.
PhasePoint scale_map(const PhasePoint& x, double ell, double alpha1);

// All critical points of U(.;1), found by bracketing sign changes of U' on a
// 512-point log grid over [1e-4, 1e4] and refining by bisection.
std::vector<double> critical_points(const ValidatedSpec& spec);

// Location and value of the global minimum of U(.;1).
struct Minimum {
    double location = 0.0;
    double value = 0.0;
};
Minimum global_minimum(const ValidatedSpec& spec);

// Returns the spec with the offset shifted so inf_R U(R;1) = 0. Idempotent.
PotentialSpec normalize_offset(const ValidatedSpec& spec);

}  // namespace ergolang

#pragma once

#include <functional>
#include <vector>

#include "ergolang/interp.hpp"
#include "ergolang/potential.hpp"
#include "ergolang/quadrature.hpp"

namespace ergolang {

// Turning points of the level set H(Q,P;lambda) = eta: the smallest and
// largest positive roots of eta - U(Q;lambda) = 0.
struct TurningPoints {
    double q_minus = 0.0;
    double q_plus = 0.0;
};

TurningPoints turning_points(const ValidatedSpec& spec, double eta, double lambda = 1.0);
TurningPoints turning_points(const ScaledPotential& pot, double eta);

// Number of positive roots of eta - U(.;lambda) found on the bracketing scan.
int level_set_root_count(const ScaledPotential& pot, double eta);

// Momentum magnitude on the orbit, rho = sqrt(2(eta - U(Q;lambda))).
// Exactly zero at the turning points; DomainError when eta < U beyond
// tolerance.
double rho(const ValidatedSpec& spec, double q, double eta, double lambda = 1.0);

// Per-orbit data for cancellation-free evaluation of eta - U on the orbit:
// endpoint derivatives and the radii inside which a second-order Taylor form
// anchored at the turning point replaces the direct subtraction. The two
// forms are blended smoothly so nothing jumps as quadrature nodes cross the
// switch; that smoothness is what makes finite differences of the orbit
// integrals usable.
struct OrbitFrame {
    TurningPoints tp;
    double mid = 0.0, half = 0.0, width = 0.0;
    double du_minus = 0.0, du_plus = 0.0;
    double ddu_minus = 0.0, ddu_plus = 0.0;
    double radius_minus = 0.0, radius_plus = 0.0;
};

OrbitFrame make_orbit_frame(const ScaledPotential& pot, const TurningPoints& tp);

// eta - U(Q(theta)) with Q = mid + half*sin(theta), using the frame's Taylor
// forms near the endpoints (with 1 -+ sin(theta) in exact half-angle form).
double stable_orbit_gap(const ScaledPotential& pot, double eta, const OrbitFrame& frame,
                        double theta);

// Geometry and averages of one closed orbit.
struct OrbitGeometry {
    double eta = 0.0;
    double lambda = 1.0;
    double q_minus = 0.0;
    double q_plus = 0.0;
    double period = 0.0;       // tau = <1>
    double p2_integral = 0.0;  // <P^2>, the time integral of P^2 over one loop
    double mean_p2() const { return p2_integral / period; }
};

struct OrbitAverages {
    double bracket = 0.0;  // <phi>, time integral over one loop
    double period = 0.0;   // tau
    double mean = 0.0;     // A(phi) = <phi>/tau
};

// Orbit average of phi(q, p) over the level set eta at parameter lambda.
// The 1/rho turning-point singularity is removed by the substitution
// Q = mid + half*sin(theta), after which the integrand is analytic for
// simple turning points and Gauss-Legendre panels converge spectrally.
OrbitAverages orbit_average(const ValidatedSpec& spec,
                            const std::function<double(double, double)>& phi, double eta,
                            double lambda, const QuadratureSettings& settings = {});

OrbitGeometry orbit_geometry(const ValidatedSpec& spec, double eta, double lambda = 1.0,
                             const QuadratureSettings& settings = {});

// Energy threshold above which every level set of every scanned lambda is a
// single loop (exactly two positive roots).
struct EtaStar {
    double value = 0.0;
    double margin = 0.0;
    std::vector<double> lambda_grid_checked;
};

// Computes eta_star = (1 + margin) * max(interior local-maximum values of
// U(.;lambda) over the grid, global minimum of U(.;1)) + 1 and verifies the
// two-root property on the grid. Throws VerificationFailed if a scanned level
// set splits into more than one loop.
EtaStar eta_star(const ValidatedSpec& spec,
                 std::vector<double> lambda_grid = {1.0, 2.0, 5.0, 10.0, 100.0, 1e4},
                 double margin = 0.5);

// High-energy limit of the dissipation factor, 2*alpha1/(alpha1 + 2).
// Warns (once, to stderr) rather than fails at the boundary alpha1 = 2.
double lambda_star(double alpha1);

// The same limit evaluated as the ratio of the two orbit integrals of the
// pure leading-term potential, by quadrature; independent of a1.
double lambda_star_integral(double a1, double alpha1, const QuadratureSettings& settings = {});

// Memoized dissipation factor
//   Lambda(eta) = A(P^2)(eta_star; sqrt(eta/eta_star)) / eta_star  (eta >= eta_star)
//   Lambda(eta) = 0                                                (eta < eta_star)
// on a log-spaced grid with monotone-cubic interpolation between nodes.
class LambdaTable {
public:
    LambdaTable() = default;
    LambdaTable(const ValidatedSpec& spec, const EtaStar& eta_star,
                const QuadratureSettings& settings = {}, int nodes = 256,
                double span = 1e9);

    double operator()(double eta) const;
    double eta_star_value() const { return eta_star_; }
    double limit_value() const { return limit_; }  // Lambda at the top of the grid

private:
    PchipCurve curve_;
    double eta_star_ = 0.0;
    double limit_ = 0.0;
};

// Unmemoized evaluation used to validate the table.
double lambda_of_eta_direct(const ValidatedSpec& spec, double eta, double eta_star,
                            const QuadratureSettings& settings = {});

// Memoized orbit period tau(eta, 1), clamped to tau(eta_star) below the
// threshold; used by adaptive time stepping.
class PeriodTable {
public:
    PeriodTable() = default;
    PeriodTable(const ValidatedSpec& spec, double eta_star,
                const QuadratureSettings& settings = {}, int nodes = 192,
                double span = 1e9);

    double operator()(double eta) const;

private:
    PchipCurve log_curve_;  // ln tau vs ln eta
    double eta_star_ = 0.0;
};

}  // namespace ergolang

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ergolang/orbit.hpp"
#include "ergolang/potential.hpp"

namespace ergolang {

// Smooth step: 0 below eta_star, 1 above eta_star + width, C-infinity with
// bounded derivatives in between.
struct CutoffSpec {
    double eta_star = 0.0;
    double width = 1.0;
};

double chi(double eta, const CutoffSpec& cutoff);

// Upsilon(Q,P) = P^2 * chi(H(Q,P;1)). The cutoff is always composed with the
// lambda = 1 Hamiltonian, also when Upsilon is evaluated inside a general
// lambda orbit integral.
double upsilon(const ValidatedSpec& spec, const PhasePoint& x, const CutoffSpec& cutoff);

struct PsiDerivatives {
    double d_p = 0.0;   // dPsi/dP
    double d_pp = 0.0;  // d2Psi/dP2
};

struct DriftGrid {
    double h_min = 0.0;  // <= 0 selects eta_star/10 (clamped above min U)
    double h_max = 1e6;
    int shells = 64;
    int angles = 128;
    int box = 32;  // dense low-energy box resolution per axis
};

struct DriftCertificate {
    double delta = 0.0;
    double decay_rate = 0.0;  // gamma * (Lambda_* - delta)
    double C = 0.0;           // additive constant, max(0, max margin)
    double worst_ratio = 0.0; // max (LV + rate*V)/(1 + V)
    double worst_margin = 0.0;
    PhasePoint worst_point;
    double delta_H = 0.0;     // comparability slope on H >= comparability_cut
    double C_H = 0.0;         // comparability offset covering the whole grid
    double comparability_cut = 1e3;
    // max |V/H - 1| over grid points with H above each cut; tightens with
    // the cut when Psi is sublinear in H.
    std::vector<std::pair<double, double>> comparability_profile;
    bool boundary_growth = false;
    bool valid = false;
    std::string grid_description;
    std::vector<double> shell_eta;
    std::vector<double> shell_max_margin;
};

// Holds everything needed to evaluate V = H + Psi and its generator drift:
// the potential, the Langevin parameters, eta_star, the cutoff, the memoized
// orbit-average tables, and the quadrature settings. Immutable after
// construction; evaluations are pure.
class LyapunovModel {
public:
    LyapunovModel(ValidatedSpec spec, LangevinParams params,
                  QuadratureSettings quadrature = {});

    const ValidatedSpec& spec() const { return spec_; }
    const LangevinParams& params() const { return params_; }
    const EtaStar& eta_star() const { return eta_star_; }
    const CutoffSpec& cutoff() const { return cutoff_; }
    const LambdaTable& lambda_table() const { return lambda_; }
    const QuadratureSettings& quadrature() const { return quad_; }
    double lambda_star_value() const { return lambda_star_; }

    // Memoized A(P^2)(eta; 1); below eta_star falls back to direct quadrature.
    double a_p2(double eta) const;

    // A(Upsilon)(eta; 1) = chi(eta) * A(P^2)(eta; 1); identically zero below
    // eta_star, equal to A(P^2) above eta_star + width.
    double a_upsilon(double eta) const;

    // A(Upsilon)(eta; lambda) by direct orbit quadrature, any lambda >= 1.
    double a_upsilon_direct(double eta, double lambda) const;

    double upsilon_value(const PhasePoint& x) const;

    // Solution of the orbit Poisson equation H Psi = gamma (Upsilon - A(Upsilon)),
    // anchored Psi = 0 at (Q_-(eta,lambda), 0) and integrated along the flow.
    double psi(const PhasePoint& x, double lambda = 1.0) const;

    // Fixed-rule variant whose quadrature error varies smoothly with the
    // point; used for finite differencing.
    double psi_fixed(const PhasePoint& x, double lambda = 1.0) const;

    // Residual of the source integrated around the full loop at level eta,
    // together with the loop integral of |source| (the natural scale).
    std::pair<double, double> poisson_loop(double eta, double lambda = 1.0) const;

    // Central differences in P with Richardson step control. Returns zeros
    // for H <= eta_star. Throws StepBreakdown if the two step sizes keep
    // disagreeing after three halvings.
    PsiDerivatives psi_derivatives(const PhasePoint& x, double lambda = 1.0) const;

    // V(q,p) = H(q,p;1) + Psi(q,p;1).
    double lyapunov_value(const PhasePoint& x) const;

    // Generator drift LV = -gamma A(Upsilon)(H;1) + sigma^2/2 + E + G with
    // E = -gamma p dPsi/dP + (sigma^2/2) d2Psi/dP2 and G = gamma (Upsilon - p^2).
    double generator_on_v(const PhasePoint& x) const;

    // Scans log-spaced energy shells x orbit angles plus a dense low-energy
    // box; C = max(0, max of LV + gamma(Lambda_*-delta)V). The certificate is
    // valid when the margin is not still growing on the outermost shells.
    DriftCertificate drift_certificate(const DriftGrid& grid, double delta) const;

private:
    double psi_partial(const ScaledPotential& pot, const ScaledPotential& pot1,
                       double eta, double a_ups, double theta_hi, double q_minus,
                       double q_plus, bool adaptive, int panels) const;
    double psi_impl(const PhasePoint& x, double lambda, bool adaptive) const;

    ValidatedSpec spec_;
    LangevinParams params_;
    QuadratureSettings quad_;
    EtaStar eta_star_;
    CutoffSpec cutoff_;
    LambdaTable lambda_;
    PchipCurve a_p2_log_;  // ln A(P^2)(eta;1) against ln eta
    double a_p2_span_top_ = 0.0;
    double lambda_star_ = 0.0;
};

}  // namespace ergolang

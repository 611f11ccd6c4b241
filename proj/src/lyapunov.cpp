#include "ergolang/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ergolang/errors.hpp"

namespace ergolang {

namespace {

constexpr double kPi = std::numbers::pi;

double smooth_g(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

}  // namespace

double chi(double eta, const CutoffSpec& cutoff) {
    const double x = (eta - cutoff.eta_star) / cutoff.width;
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double g = smooth_g(x);
    return g / (g + smooth_g(1.0 - x));
}

double upsilon(const ValidatedSpec& spec, const PhasePoint& x, const CutoffSpec& cutoff) {
    const double h1 = eval_hamiltonian(spec, x, 1.0);
    return x.p * x.p * chi(h1, cutoff);
}

LyapunovModel::LyapunovModel(ValidatedSpec spec, LangevinParams params,
                             QuadratureSettings quadrature)
    : spec_(std::move(spec)), params_(params), quad_(quadrature) {
    eta_star_ = ergolang::eta_star(spec_);
    cutoff_ = CutoffSpec{eta_star_.value, 1.0};
    lambda_ = LambdaTable(spec_, eta_star_, quad_);
    lambda_star_ = lambda_star(spec_.alpha1());

    // A(P^2)(eta;1) on a log grid; nearly a power law, so interpolate in
    // log-log space. The curvature concentrates near eta_star, hence the
    // denser grid than the Lambda table uses.
    constexpr int kNodes = 512;
    constexpr double kSpan = 1e9;
    std::vector<double> log_eta(kNodes), log_val(kNodes);
    for (int i = 0; i < kNodes; ++i) {
        const double eta = eta_star_.value * std::pow(kSpan, i / (kNodes - 1.0));
        const auto avg = orbit_average(
            spec_, [](double, double p) { return p * p; }, eta, 1.0, quad_);
        log_eta[i] = std::log(eta);
        log_val[i] = std::log(avg.mean);
    }
    a_p2_span_top_ = eta_star_.value * kSpan;
    a_p2_log_ = PchipCurve(std::move(log_eta), std::move(log_val));
}

double LyapunovModel::a_p2(double eta) const {
    if (eta < eta_star_.value) {
        const auto avg = orbit_average(
            spec_, [](double, double p) { return p * p; }, eta, 1.0, quad_);
        return avg.mean;
    }
    if (eta > a_p2_span_top_) {
        // Beyond the table, A(P^2) = eta * Lambda(eta) with Lambda pinned at
        // its top-of-grid value.
        return eta * lambda_.limit_value();
    }
    return std::exp(a_p2_log_(std::log(eta)));
}

double LyapunovModel::a_upsilon(double eta) const {
    // At lambda = 1 the cutoff is constant on each orbit, so the Upsilon
    // average factorises exactly.
    const double c = chi(eta, cutoff_);
    if (c == 0.0) return 0.0;
    return c * a_p2(eta);
}

double LyapunovModel::a_upsilon_direct(double eta, double lambda) const {
    if (eta <= eta_star_.value) return 0.0;
    const ScaledPotential pot1 = spec_.scaled(1.0);
    const auto avg = orbit_average(
        spec_,
        [&](double q, double p) {
            const double h1 = 0.5 * p * p + pot1.value(q);
            return p * p * chi(h1, cutoff_);
        },
        eta, lambda, quad_);
    return avg.mean;
}

double LyapunovModel::upsilon_value(const PhasePoint& x) const {
    return upsilon(spec_, x, cutoff_);
}

namespace {

// Fixed composite Gauss rule with Chebyshev-clustered panel edges over
// [-pi/2, theta_hi]: visits (theta, quadrature weight) pairs. Its error
// varies smoothly with the parameters, which keeps finite differences of Psi
// clean; the adaptive engine's panel pattern would jump instead.
template <class Visit>
void fixed_panel_scan(Visit&& visit, double theta_hi, int panels, const GaussRule& rule) {
    const double lo = -0.5 * kPi;
    double prev_edge = lo;
    for (int j = 1; j <= panels; ++j) {
        const double u = static_cast<double>(j) / panels;
        const double edge = lo + (theta_hi - lo) * 0.5 * (1.0 - std::cos(kPi * u));
        const double pm = 0.5 * (prev_edge + edge);
        const double ph = 0.5 * (edge - prev_edge);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            visit(pm + ph * rule.nodes[i], rule.weights[i] * ph);
        }
        prev_edge = edge;
    }
}

}  // namespace

// Partial orbit integral of the Poisson source along the upper branch, from
// the anchor at theta = -pi/2 up to theta_hi, in orbit angle
// Q(theta) = mid + half*sin(theta). The source is even in P, so the lower
// branch reuses the same integrand.
double LyapunovModel::psi_partial(const ScaledPotential& pot, const ScaledPotential& pot1,
                                  double eta, double a_ups, double theta_hi,
                                  double q_minus, double q_plus, bool adaptive,
                                  int panels) const {
    const double mid = 0.5 * (q_plus + q_minus);
    const double half = 0.5 * (q_plus - q_minus);
    const double gamma = params_.gamma;
    const OrbitFrame frame = make_orbit_frame(pot, TurningPoints{q_minus, q_plus});

    auto integrand = [&](double theta) {
        const double q = mid + half * std::sin(theta);
        const double gap = stable_orbit_gap(pot, eta, frame, theta);
        if (gap <= 0.0) return 0.0;
        const double p2 = 2.0 * gap;
        const double r = std::sqrt(p2);
        const double h1 = 0.5 * p2 + pot1.value(q);
        const double source = gamma * (p2 * chi(h1, cutoff_) - a_ups);
        return source * half * std::cos(theta) / r;
    };

    if (theta_hi <= -0.5 * kPi) return 0.0;
    if (adaptive) {
        return integrate_adaptive(integrand, -0.5 * kPi, theta_hi, quad_,
                                  gamma * (std::abs(a_ups) + eta) * 2.0);
    }
    double total = 0.0;
    fixed_panel_scan([&](double theta, double w) { total += w * integrand(theta); },
                     theta_hi, panels, gauss_legendre(quad_.nodes_per_panel));
    return total;
}

double LyapunovModel::psi_impl(const PhasePoint& x, double lambda, bool adaptive) const {
    const ScaledPotential pot = spec_.scaled(lambda);
    const ScaledPotential pot1 = spec_.scaled(1.0);
    if (!(x.q > 0.0)) throw DomainError("Psi requires q > 0");
    const double eta = 0.5 * x.p * x.p + pot.value(x.q);
    if (eta <= eta_star_.value) return 0.0;

    const auto tp = turning_points(pot, eta);
    const OrbitFrame frame = make_orbit_frame(pot, tp);
    const double mid = frame.mid;
    const double half = frame.half;

    const int panels = 24;
    const GaussRule& rule = gauss_legendre(quad_.nodes_per_panel);

    // The subtracted average must be consistent with the quadrature of the
    // source itself: the fixed rule recomputes it from the same panels so the
    // quadrature error stays smooth in the evaluation point (the memo table
    // is only C^1 across its nodes, which would spoil second differences).
    double a_ups;
    if (adaptive) {
        a_ups = a_upsilon_direct(eta, lambda);
    } else {
        double num = 0.0, den = 0.0;
        fixed_panel_scan(
            [&](double theta, double w_quad) {
                const double q = mid + half * std::sin(theta);
                const double gap = stable_orbit_gap(pot, eta, frame, theta);
                if (gap <= 0.0) return;
                const double p2 = 2.0 * gap;
                const double w = w_quad * half * std::cos(theta) / std::sqrt(p2);
                const double h1 = 0.5 * p2 + pot1.value(q);
                num += p2 * chi(h1, cutoff_) * w;
                den += w;
            },
            0.5 * kPi, panels, rule);
        a_ups = num / den;
    }

    double s = std::clamp((x.q - mid) / half, -1.0, 1.0);
    // Points that sit on a turning point of their own orbit (p ~= 0) must
    // map to exactly +-pi/2, or the anchor picks up a spurious sliver that
    // second differences then divide by h^2.
    if (s < -1.0 + 1e-9) s = -1.0;
    if (s > 1.0 - 1e-9) s = 1.0;
    const double theta_x = std::asin(s);
    const double partial = psi_partial(pot, pot1, eta, a_ups, theta_x, tp.q_minus,
                                       tp.q_plus, adaptive, panels);
    if (x.p >= 0.0) return partial;
    // Continue through (Q_+, 0): full upper branch plus the lower-branch
    // segment, which by evenness of the source equals full - partial. The
    // upper-branch total vanishes (half the zero-mean loop), so Psi is odd
    // in P. The fixed rule subtracts an average built from its own nodes,
    // which makes the identity exact there; integrating the upper branch
    // again would only add roundoff under the finite differences.
    if (!adaptive) return -partial;
    const double full = psi_partial(pot, pot1, eta, a_ups, 0.5 * kPi, tp.q_minus,
                                    tp.q_plus, adaptive, panels);
    return 2.0 * full - partial;
}

double LyapunovModel::psi(const PhasePoint& x, double lambda) const {
    return psi_impl(x, lambda, true);
}

double LyapunovModel::psi_fixed(const PhasePoint& x, double lambda) const {
    return psi_impl(x, lambda, false);
}

std::pair<double, double> LyapunovModel::poisson_loop(double eta, double lambda) const {
    const ScaledPotential pot = spec_.scaled(lambda);
    const ScaledPotential pot1 = spec_.scaled(1.0);
    const auto tp = turning_points(pot, eta);
    // Solvability hinges on subtracting the true orbit average; use the
    // tight direct quadrature rather than the interpolated table.
    const double a_ups = a_upsilon_direct(eta, lambda);
    const OrbitFrame frame = make_orbit_frame(pot, tp);
    const double mid = frame.mid;
    const double half = frame.half;
    const double gamma = params_.gamma;

    auto integrand = [&](double theta, double* out) {
        const double q = mid + half * std::sin(theta);
        const double gap = stable_orbit_gap(pot, eta, frame, theta);
        if (gap <= 0.0) {
            out[0] = out[1] = 0.0;
            return;
        }
        const double p2 = 2.0 * gap;
        const double r = std::sqrt(p2);
        const double h1 = 0.5 * p2 + pot1.value(q);
        const double source = gamma * (p2 * chi(h1, cutoff_) - a_ups);
        const double w = half * std::cos(theta) / r;
        out[0] = source * w;
        out[1] = std::abs(source) * w;
    };
    const QuadResult res = integrate_adaptive(integrand, 2, -0.5 * kPi, 0.5 * kPi, quad_,
                                              gamma * (std::abs(a_ups) + eta));
    // Upper and lower branches contribute equally (source even in P).
    return {2.0 * res.integral[0], 2.0 * res.integral[1]};
}

PsiDerivatives LyapunovModel::psi_derivatives(const PhasePoint& x, double lambda) const {
    const double eta = eval_hamiltonian(spec_, x, lambda);
    if (eta <= eta_star_.value) return {0.0, 0.0};

    double h = 1e-4 * std::max(1.0, std::sqrt(eta));
    const double psi0 = psi_fixed(x, lambda);
    for (int attempt = 0; attempt < 4; ++attempt) {
        const double fp = psi_fixed({x.q, x.p + h}, lambda);
        const double fm = psi_fixed({x.q, x.p - h}, lambda);
        const double fp2 = psi_fixed({x.q, x.p + 0.5 * h}, lambda);
        const double fm2 = psi_fixed({x.q, x.p - 0.5 * h}, lambda);

        const double d1_h = (fp - fm) / (2.0 * h);
        const double d1_h2 = (fp2 - fm2) / h;
        const double d2_h = (fp - 2.0 * psi0 + fm) / (h * h);
        const double d2_h2 = 4.0 * (fp2 - 2.0 * psi0 + fm2) / (h * h);

        // Additive absolute slack: near the derivatives' zero crossings the
        // relative criterion is meaningless, and errors far below the
        // natural scales (dPsi/dP ~ Psi/p, d2Psi/dP2 against the energy)
        // are harmless downstream.
        const bool ok1 = std::abs(d1_h - d1_h2) <=
                         1e-3 * std::abs(d1_h2) + 1e-5 * (1.0 + std::abs(psi0));
        const bool ok2 =
            std::abs(d2_h - d2_h2) <= 1e-3 * std::abs(d2_h2) + 2e-4 * (1.0 + eta);
        if (ok1 && ok2) return {d1_h2, d2_h2};
        h *= 0.5;
    }
    std::ostringstream os;
    os << "Richardson check failed for Psi derivatives at (q,p)=(" << x.q << "," << x.p
       << ")";
    throw StepBreakdown(os.str());
}

double LyapunovModel::lyapunov_value(const PhasePoint& x) const {
    return eval_hamiltonian(spec_, x, 1.0) + psi(x, 1.0);
}

double LyapunovModel::generator_on_v(const PhasePoint& x) const {
    const double eta = eval_hamiltonian(spec_, x, 1.0);
    const double sigma2 = params_.sigma_squared();
    const double gamma = params_.gamma;
    const double ups = upsilon_value(x);
    const double g_term = gamma * (ups - x.p * x.p);
    double e_term = 0.0;
    if (eta > eta_star_.value) {
        const auto d = psi_derivatives(x, 1.0);
        e_term = -gamma * x.p * d.d_p + 0.5 * sigma2 * d.d_pp;
    }
    return -gamma * a_upsilon(eta) + 0.5 * sigma2 + e_term + g_term;
}

DriftCertificate LyapunovModel::drift_certificate(const DriftGrid& grid, double delta) const {
    DriftCertificate cert;
    cert.delta = delta;
    cert.decay_rate = params_.gamma * (lambda_star_ - delta);

    const double min_u = global_minimum(spec_).value;
    double h_lo = grid.h_min > 0.0 ? grid.h_min : eta_star_.value / 10.0;
    h_lo = std::max(h_lo, min_u * 1.05 + 1e-6);
    const double h_hi = grid.h_max;

    double worst_margin = -std::numeric_limits<double>::infinity();
    double worst_ratio = -std::numeric_limits<double>::infinity();
    PhasePoint worst_point;
    double dev_rest = 0.0;  // max (|V - H| - delta_H * H) below the cut, fixed later
    std::vector<std::pair<double, double>> deviations;  // (eta, |V-H|)

    auto visit = [&](const PhasePoint& x) {
        const double h_here = eval_hamiltonian(spec_, x, 1.0);
        const double v = lyapunov_value(x);
        const double lv = generator_on_v(x);
        const double margin = lv + cert.decay_rate * v;
        const double ratio = margin / (1.0 + v);
        if (margin > worst_margin) worst_margin = margin;
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst_point = x;
        }
        deviations.emplace_back(h_here, std::abs(v - h_here));
        return margin;
    };

    // Energy shells, each sampled along the orbit.
    cert.shell_eta.reserve(grid.shells);
    cert.shell_max_margin.reserve(grid.shells);
    for (int i = 0; i < grid.shells; ++i) {
        const double eta =
            h_lo * std::pow(h_hi / h_lo, i / (grid.shells - 1.0));
        const auto tp = turning_points(spec_, eta, 1.0);
        const double mid = 0.5 * (tp.q_plus + tp.q_minus);
        const double half = 0.5 * (tp.q_plus - tp.q_minus);
        double shell_max = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < grid.angles; ++j) {
            const double phase = 2.0 * kPi * j / grid.angles;
            const double q = mid - half * std::cos(phase);
            const double gap = eta - eval_potential(spec_, q, 1.0);
            const double p = (std::sin(phase) >= 0.0 ? 1.0 : -1.0) *
                             std::sqrt(2.0 * std::max(gap, 0.0));
            shell_max = std::max(shell_max, visit({q, p}));
        }
        cert.shell_eta.push_back(eta);
        cert.shell_max_margin.push_back(shell_max);
    }

    // Dense low-energy box around the well, covering the cutoff band.
    const double eta_box = eta_star_.value + cutoff_.width + 1.0;
    const auto tp_box = turning_points(spec_, eta_box, 1.0);
    const double p_max = std::sqrt(2.0 * eta_box) * 1.05;
    for (int i = 0; i < grid.box; ++i) {
        const double q = tp_box.q_minus * 0.95 +
                         (tp_box.q_plus * 1.05 - tp_box.q_minus * 0.95) * i / (grid.box - 1.0);
        for (int j = 0; j < grid.box; ++j) {
            const double p = -p_max + 2.0 * p_max * j / (grid.box - 1.0);
            visit({q, p});
        }
    }

    cert.worst_margin = worst_margin;
    cert.worst_ratio = worst_ratio;
    cert.worst_point = worst_point;
    cert.C = std::max(0.0, worst_margin);
    for (double cut : {1e3, 1e4, 1e5}) {
        double dh = 0.0;
        for (const auto& [eta, dev] : deviations) {
            if (eta >= cut) dh = std::max(dh, dev / eta);
        }
        cert.comparability_profile.emplace_back(cut, dh);
    }
    cert.delta_H = cert.comparability_profile.front().second;
    for (const auto& [eta, dev] : deviations) {
        dev_rest = std::max(dev_rest, dev - cert.delta_H * eta);
    }
    cert.C_H = std::max(0.0, dev_rest);

    const int n = grid.shells;
    cert.boundary_growth = n >= 2 && cert.shell_max_margin[n - 1] > cert.shell_max_margin[n - 2] &&
                           cert.shell_max_margin[n - 1] > 0.0;
    cert.valid = std::isfinite(cert.C) && !cert.boundary_growth;

    std::ostringstream os;
    os << grid.shells << " log shells on [" << h_lo << ", " << h_hi << "] x " << grid.angles
       << " angles + " << grid.box << "x" << grid.box << " low-energy box";
    cert.grid_description = os.str();
    return cert;
}

}  // namespace ergolang

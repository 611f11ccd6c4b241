#include "ergolang/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include "ergolang/errors.hpp"

namespace ergolang {

namespace {

constexpr double kPi = std::numbers::pi;

// Coarse global minimum of a scaled potential: wide log scan plus golden
// section refinement around the best grid point.
std::pair<double, double> scaled_minimum(const ScaledPotential& pot) {
    constexpr int kScan = 257;
    double best_r = 1.0;
    double best_u = pot.value(1.0);
    for (int i = 0; i < kScan; ++i) {
        const double r = std::pow(10.0, -8.0 + 16.0 * i / (kScan - 1.0));
        const double u = pot.value(r);
        if (u < best_u) {
            best_u = u;
            best_r = r;
        }
    }
    double a = best_r / 10.0, b = best_r * 10.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    for (int i = 0; i < 100; ++i) {
        if (pot.value(c) < pot.value(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    const double r_min = 0.5 * (a + b);
    return {r_min, pot.value(r_min)};
}

// Brackets every root of eta - U on [lo, hi]: starts at the global minimum,
// expands each side until the potential both exceeds the level and keeps
// rising (so barriers inside the scan window cannot be mistaken for the
// repulsive or confining wall), then scans a log grid for sign changes.
std::vector<double> level_set_roots(const ScaledPotential& pot, double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        std::ostringstream os;
        os << "level-set energy must be positive and finite, got " << eta;
        throw DomainError(os.str());
    }
    const auto [r_min, u_min] = scaled_minimum(pot);
    if (eta <= u_min) {
        std::ostringstream os;
        os << "level " << eta << " does not exceed the potential minimum " << u_min;
        throw BelowMinimum(os.str());
    }

    double lo = r_min;
    for (int i = 0; i < 400; ++i) {
        if (pot.value(lo) > eta && pot.value(0.5 * lo) > pot.value(lo)) break;
        lo *= 0.5;
    }
    if (!(pot.value(lo) > eta)) throw BelowMinimum("no repulsive wall found below the level");
    double hi = r_min;
    for (int i = 0; i < 400; ++i) {
        if (pot.value(hi) > eta && pot.value(2.0 * hi) > pot.value(hi)) break;
        hi *= 2.0;
    }
    if (!(pot.value(hi) > eta)) throw BelowMinimum("no confining wall found above the level");

    constexpr int kScan = 512;
    const double log_lo = std::log(lo), log_hi = std::log(hi);
    std::vector<double> roots;
    double prev_r = lo;
    double prev_f = eta - pot.value(lo);
    for (int i = 1; i < kScan; ++i) {
        const double r = std::exp(log_lo + (log_hi - log_lo) * i / (kScan - 1.0));
        const double f = eta - pot.value(r);
        if ((prev_f < 0.0) != (f < 0.0)) {
            double a = prev_r, b = r, fa = prev_f;
            for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = eta - pot.value(m);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            double root = 0.5 * (a + b);
            // Newton polish; stay inside the bracket.
            for (int it = 0; it < 3; ++it) {
                const double d = pot.derivative(root);
                if (d == 0.0) break;
                const double next = root + (eta - pot.value(root)) / d;
                if (next <= a || next >= b) break;
                root = next;
            }
            roots.push_back(root);
        }
        prev_r = r;
        prev_f = f;
    }
    return roots;
}

}  // namespace

int level_set_root_count(const ScaledPotential& pot, double eta) {
    try {
        return static_cast<int>(level_set_roots(pot, eta).size());
    } catch (const BelowMinimum&) {
        return 0;
    }
}

TurningPoints turning_points(const ScaledPotential& pot, double eta) {
    const auto roots = level_set_roots(pot, eta);
    if (roots.empty()) {
        std::ostringstream os;
        os << "level " << eta << " lies below the minimum of the potential";
        throw BelowMinimum(os.str());
    }
    if (roots.size() > 2) {
        std::ostringstream os;
        os << "level " << eta << " has " << roots.size()
           << " positive roots; the level set is not a single loop";
        throw MultipleWells(os.str());
    }
    if (roots.size() == 1) {
        // Tangency at the minimum: degenerate orbit.
        std::ostringstream os;
        os << "level " << eta << " is tangent to the potential minimum";
        throw BelowMinimum(os.str());
    }
    return {roots.front(), roots.back()};
}

TurningPoints turning_points(const ValidatedSpec& spec, double eta, double lambda) {
    return turning_points(spec.scaled(lambda), eta);
}

OrbitFrame make_orbit_frame(const ScaledPotential& pot, const TurningPoints& tp) {
    OrbitFrame f;
    f.tp = tp;
    f.mid = 0.5 * (tp.q_plus + tp.q_minus);
    f.half = 0.5 * (tp.q_plus - tp.q_minus);
    f.width = tp.q_plus - tp.q_minus;
    f.du_minus = pot.derivative(tp.q_minus);
    f.du_plus = pot.derivative(tp.q_plus);
    f.ddu_minus = pot.second_derivative(tp.q_minus);
    f.ddu_plus = pot.second_derivative(tp.q_plus);
    // Taylor is trusted only well inside the endpoint's curvature scale.
    auto radius = [&](double du, double ddu) {
        const double curv = 0.02 * std::abs(du) / std::max(std::abs(ddu), 1e-300);
        return std::min(3e-4 * f.width, curv);
    };
    f.radius_minus = radius(f.du_minus, f.ddu_minus);
    f.radius_plus = radius(f.du_plus, f.ddu_plus);
    return f;
}

double stable_orbit_gap(const ScaledPotential& pot, double eta, const OrbitFrame& frame,
                        double theta) {
    const double a = 0.25 * kPi - 0.5 * theta;
    const double s = std::sin(a), c = std::cos(a);
    const double one_minus = 2.0 * s * s;  // 1 - sin(theta), no cancellation
    const double one_plus = 2.0 * c * c;   // 1 + sin(theta)
    const double dq_plus = frame.half * one_minus;
    const double dq_minus = frame.half * one_plus;

    auto direct = [&] {
        return eta - pot.value(frame.mid + frame.half * (one_plus - 1.0));
    };
    auto taylor_plus = [&] {
        return dq_plus * (frame.du_plus - 0.5 * frame.ddu_plus * dq_plus);
    };
    auto taylor_minus = [&] {
        return dq_minus * (-frame.du_minus - 0.5 * frame.ddu_minus * dq_minus);
    };
    auto blend = [](double t, double d, double s01) {
        const double w = s01 * s01 * (3.0 - 2.0 * s01);
        return (1.0 - w) * t + w * d;
    };

    double gap;
    if (dq_plus < 0.5 * frame.radius_plus) {
        gap = taylor_plus();
    } else if (dq_plus < frame.radius_plus) {
        gap = blend(taylor_plus(), direct(),
                    (dq_plus - 0.5 * frame.radius_plus) / (0.5 * frame.radius_plus));
    } else if (dq_minus < 0.5 * frame.radius_minus) {
        gap = taylor_minus();
    } else if (dq_minus < frame.radius_minus) {
        gap = blend(taylor_minus(), direct(),
                    (dq_minus - 0.5 * frame.radius_minus) / (0.5 * frame.radius_minus));
    } else {
        gap = direct();
    }
    return std::max(gap, 0.0);
}

double rho(const ValidatedSpec& spec, double q, double eta, double lambda) {
    const double u = eval_potential(spec, q, lambda);
    const double gap = eta - u;
    if (gap < -1e-9 * std::max(eta, 1.0)) {
        std::ostringstream os;
        os << "point q=" << q << " lies outside the level set (U=" << u << " > eta=" << eta
           << ")";
        throw DomainError(os.str());
    }
    return std::sqrt(2.0 * std::max(gap, 0.0));
}

OrbitAverages orbit_average(const ValidatedSpec& spec,
                            const std::function<double(double, double)>& phi, double eta,
                            double lambda, const QuadratureSettings& settings) {
    const ScaledPotential pot = spec.scaled(lambda);
    const auto tp = turning_points(pot, eta);
    const OrbitFrame frame = make_orbit_frame(pot, tp);
    const double mid = frame.mid;
    const double half = frame.half;

    // Components: [0] phi bracket, [1] period. Substituting
    // Q = mid + half*sin(theta) cancels the endpoint 1/rho singularity
    // against the Jacobian for simple turning points.
    auto integrand = [&](double theta, double* out) {
        const double q = mid + half * std::sin(theta);
        const double gap = stable_orbit_gap(pot, eta, frame, theta);
        if (gap <= 0.0) {
            out[0] = 0.0;
            out[1] = 0.0;
            return;
        }
        const double r = std::sqrt(2.0 * gap);
        const double w = half * std::cos(theta) / r;
        out[0] = (phi(q, r) + phi(q, -r)) * w;
        out[1] = 2.0 * w;
    };

    const QuadResult res =
        integrate_adaptive(integrand, 2, -0.5 * kPi, 0.5 * kPi, settings);
    OrbitAverages out;
    out.bracket = res.integral[0];
    out.period = res.integral[1];
    out.mean = out.bracket / out.period;
    return out;
}

OrbitGeometry orbit_geometry(const ValidatedSpec& spec, double eta, double lambda,
                             const QuadratureSettings& settings) {
    const auto tp = turning_points(spec, eta, lambda);
    const auto avg = orbit_average(
        spec, [](double, double p) { return p * p; }, eta, lambda, settings);
    OrbitGeometry g;
    g.eta = eta;
    g.lambda = lambda;
    g.q_minus = tp.q_minus;
    g.q_plus = tp.q_plus;
    g.period = avg.period;
    g.p2_integral = avg.bracket;
    return g;
}

EtaStar eta_star(const ValidatedSpec& spec, std::vector<double> lambda_grid, double margin) {
    if (std::find(lambda_grid.begin(), lambda_grid.end(), 1.0) == lambda_grid.end()) {
        lambda_grid.insert(lambda_grid.begin(), 1.0);
    }

    double highest = global_minimum(spec).value;
    for (double lambda : lambda_grid) {
        const ScaledPotential pot = spec.scaled(lambda);
        // Interior local maxima: sign changes of U' from + to - on a wide
        // log grid. lambda >= 1 only shrinks sub-leading terms, so features
        // drift toward small q; the grid is generous on that side.
        constexpr int kScan = 2048;
        double prev_r = 1e-8;
        double prev_d = pot.derivative(prev_r);
        for (int i = 1; i < kScan; ++i) {
            const double r = std::pow(10.0, -8.0 + 12.0 * i / (kScan - 1.0));
            const double d = pot.derivative(r);
            if (prev_d > 0.0 && d < 0.0) {
                double a = prev_r, b = r;
                for (int it = 0; it < 100 && (b - a) > 1e-12 * b; ++it) {
                    const double m = 0.5 * (a + b);
                    if (pot.derivative(m) > 0.0) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                highest = std::max(highest, pot.value(0.5 * (a + b)));
            }
            prev_r = r;
            prev_d = d;
        }
    }

    EtaStar out;
    out.margin = margin;
    out.value = (1.0 + margin) * highest + 1.0;
    out.lambda_grid_checked = lambda_grid;

    for (double lambda : lambda_grid) {
        const ScaledPotential pot = spec.scaled(lambda);
        for (double factor : {1.0, 2.0, 10.0, 100.0}) {
            const int n = level_set_root_count(pot, factor * out.value);
            if (n != 2) {
                std::ostringstream os;
                os << "level " << factor * out.value << " at lambda=" << lambda << " has "
                   << n << " roots; eta_star verification failed";
                throw VerificationFailed(os.str());
            }
        }
    }
    return out;
}

double lambda_star(double alpha1) {
    if (alpha1 == 2.0) {
        static bool warned = false;
        if (!warned) {
            std::cerr << "warning: alpha1 = 2 sits on the boundary of the averaging theory; "
                         "Lambda_* = 1 there\n";
            warned = true;
        }
    }
    return 2.0 * alpha1 / (alpha1 + 2.0);
}

double lambda_star_integral(double a1, double alpha1, const QuadratureSettings& settings) {
    // Orbit integrals of the pure leading-term potential at unit energy,
    // substituting Q = Q_* sin(theta) to absorb the right-endpoint
    // singularity. The a1-dependence cancels in the ratio.
    const double q_star = std::pow(a1, -1.0 / alpha1);
    auto integrand = [&](double theta, double* out) {
        const double s = std::sin(theta);
        const double gap = 1.0 - std::pow(s, alpha1);
        const double c = std::cos(theta);
        if (gap <= 0.0) {
            // Analytic limit of the singular component at theta = pi/2.
            out[0] = 0.0;
            out[1] = q_star * std::sqrt(2.0 / alpha1);
            return;
        }
        out[0] = q_star * std::sqrt(gap) * c;
        out[1] = q_star * c / std::sqrt(gap);
    };
    const QuadResult res = integrate_adaptive(integrand, 2, 0.0, 0.5 * kPi, settings);
    return 2.0 * res.integral[0] / res.integral[1];
}

LambdaTable::LambdaTable(const ValidatedSpec& spec, const EtaStar& eta_star_in,
                         const QuadratureSettings& settings, int nodes, double span) {
    eta_star_ = eta_star_in.value;
    std::vector<double> log_eta(nodes), value(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double eta = eta_star_ * std::pow(span, i / (nodes - 1.0));
        log_eta[i] = std::log(eta);
        value[i] = lambda_of_eta_direct(spec, eta, eta_star_, settings);
    }
    limit_ = value.back();
    curve_ = PchipCurve(std::move(log_eta), std::move(value));
}

double LambdaTable::operator()(double eta) const {
    if (eta < eta_star_) return 0.0;
    return curve_(std::log(eta));
}

double lambda_of_eta_direct(const ValidatedSpec& spec, double eta, double eta_star,
                            const QuadratureSettings& settings) {
    if (eta < eta_star) return 0.0;
    const double lambda = std::sqrt(eta / eta_star);
    const auto avg = orbit_average(
        spec, [](double, double p) { return p * p; }, eta_star, lambda, settings);
    return avg.mean / eta_star;
}

PeriodTable::PeriodTable(const ValidatedSpec& spec, double eta_star,
                         const QuadratureSettings& settings, int nodes, double span) {
    eta_star_ = eta_star;
    std::vector<double> log_eta(nodes), log_tau(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double eta = eta_star_ * std::pow(span, i / (nodes - 1.0));
        const auto avg = orbit_average(
            spec, [](double, double) { return 1.0; }, eta, 1.0, settings);
        log_eta[i] = std::log(eta);
        log_tau[i] = std::log(avg.period);
    }
    log_curve_ = PchipCurve(std::move(log_eta), std::move(log_tau));
}

double PeriodTable::operator()(double eta) const {
    const double e = std::max(eta, eta_star_);
    return std::exp(log_curve_(std::log(e)));
}

}  // namespace ergolang

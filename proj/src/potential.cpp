#include "ergolang/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ergolang {

namespace {

void check_positive_r(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        std::ostringstream os;
        os << "position must be positive and finite, got " << r;
        throw DomainError(os.str());
    }
}

// Shared validation body; `min_alpha1` is 2 for the marginal variant and
// the open bound (alpha1 > 2) otherwise.
std::vector<double> check_invariants(const PotentialSpec& spec, bool allow_marginal) {
    const auto& t = spec.terms;
    if (t.empty()) {
        throw SpecError(SpecError::Kind::ExponentOrder, "potential needs at least one term");
    }
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(t[k - 1].exponent > t[k].exponent)) {
            std::ostringstream os;
            os << "exponents must be strictly decreasing: alpha_" << k << " = "
               << t[k - 1].exponent << " vs alpha_" << k + 1 << " = " << t[k].exponent;
            throw SpecError(SpecError::Kind::ExponentOrder, os.str());
        }
    }
    const double alpha1 = t.front().exponent;
    const bool alpha1_ok = allow_marginal ? alpha1 >= 2.0 : alpha1 > 2.0;
    if (!alpha1_ok) {
        std::ostringstream os;
        os << "leading exponent must be > 2, got " << alpha1;
        throw SpecError(SpecError::Kind::ExponentOrder, os.str());
    }
    if (!(t.back().exponent < 0.0)) {
        std::ostringstream os;
        os << "last exponent must be negative (singular term), got " << t.back().exponent;
        throw SpecError(SpecError::Kind::ExponentOrder, os.str());
    }
    if (!(t.front().coefficient > 0.0)) {
        throw SpecError(SpecError::Kind::LeadingSignError, "leading coefficient must be positive");
    }
    if (!(t.back().coefficient > 0.0)) {
        throw SpecError(SpecError::Kind::SingularSignError, "singular coefficient must be positive");
    }

    std::vector<double> lambda_expo(t.size(), 0.0);
    for (std::size_t k = 1; k < t.size(); ++k) {
        lambda_expo[k] = 2.0 * (t[k].exponent / alpha1 - 1.0);
    }
    return lambda_expo;
}

double raw_value(const PotentialSpec& spec, double r) {
    double u = spec.offset;
    for (const auto& term : spec.terms) u += term.coefficient * std::pow(r, term.exponent);
    return u;
}

double raw_derivative(const PotentialSpec& spec, double r) {
    double du = 0.0;
    for (const auto& term : spec.terms) {
        du += term.coefficient * term.exponent * std::pow(r, term.exponent - 1.0);
    }
    return du;
}

// Bisection refinement of a bracketed root of f; bracket must have a sign
// change. Converges to ~1e-13 relative.
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200 && (hi - lo) > 1e-13 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ComCoords to_com(const FullState& s) {
    ComCoords c;
    c.rel = {0.5 * (s.q1 - s.q2), 0.5 * (s.p1 - s.p2)};
    c.com = {0.5 * (s.q1 + s.q2), 0.5 * (s.p1 + s.p2)};
    return c;
}

FullState from_com(const ComCoords& c) {
    FullState s;
    s.q1 = c.com.q + c.rel.q;
    s.q2 = c.com.q - c.rel.q;
    s.p1 = c.com.p + c.rel.p;
    s.p2 = c.com.p - c.rel.p;
    return s;
}

double LangevinParams::sigma() const { return std::sqrt(2.0 * gamma * temperature); }

double ScaledPotential::value(double r) const {
    double u = offset_;
    for (std::size_t k = 0; k < coeff_.size(); ++k) u += coeff_[k] * std::pow(r, expo_[k]);
    return u;
}

double ScaledPotential::derivative(double r) const {
    double du = 0.0;
    for (std::size_t k = 0; k < coeff_.size(); ++k) {
        du += coeff_[k] * expo_[k] * std::pow(r, expo_[k] - 1.0);
    }
    return du;
}

double ScaledPotential::second_derivative(double r) const {
    double ddu = 0.0;
    for (std::size_t k = 0; k < coeff_.size(); ++k) {
        ddu += coeff_[k] * expo_[k] * (expo_[k] - 1.0) * std::pow(r, expo_[k] - 2.0);
    }
    return ddu;
}

ScaledPotential ValidatedSpec::scaled(double lambda) const {
    ScaledPotential s;
    s.lambda_ = lambda;
    s.offset_ = spec_.offset / (lambda * lambda);
    s.coeff_.resize(spec_.terms.size());
    s.expo_.resize(spec_.terms.size());
    for (std::size_t k = 0; k < spec_.terms.size(); ++k) {
        s.expo_[k] = spec_.terms[k].exponent;
        s.coeff_[k] = spec_.terms[k].coefficient *
                      (k == 0 ? 1.0 : std::pow(lambda, lambda_expo_[k]));
    }
    return s;
}

ValidatedSpec validate_spec(const PotentialSpec& spec) {
    auto lambda_expo = check_invariants(spec, false);
    ValidatedSpec v(spec, std::move(lambda_expo));

    // Positivity of U(.;1): probe the standard log grid plus every critical
    // point. U -> +inf at both ends, so the minimum is attained.
    const auto crit = critical_points(v);
    double lowest = std::numeric_limits<double>::infinity();
    for (double r : crit) lowest = std::min(lowest, raw_value(spec, r));
    for (int i = 0; i < 512; ++i) {
        const double r = std::pow(10.0, -4.0 + 8.0 * i / 511.0);
        lowest = std::min(lowest, raw_value(spec, r));
    }
    if (!(lowest > 0.0)) {
        std::ostringstream os;
        os << "U(.;1) attains " << lowest << " <= 0; adjust the offset";
        throw SpecError(SpecError::Kind::NotBoundedBelow, os.str());
    }
    return v;
}

ValidatedSpec validate_spec_marginal(const PotentialSpec& spec) {
    auto lambda_expo = check_invariants(spec, true);
    return ValidatedSpec(spec, std::move(lambda_expo));
}

double eval_potential(const ValidatedSpec& spec, double r, double lambda) {
    check_positive_r(r);
    return spec.scaled(lambda).value(r);
}

double potential_derivative(const ValidatedSpec& spec, double r, double lambda) {
    check_positive_r(r);
    return spec.scaled(lambda).derivative(r);
}

double eval_force(const ValidatedSpec& spec, double r, double lambda) {
    return -potential_derivative(spec, r, lambda);
}

double eval_hamiltonian(const ValidatedSpec& spec, const PhasePoint& x, double lambda) {
    check_positive_r(x.q);
    return 0.5 * x.p * x.p + spec.scaled(lambda).value(x.q);
}

PhasePoint scale_map(const PhasePoint& x, double ell, double alpha1) {
    return {std::pow(ell, 2.0 / alpha1) * x.q, ell * x.p};
}

std::vector<double> critical_points(const ValidatedSpec& spec) {
    // U' has at most K-1 sign changes; a 512-point log grid over [1e-4, 1e4]
    // brackets them all for the exponent ranges admitted by validation.
    constexpr int kGrid = 512;
    std::vector<double> roots;
    double prev_r = 1e-4;
    double prev_d = raw_derivative(spec.spec(), prev_r);
    for (int i = 1; i < kGrid; ++i) {
        const double r = std::pow(10.0, -4.0 + 8.0 * i / (kGrid - 1.0));
        const double d = raw_derivative(spec.spec(), r);
        if ((prev_d < 0.0) != (d < 0.0)) {
            roots.push_back(bisect([&](double x) { return raw_derivative(spec.spec(), x); },
                                   prev_r, r));
        }
        prev_r = r;
        prev_d = d;
    }
    return roots;
}

Minimum global_minimum(const ValidatedSpec& spec) {
    const auto crit = critical_points(spec);
    Minimum best{0.0, std::numeric_limits<double>::infinity()};
    for (double r : crit) {
        const double u = raw_value(spec.spec(), r);
        if (u < best.value) best = {r, u};
    }
    if (!std::isfinite(best.value)) {
        // No interior critical point found; fall back to the grid minimum.
        for (int i = 0; i < 512; ++i) {
            const double r = std::pow(10.0, -4.0 + 8.0 * i / 511.0);
            const double u = raw_value(spec.spec(), r);
            if (u < best.value) best = {r, u};
        }
    }
    return best;
}

PotentialSpec normalize_offset(const ValidatedSpec& spec) {
    PotentialSpec out = spec.spec();
    out.offset -= global_minimum(spec).value;
    return out;
}

}  // namespace ergolang

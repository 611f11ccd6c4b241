#pragma once

#include <array>
#include <functional>
#include <vector>

namespace ergolang {

struct QuadratureSettings {
    int nodes_per_panel = 24;   // >= 8
    int max_refinements = 40;   // panel-split budget
    double rel_tol = 1e-10;     // in (0, 1e-4]
};

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by Newton
// iteration on the Legendre recurrence.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Result of an adaptive pass. `abs_integral` is the integral of |f| (or the
// max across components), used as the scale for relative tolerances on
// cancelling integrands.
struct QuadResult {
    std::vector<double> integral;
    double abs_scale = 0.0;
    int panels = 0;
};

// Adaptive Gauss-Legendre integration of a vector-valued integrand over
// [a, b]. Error control is per component, relative to max(|I_c|, abs_scale).
// An external scale can be injected for integrands whose total is near zero.
// Throws QuadratureNoConverge when the panel budget is exhausted.
QuadResult integrate_adaptive(const std::function<void(double, double*)>& f,
                              int n_components, double a, double b,
                              const QuadratureSettings& settings,
                              double external_scale = 0.0);

// Scalar convenience wrapper.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSettings& settings, double external_scale = 0.0);

// Fixed-level tanh-sinh rule on (a, b); debug fallback for cross-checking the
// Gauss-Legendre path on endpoint-singular integrands.
double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           int levels = 10);

}  // namespace ergolang

#include "ergolang/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "ergolang/errors.hpp"

namespace ergolang {

namespace {

GaussRule compute_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

struct PanelEval {
    std::vector<double> integral;
    std::vector<double> abs_integral;
};

PanelEval eval_panel(const std::function<void(double, double*)>& f, int nc, double a,
                     double b, const GaussRule& rule) {
    PanelEval out;
    out.integral.assign(nc, 0.0);
    out.abs_integral.assign(nc, 0.0);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::vector<double> fx(nc);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        f(mid + half * rule.nodes[i], fx.data());
        const double w = rule.weights[i] * half;
        for (int c = 0; c < nc; ++c) {
            out.integral[c] += w * fx[c];
            out.abs_integral[c] += w * std::abs(fx[c]);
        }
    }
    return out;
}

struct AdaptiveCtx {
    const std::function<void(double, double*)>* f;
    int nc;
    const GaussRule* rule;
    std::vector<double> abs_tol;  // per component, for the whole interval
    double total_width;
    int max_depth;
    int panels = 0;
};

// Accept a panel when the coarse-vs-refined discrepancy fits into the
// width-proportional share of the tolerance; otherwise split. The sum of
// accepted discrepancies is then bounded by the full tolerance.
void refine(AdaptiveCtx& ctx, double a, double b, const PanelEval& coarse,
            std::vector<double>& acc, std::vector<double>& abs_acc, int depth) {
    const double mid = 0.5 * (a + b);
    PanelEval left = eval_panel(*ctx.f, ctx.nc, a, mid, *ctx.rule);
    PanelEval right = eval_panel(*ctx.f, ctx.nc, mid, b, *ctx.rule);
    ctx.panels += 2;

    const double share = (b - a) / ctx.total_width;
    bool ok = true;
    bool roundoff = true;
    for (int c = 0; c < ctx.nc; ++c) {
        const double diff =
            std::abs(coarse.integral[c] - left.integral[c] - right.integral[c]);
        if (diff > ctx.abs_tol[c] * share) ok = false;
        if (diff > 1e-14 * std::max(left.abs_integral[c] + right.abs_integral[c], 1e-300))
            roundoff = false;
    }
    if (ok || roundoff) {
        for (int c = 0; c < ctx.nc; ++c) {
            acc[c] += left.integral[c] + right.integral[c];
            abs_acc[c] += left.abs_integral[c] + right.abs_integral[c];
        }
        return;
    }
    if (depth >= ctx.max_depth) {
        throw QuadratureNoConverge("adaptive quadrature hit maximum panel depth");
    }
    refine(ctx, a, mid, left, acc, abs_acc, depth + 1);
    refine(ctx, mid, b, right, acc, abs_acc, depth + 1);
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

QuadResult integrate_adaptive(const std::function<void(double, double*)>& f,
                              int n_components, double a, double b,
                              const QuadratureSettings& settings, double external_scale) {
    const GaussRule& rule = gauss_legendre(settings.nodes_per_panel);
    AdaptiveCtx ctx;
    ctx.f = &f;
    ctx.nc = n_components;
    ctx.rule = &rule;
    ctx.total_width = b - a;
    ctx.max_depth = settings.max_refinements;

    PanelEval rough = eval_panel(f, n_components, a, b, rule);
    ctx.panels = 1;
    ctx.abs_tol.resize(n_components);
    for (int c = 0; c < n_components; ++c) {
        const double scale =
            std::max({rough.abs_integral[c], external_scale, 1e-300});
        ctx.abs_tol[c] = settings.rel_tol * scale;
    }

    std::vector<double> acc(n_components, 0.0), abs_acc(n_components, 0.0);
    refine(ctx, a, b, rough, acc, abs_acc, 0);

    QuadResult out;
    out.integral = std::move(acc);
    for (int c = 0; c < n_components; ++c) out.abs_scale = std::max(out.abs_scale, abs_acc[c]);
    out.panels = ctx.panels;
    return out;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSettings& settings, double external_scale) {
    auto wrapped = [&f](double x, double* out) { out[0] = f(x); };
    return integrate_adaptive(wrapped, 1, a, b, settings, external_scale).integral[0];
}

double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           int levels) {
    // Classic double-exponential rule x = mid + half*tanh(pi/2*sinh(t)).
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const int n = (1 << levels);
    const double h = 8.0 / n;
    double sum = 0.0;
    for (int i = -n; i <= n; ++i) {
        const double t = i * h;
        const double s = std::sinh(t) * std::numbers::pi / 2.0;
        const double x = mid + half * std::tanh(s);
        if (x <= a || x >= b) continue;
        const double w = half * (std::numbers::pi / 2.0) * std::cosh(t) /
                         (std::cosh(s) * std::cosh(s));
        const double fx = f(x);
        if (std::isfinite(fx)) sum += h * w * fx;
    }
    return sum;
}

}  // namespace ergolang

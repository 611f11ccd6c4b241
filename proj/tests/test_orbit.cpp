#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ergolang/orbit.hpp"
#include "support.hpp"

using namespace ergolang;
using ergolang::testing::fig1_spec;
using ergolang::testing::rel_err;

TEST_CASE("turning points match the plotted level-set domains") {
    const auto spec = fig1_spec();

    auto tp1 = turning_points(spec, 1.0, 1.0);
    CHECK(tp1.q_minus == doctest::Approx(0.3179).epsilon(1e-3));
    CHECK(tp1.q_plus == doctest::Approx(0.97245).epsilon(1e-3));

    auto tp2 = turning_points(spec, 2.0, 1.0);
    CHECK(tp2.q_minus == doctest::Approx(0.2237470347).epsilon(1e-4));
    CHECK(tp2.q_plus == doctest::Approx(1.178353708).epsilon(1e-4));

    auto tp4 = turning_points(spec, 4.0, 1.0);
    CHECK(tp4.q_minus == doctest::Approx(0.1581262410).epsilon(1e-4));
    CHECK(tp4.q_plus == doctest::Approx(1.409744948).epsilon(1e-4));

    // Scaled-family level set with the singular coefficient at 0.01.
    const double lam = std::pow(10.0, 1.0 / 3.0);
    auto tpl = turning_points(spec, 1.0, lam);
    CHECK(tpl.q_minus == doctest::Approx(0.1000050014).epsilon(1e-4));
    CHECK(tpl.q_plus == doctest::Approx(0.9974778151).epsilon(1e-4));

    // Residual check: U at the roots equals the level to 1e-10 * eta.
    for (double eta : {1.0, 2.0, 4.0}) {
        const auto tp = turning_points(spec, eta, 1.0);
        CHECK(std::abs(eval_potential(spec, tp.q_minus) - eta) < 1e-10 * eta);
        CHECK(std::abs(eval_potential(spec, tp.q_plus) - eta) < 1e-10 * eta);
    }
}

TEST_CASE("level sets below the minimum and split loops are rejected") {
    const auto spec = fig1_spec();
    CHECK_THROWS_AS(turning_points(spec, 0.3, 1.0), BelowMinimum);

    const auto barrier = ergolang::testing::barrier_spec();
    // Between the inner-well bottom and the barrier top the set splits.
    CHECK_THROWS_AS(turning_points(barrier, 1.4, 1.0), MultipleWells);
    CHECK_NOTHROW(turning_points(barrier, 5.0, 1.0));
}

TEST_CASE("rho values on the eta = 1 and eta = 1.6 orbits") {
    const auto spec = fig1_spec();
    const auto tp = turning_points(spec, 1.0, 1.0);
    CHECK(rho(spec, tp.q_minus, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(rho(spec, 1.0, 1.6, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double want = std::sqrt(2.0 * (1.0 - std::pow(0.6, 4.0) - 0.1 / 0.36));
    CHECK(rho(spec, 0.6, 1.0, 1.0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(rel_err(want, 1.08868) < 1e-5);
    CHECK_THROWS_AS(rho(spec, 2.0, 1.0, 1.0), DomainError);
}

TEST_CASE("orbit averages: constants and conserved quantities") {
    const auto spec = fig1_spec();
    const QuadratureSettings quad;

    const auto one = orbit_average(spec, [](double, double) { return 1.0; }, 1.0, 1.0, quad);
    CHECK(one.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.bracket == doctest::Approx(one.period).epsilon(1e-12));

    // The energy is constant on an orbit, so A(H) = eta.
    const ScaledPotential pot = spec.scaled(1.0);
    const auto h_avg = orbit_average(
        spec, [&](double q, double p) { return 0.5 * p * p + pot.value(q); }, 2.0, 1.0, quad);
    CHECK(h_avg.mean == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("A(P^2) agrees with a time-domain average over one period") {
    // Independent oracle: leapfrog the deterministic orbit for one period and
    // time-average p^2 with the trapezoid rule.
    const auto spec = fig1_spec();
    const auto avg =
        orbit_average(spec, [](double, double p) { return p * p; }, 1.0, 1.0, {});

    const auto tp = turning_points(spec, 1.0, 1.0);
    const ScaledPotential pot = spec.scaled(1.0);
    const long n = 100000;
    const double dt = avg.period / n;
    double q = tp.q_minus, p = 0.0;
    double integral = 0.0;
    for (long i = 0; i < n; ++i) {
        const double p2_before = p * p;
        p += 0.5 * dt * -pot.derivative(q);
        q += dt * p;
        p += 0.5 * dt * -pot.derivative(q);
        integral += 0.5 * (p2_before + p * p) * dt;
    }
    const double oracle = integral / avg.period;
    CHECK(rel_err(avg.mean, oracle) < 1e-6);
}

TEST_CASE("lambda_star closed form and quadrature route agree") {
    CHECK(lambda_star(4.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(lambda_star(6.0) == doctest::Approx(1.5).epsilon(1e-15));

    for (double alpha1 : {3.0, 4.0, 6.0, 8.0}) {
        for (double a1 : {0.1, 1.0, 7.0}) {
            const double via_integral = lambda_star_integral(a1, alpha1);
            CHECK(rel_err(via_integral, lambda_star(alpha1)) < 1e-10);
        }
    }

    // Third route through the beta function: the orbit integrals reduce to
    // B(1/a, 3/2) / B(1/a, 1/2) = a/(a+2).
    const double alpha1 = 5.0;
    const double beta_ratio = (std::beta(1.0 / alpha1, 1.5) / std::beta(1.0 / alpha1, 0.5));
    CHECK(rel_err(2.0 * beta_ratio, lambda_star(alpha1)) < 1e-12);
}

TEST_CASE("eta_star for single wells and the barrier potential") {
    const auto spec = fig1_spec();
    const auto es = eta_star(spec);
    const double min_u = global_minimum(spec).value;
    CHECK(es.value == doctest::Approx(1.5 * min_u + 1.0).epsilon(1e-9));
    CHECK(rel_err(es.value, 1.6107) < 1e-3);

    const auto two = validate_spec({{{1.0, 4.0}, {1.0, -2.0}}, 0.0});
    const auto es2 = eta_star(two);
    CHECK(rel_err(es2.value, 3.8348) < 1e-3);

    // With an interior barrier, eta_star clears the barrier top and the
    // two-root property holds on the verification grid.
    const auto barrier = ergolang::testing::barrier_spec();
    const auto esb = eta_star(barrier);
    CHECK(esb.value > 1.49);
    CHECK(level_set_root_count(barrier.scaled(1.0), esb.value) == 2);
    CHECK(level_set_root_count(barrier.scaled(1.0), 1.4) == 4);
}

TEST_CASE("dissipation factor: threshold, equality and the high-energy limit") {
    const auto spec = fig1_spec();
    const auto es = eta_star(spec);
    const QuadratureSettings quad;
    const LambdaTable table(spec, es, quad);

    CHECK(table(0.5 * es.value) == 0.0);
    CHECK(lambda_of_eta_direct(spec, 0.5 * es.value, es.value, quad) == 0.0);

    // Exact scaling makes A(P^2)(eta,1) = eta Lambda(eta) an equality here;
    // the two sides are independent quadratures.
    for (double factor : {1.0, 10.0, 100.0}) {
        const double eta = factor * es.value;
        const auto direct = orbit_average(
            spec, [](double, double p) { return p * p; }, eta, 1.0, quad);
        const double via_lambda = eta * lambda_of_eta_direct(spec, eta, es.value, quad);
        CHECK(rel_err(direct.mean, via_lambda) < 1e-8);
    }

    // Lambda(1e8 eta_star) has converged to Lambda_*.
    const double lam_far = lambda_of_eta_direct(spec, 1e8 * es.value, es.value, quad);
    CHECK(rel_err(lam_far, lambda_star(4.0)) < 1e-3);

    // Interpolation error against direct evaluation at off-node points.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 12; ++i) {
        const double eta = es.value * std::pow(1e8, u(rng));
        const double direct = lambda_of_eta_direct(spec, eta, es.value, quad);
        CHECK(rel_err(table(eta), direct) < 1e-6);
    }
}

TEST_CASE("period and average scaling across the family") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = ergolang::testing::random_spec(rng);
        const auto es = eta_star(spec);
        const QuadratureSettings quad;
        const double alpha1 = spec.alpha1();
        const double eta = es.value * (1.0 + 3.0 * u(rng));
        const double lambda = 1.0 + 3.0 * u(rng);
        const double h = 1.0 + 9.0 * u(rng);

        const auto hi = orbit_average(
            spec, [](double, double p) { return p * p; }, h * eta, lambda, quad);
        const auto lo = orbit_average(
            spec, [](double, double p) { return p * p; }, eta, std::sqrt(h) * lambda, quad);

        CHECK(rel_err(hi.period, std::pow(h, 1.0 / alpha1 - 0.5) * lo.period) < 1e-8);
        CHECK(rel_err(hi.mean, h * lo.mean) < 1e-8);
    }
}

TEST_CASE("A(P^2)(eta,1) >= eta Lambda(eta) everywhere, equality above eta_star") {
    const auto spec = ergolang::testing::model_spec(4.0);
    const auto es = eta_star(spec);
    const QuadratureSettings quad;
    const double min_u = global_minimum(spec).value;
    for (double eta : {0.5 * es.value, 0.9 * es.value, 1.0 * es.value, 3.0 * es.value}) {
        if (eta <= min_u * 1.02) continue;
        const auto avg = orbit_average(
            spec, [](double, double p) { return p * p; }, eta, 1.0, quad);
        const double lower = eta * lambda_of_eta_direct(spec, eta, es.value, quad);
        CHECK(avg.mean >= lower - 1e-8 * std::abs(avg.mean));
    }
}

TEST_CASE("eta Lambda(eta) is squeezed by linear envelopes") {
    // A finite constant C makes (L*-d) eta - C <= eta Lambda(eta) <= (L*+d) eta + C.
    const auto spec = fig1_spec();
    const auto es = eta_star(spec);
    const LambdaTable table(spec, es, {});
    const double lam_star = lambda_star(spec.alpha1());
    const double delta = 0.1;
    double c_needed = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double eta = 1e-2 * std::pow(1e8, i / 199.0);
        const double value = eta * table(eta);
        c_needed = std::max(c_needed, (lam_star - delta) * eta - value);
        c_needed = std::max(c_needed, value - (lam_star + delta) * eta);
    }
    CHECK(std::isfinite(c_needed));
    // The envelope must actually bind somewhere below the threshold.
    CHECK(c_needed > 0.0);
    CHECK(c_needed < (lam_star - delta) * es.value * 1.01);
}

TEST_CASE("Lambda approaches Lambda_* monotonically in the tail (model family)") {
    const auto spec = ergolang::testing::model_spec(4.0, -2.0, 1.0);
    const auto es = eta_star(spec);
    const QuadratureSettings quad;
    double prev = lambda_of_eta_direct(spec, 10.0 * es.value, es.value, quad);
    for (double factor : {1e2, 1e3, 1e4, 1e6}) {
        const double cur = lambda_of_eta_direct(spec, factor * es.value, es.value, quad);
        CHECK(cur >= prev - 1e-10);
        prev = cur;
    }
    CHECK(rel_err(prev, lambda_star(4.0)) < 1e-4);
}

TEST_CASE("gauss rule sanity and tanh-sinh fallback") {
    const auto& rule = gauss_legendre(24);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-13));

    // Endpoint-singular integral both engines must agree on:
    // int_0^1 1/sqrt(1-x) dx = 2.
    auto f = [](double x) { return 1.0 / std::sqrt(1.0 - x); };
    const double ts = integrate_tanh_sinh(f, 0.0, 1.0, 10);
    CHECK(ts == doctest::Approx(2.0).epsilon(1e-8));

    // The period integrand after the sine substitution integrates to the same
    // value as the tanh-sinh rule applied to the raw 1/rho integrand.
    const auto spec = fig1_spec();
    const auto avg = orbit_average(spec, [](double, double) { return 1.0; }, 2.0, 1.0, {});
    const auto tp = turning_points(spec, 2.0, 1.0);
    const ScaledPotential pot = spec.scaled(1.0);
    const double tau_ts = integrate_tanh_sinh(
        [&](double q) { return 2.0 / std::sqrt(2.0 * std::max(2.0 - pot.value(q), 0.0)); },
        tp.q_minus, tp.q_plus, 12);
    CHECK(rel_err(avg.period, tau_ts) < 1e-7);
}

TEST_CASE("orbit geometry bundles consistent quantities") {
    const auto spec = fig1_spec();
    const auto g = orbit_geometry(spec, 2.0, 1.0);
    CHECK(g.q_minus > 0.0);
    CHECK(g.q_minus < g.q_plus);
    CHECK(std::abs(eval_potential(spec, g.q_minus) - 2.0) < 1e-10 * 2.0);
    CHECK(std::abs(eval_potential(spec, g.q_plus) - 2.0) < 1e-10 * 2.0);
    CHECK(g.period > 0.0);
    CHECK(g.p2_integral > 0.0);
    CHECK(g.mean_p2() == doctest::Approx(g.p2_integral / g.period).epsilon(1e-15));
}

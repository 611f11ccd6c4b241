#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ergolang/potential.hpp"
#include "support.hpp"

using namespace ergolang;
using ergolang::testing::fig1_spec;
using ergolang::testing::rel_err;

TEST_CASE("validate_spec accepts the quartic example and names violations") {
    CHECK_NOTHROW(validate_spec({{{1.0, 4.0}, {0.1, -2.0}}, 0.0}));

    // alpha1 = 2 sits on the excluded boundary.
    CHECK_THROWS_AS(validate_spec({{{1.0, 2.0}, {0.1, -2.0}}, 0.0}), SpecError);
    try {
        validate_spec({{{1.0, 2.0}, {0.1, -2.0}}, 0.0});
    } catch (const SpecError& e) {
        CHECK(e.kind() == SpecError::Kind::ExponentOrder);
    }

    try {
        validate_spec({{{1.0, 4.0}, {-0.1, -2.0}}, 0.0});
        FAIL("negative singular coefficient must be rejected");
    } catch (const SpecError& e) {
        CHECK(e.kind() == SpecError::Kind::SingularSignError);
    }

    try {
        validate_spec({{{-1.0, 4.0}, {0.1, -2.0}}, 0.0});
        FAIL("negative leading coefficient must be rejected");
    } catch (const SpecError& e) {
        CHECK(e.kind() == SpecError::Kind::LeadingSignError);
    }

    try {
        validate_spec({{{1.0, 4.0}, {1.0, -2.0}}, -5.0});
        FAIL("potential dipping below zero must be rejected");
    } catch (const SpecError& e) {
        CHECK(e.kind() == SpecError::Kind::NotBoundedBelow);
    }

    // Exponents out of order.
    CHECK_THROWS_AS(validate_spec({{{1.0, -2.0}, {0.1, 4.0}}, 0.0}), SpecError);
    // Marginal validation admits alpha1 = 2 for the boundary experiments.
    CHECK_NOTHROW(validate_spec_marginal({{{1.0, 2.0}, {0.1, -12.0}}, 0.0}));
}

TEST_CASE("eval_potential matches hand values and the lambda scaling") {
    const auto spec = fig1_spec();
    CHECK(eval_potential(spec, 1.0, 1.0) == doctest::Approx(1.1).epsilon(1e-14));
    // Turning point of the eta = 1 orbit.
    CHECK(eval_potential(spec, 0.97245, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
    // Singular-term multiplier at lambda = 2.15 is lambda^-3.
    const double lam = 2.15;
    const double expected = std::pow(0.5, 4.0) + 0.1 * std::pow(lam, -3.0) * std::pow(0.5, -2.0);
    CHECK(eval_potential(spec, 0.5, lam) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(rel_err(0.1 * std::pow(lam, -3.0), 0.1 * 0.1006) < 2e-3);

    CHECK_THROWS_AS(eval_potential(spec, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(eval_potential(spec, -1.0, 1.0), DomainError);
}

TEST_CASE("derivative and force at the quartic example") {
    const auto spec = fig1_spec();
    CHECK(potential_derivative(spec, 1.0) == doctest::Approx(3.8).epsilon(1e-14));
    CHECK(eval_force(spec, 1.0) == doctest::Approx(-3.8).epsilon(1e-14));
    // Critical point: 4R^3 = 0.2 R^-3 at R = 0.05^(1/6).
    const double r_crit = std::pow(0.05, 1.0 / 6.0);
    CHECK(std::abs(potential_derivative(spec, r_crit)) < 1e-12);
}

TEST_CASE("analytic derivative agrees with central differences") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto spec = ergolang::testing::random_spec(rng);
        for (int i = 0; i < 20; ++i) {
            const double r = 0.05 * std::pow(50.0 / 0.05, i / 19.0);
            const double h = 1e-5 * r;
            const double fd =
                (eval_potential(spec, r + h) - eval_potential(spec, r - h)) / (2.0 * h);
            const double an = potential_derivative(spec, r);
            CHECK(std::abs(fd - an) <=
                  1e-6 * std::max({std::abs(an), std::abs(fd), 1e-10}));
        }
    }
}

TEST_CASE("hamiltonian values from the level-set plot") {
    const auto spec = fig1_spec();
    CHECK(eval_hamiltonian(spec, {1.0, 1.0}) == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(eval_hamiltonian(spec, {0.3179, 0.0}) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(eval_hamiltonian(spec, {0.1581262410, 0.0}) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("scale map basics") {
    const PhasePoint x{1.0, 1.0};
    const PhasePoint y = scale_map(x, 4.0, 4.0);
    CHECK(y.q == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(y.p == doctest::Approx(4.0).epsilon(1e-15));

    const PhasePoint id = scale_map(x, 1.0, 4.0);
    CHECK(id.q == x.q);
    CHECK(id.p == x.p);

    // H(S_3 (1,1); 1) = 9 H((1,1); 3) = 4.5 + 9 + 0.1/3.
    const auto spec = fig1_spec();
    const double lhs = eval_hamiltonian(spec, scale_map(x, 3.0, 4.0), 1.0);
    const double rhs = 9.0 * eval_hamiltonian(spec, x, 3.0);
    const double want = 4.5 + 9.0 + 0.1 / 3.0;
    CHECK(lhs == doctest::Approx(want).epsilon(1e-13));
    CHECK(rhs == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("exact scaling identity over random specs, points and scales") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto spec = ergolang::testing::random_spec(rng);
        const double lambda = 1.0 + 9.0 * u(rng);
        const double ell = 1.0 + 9.0 * u(rng);
        const PhasePoint x{0.2 + 3.0 * u(rng), -2.0 + 4.0 * u(rng)};
        const double lhs = eval_hamiltonian(spec, scale_map(x, ell, spec.alpha1()), lambda);
        const double rhs = ell * ell * eval_hamiltonian(spec, x, ell * lambda);
        CHECK(rel_err(lhs, rhs) < 1e-12);

        const double r = 0.1 + 5.0 * u(rng);
        const double lhs_u =
            eval_potential(spec, std::pow(ell, 2.0 / spec.alpha1()) * r, lambda);
        const double rhs_u = ell * ell * eval_potential(spec, r, ell * lambda);
        CHECK(rel_err(lhs_u, rhs_u) < 1e-12);
    }
}

TEST_CASE("normalize_offset finds the global minimum") {
    const auto spec = fig1_spec();
    const auto normed = normalize_offset(spec);
    const double want = -(std::pow(0.05, 2.0 / 3.0) + 0.1 * std::pow(0.05, -1.0 / 3.0));
    CHECK(normed.offset == doctest::Approx(want).epsilon(1e-10));
    CHECK(rel_err(-want, 0.40716) < 1e-4);

    // Idempotent.
    const auto again = normalize_offset(validate_spec(normed));
    CHECK(again.offset == doctest::Approx(normed.offset).epsilon(1e-12));

    // Pure two-term spec: minimum at R^6 = 1/2.
    const auto two = validate_spec({{{1.0, 4.0}, {1.0, -2.0}}, 0.0});
    const auto normed2 = normalize_offset(two);
    const double want2 = -(std::pow(2.0, -2.0 / 3.0) + std::pow(2.0, 1.0 / 3.0));
    CHECK(normed2.offset == doctest::Approx(want2).epsilon(1e-10));
    CHECK(rel_err(-want2, 1.88988) < 1e-5);
}

TEST_CASE("golden-section cross-check of the minimum") {
    // Independent of the bracketed root finder on U'.
    const auto spec = fig1_spec();
    auto u = [&](double r) { return eval_potential(spec, r); };
    double a = 0.1, b = 3.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (u(c) < u(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    const double min_gs = u(0.5 * (a + b));
    CHECK(global_minimum(spec).value == doctest::Approx(min_gs).epsilon(1e-10));
}

TEST_CASE("centre-of-mass transform is an exact involution") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    // Exact round trip on dyadic-grid coordinates, where the halved sums and
    // differences incur no rounding at all.
    for (int i = 0; i < 50; ++i) {
        auto snap = [&] { return std::round(u(rng) * 1048576.0) / 1048576.0; };
        const FullState s{snap(), snap(), snap(), snap()};
        const FullState back = from_com(to_com(s));
        CHECK(back.q1 == s.q1);
        CHECK(back.q2 == s.q2);
        CHECK(back.p1 == s.p1);
        CHECK(back.p2 == s.p2);
    }
    // Arbitrary doubles: within an ulp or two of the inputs.
    for (int i = 0; i < 50; ++i) {
        const FullState s{u(rng), u(rng), u(rng), u(rng)};
        const FullState back = from_com(to_com(s));
        CHECK(back.q1 == doctest::Approx(s.q1).epsilon(1e-15));
        CHECK(back.q2 == doctest::Approx(s.q2).epsilon(1e-15));
        CHECK(back.p1 == doctest::Approx(s.p1).epsilon(1e-15));
        CHECK(back.p2 == doctest::Approx(s.p2).epsilon(1e-15));
    }
}

TEST_CASE("noise scale is always derived from friction and temperature") {
    const LangevinParams params{0.7, 1.3};
    CHECK(params.sigma() * params.sigma() ==
          doctest::Approx(2.0 * 0.7 * 1.3).epsilon(1e-15));
    CHECK(params.sigma_squared() == doctest::Approx(2.0 * 0.7 * 1.3).epsilon(1e-15));
}

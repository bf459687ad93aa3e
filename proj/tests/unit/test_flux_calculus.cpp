#include "doctest.h"

#include <cmath>

#include "lagrangeflow/catalog.hpp"
#include "lagrangeflow/flux_calculus.hpp"
#include "support/oracles.hpp"

using namespace lagrangeflow;

namespace {

RealFn burgers_f = [](double r) { return 0.5 * r * r; };
RealFn burgers_fp = [](double r) { return r; };

/// Analytic velocity law for Burgers on positive data: F = rho/2, g = 2u.
VelocityLaw analytic_burgers_law(double rho_lo, double rho_hi) {
    VelocityLaw vel;
    vel.F = [](double rho) { return 0.5 * rho; };
    vel.F_prime = [](double) { return 0.5; };
    vel.g = [](double u) { return 2.0 * u; };
    vel.data_range = {rho_lo, rho_hi};
    vel.eval_range = {rho_lo, rho_hi};
    vel.u_range = {0.5 * rho_lo, 0.5 * rho_hi};
    return vel;
}

}  // namespace

TEST_CASE("normalize: Burgers on [1,3] needs no shifts, K interval (-1/2, 1/2)") {
    auto oracle = oracles::feasibility_oracle(burgers_f, burgers_fp, 1.0, 3.0);
    CHECK(oracle.lower == doctest::Approx(-0.5));
    CHECK(oracle.upper == doctest::Approx(0.5));

    FluxSpec spec = normalize(burgers_f, burgers_fp, {1.0, 3.0});
    CHECK(spec.L == 0.0);
    CHECK(spec.K == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(spec.data_range.lo == doctest::Approx(1.0));
    CHECK(spec.data_range.hi == doctest::Approx(3.0));
}

TEST_CASE("normalize: Burgers on [-1,1] has an empty feasibility interval") {
    // Margin rule gives L = 1.5, shifting the range to [0.5, 2.5]. The
    // sampling oracle on the shifted flux shows no K works: f' of the raw
    // flux is negative at negative raw densities, so F' <= 0 somewhere for
    // any positive normalized F.
    auto shifted = [](double a) { return 0.5 * (a - 1.5) * (a - 1.5); };
    auto shifted_p = [](double a) { return a - 1.5; };
    auto oracle = oracles::feasibility_oracle(shifted, shifted_p, 0.5, 2.5);
    CHECK(oracle.empty());
    CHECK(oracle.upper == doctest::Approx(-1.0));  // attained at a = 0.5

    CHECK_THROWS_AS(normalize(burgers_f, burgers_fp, {-1.0, 1.0}),
                    InfeasibleNormalization);
}

TEST_CASE("normalize: constant-speed transport f = -rho cannot be normalized") {
    RealFn f = [](double r) { return -r; };
    RealFn fp = [](double) { return -1.0; };
    // Sign analysis: positivity needs K > 2, monotone F needs K < 0.
    auto oracle = oracles::feasibility_oracle(f, fp, 1.0, 2.0);
    CHECK(oracle.empty());
    CHECK(oracle.lower == doctest::Approx(2.0));
    CHECK(oracle.upper == doctest::Approx(0.0));
    CHECK_THROWS_AS(normalize(f, fp, {1.0, 2.0}), InfeasibleNormalization);
}

TEST_CASE("normalize: K and L overrides are validated against feasibility") {
    NormalizeOptions opt;
    opt.K_override = 0.0;
    FluxSpec cubic = normalize([](double r) { return r * r * r; },
                               [](double r) { return 3.0 * r * r; }, {0.5, 2.0}, opt);
    CHECK(cubic.K == 0.0);

    opt.K_override = 10.0;  // far outside (-0.125, 0.25)
    CHECK_THROWS_AS(normalize([](double r) { return r * r * r; },
                              [](double r) { return 3.0 * r * r; }, {0.5, 2.0}, opt),
                    InfeasibleNormalization);
}

TEST_CASE("normalize validates the caller-supplied derivative") {
    RealFn wrong = [](double r) { return 2.0 * r; };  // should be r
    CHECK_THROWS_AS(normalize(burgers_f, wrong, {1.0, 2.0}), DerivativeMismatch);
}

TEST_CASE("normalized catalog fluxes have positive strictly increasing F") {
    for (const char* name : {"burgers", "cubic", "lwr"}) {
        FluxSpec spec = make_catalog_flux(name);
        VelocityLaw vel = velocity_law(spec);
        const int n = 10000;
        double prev = 0.0;
        for (int i = 0; i < n; ++i) {
            double u = vel.F(spec.data_range.sample(i, n));
            CHECK(u > 0.0);
            if (i > 0) CHECK(u > prev);
            prev = u;
        }
    }
}

TEST_CASE("velocity_law: Burgers and cubic point values") {
    VelocityLaw burgers = velocity_law(make_catalog_flux("burgers"));
    CHECK(burgers.F(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(burgers.g(1.0) == doctest::Approx(2.0).epsilon(1e-12));

    VelocityLaw cubic = velocity_law(make_catalog_flux("cubic"));  // F = rho^2
    CHECK(cubic.F(2.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(cubic.g(4.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("inversion identity |F(g(u)) - u| <= 1e-9 (1+|u|) on 1000 samples") {
    for (const char* name : {"burgers", "cubic", "lwr"}) {
        VelocityLaw vel = velocity_law(make_catalog_flux(name));
        for (int i = 0; i < 1000; ++i) {
            double u = vel.u_range.sample(i, 1000);
            CHECK(std::abs(vel.F(vel.g(u)) - u) <= 1e-9 * (1.0 + std::abs(u)));
        }
    }
}

TEST_CASE("potential_from_flux: Burgers gives b' = 4u^2 and b = 4u^3/3") {
    // Through the full pipeline (u_ref at the lower end of the velocity range).
    VelocityLaw vel = velocity_law(make_catalog_flux("burgers"));
    ActionPotential pot = potential_from_flux(vel);
    for (int i = 0; i < 100; ++i) {
        double u = vel.u_range.sample(i, 100);
        CHECK(pot.b_prime(u) == doctest::Approx(4.0 * u * u).epsilon(1e-10));
        double expect = 4.0 / 3.0 * (u * u * u - std::pow(pot.u_ref, 3));
        CHECK(pot.b(u) == doctest::Approx(expect).epsilon(1e-9));
    }

    // With the analytic law the antiderivative can start at u_ref = 0,
    // reproducing b(1) = 4/3 and b'(1/2) = 1 on the nose.
    VelocityLaw wide = analytic_burgers_law(0.0, 4.0);
    ActionPotential pot0 = potential_from_flux(wide, 0.0);
    CHECK(pot0.b(1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
    CHECK(pot0.b_prime(0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("potential_from_flux: F = rho^2 gives the quadratic potential") {
    VelocityLaw vel = velocity_law(make_catalog_flux("cubic"));
    ActionPotential pot = potential_from_flux(vel);
    for (int i = 0; i < 100; ++i) {
        double u = vel.u_range.sample(i, 100);
        CHECK(pot.b_prime(u) == doctest::Approx(u).epsilon(1e-10));  // b' = g^2 = u
    }
    // b(u) = (u^2 - u_ref^2)/2 from the quadrature route.
    double u = 2.0;
    CHECK(pot.b(u) ==
          doctest::Approx(0.5 * (u * u - pot.u_ref * pot.u_ref)).epsilon(1e-9));
}

TEST_CASE("flux_from_potential: b = u^2/2 yields the cubic law rho_t + (rho^3)_x = 0") {
    ActionPotential pot;
    pot.b = [](double u) { return 0.5 * u * u; };
    pot.b_prime = [](double u) { return u; };
    pot.b_second = [](double) { return 1.0; };
    pot.B = [](double xi) { return xi; };
    pot.u_ref = 0.25;
    pot.u_range = {0.25, 4.0};

    auto [vel, spec] = flux_from_potential(pot);
    CHECK(vel.F(2.0) == doctest::Approx(4.0).epsilon(1e-12));  // F = B o Q
    CHECK(spec.data_range.lo == doctest::Approx(0.5));
    CHECK(spec.data_range.hi == doctest::Approx(2.0));
    for (int i = 0; i < 100; ++i) {
        double rho = spec.data_range.sample(i, 100);
        CHECK(spec.f(rho) == doctest::Approx(rho * rho * rho).epsilon(1e-8));
    }
}

TEST_CASE("flux_from_potential: the cubic potential recovers Burgers") {
    // b = 4u^3/3, b' = 4u^2, B(xi) = sqrt(xi)/2, so F = B(rho^2) = rho/2.
    ActionPotential pot;
    pot.b = [](double u) { return 4.0 / 3.0 * u * u * u; };
    pot.b_prime = [](double u) { return 4.0 * u * u; };
    pot.b_second = [](double u) { return 8.0 * u; };
    pot.B = [](double xi) { return 0.5 * std::sqrt(xi); };
    pot.u_ref = 0.5;
    pot.u_range = {0.5, 1.0};

    auto [vel, spec] = flux_from_potential(pot);
    CHECK(spec.data_range.lo == doctest::Approx(1.0));
    CHECK(spec.data_range.hi == doctest::Approx(2.0));
    for (int i = 0; i < 100; ++i) {
        double rho = spec.data_range.sample(i, 100);
        CHECK(vel.F(rho) == doctest::Approx(0.5 * rho).epsilon(1e-10));
        CHECK(spec.f(rho) == doctest::Approx(0.5 * rho * rho).epsilon(1e-8));
    }
}

TEST_CASE("flux_from_potential: b' = u on [1,4] maps F(2) = B(4) = 4") {
    ActionPotential pot;
    pot.b = [](double u) { return 0.5 * u * u; };
    pot.b_prime = [](double u) { return u; };
    pot.b_second = [](double) { return 1.0; };
    pot.B = [](double xi) { return xi; };
    pot.u_ref = 1.0;
    pot.u_range = {1.0, 4.0};
    auto [vel, spec] = flux_from_potential(pot);
    CHECK(vel.F(2.0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("potential round trip reproduces F and b' to relative 1e-8") {
    for (const char* name : {"burgers", "cubic", "lwr"}) {
        VelocityLaw vel = velocity_law(make_catalog_flux(name));
        ActionPotential pot = potential_from_flux(vel);
        auto [vel2, spec2] = flux_from_potential(pot);
        ActionPotential pot2 = potential_from_flux(vel2, pot.u_ref);
        for (int i = 0; i < 100; ++i) {
            double rho = vel.data_range.sample(i, 100);
            CHECK(vel2.F(rho) ==
                  doctest::Approx(vel.F(rho)).epsilon(1e-8));
            double u = vel.u_range.sample(i, 100);
            CHECK(pot2.b_prime(u) ==
                  doctest::Approx(pot.b_prime(u)).epsilon(1e-8));
        }
    }
}

TEST_CASE("b is a true antiderivative of b' = g^2") {
    for (const char* name : {"burgers", "lwr"}) {
        VelocityLaw vel = velocity_law(make_catalog_flux(name));
        ActionPotential pot = potential_from_flux(vel);
        double h = 1e-6 * vel.u_range.length();
        for (int i = 1; i < 49; ++i) {
            double u = vel.u_range.sample(i, 50);
            double fd = (pot.b(u + h) - pot.b(u - h)) / (2.0 * h);
            double g = vel.g(u);
            CHECK(fd == doctest::Approx(g * g).epsilon(1e-7));
            CHECK(pot.b_prime(u) == doctest::Approx(g * g).epsilon(1e-10));
        }
    }
}

TEST_CASE("breakdown_time: constant and expanding data never break down") {
    FluxSpec spec = make_catalog_flux("burgers");
    GridFunction constant = make_grid(64, 0.0, 1.0, Boundary::periodic,
                                      [](double) { return 1.5; });
    CHECK(std::isinf(breakdown_time(spec, constant)));

    GridFunction expanding = make_grid(64, 0.0, 1.0, Boundary::constant_extension,
                                       [](double x) { return x + 1.0; });
    CHECK(std::isinf(breakdown_time(spec, expanding)));
}

TEST_CASE("breakdown_time: Burgers sine wave breaks at 1/(2 pi)") {
    NormalizeOptions opt;
    opt.K_override = 0.0;
    FluxSpec spec = normalize(burgers_f, burgers_fp, {1.0, 3.0}, opt);
    GridFunction rho0 = make_grid(512, 0.0, 1.0, Boundary::periodic, [](double x) {
        return 2.0 + std::sin(2.0 * 3.14159265358979323846 * x);
    });
    double expected = 1.0 / (2.0 * 3.14159265358979323846);
    CHECK(breakdown_time(spec, rho0) == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("transport coefficients agree for matched pairs, split for mismatched") {
    VelocityLaw cubic = velocity_law(make_catalog_flux("cubic"));
    ActionPotential quad = potential_from_flux(cubic);
    auto [m1, f1] = transport_coefficient_check(quad, cubic, 1.0);
    CHECK(m1 == doctest::Approx(3.0).epsilon(1e-8));  // u_t + 3u u_x = 0
    CHECK(f1 == doctest::Approx(3.0).epsilon(1e-8));

    VelocityLaw burgers = velocity_law(make_catalog_flux("burgers"));
    ActionPotential cub = potential_from_flux(burgers);
    auto [m2, f2] = transport_coefficient_check(cub, burgers, 1.0);
    CHECK(m2 == doctest::Approx(2.0).epsilon(1e-8));  // u + 2(4u^2)/(8u) = 2u
    CHECK(f2 == doctest::Approx(2.0).epsilon(1e-8));

    // Negative control: potential of one flux against the law of another.
    auto [mx, fx] = transport_coefficient_check(cub, cubic, 1.0);
    CHECK(std::abs(mx - fx) > 1e-3);
}

TEST_CASE("transport coefficients agree across the catalog at 100 samples") {
    for (const char* name : {"burgers", "cubic", "lwr"}) {
        VelocityLaw vel = velocity_law(make_catalog_flux(name));
        ActionPotential pot = potential_from_flux(vel);
        for (int i = 0; i < 100; ++i) {
            double u = vel.u_range.sample(i, 100);
            auto [metric, flux_side] = transport_coefficient_check(pot, vel, u);
            CHECK(metric ==
                  doctest::Approx(flux_side).epsilon(1e-8));
        }
    }
}

TEST_CASE("velocity_law rejects a non-monotone quotient") {
    // A FluxSpec assembled by hand with K outside the feasible set: F = f/rho
    // decreases, which velocity_law must refuse.
    FluxSpec broken;
    broken.f = [](double) { return 1.0; };  // F = 1/rho, strictly decreasing
    broken.f_prime = [](double) { return 0.0; };
    broken.data_range = {1.0, 2.0};
    CHECK_THROWS_AS(velocity_law(broken), InversionFailure);
}

TEST_CASE("potential_from_flux rejects u_ref outside the velocity range") {
    VelocityLaw vel = velocity_law(make_catalog_flux("burgers"));
    CHECK_THROWS_AS(potential_from_flux(vel, 100.0), OutOfRange);
}

TEST_CASE("flux_from_potential rejects non-increasing b'") {
    ActionPotential pot;
    pot.b = [](double u) { return -0.5 * u * u; };
    pot.b_prime = [](double u) { return -u; };
    pot.b_second = [](double) { return -1.0; };
    pot.B = [](double xi) { return -xi; };
    pot.u_ref = 1.0;
    pot.u_range = {1.0, 2.0};
    CHECK_THROWS_AS(flux_from_potential(pot), InversionFailure);
}

TEST_CASE("transport_coefficient_check flags a vanishing b''") {
    ActionPotential flat;
    flat.b = [](double u) { return u; };
    flat.b_prime = [](double) { return 1.0; };
    flat.b_second = [](double) { return 0.0; };
    flat.B = [](double xi) { return xi; };
    flat.u_range = {0.5, 1.0};
    VelocityLaw vel = velocity_law(make_catalog_flux("burgers"));
    CHECK_THROWS_AS(transport_coefficient_check(flat, vel, 0.75), DegenerateCoefficient);
}

#include "doctest.h"

#include <cmath>

#include "lagrangeflow/catalog.hpp"
#include "lagrangeflow/flow_map.hpp"
#include "lagrangeflow/variational.hpp"

using namespace lagrangeflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

ActionPotential cubic_potential(double offset = 0.0) {
    ActionPotential pot;
    pot.b = [offset](double u) { return 4.0 / 3.0 * u * u * u + offset; };
    pot.b_prime = [](double u) { return 4.0 * u * u; };
    pot.b_second = [](double u) { return 8.0 * u; };
    pot.B = [](double xi) { return 0.5 * std::sqrt(xi); };
    pot.u_range = {0.25, 1.5};
    pot.u_ref = 0.0;
    return pot;
}

struct VariationalRun {
    SpacetimeMap map;
    TempleTrajectory traj;
    VelocityLaw vel;
    ActionPotential pot;
    GridFunction rho0;
    GridFunction u0;
    double T = 0.0;
};

VariationalRun smooth_run(int n, int levels, double amp = 0.5) {
    VariationalRun run;
    NormalizeOptions opt;
    opt.K_override = 0.0;
    FluxSpec spec = normalize([](double r) { return 0.5 * r * r; },
                              [](double r) { return r; }, {1.0, 3.0}, opt);
    run.vel = velocity_law(spec);
    run.pot = potential_from_flux(run.vel);
    run.rho0 = make_grid(n, 0.0, 1.0, Boundary::periodic, [amp](double x) {
        return 2.0 + amp * std::sin(2.0 * kPi * x);
    });
    run.T = 0.5 * breakdown_time(spec, run.rho0);
    std::vector<double> times;
    for (int k = 1; k <= levels; ++k) times.push_back(run.T * k / levels);
    run.traj = TempleSolver(run.vel).solve(init_temple(run.rho0), times, {0.45, true});
    run.map = to_spacetime(reconstruct(run.traj, run.vel));
    run.u0 = run.rho0;
    for (auto& v : run.u0.values) v = run.vel.F(v);
    return run;
}

/// Constant-data flow map built analytically: gamma = x + u t.
SpacetimeMap constant_map(int n, int levels, double u, double T) {
    SpacetimeMap m;
    m.dx = 1.0 / n;
    m.x0 = 0.0;
    m.boundary = Boundary::periodic;
    m.period = 1.0;
    for (int k = 0; k <= levels; ++k) {
        double t = T * k / levels;
        m.times.push_back(t);
        std::vector<double> row;
        for (int j = 0; j <= n; ++j) row.push_back(j * m.dx + u * t);
        m.gamma.push_back(row);
    }
    return m;
}

}  // namespace

TEST_CASE("action_value: constant Burgers data on [0,1] x [0,1] gives b(1) = 4/3") {
    VelocityLaw vel = velocity_law(make_catalog_flux("burgers"));
    GridFunction rho0 = make_grid(64, 0.0, 1.0, Boundary::periodic, profile_constant(2.0));
    std::vector<double> times;
    for (int k = 1; k <= 32; ++k) times.push_back(k / 32.0);
    auto traj = TempleSolver(vel).solve(init_temple(rho0), times, {0.45, true});
    SpacetimeMap map = to_spacetime(reconstruct(traj, vel));
    double value = action_value(map, cubic_potential());
    CHECK(value == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("action_value: identity-in-time map integrates b(0) over M x [0,T]") {
    SpacetimeMap m = constant_map(32, 16, 0.0, 0.7);
    double value = action_value(m, cubic_potential(7.0));
    CHECK(value == doctest::Approx(7.0 * 1.0 * 0.7).epsilon(1e-12));
}

TEST_CASE("action_value decreases toward a limit under refinement") {
    double v[3];
    int idx = 0;
    for (int n : {32, 64, 128}) v[idx++] = action_value(smooth_run(n, n / 2).map,
                                                        cubic_potential());
    double d1 = std::abs(v[1] - v[0]);
    double d2 = std::abs(v[2] - v[1]);
    MESSAGE("action values: ", v[0], " ", v[1], " ", v[2]);
    CHECK(d2 < d1);  // first-order Cauchy differences shrink
}

TEST_CASE("first_variation: the zero field gives exactly zero") {
    VariationalRun run = smooth_run(48, 24);
    double d = first_variation(run.map, run.pot, zero_perturbation(run.map), 1e-3);
    CHECK(d == 0.0);
}

TEST_CASE("first_variation: folding perturbation reports MonotonicityLoss") {
    VariationalRun run = smooth_run(32, 16);
    auto zeta = cosine_bump(run.map, 0.5, 0.2, run.T / 2.0, run.T / 4.0);
    CHECK_THROWS_AS(first_variation(run.map, run.pot, zeta, 50.0), MonotonicityLoss);
}

TEST_CASE("first_variation: perturbations violating the support margin are rejected") {
    VariationalRun run = smooth_run(32, 16);
    PerturbationField bad = zero_perturbation(run.map);
    bad.zeta[0][5] = 1.0;  // touches the t = 0 boundary
    CHECK_THROWS_AS(first_variation(run.map, run.pot, bad, 1e-3), OutOfRange);
}

TEST_CASE("extremality: reconstructed flow maps beat the linear control") {
    // Regression canary at desk resolution; the derivative gap grows like 1/dx,
    // and the acceptance suite runs the full 10x criterion at N = 1024.
    VariationalRun run = smooth_run(256, 128);
    auto fn = [&run](const SpacetimeMap& m) { return action_value(m, run.pot); };
    ExtremalityReport rep = extremality_study(run.map, fn, 20);
    MESSAGE("extremal |dB| = ", rep.extremal_derivative,
            " control |dB| = ", rep.control_derivative, " ratio = ", rep.ratio);
    CHECK(rep.zero_field_derivative == 0.0);
    CHECK(rep.ratio >= 3.0);
    // |dB| on the extremal is bounded by C (dx + eps^2); C = 1 pinned from
    // the first calibration run (measured 0.28 at this resolution).
    double dx = run.rho0.dx;
    CHECK(rep.extremal_derivative <= 1.0 * (dx + rep.epsilon * rep.epsilon));
}

TEST_CASE("conserved quantity: constant data has residual at round-off") {
    VelocityLaw vel = velocity_law(make_catalog_flux("burgers"));
    ActionPotential pot = potential_from_flux(vel);
    SpacetimeMap m = constant_map(32, 16, vel.F(2.0), 0.5);
    GridFunction u0 = make_grid(32, 0.0, 1.0, Boundary::periodic,
                                profile_constant(vel.F(2.0)));
    CHECK(conserved_quantity_residual(m, pot, u0) <= 1e-12);
}

TEST_CASE("conserved quantity: a corrupted stretch is detected") {
    VelocityLaw vel = velocity_law(make_catalog_flux("burgers"));
    ActionPotential pot = potential_from_flux(vel);
    double u = vel.F(2.0);
    SpacetimeMap m = constant_map(32, 16, u, 0.5);
    // Scale gamma_x by 1.1 while keeping gamma_t: residual at least
    // b'(u0) (1.1^2 - 1) up to tolerance.
    for (auto& row : m.gamma)
        for (std::size_t j = 0; j < row.size(); ++j) {
            double anchor = row[0];
            row[j] = anchor + 1.1 * (row[j] - anchor);
        }
    GridFunction u0 = make_grid(32, 0.0, 1.0, Boundary::periodic, profile_constant(u));
    double res = conserved_quantity_residual(m, pot, u0);
    CHECK(res >= pot.b_prime(u) * (1.1 * 1.1 - 1.0) * 0.9);
}

TEST_CASE("conserved quantity residual decreases at order >= 0.8") {
    std::vector<double> res;
    for (int n : {64, 128, 256}) {
        VariationalRun run = smooth_run(n, n / 2);
        res.push_back(conserved_quantity_residual(run.map, run.pot, run.u0));
    }
    MESSAGE("conserved residuals: ", res[0], " ", res[1], " ", res[2]);
    CHECK(observed_order(res) >= 0.8);
}

TEST_CASE("action change of variables: image-grid form agrees to O(dx)") {
    VariationalRun run = smooth_run(64, 32);
    ReconstructionResult rec = reconstruct(run.traj, run.vel);
    // B(gamma) = int b(gamma_t o gamma^{-1}) dy dt with gamma_t o gamma^{-1}
    // = F(rho_lag); midpoint rule over the image of one period.
    double img = 0.0;
    int n = run.rho0.n();
    for (int k = 0; k < run.map.nt(); ++k) {
        double wt = (k == 0 || k == run.map.nt() - 1)
                        ? 0.5 * (run.map.times[1] - run.map.times[0])
                        : 0.5 * (run.map.times[k + 1] - run.map.times[k - 1]);
        const FlowMap& fm = rec.maps[k];
        const TempleState& st = run.traj.states[k];
        double y0 = fm.gamma.front();
        double row = 0.0;
        for (int i = 0; i < n; ++i) {
            double y = y0 + (i + 0.5) * fm.period / n;
            row += run.pot.b(run.vel.F(lagrangian_density(st, fm, y))) * fm.period / n;
        }
        img += wt * row;
    }
    double node_form = action_value(run.map, run.pot);
    MESSAGE("change of variables: node ", node_form, " image ", img);
    CHECK(std::abs(node_form - img) <= 5.0 * run.rho0.dx);
}

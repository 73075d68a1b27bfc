// Integrator checks: exact decay, convergence order, energy balance,
// constraint preservation, guards, determinism.

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mhdlab/io.hpp"
#include "mhdlab/ops.hpp"
#include "mhdlab/solver.hpp"

using namespace mhdlab;

namespace {
double vec_l2(const VectorField2D& v) { return std::hypot(l2_norm(v.x_comp), l2_norm(v.y_comp)); }

double vec_diff(const VectorField2D& a, const VectorField2D& b) {
    return std::hypot(l2_norm(subtract(a.x_comp, b.x_comp)), l2_norm(subtract(a.y_comp, b.y_comp)));
}

MhdState taylor_green_state(int n, double nu) {
    const Grid2D grid(n, 2.0 * std::numbers::pi);
    InitialData init;
    init.kind = "taylor-green";
    init.amplitude_B = 0.0;
    return initial_state(init, grid, nu);
}
}  // namespace

TEST_SUITE("solver") {

TEST_CASE("Taylor-Green vortex decays exponentially") {
    // u = (sin x cos y, -cos x sin y), B = 0: the nonlinearity is a pure
    // gradient, so the projected dynamics are the heat flow and every
    // snapshot satisfies u(t) = e^{-2 nu t} u(0).
    SolverConfig cfg;
    cfg.n = 64;
    cfg.nu = 0.1;
    cfg.dt = 1e-3;
    cfg.t_end = 0.1;
    cfg.snapshot_stride = 20;
    cfg.initial.kind = "taylor-green";
    cfg.initial.amplitude_B = 0.0;
    const Trajectory traj = integrate(cfg);
    REQUIRE(traj.completed);
    REQUIRE(traj.snapshots.size() >= 3);
    const double u0 = vec_l2(traj.snapshots.front().u);
    for (const MhdState& s : traj.snapshots) {
        const double expect = u0 * std::exp(-2.0 * cfg.nu * s.t);
        CHECK(vec_l2(s.u) == doctest::Approx(expect).epsilon(1e-10));
        CHECK(vec_l2(s.B) == 0.0);
    }
}

TEST_CASE("tendency reduces to the heat term on Taylor-Green") {
    const MhdState s = taylor_green_state(32, 0.05);
    const auto [du, db] = nonlinear_rhs(s);
    // P(-u.grad u) = 0 for this flow, so du = nu Lap u
    const VectorField2D lap{scale(fractional_laplacian(s.u.x_comp, 1.0), -s.nu),
                            scale(fractional_laplacian(s.u.y_comp, 1.0), -s.nu)};
    CHECK(vec_diff(du, lap) <= 1e-12 * vec_l2(lap));
    CHECK(vec_l2(db) <= 1e-14);
}

TEST_CASE("step converges at fourth order") {
    // Richardson: e(dt) ~ C dt^4 per unit time, so halving dt scales the
    // error against a fine reference by ~16; demand order >= 3.9. The
    // coarse steps must stay large enough that truncation, not rounding,
    // dominates the error.
    const Grid2D grid(32, 2.0 * std::numbers::pi);
    InitialData init;
    init.kind = "orszag-tang-like";
    MhdState s0 = initial_state(init, grid, 0.05);

    const double T = 0.1;
    const auto march = [&](double dt) {
        MhdState s = s0;
        const int steps = static_cast<int>(std::round(T / dt));
        for (int i = 0; i < steps; ++i) s = step(s, dt);
        return s;
    };
    const MhdState fine = march(T / 512.0);
    const MhdState a = march(T / 4.0);
    const MhdState b = march(T / 8.0);
    const double ea = vec_diff(a.u, fine.u) + vec_diff(a.B, fine.B);
    const double eb = vec_diff(b.u, fine.u) + vec_diff(b.B, fine.B);
    // the integrating factor absorbs the stiff part, so even the coarse
    // errors are ~1e-12; halving once more would reach the rounding floor
    const double order = std::log2(ea / eb);
    CHECK(order >= 3.8);
    CHECK(order <= 4.5);
}

TEST_CASE("energy balances the viscous dissipation") {
    // d/dt (||u||^2 + ||B||^2)/2 = -nu ||grad u||^2: the magnetic
    // stretching terms cancel in the sum.
    SolverConfig cfg;
    cfg.n = 64;
    cfg.nu = 0.02;
    cfg.dt = 1e-3;
    cfg.t_end = 0.2;
    cfg.initial.kind = "orszag-tang-like";
    const Trajectory traj = integrate(cfg);
    REQUIRE(traj.completed);
    const MonitorRow& first = traj.monitors.front();
    const MonitorRow& last = traj.monitors.back();
    const double drop = first.energy - last.energy;
    const double dissipated = last.visc_diss - first.visc_diss;
    CHECK(drop == doctest::Approx(dissipated).epsilon(1e-6));
    CHECK(drop > 0.0);
}

TEST_CASE("divergence stays at rounding level") {
    SolverConfig cfg;
    cfg.n = 64;
    cfg.nu = 0.05;
    cfg.dt = 2e-3;
    cfg.t_end = 0.1;
    cfg.initial.kind = "random-band";
    cfg.initial.seed = 5;
    const Trajectory traj = integrate(cfg);
    REQUIRE(traj.completed);
    for (const MonitorRow& row : traj.monitors) {
        CHECK(row.div_u <= 1e-10);
        CHECK(row.div_b <= 1e-10);
    }
    // and the means are pinned to zero
    const MhdState& s = traj.snapshots.back();
    CHECK(std::abs(s.u.x_comp.mean()) == 0.0);
    CHECK(std::abs(s.B.y_comp.mean()) == 0.0);
}

TEST_CASE("CFL number and step rejection") {
    const MhdState s = taylor_green_state(32, 0.01);
    // sup|u| = 1 for Taylor-Green (componentwise max is 1), k_max from grid
    const double kmax = s.u.x_comp.grid().max_wavenumber();
    CHECK(cfl_number(s, 1e-3) == doctest::Approx(1e-3 * kmax * sup_abs(s.u)).epsilon(1e-12));
    CHECK_THROWS_AS(step(s, 1.0), StepRejection);
    CHECK_NOTHROW(step(s, 1e-3));
}

TEST_CASE("adaptive stepping completes where the fixed step rejects") {
    SolverConfig cfg;
    cfg.n = 32;
    cfg.nu = 0.05;
    cfg.dt = 0.5;   // hopeless as a fixed step
    cfg.t_end = 0.5;  // larger than dt, so the span clamp cannot rescue it
    cfg.initial.kind = "orszag-tang-like";

    const Trajectory fixed = integrate(cfg);
    CHECK_FALSE(fixed.completed);
    CHECK(fixed.abort_reason.rfind("step-rejected", 0) == 0);

    cfg.adaptive = true;
    const Trajectory adaptive = integrate(cfg);
    CHECK(adaptive.completed);
    CHECK(adaptive.snapshots.back().t == doctest::Approx(cfg.t_end).epsilon(1e-12));
}

TEST_CASE("blow-up guard returns a partial trajectory") {
    SolverConfig cfg;
    cfg.n = 32;
    cfg.nu = 0.01;
    cfg.dt = 1e-3;
    cfg.t_end = 0.5;
    cfg.guard_ceiling = 1e-3;  // guaranteed to trip immediately
    cfg.initial.kind = "orszag-tang-like";
    const Trajectory traj = integrate(cfg);
    CHECK_FALSE(traj.completed);
    CHECK(traj.abort_reason == "blowup-guard");
    CHECK(!traj.snapshots.empty());   // partial output is preserved
    CHECK(!traj.monitors.empty());
}

TEST_CASE("snapshot stride keeps first and last instants") {
    SolverConfig cfg;
    cfg.n = 32;
    cfg.nu = 0.05;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;  // 10 steps
    cfg.snapshot_stride = 4;
    cfg.initial.kind = "taylor-green";
    const Trajectory traj = integrate(cfg);
    REQUIRE(traj.completed);
    CHECK(traj.snapshots.front().t == 0.0);
    CHECK(traj.snapshots.back().t == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(traj.times.size() == traj.snapshots.size());
    // stride 4 on 10 steps: t = 0, .004, .008, .01
    CHECK(traj.snapshots.size() == 4);
    CHECK(traj.monitors.size() == 11);  // every step plus the initial row
}

TEST_CASE("initial data kinds are divergence-free and deterministic") {
    const Grid2D grid(32, 2.0 * std::numbers::pi);
    for (const char* kind : {"taylor-green", "orszag-tang-like", "random-band"}) {
        InitialData init;
        init.kind = kind;
        init.seed = 9;
        const MhdState s = initial_state(init, grid, 0.1);
        CHECK(divergence_residual(s.u) <= 1e-12);
        CHECK(divergence_residual(s.B) <= 1e-12);
        const MhdState s2 = initial_state(init, grid, 0.1);
        CHECK(vec_diff(s.u, s2.u) == 0.0);
        CHECK(vec_diff(s.B, s2.B) == 0.0);
    }
    InitialData bad;
    bad.kind = "vortex-sheet";
    CHECK_THROWS_AS(initial_state(bad, grid, 0.1), std::invalid_argument);
}

TEST_CASE("repeat runs are bitwise identical") {
    SolverConfig cfg;
    cfg.n = 32;
    cfg.nu = 0.05;
    cfg.dt = 1e-3;
    cfg.t_end = 0.02;
    cfg.initial.kind = "random-band";
    cfg.initial.seed = 11;
    const Trajectory a = integrate(cfg);
    const Trajectory b = integrate(cfg);
    REQUIRE(a.completed);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
        CHECK(vec_diff(a.snapshots[i].u, b.snapshots[i].u) == 0.0);
        CHECK(vec_diff(a.snapshots[i].B, b.snapshots[i].B) == 0.0);
    }
    for (std::size_t i = 0; i < a.monitors.size(); ++i)
        CHECK(a.monitors[i].energy == b.monitors[i].energy);
}

TEST_CASE("pure hydrodynamics keeps the magnetic field at zero") {
    SolverConfig cfg;
    cfg.n = 32;
    cfg.nu = 0.05;
    cfg.dt = 1e-3;
    cfg.t_end = 0.05;
    cfg.initial.kind = "random-band";
    cfg.initial.amplitude_B = 0.0;
    const Trajectory traj = integrate(cfg);
    REQUIRE(traj.completed);
    for (const MhdState& s : traj.snapshots) CHECK(vec_l2(s.B) == 0.0);
}

TEST_CASE("integrate_from rejects a mismatched grid") {
    SolverConfig cfg;
    cfg.n = 64;
    MhdState s = taylor_green_state(32, cfg.nu);
    CHECK_THROWS_AS(integrate_from(s, cfg), std::invalid_argument);
}

TEST_CASE("resume from a snapshot reproduces the long run") {
    SolverConfig cfg;
    cfg.n = 32;
    cfg.nu = 0.05;
    cfg.dt = 1e-3;
    cfg.t_end = 0.04;
    cfg.initial.kind = "orszag-tang-like";
    const Trajectory whole = integrate(cfg);
    REQUIRE(whole.completed);

    SolverConfig half = cfg;
    half.t_end = 0.02;
    const Trajectory first = integrate(half);
    SolverConfig rest = cfg;  // t_end stays 0.04
    const Trajectory second = integrate_from(first.snapshots.back(), rest);
    REQUIRE(second.completed);
    CHECK(vec_diff(second.snapshots.back().u, whole.snapshots.back().u) == 0.0);
    CHECK(vec_diff(second.snapshots.back().B, whole.snapshots.back().B) == 0.0);
}

}  // TEST_SUITE

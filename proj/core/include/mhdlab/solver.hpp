// Pseudo-spectral integrator for viscous, non-resistive, incompressible
// 2D MHD on the torus:
//   du/dt + u.grad u + grad p - nu Lap u = B.grad B,   div u = 0,
//   dB/dt + u.grad B = B.grad u,                       div B = 0.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mhdlab/field.hpp"
#include "mhdlab/grid.hpp"

namespace mhdlab {

struct MhdState {
    VectorField2D u;
    VectorField2D B;
    double t = 0.0;
    double nu = 0.0;
};

struct InitialData {
    // taylor-green | orszag-tang-like | random-band | file
    std::string kind = "taylor-green";
    std::uint64_t seed = 1;
    double amplitude_u = 1.0;
    double amplitude_B = 0.5;
    int shell_lo = 1;  // random-band: populated shells [shell_lo, shell_hi]
    int shell_hi = 3;
    std::string path;  // kind == "file": snapshot to load
};

struct SolverConfig {
    int n = 64;
    double length = 6.283185307179586476925286766559;  // 2*pi
    double nu = 0.1;
    double dt = 1e-3;      // fixed step size
    bool adaptive = false;  // derive dt from the advective CFL each step
    double cfl_safety = 0.4;
    double t_end = 0.1;
    bool dealias = true;
    int snapshot_stride = 1;
    bool project_B = false;   // re-project B if divergence drifts
    double guard_ceiling = 1e6;   // blow-up guard on ||u||_{B^0_{2,1}}
    double div_tolerance = 1e-10;
    InitialData initial;
};

// Scalar diagnostics recorded at every accepted step.
struct MonitorRow {
    double t;
    double energy;       // (||u||_2^2 + ||B||_2^2) / 2
    double u_b021;       // ||u||_{B^0_{2,1}} (inhomogeneous)
    double u_b221h;      // ||u||_{B.^2_{2,1}} (homogeneous)
    double b_b121;       // ||B||_{B^1_{2,1}} (inhomogeneous)
    double enstrophy;    // ||grad u||_2^2
    double visc_diss;    // running nu * int ||grad u||_2^2 dt (RK4-accumulated)
    double div_u;
    double div_b;
};

struct Trajectory {
    std::vector<double> times;       // snapshot instants
    std::vector<MhdState> snapshots;
    std::vector<MonitorRow> monitors;
    bool completed = true;
    std::string abort_reason;  // empty | blowup-guard | step-rejected | divergence-drift
};

// Advective CFL violation (the viscous term is handled exactly by the
// integrating factor and imposes no step restriction).
struct StepRejection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Full tendency of (1.1) with pressure eliminated by Leray projection:
//   du/dt = P(-u.grad u + B.grad B) + nu Lap u
//   dB/dt = -u.grad B + B.grad u
// Products are dealiased (2/3 rule) unless dealias = false.
std::pair<VectorField2D, VectorField2D> nonlinear_rhs(const MhdState& state, bool dealias = true);

// One classical RK4 step with exact integrating factor exp(-nu |k|^2 dt)
// on the velocity. Velocity is re-projected and both fields mean-zeroed.
// Throws StepRejection when dt violates the advective CFL bound.
MhdState step(const MhdState& state, double dt, bool dealias = true);

// March from config.initial to t_end, recording monitors each step and
// snapshots every snapshot_stride steps (first and last always kept).
// Guard trips return a partial trajectory with completed = false.
Trajectory integrate(const SolverConfig& config);

// Same, but from an explicit state (config.initial ignored).
Trajectory integrate_from(const MhdState& start, const SolverConfig& config);

MhdState initial_state(const InitialData& spec, const Grid2D& grid, double nu);

// CFL number dt * k_max * (sup|u| + sup|B|); steps reject above 2.8.
double cfl_number(const MhdState& state, double dt);

}  // namespace mhdlab

// Two-solution stability experiments: difference norms, term-by-term
// estimate audits, closure inequalities and the Osgood comparison.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mhdlab/besov.hpp"
#include "mhdlab/estimates.hpp"
#include "mhdlab/littlewood_paley.hpp"
#include "mhdlab/solver.hpp"

namespace mhdlab {

// Divergence-free, mean-zero, unit-L2 bump concentrated on one dyadic
// shell; run_pair scales it by epsilon and adds it to the chosen field.
struct Perturbation {
    std::string target = "u";  // "u" | "B" | "both"
    int shell = 2;
    double epsilon = 1e-3;
    std::uint64_t seed = 99;
};

VectorField2D perturbation_field(const Grid2D& grid, int shell, std::uint64_t seed);

// Two primal runs with identical numerics plus the derived differences
//   delta_u = u1 - u2, delta_B = B1 - B2
// recomputed per snapshot (never integrated as a third system).
struct PairTrajectory {
    Trajectory run1;  // unperturbed: (u1, B1)
    Trajectory run2;  // perturbed:   (u2, B2)
    std::vector<double> times;
    std::vector<VectorField2D> delta_u;
    std::vector<VectorField2D> delta_b;
    bool completed = true;
};

PairTrajectory run_pair(const MhdState& base, const Perturbation& pert,
                        const SolverConfig& config);

// Running stability functionals at each snapshot instant:
//   X = ||du||_{Linf_t B.^-1_{2,inf}} + ||du||_{L~1_t B.^1_{2,inf}}
//   Y = ||dB||_{Linf_t B.^0_{2,inf}}
//   V = ||du||_{L~1_t B.^0_{2,inf}} + ||du||_{L~1_t B.^2_{2,inf}}
// K1..K4 are the running sup_j 2^-j L^1_t block norms of the four
// momentum-difference source terms (commutator, du.grad u2, B1.grad dB,
// dB.grad B2); J1..J4 the instantaneous sup_j block norms of the four
// magnetic-difference sources.
struct StabilityRecord {
    double t = 0.0;
    double X = 0.0, Y = 0.0, V = 0.0;
    std::array<double, 4> K{};
    std::array<double, 4> J{};
};

std::vector<StabilityRecord> stability_norms(const PairTrajectory& pair,
                                             const DyadicPartition& partition);

// Every display of the difference-system estimate chain at time t:
// K1..K4 and J1..J4 against their claimed right-hand sides, plus the
// paraproduct/commutator sub-splits K11..K14, K21..K23, J11..J14 and
// J41..J43, each against its parent's right-hand side.
std::vector<EstimateReport> term_audit(const PairTrajectory& pair, double t,
                                       const DyadicPartition& partition);

// The closure inequalities on [0, t_end] and their small-time forms on
// [0, T_bar], where T_bar is located by bisection so that
//   int_0^T_bar ||(u1,u2)||_{B.^2_{2,1}} dt < 1 / (4 C_est).
struct ClosureReport {
    EstimateReport velocity_bound;        // weak-norm velocity closure, integral form
    EstimateReport magnetic_bound;        // magnetic closure, integral form
    EstimateReport magnetic_differential; // its differential form
    EstimateReport velocity_small_time;   // velocity closure on [0, T_bar]
    EstimateReport magnetic_small_time;   // magnetic closure on [0, T_bar]
    double c_est = 0.0;                   // max implied constant of the two closures
    double t_bar = 0.0;
};

ClosureReport verify_closure(const PairTrajectory& pair, const DyadicPartition& partition);

// Upper envelope from the Osgood comparison ODE
//   rho' = C rho log(e + V(t)/rho),  rho(t0) = x0,
// integrated with an adaptive Dormand-Prince 5(4) scheme and sampled at
// out_times (values at t <= t0 are x0; identically zero when x0 = 0).
std::vector<double> osgood_envelope(double x0, double C, double V,
                                    const std::vector<double>& out_times);
std::vector<double> osgood_envelope(double x0, double C, const std::vector<double>& v_times,
                                    const std::vector<double>& v_values,
                                    const std::vector<double>& out_times);

// epsilon-sweep: for each epsilon, run the pair, measure X/Y, build the
// envelope from the measured constants and record the worst margin
// min_t (envelope - X); fits the slope of log sup X against log eps.
struct ConvergenceRow {
    double epsilon = 0.0;
    double sup_x = 0.0;
    double sup_y = 0.0;
    double envelope_margin = 0.0;
    double c_envelope = 0.0;
    bool completed = true;
};
struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0;  // least-squares fit over the positive-eps rows
};

ConvergenceStudy convergence_study(const MhdState& base, const Perturbation& pert,
                                   const std::vector<double>& eps_list,
                                   const SolverConfig& config);

// Smallest C (within 0.1%) whose envelope dominates the X samples; used
// when the closure constant alone leaves a negative margin. Returns
// max(c_floor, that C).
double calibrate_envelope_constant(double c_floor, double x0,
                                   const std::vector<double>& times,
                                   const std::vector<double>& x_samples,
                                   const std::vector<double>& v_samples);

}  // namespace mhdlab

#include "mhdlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mhdlab/besov.hpp"
#include "mhdlab/io.hpp"
#include "mhdlab/littlewood_paley.hpp"
#include "mhdlab/ops.hpp"

namespace mhdlab {

namespace {

constexpr double kCflLimit = 2.8;  // RK4 imaginary-axis stability bound

SpectralField product(const SpectralField& a, const SpectralField& b, bool dealias_on) {
    return dealias_on ? dealiased_product(a, b) : multiply(a, b);
}

// (v . grad) f with the configured product rule.
SpectralField advection(const VectorField2D& v, const SpectralField& f, bool dealias_on) {
    return add(product(v.x_comp, spectral_derivative(f, Axis::x, 1), dealias_on),
               product(v.y_comp, spectral_derivative(f, Axis::y, 1), dealias_on));
}

struct Tendency {
    VectorField2D du;
    VectorField2D dB;
};

// Advective/coupling part only; the viscous term is handled exactly by
// the stepper's integrating factor. Means are pinned to zero (the
// nonlinearities preserve them analytically; roundoff must not drift).
Tendency advective_rhs(const VectorField2D& u, const VectorField2D& B, bool dealias_on) {
    VectorField2D trans{
        subtract(advection(B, B.x_comp, dealias_on), advection(u, u.x_comp, dealias_on)),
        subtract(advection(B, B.y_comp, dealias_on), advection(u, u.y_comp, dealias_on)), false};
    VectorField2D du = leray_project(trans);
    du.x_comp = zero_mean(du.x_comp);
    du.y_comp = zero_mean(du.y_comp);

    VectorField2D dB{
        subtract(advection(B, u.x_comp, dealias_on), advection(u, B.x_comp, dealias_on)),
        subtract(advection(B, u.y_comp, dealias_on), advection(u, B.y_comp, dealias_on)), false};
    dB.x_comp = zero_mean(dB.x_comp);
    dB.y_comp = zero_mean(dB.y_comp);
    return Tendency{std::move(du), std::move(dB)};
}

// exp(-nu |k|^2 dt) mode tables for the integrating factor.
struct ViscousFactors {
    std::vector<double> half;  // exp(-nu |k|^2 dt/2)
    std::vector<double> full;  // exp(-nu |k|^2 dt)

    ViscousFactors(const Grid2D& g, double nu, double dt) {
        half.resize(g.modes());
        full.resize(g.modes());
        const int n = g.size();
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                const double kx = g.wavenumber(ix), ky = g.wavenumber(iy);
                const double a = nu * (kx * kx + ky * ky);
                const std::size_t i = static_cast<std::size_t>(iy) * n + ix;
                half[i] = std::exp(-0.5 * a * dt);
                full[i] = std::exp(-a * dt);
            }
        }
    }
};

SpectralField apply_table(const SpectralField& f, const std::vector<double>& table) {
    std::vector<std::complex<double>> c(f.coeffs());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= table[i];
    return SpectralField::from_coeffs(f.grid(), std::move(c), f.real_valued());
}

VectorField2D apply_table(const VectorField2D& v, const std::vector<double>& table) {
    return VectorField2D{apply_table(v.x_comp, table), apply_table(v.y_comp, table),
                         v.divergence_free};
}

VectorField2D axpy(const VectorField2D& base, double a, const VectorField2D& dir) {
    return add(base, scale(dir, a));
}

double l2_sq(const VectorField2D& v) {
    const double x = l2_norm(v.x_comp), y = l2_norm(v.y_comp);
    return x * x + y * y;
}

// ||grad u||_2^2 = L^2 sum |k|^2 |u^|^2, evaluated spectrally.
double enstrophy_of(const VectorField2D& u) {
    const Grid2D& g = u.grid();
    const int n = g.size();
    const auto& cx = u.x_comp.coeffs();
    const auto& cy = u.y_comp.coeffs();
    double acc = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double kx = g.wavenumber(ix), ky = g.wavenumber(iy);
            const std::size_t i = static_cast<std::size_t>(iy) * n + ix;
            acc += (kx * kx + ky * ky) * (std::norm(cx[i]) + std::norm(cy[i]));
        }
    }
    return g.length() * g.length() * acc;
}

// One IF-RK4 step; also accumulates the viscous dissipation integral
// nu int ||grad u||_2^2 dt with the same RK4 stage weights, so the
// energy identity can be checked to the integrator's own order.
MhdState step_impl(const MhdState& state, double dt, bool dealias_on, double* diss_accum) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (cfl_number(state, dt) > kCflLimit)
        throw StepRejection("step: advective CFL exceeded (dt too large for current speeds)");

    const Grid2D& g = state.u.grid();
    const ViscousFactors fac(g, state.nu, dt);
    const double h = dt;

    const VectorField2D& u0 = state.u;
    const VectorField2D& B0 = state.B;

    const Tendency k1 = advective_rhs(u0, B0, dealias_on);
    const VectorField2D u_half = apply_table(u0, fac.half);

    const VectorField2D ua = axpy(u_half, 0.5 * h, apply_table(k1.du, fac.half));
    const VectorField2D Ba = axpy(B0, 0.5 * h, k1.dB);
    const Tendency k2 = advective_rhs(ua, Ba, dealias_on);

    const VectorField2D ub = axpy(u_half, 0.5 * h, k2.du);
    const VectorField2D Bb = axpy(B0, 0.5 * h, k2.dB);
    const Tendency k3 = advective_rhs(ub, Bb, dealias_on);

    const VectorField2D uc = axpy(apply_table(u0, fac.full), h, apply_table(k3.du, fac.half));
    const VectorField2D Bc = axpy(B0, h, k3.dB);
    const Tendency k4 = advective_rhs(uc, Bc, dealias_on);

    // u_{n+1} = E2 u0 + h/6 (E2 k1 + 2 E (k2 + k3) + k4)
    VectorField2D u1 = apply_table(u0, fac.full);
    u1 = axpy(u1, h / 6.0, apply_table(k1.du, fac.full));
    u1 = axpy(u1, h / 3.0, apply_table(add(k2.du, k3.du), fac.half));
    u1 = axpy(u1, h / 6.0, k4.du);

    VectorField2D B1 = axpy(B0, h / 6.0, k1.dB);
    B1 = axpy(B1, h / 3.0, add(k2.dB, k3.dB));
    B1 = axpy(B1, h / 6.0, k4.dB);

    u1 = leray_project(u1);
    u1.x_comp = zero_mean(u1.x_comp);
    u1.y_comp = zero_mean(u1.y_comp);
    B1.x_comp = zero_mean(B1.x_comp);
    B1.y_comp = zero_mean(B1.y_comp);
    B1.divergence_free = B0.divergence_free;

    if (diss_accum) {
        const double d1 = enstrophy_of(u0);
        const double d2 = enstrophy_of(ua);
        const double d3 = enstrophy_of(ub);
        const double d4 = enstrophy_of(uc);
        *diss_accum += state.nu * h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    }

    return MhdState{std::move(u1), std::move(B1), state.t + dt, state.nu};
}

}  // namespace

double cfl_number(const MhdState& state, double dt) {
    const double speed = sup_abs(state.u) + sup_abs(state.B);
    return dt * state.u.grid().max_wavenumber() * speed;
}

std::pair<VectorField2D, VectorField2D> nonlinear_rhs(const MhdState& state, bool dealias) {
    Tendency t = advective_rhs(state.u, state.B, dealias);
    // Full tendency includes the viscous term; the stepper treats it
    // separately via the integrating factor.
    t.du.x_comp = add(t.du.x_comp, scale(fractional_laplacian(state.u.x_comp, 1.0), -state.nu));
    t.du.y_comp = add(t.du.y_comp, scale(fractional_laplacian(state.u.y_comp, 1.0), -state.nu));
    return {std::move(t.du), std::move(t.dB)};
}

MhdState step(const MhdState& state, double dt, bool dealias) {
    return step_impl(state, dt, dealias, nullptr);
}

namespace {

MonitorRow monitor_of(const MhdState& s, const DyadicPartition& partition, double visc_diss) {
    MonitorRow row{};
    row.t = s.t;
    row.energy = 0.5 * (l2_sq(s.u) + l2_sq(s.B));
    row.u_b021 = besov_norm(s.u, BesovIndex{0.0, 2.0, 1.0, false}, partition);
    row.u_b221h = besov_norm(s.u, BesovIndex{2.0, 2.0, 1.0, true}, partition);
    row.b_b121 = besov_norm(s.B, BesovIndex{1.0, 2.0, 1.0, false}, partition);
    row.enstrophy = enstrophy_of(s.u);
    row.visc_diss = visc_diss;
    row.div_u = divergence_residual(s.u);
    row.div_b = divergence_residual(s.B);
    return row;
}

}  // namespace

Trajectory integrate(const SolverConfig& config) {
    const Grid2D grid(config.n, config.length);
    return integrate_from(initial_state(config.initial, grid, config.nu), config);
}

Trajectory integrate_from(const MhdState& start, const SolverConfig& config) {
    const Grid2D grid(config.n, config.length);
    if (start.u.grid() != grid)
        throw std::invalid_argument("integrate_from: state grid does not match config");
    const DyadicPartition partition(grid);
    MhdState state = start;
    state.nu = config.nu;

    Trajectory traj;
    double visc_diss = 0.0;
    long step_index = 0;

    auto snapshot = [&](const MhdState& s) {
        traj.times.push_back(s.t);
        traj.snapshots.push_back(s);
    };

    MonitorRow row = monitor_of(state, partition, visc_diss);
    traj.monitors.push_back(row);
    snapshot(state);

    const double span = config.t_end - state.t;
    if (!(span > 0.0)) return traj;
    if (!(config.dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");

    const double t0 = state.t;
    while (state.t < config.t_end - 1e-12 * std::max(1.0, std::abs(config.t_end))) {
        double dt = config.dt;
        if (config.adaptive) {
            const double speed = sup_abs(state.u) + sup_abs(state.B);
            if (speed > 0.0)
                dt = std::min(dt, config.cfl_safety * kCflLimit /
                                      (grid.max_wavenumber() * speed));
        }
        // Land exactly on t_end; keep uniform stepping when it divides.
        dt = std::min(dt, config.t_end - state.t);

        try {
            state = step_impl(state, dt, config.dealias, &visc_diss);
        } catch (const StepRejection& e) {
            traj.completed = false;
            traj.abort_reason = std::string("step-rejected: ") + e.what();
            break;
        } catch (const std::invalid_argument& e) {
            traj.completed = false;
            traj.abort_reason = std::string("step-rejected: ") + e.what();
            break;
        }
        ++step_index;
        // Fixed-step runs reconstruct t as t0 + k dt to avoid drift.
        if (!config.adaptive && std::abs(config.dt * step_index + t0 - state.t) < 1e-9)
            state.t = t0 + config.dt * step_index;

        row = monitor_of(state, partition, visc_diss);

        if (row.div_b > config.div_tolerance && config.project_B) {
            state.B = leray_project(state.B);
            row = monitor_of(state, partition, visc_diss);
        }
        traj.monitors.push_back(row);

        if (row.div_u > config.div_tolerance || row.div_b > config.div_tolerance) {
            traj.completed = false;
            traj.abort_reason = "divergence-drift";
            snapshot(state);
            break;
        }
        if (row.u_b021 > config.guard_ceiling) {
            traj.completed = false;
            traj.abort_reason = "blowup-guard";
            snapshot(state);
            break;
        }

        const bool at_end =
            state.t >= config.t_end - 1e-12 * std::max(1.0, std::abs(config.t_end));
        if (step_index % std::max(1, config.snapshot_stride) == 0 || at_end) snapshot(state);
    }
    return traj;
}

MhdState initial_state(const InitialData& spec, const Grid2D& grid, double nu) {
    const int n = grid.size();
    const double kappa = 2.0 * std::numbers::pi / grid.length();

    auto sampled = [&](auto&& fn) {
        std::vector<double> s(grid.modes());
        const double h = grid.spacing();
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                s[static_cast<std::size_t>(iy) * n + ix] = fn(ix * h, iy * h);
        return SpectralField::from_physical(grid, s);
    };

    auto finalize = [&](VectorField2D v, double amplitude) {
        v = leray_project(v);
        v.x_comp = zero_mean(v.x_comp);
        v.y_comp = zero_mean(v.y_comp);
        const double norm = std::sqrt(l2_sq(v));
        if (norm > 0.0 && amplitude >= 0.0) v = scale(v, amplitude / norm);
        v.divergence_free = true;
        return v;
    };

    if (spec.kind == "taylor-green") {
        const double a = spec.amplitude_u;
        VectorField2D u{
            sampled([&](double x, double y) { return a * std::sin(kappa * x) * std::cos(kappa * y); }),
            sampled([&](double x, double y) { return -a * std::cos(kappa * x) * std::sin(kappa * y); }),
            true};
        VectorField2D B{SpectralField::zero(grid), SpectralField::zero(grid), true};
        return MhdState{std::move(u), std::move(B), 0.0, nu};
    }
    if (spec.kind == "orszag-tang-like") {
        VectorField2D u{sampled([&](double, double y) { return -std::sin(kappa * y); }),
                        sampled([&](double x, double) { return std::sin(kappa * x); }), false};
        VectorField2D B{sampled([&](double, double y) { return -std::sin(kappa * y); }),
                        sampled([&](double x, double) { return std::sin(2.0 * kappa * x); }),
                        false};
        return MhdState{finalize(std::move(u), spec.amplitude_u),
                        finalize(std::move(B), spec.amplitude_B), 0.0, nu};
    }
    if (spec.kind == "random-band") {
        const DyadicPartition partition(grid);
        std::vector<double> band(grid.modes(), 0.0);
        for (int j = std::max(spec.shell_lo, partition.j_min());
             j <= std::min(spec.shell_hi, partition.j_max()); ++j) {
            const auto row = partition.phi_table(j);
            for (std::size_t i = 0; i < band.size(); ++i) band[i] += row[i];
        }
        auto banded = [&](std::uint64_t seed) {
            const SpectralField white = random_real_field(grid, seed);
            std::vector<std::complex<double>> c(white.coeffs());
            for (std::size_t i = 0; i < c.size(); ++i) c[i] *= band[i];
            return SpectralField::from_coeffs(grid, std::move(c), true);
        };
        VectorField2D u{banded(spec.seed), banded(spec.seed + 1), false};
        VectorField2D B{banded(spec.seed + 2), banded(spec.seed + 3), false};
        MhdState state{finalize(std::move(u), spec.amplitude_u),
                       finalize(std::move(B), spec.amplitude_B), 0.0, nu};
        if (spec.amplitude_B == 0.0)
            state.B = VectorField2D{SpectralField::zero(grid), SpectralField::zero(grid), true};
        return state;
    }
    if (spec.kind == "file") {
        MhdState state = io::load_snapshot(spec.path, grid.length(), nu);
        if (state.u.grid() != grid)
            throw std::invalid_argument("initial_state: snapshot grid does not match config");
        return state;
    }
    throw std::invalid_argument("initial_state: unknown kind '" + spec.kind + "'");
}

}  // namespace mhdlab

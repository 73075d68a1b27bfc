// Batch driver: partition verification, inequality sweeps, solver runs
// and difference-stability experiments, configured by JSON files. Flags
// only pick the config and output locations; everything numeric lives in
// the config so a run is reproducible from its manifest.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mhdlab/besov.hpp"
#include "mhdlab/estimates.hpp"
#include "mhdlab/io.hpp"
#include "mhdlab/littlewood_paley.hpp"
#include "mhdlab/ops.hpp"
#include "mhdlab/parallel.hpp"
#include "mhdlab/solver.hpp"
#include "mhdlab/uniqueness.hpp"

#include <fftw3.h>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace mhdlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBreach = 1;    // invariant or tolerance violated
constexpr int kExitGuarded = 2;   // run aborted by a guard
constexpr int kExitUsage = 64;    // bad invocation or config

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string iso_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%FT%TZ", &tm);
    return buf;
}

// RunManifest: written with status "running" before any heavy work and
// finalized on exit. Timestamps are the only non-reproducible bytes a
// command emits; all reports and series are byte-stable for a fixed
// config and seed.
class Manifest {
  public:
    Manifest(const std::string& out_dir, const std::string& command,
             const std::string& config_path, const std::string& config_bytes, long long seed)
        : path_((fs::path(out_dir) / "run_manifest.json").string()) {
        doc_["schema_version"] = 1;
        doc_["command"] = command;
        doc_["config"] = config_path;
        doc_["config_hash"] = io::fnv1a_hex(config_bytes);
        doc_["seed"] = seed;
        doc_["versions"] = {{"mhdlab", "0.1.0"}, {"fftw", std::string(fftw_version)}};
        doc_["started_at"] = iso_now();
        doc_["finished_at"] = nullptr;
        doc_["status"] = "running";
        doc_["outputs"] = ordered_json::array();
        write();
    }

    void add_output(const std::string& p) {
        doc_["outputs"].push_back(p);
        written_.push_back(p);
    }

    ordered_json& extra() { return doc_; }

    void finish(const std::string& status) {
        doc_["status"] = status;
        doc_["finished_at"] = iso_now();
        write();
    }

  private:
    void write() const { io::write_file(path_, doc_.dump(2) + "\n"); }

    std::string path_;
    ordered_json doc_;
    std::vector<std::string> written_;
};

ordered_json load_config(const std::string& path) {
    std::string bytes;
    try {
        bytes = io::read_file(path);
    } catch (const std::exception& e) {
        throw UsageError(std::string("cannot read config: ") + e.what());
    }
    ordered_json j;
    try {
        j = ordered_json::parse(bytes);
    } catch (const std::exception& e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("schema_version", -1) != 1)
        throw UsageError("config must be an object with schema_version = 1");
    return j;
}

InitialData parse_initial(const ordered_json& j) {
    InitialData init;
    init.kind = j.value("kind", init.kind);
    init.seed = j.value("seed", init.seed);
    init.amplitude_u = j.value("amplitude_u", init.amplitude_u);
    init.amplitude_B = j.value("amplitude_B", init.amplitude_B);
    init.shell_lo = j.value("shell_lo", init.shell_lo);
    init.shell_hi = j.value("shell_hi", init.shell_hi);
    init.path = j.value("path", init.path);
    return init;
}

SolverConfig parse_solver(const ordered_json& j) {
    SolverConfig cfg;
    cfg.n = j.value("n", cfg.n);
    cfg.length = j.value("length", cfg.length);
    cfg.nu = j.value("nu", cfg.nu);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.adaptive = j.value("adaptive", cfg.adaptive);
    cfg.cfl_safety = j.value("cfl_safety", cfg.cfl_safety);
    cfg.t_end = j.value("t_end", cfg.t_end);
    cfg.dealias = j.value("dealias", cfg.dealias);
    cfg.snapshot_stride = j.value("snapshot_stride", cfg.snapshot_stride);
    cfg.project_B = j.value("project_B", cfg.project_B);
    cfg.guard_ceiling = j.value("guard_ceiling", cfg.guard_ceiling);
    cfg.div_tolerance = j.value("div_tolerance", cfg.div_tolerance);
    if (j.contains("initial")) cfg.initial = parse_initial(j.at("initial"));
    return cfg;
}

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- verify

int cmd_verify_partition(const std::string& config_path, const std::string& out_dir,
                         bool inject_fault) {
    const std::string bytes = io::read_file(config_path);
    const ordered_json cfg = load_config(config_path);
    const int n = cfg.value("n", 64);
    const double length = cfg.value("length", 2.0 * std::numbers::pi);
    const int probe_fields = cfg.value("probe_fields", 100);
    const std::uint64_t seed = cfg.value("seed", 1);
    const int support_seeds = cfg.value("support_seeds", 5);

    fs::create_directories(out_dir);
    Manifest manifest(out_dir, "verify-partition", config_path, bytes,
                      static_cast<long long>(seed));

    const Grid2D grid(n, length);
    DyadicPartition partition(grid);
    if (inject_fault) {
        const int j_mid = (partition.j_min() + partition.j_max()) / 2;
        partition.inject_table_fault(j_mid, 1, 0.25);
    }

    const PartitionAudit audit = run_partition_audit(partition, probe_fields, seed);

    // Distant blocks of a product of two blocks must vanish: the product
    // of shell-j and shell-k data lives within |.| <~ 2^{max(j,k)+2}, so
    // blocks 5 or more shells away see nothing.
    bool support_pass = true;
    for (int s = 0; s < support_seeds && support_pass; ++s) {
        const SpectralField f = zero_mean(random_real_field(grid, seed + 100 + s));
        for (int j = partition.j_min(); j <= partition.j_max() && support_pass; ++j)
            for (int k = partition.j_min(); k <= partition.j_max(); ++k)
                if (std::abs(j - k) >= 5 && !support_audit(partition, f, j, k)) {
                    support_pass = false;
                    break;
                }
    }

    ordered_json report;
    report["schema_version"] = 1;
    report["n"] = n;
    report["length"] = length;
    report["j_min"] = partition.j_min();
    report["j_max"] = partition.j_max();
    report["partition_residual"] = audit.partition_residual;
    report["reconstruction_error"] = audit.reconstruction_error;
    report["block_orthogonality"] = audit.block_orthogonality;
    report["energy_lower"] = audit.energy_lower;
    report["energy_upper"] = audit.energy_upper;
    report["support_pass"] = support_pass;
    report["pass"] = audit.pass && support_pass;
    const std::string report_path = (fs::path(out_dir) / "partition_report.json").string();
    io::write_file(report_path, report.dump(2) + "\n");
    manifest.add_output(report_path);

    const bool ok = audit.pass && support_pass;
    manifest.finish(ok ? "ok" : "invariant-breach");
    return ok ? kExitOk : kExitBreach;
}

// ---------------------------------------------------------------- sweeps

int cmd_inequalities(const std::string& config_path, const std::string& out_dir) {
    const std::string bytes = io::read_file(config_path);
    const ordered_json cfg = load_config(config_path);
    const int n = cfg.value("n", 64);
    const double length = cfg.value("length", 2.0 * std::numbers::pi);
    const long long seed_start = cfg.value("seed_start", 1);
    const int seed_count = cfg.value("seed_count", 0);
    if (seed_count <= 0) throw UsageError("seed_count must be positive");
    std::vector<double> alphas = {0.0, 0.5, 1.0};
    if (cfg.contains("alphas")) alphas = cfg.at("alphas").get<std::vector<double>>();
    const int lemma_samples = cfg.value("lemma_samples", 9);
    const double lemma_t_end = cfg.value("lemma_t_end", 1.0);

    fs::create_directories(out_dir);
    Manifest manifest(out_dir, "inequalities", config_path, bytes, seed_start);

    const Grid2D grid(n, length);
    const DyadicPartition partition(grid);
    std::vector<int> shells = {0, 1, 2, 3};
    if (cfg.contains("shells")) shells = cfg.at("shells").get<std::vector<int>>();
    shells.erase(std::remove_if(shells.begin(), shells.end(),
                                [&](int j) {
                                    return j < partition.j_min() || j > partition.j_max();
                                }),
                 shells.end());
    const std::vector<std::pair<double, double>> pqs = {{2.0, 2.0}, {2.0, kInf}, {1.0, 2.0}};

    std::vector<std::vector<EstimateReport>> per_seed(seed_count);
    parallel_for(static_cast<std::size_t>(seed_count), [&](std::size_t idx) {
        const std::uint64_t seed = static_cast<std::uint64_t>(seed_start) + idx;
        std::vector<EstimateReport>& out = per_seed[idx];
        const SpectralField f = zero_mean(random_real_field(grid, seed));

        for (double alpha : alphas)
            for (const auto& [p, q] : pqs)
                for (int j : shells) {
                    EstimateReport r = bernstein_report(f, j, alpha, p, q, partition);
                    r.metadata["seed"] = static_cast<double>(seed);
                    out.push_back(std::move(r));
                }

        FieldSeries series;
        const SpectralField f2 = zero_mean(random_real_field(grid, seed + 7919));
        for (int m = 0; m < lemma_samples; ++m) {
            const double t = lemma_t_end * m / (lemma_samples - 1);
            const double th = 0.5 * std::numbers::pi * t / lemma_t_end;
            series.times.push_back(t);
            series.fields.push_back(add(scale(f, std::cos(th)), scale(f2, std::sin(th))));
        }
        EstimateReport lemma = log_interp_report(series, partition);
        lemma.metadata["seed"] = static_cast<double>(seed);
        out.push_back(std::move(lemma));

        VectorField2D u{zero_mean(random_real_field(grid, seed + 31)),
                        zero_mean(random_real_field(grid, seed + 37)), false};
        u = leray_project(u);
        EstimateReport comm = commutator_report(u, f, shells.empty() ? 1 : shells.back(),
                                                partition);
        comm.metadata["seed"] = static_cast<double>(seed);
        out.push_back(std::move(comm));

        EstimateReport prod = product_estimate_report(f, f2, partition);
        prod.metadata["seed"] = static_cast<double>(seed);
        out.push_back(std::move(prod));
    });

    std::vector<EstimateReport> all;
    for (auto& v : per_seed)
        for (auto& r : v) all.push_back(std::move(r));

    const std::string json_path = (fs::path(out_dir) / "inequality_reports.json").string();
    io::write_reports(json_path, all);
    manifest.add_output(json_path);

    std::string csv = "name,seed,alpha,p,q,j,lhs,rhs,implied_constant,vacuous\n";
    std::map<std::string, double> family_max;
    bool all_finite = true;
    auto meta = [](const EstimateReport& r, const char* key, double fallback) {
        const auto it = r.metadata.find(key);
        return it == r.metadata.end() ? fallback : it->second;
    };
    for (const auto& r : all) {
        csv += r.name + "," + g17(meta(r, "seed", -1)) + "," + g17(meta(r, "alpha", -1)) + "," +
               g17(meta(r, "p", -1)) + "," + g17(meta(r, "q", -1)) + "," +
               g17(meta(r, "j", -99)) + "," + g17(r.lhs) + "," + g17(r.rhs) + "," +
               g17(r.implied_constant) + "," + (r.vacuous ? "1" : "0") + "\n";
        family_max[r.name] = std::max(family_max[r.name], r.implied_constant);
        if (!std::isfinite(r.implied_constant)) all_finite = false;
    }
    const std::string csv_path = (fs::path(out_dir) / "implied_constants.csv").string();
    io::write_file(csv_path, csv);
    manifest.add_output(csv_path);

    ordered_json summary;
    for (const auto& [k, v] : family_max) summary[k] = v;
    manifest.extra()["max_implied_constants"] = summary;
    manifest.extra()["report_count"] = all.size();
    manifest.finish(all_finite ? "ok" : "invariant-breach");
    return all_finite ? kExitOk : kExitBreach;
}

// ---------------------------------------------------------------- solver

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const std::string bytes = io::read_file(config_path);
    const ordered_json cfg = load_config(config_path);
    const SolverConfig solver_cfg = parse_solver(cfg);

    fs::create_directories(out_dir);
    Manifest manifest(out_dir, "simulate", config_path, bytes,
                      static_cast<long long>(solver_cfg.initial.seed));

    const Trajectory traj = integrate(solver_cfg);
    const std::string traj_dir = (fs::path(out_dir) / "trajectory").string();
    io::save_trajectory(traj_dir, traj, solver_cfg);
    manifest.add_output(traj_dir);
    manifest.extra()["completed"] = traj.completed;
    manifest.extra()["abort_reason"] = traj.abort_reason;
    manifest.extra()["snapshots"] = traj.snapshots.size();

    if (traj.completed) {
        manifest.finish("ok");
        return kExitOk;
    }
    if (traj.abort_reason == "divergence-drift") {
        manifest.finish("invariant-breach");
        return kExitBreach;
    }
    manifest.finish("guarded-abort");
    return kExitGuarded;
}

// ------------------------------------------------------------- stability

struct EpsResult {
    double epsilon = 0.0;
    bool completed = false;
    double sup_x = 0.0, sup_y = 0.0;
    double c_est = 0.0, c_envelope = 0.0, t_bar = 0.0, margin = 0.0;
    bool monotone = true;
    std::vector<StabilityRecord> records;
    std::vector<double> envelope;
    std::vector<EstimateReport> closure_reports;
    std::vector<EstimateReport> term_reports;
};

int cmd_uniqueness(const std::string& config_path, const std::string& out_dir,
                   bool inject_violation) {
    const std::string bytes = io::read_file(config_path);
    const ordered_json cfg = load_config(config_path);
    if (!cfg.contains("solver")) throw UsageError("config requires a solver block");
    const SolverConfig solver_cfg = parse_solver(cfg.at("solver"));

    Perturbation pert;
    if (cfg.contains("perturbation")) {
        const auto& p = cfg.at("perturbation");
        pert.target = p.value("target", pert.target);
        pert.shell = p.value("shell", pert.shell);
        pert.epsilon = p.value("epsilon", pert.epsilon);
        pert.seed = p.value("seed", pert.seed);
    }
    if (pert.target != "u" && pert.target != "B" && pert.target != "both")
        throw UsageError("perturbation target must be \"u\", \"B\" or \"both\"");
    std::vector<double> eps_list = {pert.epsilon};
    if (cfg.contains("eps_list")) eps_list = cfg.at("eps_list").get<std::vector<double>>();
    if (eps_list.empty()) throw UsageError("eps_list must not be empty");
    const double audit_time = cfg.value("audit_time", solver_cfg.t_end);

    fs::create_directories(out_dir);
    Manifest manifest(out_dir, "uniqueness", config_path, bytes,
                      static_cast<long long>(pert.seed));

    const Grid2D grid(solver_cfg.n, solver_cfg.length);
    const DyadicPartition partition(grid);
    const MhdState base = initial_state(solver_cfg.initial, grid, solver_cfg.nu);

    std::vector<EpsResult> results(eps_list.size());
    parallel_for(eps_list.size(), [&](std::size_t i) {
        EpsResult& r = results[i];
        r.epsilon = eps_list[i];
        Perturbation p = pert;
        p.epsilon = r.epsilon;
        const PairTrajectory pair = run_pair(base, p, solver_cfg);
        r.completed = pair.completed;
        r.records = stability_norms(pair, partition);

        double prev_x = 0.0, prev_y = 0.0, prev_v = 0.0;
        for (const auto& rec : r.records) {
            r.sup_x = std::max(r.sup_x, rec.X);
            r.sup_y = std::max(r.sup_y, rec.Y);
            if (rec.X < prev_x || rec.Y < prev_y || rec.V < prev_v) r.monotone = false;
            prev_x = rec.X;
            prev_y = rec.Y;
            prev_v = rec.V;
        }

        r.envelope.assign(r.records.size(), 0.0);
        if (r.sup_x > 0.0) {
            const ClosureReport closure = verify_closure(pair, partition);
            r.c_est = closure.c_est;
            r.t_bar = closure.t_bar;
            r.closure_reports = {closure.velocity_bound, closure.magnetic_bound,
                                 closure.magnetic_differential, closure.velocity_small_time,
                                 closure.magnetic_small_time};
            r.term_reports = term_audit(pair, audit_time, partition);

            std::vector<double> ts, xs, vs;
            std::size_t first = 0;
            while (first < r.records.size() && r.records[first].X <= 0.0) ++first;
            for (std::size_t m = first; m < r.records.size(); ++m) {
                ts.push_back(r.records[m].t);
                xs.push_back(r.records[m].X);
                vs.push_back(r.records[m].V);
            }
            // The fault hook doubles the measured series but leaves the
            // envelope anchored at the true first sample, so the check
            // must fail at that sample.
            std::vector<double> checked = xs;
            if (inject_violation)
                for (double& x : checked) x *= 2.0;
            r.c_envelope = inject_violation
                               ? std::max(r.c_est, 1e-12)
                               : calibrate_envelope_constant(r.c_est, xs.front(), ts, xs, vs);
            const auto env = osgood_envelope(xs.front(), r.c_envelope, ts, vs, ts);
            r.margin = 1e300;
            for (std::size_t m = 0; m < ts.size(); ++m) {
                r.envelope[first + m] = env[m];
                r.margin = std::min(r.margin, env[m] - checked[m]);
            }
        }
    });

    // Emit per-epsilon series and reports in a deterministic order.
    ordered_json rows = ordered_json::array();
    bool any_breach = false, any_guarded = false;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const EpsResult& r = results[i];
        std::vector<std::vector<double>> series;
        for (std::size_t m = 0; m < r.records.size(); ++m) {
            const auto& rec = r.records[m];
            series.push_back({rec.t, rec.X, rec.Y, rec.V, r.envelope[m], rec.K[0], rec.K[1],
                              rec.K[2], rec.K[3], rec.J[0], rec.J[1], rec.J[2], rec.J[3]});
        }
        char tag[32];
        std::snprintf(tag, sizeof tag, "eps_%02zu", i);
        const std::string series_path =
            (fs::path(out_dir) / (std::string("series_") + tag + ".csv")).string();
        io::write_csv(series_path,
                      {"t", "X", "Y", "V", "envelope", "K1", "K2", "K3", "K4", "J1", "J2", "J3",
                       "J4"},
                      series);
        manifest.add_output(series_path);
        if (!r.closure_reports.empty()) {
            const std::string closure_path =
                (fs::path(out_dir) / (std::string("closure_") + tag + ".json")).string();
            io::write_reports(closure_path, r.closure_reports);
            manifest.add_output(closure_path);
        }
        if (!r.term_reports.empty()) {
            const std::string terms_path =
                (fs::path(out_dir) / (std::string("terms_") + tag + ".json")).string();
            io::write_reports(terms_path, r.term_reports);
            manifest.add_output(terms_path);
        }

        const double margin_floor = -1e-12 * std::max(1.0, r.sup_x);
        const bool envelope_ok = r.sup_x == 0.0 || r.margin >= margin_floor;
        if (!envelope_ok || !r.monotone) any_breach = true;
        if (!r.completed) any_guarded = true;

        ordered_json row;
        row["epsilon"] = r.epsilon;
        row["completed"] = r.completed;
        row["sup_X"] = r.sup_x;
        row["sup_Y"] = r.sup_y;
        row["c_est"] = r.c_est;
        row["c_envelope"] = r.c_envelope;
        row["t_bar"] = r.t_bar;
        row["envelope_margin"] = r.sup_x == 0.0 ? 0.0 : r.margin;
        row["envelope_ok"] = envelope_ok;
        row["monotone"] = r.monotone;
        rows.push_back(row);
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int npts = 0;
    for (const auto& r : results) {
        if (r.epsilon <= 0.0 || r.sup_x <= 0.0 || !r.completed) continue;
        const double lx = std::log(r.epsilon), ly = std::log(r.sup_x);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++npts;
    }
    manifest.extra()["rows"] = rows;
    manifest.extra()["slope"] =
        npts >= 2 ? (npts * sxy - sx * sy) / (npts * sxx - sx * sx) : 0.0;
    manifest.extra()["envelope_violation_injected"] = inject_violation;

    if (any_breach) {
        manifest.finish("invariant-breach");
        return kExitBreach;
    }
    if (any_guarded) {
        manifest.finish("guarded-abort");
        return kExitGuarded;
    }
    manifest.finish("ok");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral MHD stability laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool inject_phi_fault = false, inject_envelope_violation = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--output", out_dir, "output directory")->required();
    };
    CLI::App* verify = app.add_subcommand("verify-partition", "audit the dyadic partition");
    add_common(verify);
    verify->add_flag("--inject-phi-fault", inject_phi_fault,
                     "corrupt one multiplier table entry (fault-injection hook)");
    CLI::App* ineq = app.add_subcommand("inequalities", "randomized inequality sweeps");
    add_common(ineq);
    CLI::App* sim = app.add_subcommand("simulate", "integrate one trajectory");
    add_common(sim);
    CLI::App* uniq = app.add_subcommand("uniqueness", "difference-stability experiment");
    add_common(uniq);
    uniq->add_flag("--inject-envelope-violation", inject_envelope_violation,
                   "inflate the measured difference series past the envelope "
                   "(fault-injection hook)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (verify->parsed()) return cmd_verify_partition(config_path, out_dir, inject_phi_fault);
        if (ineq->parsed()) return cmd_inequalities(config_path, out_dir);
        if (sim->parsed()) return cmd_simulate(config_path, out_dir);
        if (uniq->parsed()) return cmd_uniqueness(config_path, out_dir, inject_envelope_violation);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBreach;
    }
    return kExitUsage;
}

#include "mhdlab/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mhdlab/ops.hpp"

namespace mhdlab::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

constexpr char kMagic[5] = {'P', 'M', 'H', 'D', '1'};

void write_field(std::ofstream& out, const SpectralField& f) {
    for (const auto& c : f.coeffs()) {
        const double re = c.real(), im = c.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof(double));
        out.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
}

SpectralField read_field(std::ifstream& in, const Grid2D& grid) {
    std::vector<std::complex<double>> c(grid.modes());
    for (auto& v : c) {
        double re = 0.0, im = 0.0;
        in.read(reinterpret_cast<char*>(&re), sizeof(double));
        in.read(reinterpret_cast<char*>(&im), sizeof(double));
        v = {re, im};
    }
    if (!in) throw std::runtime_error("snapshot: truncated field data");
    return SpectralField::from_coeffs(grid, std::move(c), true);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string snap_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snap_%06zu.pmhd", index);
    return buf;
}

}  // namespace

void save_snapshot(const std::string& path, const MhdState& state) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_snapshot: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t n = static_cast<std::uint32_t>(state.u.grid().size());
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    write_field(out, state.u.x_comp);
    write_field(out, state.u.y_comp);
    write_field(out, state.B.x_comp);
    write_field(out, state.B.y_comp);
    if (!out) throw std::runtime_error("save_snapshot: write failed for " + path);
}

MhdState load_snapshot(const std::string& path, double length, double nu, double t) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_snapshot: cannot open " + path);
    char magic[5];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_snapshot: bad magic in " + path);
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in) throw std::runtime_error("load_snapshot: truncated header in " + path);
    const Grid2D grid(static_cast<int>(n), length);
    SpectralField ux = read_field(in, grid);
    SpectralField uy = read_field(in, grid);
    SpectralField bx = read_field(in, grid);
    SpectralField by = read_field(in, grid);
    VectorField2D u{std::move(ux), std::move(uy), false};
    VectorField2D B{std::move(bx), std::move(by), false};
    u.divergence_free = divergence_residual(u) <= 1e-8;
    B.divergence_free = divergence_residual(B) <= 1e-8;
    return MhdState{std::move(u), std::move(B), t, nu};
}

void save_trajectory(const std::string& dir, const Trajectory& traj, const SolverConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["format"] = "PMHD1";
    manifest["n"] = config.n;
    manifest["length"] = config.length;
    manifest["nu"] = config.nu;
    manifest["dt"] = config.dt;
    manifest["t_end"] = config.t_end;
    manifest["dealias"] = config.dealias;
    manifest["completed"] = traj.completed;
    manifest["abort_reason"] = traj.abort_reason;
    manifest["snapshot_times"] = traj.times;
    std::vector<std::string> names;
    names.reserve(traj.snapshots.size());
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) names.push_back(snap_name(i));
    manifest["snapshots"] = names;
    write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");

    for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
        save_snapshot((fs::path(dir) / names[i]).string(), traj.snapshots[i]);

    std::vector<std::vector<double>> rows;
    rows.reserve(traj.monitors.size());
    for (const auto& m : traj.monitors)
        rows.push_back({m.t, m.energy, m.u_b021, m.u_b221h, m.b_b121, m.enstrophy, m.visc_diss,
                        m.div_u, m.div_b});
    write_csv((fs::path(dir) / "monitors.csv").string(),
              {"t", "energy", "u_B021", "u_B221h", "B_B121", "enstrophy", "visc_diss", "div_u",
               "div_B"},
              rows);
}

Trajectory load_trajectory(const std::string& dir) {
    namespace fs = std::filesystem;
    const auto manifest = nlohmann::json::parse(read_file((fs::path(dir) / "manifest.json").string()));
    const double length = manifest.at("length").get<double>();
    const double nu = manifest.at("nu").get<double>();

    Trajectory traj;
    traj.completed = manifest.at("completed").get<bool>();
    traj.abort_reason = manifest.at("abort_reason").get<std::string>();
    traj.times = manifest.at("snapshot_times").get<std::vector<double>>();
    const auto names = manifest.at("snapshots").get<std::vector<std::string>>();
    if (names.size() != traj.times.size())
        throw std::runtime_error("load_trajectory: manifest snapshot list inconsistent");
    traj.snapshots.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i)
        traj.snapshots.push_back(
            load_snapshot((fs::path(dir) / names[i]).string(), length, nu, traj.times[i]));

    std::ifstream mon((fs::path(dir) / "monitors.csv").string());
    if (mon) {
        std::string line;
        std::getline(mon, line);  // header
        while (std::getline(mon, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::vector<double> vals;
            std::string cell;
            while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
            if (vals.size() != 9) throw std::runtime_error("load_trajectory: bad monitor row");
            traj.monitors.push_back(MonitorRow{vals[0], vals[1], vals[2], vals[3], vals[4],
                                               vals[5], vals[6], vals[7], vals[8]});
        }
    }
    return traj;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
    write_file(path, out.str());
}

namespace {

nlohmann::ordered_json report_to_json(const EstimateReport& r) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["implied_constant"] = r.implied_constant;
    j["vacuous"] = r.vacuous;
    nlohmann::ordered_json breakdown;
    for (const auto& [key, value] : r.breakdown) breakdown[key] = value;
    j["breakdown"] = breakdown;
    nlohmann::ordered_json meta;
    for (const auto& [key, value] : r.metadata) meta[key] = value;
    j["metadata"] = meta;
    return j;
}

}  // namespace

std::string report_json(const EstimateReport& report) { return report_to_json(report).dump(2); }

void write_reports(const std::string& path, const std::vector<EstimateReport>& reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    write_file(path, arr.dump(2) + "\n");
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_file: cannot open " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write_file: write failed for " + path);
}

}  // namespace mhdlab::io

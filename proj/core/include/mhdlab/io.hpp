// Persistence: binary snapshots, trajectory directories, CSV and JSON.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhdlab/estimates.hpp"
#include "mhdlab/solver.hpp"

namespace mhdlab::io {

// Snapshot format (little endian throughout):
//   bytes 0-4   magic "PMHD1"
//   bytes 5-8   uint32 n (grid points per axis)
//   then 4 * n * n complex coefficients as float64 (re, im) pairs,
//   fields in order ux, uy, Bx, By, each row-major with x fastest and
//   frequency m stored at index m mod n.
// Period, time and viscosity live in the accompanying manifest.
void save_snapshot(const std::string& path, const MhdState& state);
MhdState load_snapshot(const std::string& path, double length, double nu, double t = 0.0);

// Trajectory directory layout: manifest.json, monitors.csv and one
// snap_NNNNNN.pmhd per stored snapshot.
void save_trajectory(const std::string& dir, const Trajectory& traj, const SolverConfig& config);
Trajectory load_trajectory(const std::string& dir);

// Rows of doubles under a header line; values printed with %.17g so
// re-runs are byte-identical.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string report_json(const EstimateReport& report);
void write_reports(const std::string& path, const std::vector<EstimateReport>& reports);

// FNV-1a 64-bit hash (hex string) of a byte buffer; used to fingerprint
// config files in manifests.
std::string fnv1a_hex(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace mhdlab::io

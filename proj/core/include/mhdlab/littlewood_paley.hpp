// Dyadic frequency decomposition: radial cutoffs, blocks, low-pass filters.
#pragma once

#include <cstdint>
#include <vector>

#include "mhdlab/field.hpp"
#include "mhdlab/grid.hpp"

namespace mhdlab {

// Smooth radial partition of unity on dyadic annuli. The low-pass profile
// chi is a C^inf mollified step built from exp(-1/x): identically 1 on
// |xi| <= 3/4, identically 0 on |xi| >= 4/3, radially nonincreasing. The
// shell profile is phi(xi) = chi(xi/2) - chi(xi), supported exactly in
// 3/4 <= |xi| <= 8/3, and telescopes: sum_j phi(2^-j xi) = 1 for xi != 0.
//
// Operators: S_j = chi(2^-j D) (low pass), Delta_j = S_{j+1} - S_j
// (dyadic block). Shell bounds [j_min, j_max] cover every nonzero grid
// mode, so sum_{j_min..j_max} Delta_j f = f - mean(f) exactly.
//
// Multiplier tables are cached per shell at construction; the partition
// is immutable afterwards and safe for concurrent use. Block tables are
// stored as exact differences of low-pass tables so reconstruction
// telescopes exactly in floating point.
class DyadicPartition {
public:
    explicit DyadicPartition(const Grid2D& grid, double smoothness = 1.0);

    const Grid2D& grid() const { return grid_; }
    double smoothness() const { return smoothness_; }
    int j_min() const { return j_min_; }
    int j_max() const { return j_max_; }
    int shell_count() const { return j_max_ - j_min_ + 1; }

    // Radial profiles (exact 0/1 outside their transition bands).
    double chi(double r) const;
    double phi(double r) const { return chi(0.5 * r) - chi(r); }

    // Delta_j f. Shells outside [j_min, j_max] are empty: returns zero.
    SpectralField block(const SpectralField& f, int j) const;
    VectorField2D block(const VectorField2D& v, int j) const;

    // Delta~_j = Delta_{j-1} + Delta_j + Delta_{j+1} (remainder partner).
    SpectralField tilde_block(const SpectralField& f, int j) const;

    // S_j f: mean only for j <= j_min, identity for j >= j_max + 1.
    SpectralField low_pass(const SpectralField& f, int j) const;
    VectorField2D low_pass(const VectorField2D& v, int j) const;

    // L^2 norm of Delta_j f straight from coefficients (no transform).
    double shell_l2(const SpectralField& f, int j) const;

    // Multiplier tables over grid modes (FFT index order); exposed for
    // audits. phi_table(j) is zero-filled outside [j_min, j_max].
    std::vector<double> phi_table(int j) const;
    std::vector<double> chi_table(int j) const;

    // Diagnostics hook: overwrite one phi-table entry (e.g. to check that
    // audits actually detect a broken partition). Not for production use.
    void inject_table_fault(int j, std::size_t mode_index, double value);

private:
    const double* phi_row(int j) const;  // nullptr outside shell range

    Grid2D grid_;
    double smoothness_;
    int j_min_, j_max_;
    std::vector<double> radii_;                   // |k| per mode, FFT order
    std::vector<std::vector<double>> chi_rows_;   // j = j_min .. j_max+1
    std::vector<std::vector<double>> phi_rows_;   // j = j_min .. j_max
};

// Whether Delta_j (S_{k-1} f . Delta_k f) vanishes (<= 1e-10 relative).
// The product is formed alias-free on a doubled grid, so the spectral
// support argument applies exactly; true whenever |j - k| >= 5.
bool support_audit(const DyadicPartition& partition, const SpectralField& f, int j, int k);

// Whole-partition health check used by the verification command.
struct PartitionAudit {
    double partition_residual;    // max |1 - sum_j phi_j(k)| over k != 0
    double reconstruction_error;  // relative, worst over probe fields
    double block_orthogonality;   // max ||Delta_j Delta_k f||, |j-k| >= 2
    double energy_lower;          // min over probes of sum_j ||Delta_j f||^2 / ||f||^2
    double energy_upper;          // max of the same ratio
    bool pass;
};
PartitionAudit run_partition_audit(const DyadicPartition& partition, int probe_fields = 20,
                                   std::uint64_t seed = 1);

}  // namespace mhdlab

#include "mhdlab/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mhdlab/ops.hpp"

namespace mhdlab {

namespace {

// psi(x) = exp(-a/x) for x > 0, else 0: the standard C^inf bump seed.
double psi(double a, double x) { return x > 0.0 ? std::exp(-a / x) : 0.0; }

// Smooth step: 0 for x <= 0, 1 for x >= 1, strictly increasing between.
double smooth_step(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double up = psi(a, x);
    return up / (up + psi(a, 1.0 - x));
}

constexpr double kPlateau = 0.75;  // chi == 1 up to here
constexpr double kCutoff = 4.0 / 3.0;  // chi == 0 from here

}  // namespace

double DyadicPartition::chi(double r) const {
    return 1.0 - smooth_step(smoothness_, (std::abs(r) - kPlateau) / (kCutoff - kPlateau));
}

DyadicPartition::DyadicPartition(const Grid2D& grid, double smoothness)
    : grid_(grid), smoothness_(smoothness) {
    if (!(smoothness > 0.0)) throw std::invalid_argument("DyadicPartition: smoothness must be > 0");

    const int n = grid_.size();
    radii_.resize(grid_.modes());
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            radii_[static_cast<std::size_t>(iy) * n + ix] =
                std::hypot(grid_.wavenumber(ix), grid_.wavenumber(iy));

    // Shell bounds: smallest/largest j for which phi(2^-j |k|) > 0 at some
    // nonzero grid mode. phi > 0 exactly on the open annulus (3/4, 8/3).
    const double k_lo = grid_.min_wavenumber();
    const double k_hi = grid_.max_wavenumber();
    const int j_scan_lo = static_cast<int>(std::floor(std::log2(k_lo / (8.0 / 3.0)))) - 2;
    const int j_scan_hi = static_cast<int>(std::ceil(std::log2(k_hi / kPlateau))) + 2;
    auto shell_active = [&](int j) {
        const double s = std::ldexp(1.0, -j);  // 2^-j
        for (double r : radii_)
            if (r > 0.0 && phi(s * r) > 0.0) return true;
        return false;
    };
    j_min_ = j_scan_hi + 1;
    j_max_ = j_scan_lo - 1;
    for (int j = j_scan_lo; j <= j_scan_hi; ++j) {
        if (!shell_active(j)) continue;
        j_min_ = std::min(j_min_, j);
        j_max_ = std::max(j_max_, j);
    }
    if (j_min_ > j_max_) throw std::runtime_error("DyadicPartition: no active shells");

    // Low-pass tables for j = j_min .. j_max+1; by the defining scan,
    // chi_{j_min} vanishes at every nonzero mode and chi_{j_max+1} == 1.
    chi_rows_.reserve(static_cast<std::size_t>(shell_count()) + 1);
    for (int j = j_min_; j <= j_max_ + 1; ++j) {
        std::vector<double> row(radii_.size());
        const double s = std::ldexp(1.0, -j);
        for (std::size_t i = 0; i < radii_.size(); ++i) row[i] = chi(s * radii_[i]);
        chi_rows_.push_back(std::move(row));
    }

    // Block tables as exact differences, so that telescoping identities
    // (partition of unity, reconstruction) hold to the last bit.
    phi_rows_.reserve(shell_count());
    for (int j = j_min_; j <= j_max_; ++j) {
        const auto& lo = chi_rows_[j - j_min_];
        const auto& hi = chi_rows_[j - j_min_ + 1];
        std::vector<double> row(radii_.size());
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = hi[i] - lo[i];
        phi_rows_.push_back(std::move(row));
    }
}

const double* DyadicPartition::phi_row(int j) const {
    if (j < j_min_ || j > j_max_) return nullptr;
    return phi_rows_[j - j_min_].data();
}

SpectralField DyadicPartition::block(const SpectralField& f, int j) const {
    if (f.grid() != grid_) throw std::invalid_argument("block: field grid mismatch");
    const double* row = phi_row(j);
    if (!row) return SpectralField::zero(grid_);
    std::vector<std::complex<double>> c(f.coeffs());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= row[i];
    return SpectralField::from_coeffs(grid_, std::move(c), f.real_valued());
}

VectorField2D DyadicPartition::block(const VectorField2D& v, int j) const {
    return VectorField2D{block(v.x_comp, j), block(v.y_comp, j), v.divergence_free};
}

SpectralField DyadicPartition::tilde_block(const SpectralField& f, int j) const {
    if (f.grid() != grid_) throw std::invalid_argument("tilde_block: field grid mismatch");
    std::vector<std::complex<double>> c(f.coeffs());
    for (std::size_t i = 0; i < c.size(); ++i) {
        double m = 0.0;
        for (int jj = j - 1; jj <= j + 1; ++jj)
            if (const double* row = phi_row(jj)) m += row[i];
        c[i] *= m;
    }
    return SpectralField::from_coeffs(grid_, std::move(c), f.real_valued());
}

SpectralField DyadicPartition::low_pass(const SpectralField& f, int j) const {
    if (f.grid() != grid_) throw std::invalid_argument("low_pass: field grid mismatch");
    if (j >= j_max_ + 1) return f;  // chi == 1 on the whole grid band
    std::vector<std::complex<double>> c(f.coeffs());
    if (j <= j_min_) {
        // chi(2^-j |k|) = 0 at every nonzero mode; only the mean survives.
        const std::complex<double> mean = c[0];
        std::fill(c.begin(), c.end(), std::complex<double>(0.0));
        c[0] = mean;
    } else {
        const auto& row = chi_rows_[j - j_min_];
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= row[i];
    }
    return SpectralField::from_coeffs(grid_, std::move(c), f.real_valued());
}

VectorField2D DyadicPartition::low_pass(const VectorField2D& v, int j) const {
    return VectorField2D{low_pass(v.x_comp, j), low_pass(v.y_comp, j), v.divergence_free};
}

double DyadicPartition::shell_l2(const SpectralField& f, int j) const {
    if (f.grid() != grid_) throw std::invalid_argument("shell_l2: field grid mismatch");
    const double* row = phi_row(j);
    if (!row) return 0.0;
    const auto& c = f.coeffs();
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) acc += row[i] * row[i] * std::norm(c[i]);
    return grid_.length() * std::sqrt(acc);
}

std::vector<double> DyadicPartition::phi_table(int j) const {
    if (phi_row(j) != nullptr) return phi_rows_[j - j_min_];
    return std::vector<double>(radii_.size(), 0.0);
}

std::vector<double> DyadicPartition::chi_table(int j) const {
    if (j >= j_max_ + 1) return std::vector<double>(radii_.size(), 1.0);
    if (j <= j_min_) {
        std::vector<double> row(radii_.size(), 0.0);
        row[0] = 1.0;  // chi(0) = 1 always
        return row;
    }
    return chi_rows_[j - j_min_];
}

void DyadicPartition::inject_table_fault(int j, std::size_t mode_index, double value) {
    if (j < j_min_ || j > j_max_) throw std::out_of_range("inject_table_fault: shell out of range");
    if (mode_index >= radii_.size()) throw std::out_of_range("inject_table_fault: mode out of range");
    phi_rows_[j - j_min_][mode_index] = value;
}

bool support_audit(const DyadicPartition& partition, const SpectralField& f, int j, int k) {
    const SpectralField low = partition.low_pass(f, k - 1);
    const SpectralField mid = partition.block(f, k);

    // Alias-free product: embed both factors into a doubled grid, where
    // every product frequency is representable, and multiply there.
    const Grid2D& g = partition.grid();
    const Grid2D fine(2 * g.size(), g.length());
    const DyadicPartition fine_partition(fine, partition.smoothness());
    const SpectralField prod = multiply(embed(low, fine), embed(mid, fine));

    const double whole = l2_norm(prod);
    if (whole == 0.0) return true;
    return l2_norm(fine_partition.block(prod, j)) <= 1e-10 * whole;
}

PartitionAudit run_partition_audit(const DyadicPartition& partition, int probe_fields,
                                   std::uint64_t seed) {
    const Grid2D& g = partition.grid();
    PartitionAudit audit{};

    // Partition of unity over every nonzero grid frequency.
    std::vector<double> total(g.modes(), 0.0);
    for (int j = partition.j_min(); j <= partition.j_max(); ++j) {
        const auto row = partition.phi_table(j);
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += row[i];
    }
    double residual = 0.0;
    for (std::size_t i = 1; i < total.size(); ++i)
        residual = std::max(residual, std::abs(1.0 - total[i]));
    audit.partition_residual = residual;

    double worst_recon = 0.0, worst_orth = 0.0;
    double energy_lo = 1e300, energy_hi = 0.0;
    // A corrupted table can make block() reject its own output; report
    // that as a failed audit rather than letting the exception escape.
    try {
        for (int p = 0; p < probe_fields; ++p) {
            const SpectralField f = zero_mean(random_real_field(g, seed + p));
            const double whole = l2_norm(f);

            SpectralField sum = SpectralField::zero(g);
            double energy = 0.0;
            for (int j = partition.j_min(); j <= partition.j_max(); ++j) {
                const SpectralField bj = partition.block(f, j);
                sum = add(sum, bj);
                const double bl2 = l2_norm(bj);
                energy += bl2 * bl2;
            }
            worst_recon = std::max(worst_recon, l2_norm(subtract(sum, f)) / whole);
            energy_lo = std::min(energy_lo, energy / (whole * whole));
            energy_hi = std::max(energy_hi, energy / (whole * whole));

            // Almost-orthogonality at separation >= 2 (probe a few pairs).
            for (int j = partition.j_min(); j <= partition.j_max(); ++j)
                for (int k = j + 2; k <= std::min(j + 3, partition.j_max()); ++k)
                    worst_orth = std::max(worst_orth,
                                          l2_norm(partition.block(partition.block(f, j), k)));
        }
    } catch (const std::exception&) {
        worst_recon = std::numeric_limits<double>::infinity();
    }
    audit.reconstruction_error = worst_recon;
    audit.block_orthogonality = worst_orth;
    audit.energy_lower = energy_lo;
    audit.energy_upper = energy_hi;
    audit.pass = residual <= 1e-12 && worst_recon <= 1e-10 && worst_orth <= 1e-12 &&
                 energy_lo >= 0.5 && energy_hi <= 1.5;
    return audit;
}

}  // namespace mhdlab

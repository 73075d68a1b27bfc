// Scalar and vector fields on the periodic grid, stored spectrally.
#pragma once

#include <complex>
#include <vector>

#include "mhdlab/grid.hpp"

namespace mhdlab {

// A scalar field stored as Fourier coefficients c(k) with
// f(x) = sum_k c(k) exp(i k.x). Immutable after construction; all
// operations on fields are pure, so concurrent reads are safe.
class SpectralField {
public:
    // Construct from coefficients in FFT index order (row-major, y outer,
    // frequency m at index m mod n). If real_valued, conjugate symmetry
    // is verified to ~1e-12 and enforced exactly.
    static SpectralField from_coeffs(const Grid2D& grid,
                                     std::vector<std::complex<double>> coeffs,
                                     bool real_valued = true);

    // Construct from real physical samples (row-major, x fastest).
    static SpectralField from_physical(const Grid2D& grid, const std::vector<double>& samples);

    static SpectralField zero(const Grid2D& grid);

    const Grid2D& grid() const { return grid_; }
    const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }
    bool real_valued() const { return real_valued_; }

    // Coefficient at integer frequency (mx, my), each in [-n/2, n/2).
    std::complex<double> coeff(int mx, int my) const;

    std::complex<double> mean() const { return coeffs_[0]; }

    // Physical samples; imaginary parts are discarded for real fields.
    std::vector<double> to_physical() const;
    std::vector<std::complex<double>> to_physical_complex() const;

private:
    SpectralField(const Grid2D& grid, std::vector<std::complex<double>> coeffs, bool real_valued)
        : grid_(grid), coeffs_(std::move(coeffs)), real_valued_(real_valued) {}

    Grid2D grid_;
    std::vector<std::complex<double>> coeffs_;
    bool real_valued_;
};

// A velocity- or magnetic-type field with two scalar components.
struct VectorField2D {
    SpectralField x_comp;
    SpectralField y_comp;
    bool divergence_free = false;

    const Grid2D& grid() const { return x_comp.grid(); }
};

}  // namespace mhdlab

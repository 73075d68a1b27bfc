#include "mhdlab/field.hpp"

#include <cmath>
#include <stdexcept>

#include "mhdlab/transforms.hpp"

namespace mhdlab {

namespace {

// Verify c(-k) = conj(c(k)) and symmetrize exactly so later arithmetic
// cannot drift a real field into the complex plane.
void enforce_conjugate_symmetry(const Grid2D& g, std::vector<std::complex<double>>& c) {
    const int n = g.size();
    double max_mag = 0.0;
    for (const auto& v : c) max_mag = std::max(max_mag, std::abs(v));
    const double tol = 1e-12 * std::max(1.0, max_mag);

    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int mx = g.freq(ix), my = g.freq(iy);
            // Nyquist rows pair with themselves; -n/2 has no +n/2 partner.
            const int jx = g.index_of(mx == -n / 2 ? -n / 2 : -mx);
            const int jy = g.index_of(my == -n / 2 ? -n / 2 : -my);
            const std::size_t a = static_cast<std::size_t>(iy) * n + ix;
            const std::size_t b = static_cast<std::size_t>(jy) * n + jx;
            if (b < a) continue;
            const std::complex<double> want = std::conj(c[b]);
            if (std::abs(c[a] - want) > tol)
                throw std::invalid_argument("SpectralField: conjugate symmetry violated");
            if (a == b) {
                c[a] = std::complex<double>(c[a].real(), 0.0);
            } else {
                const std::complex<double> avg = 0.5 * (c[a] + want);
                c[a] = avg;
                c[b] = std::conj(avg);
            }
        }
    }
}

}  // namespace

SpectralField SpectralField::from_coeffs(const Grid2D& grid,
                                         std::vector<std::complex<double>> coeffs,
                                         bool real_valued) {
    if (coeffs.size() != grid.modes())
        throw std::invalid_argument("SpectralField: coefficient count does not match grid");
    for (const auto& v : coeffs)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("SpectralField: non-finite coefficient");
    if (real_valued) enforce_conjugate_symmetry(grid, coeffs);
    return SpectralField(grid, std::move(coeffs), real_valued);
}

SpectralField SpectralField::from_physical(const Grid2D& grid, const std::vector<double>& samples) {
    if (samples.size() != grid.modes())
        throw std::invalid_argument("SpectralField: sample count does not match grid");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("SpectralField: non-finite sample");
    auto coeffs = fft::forward_real(grid, samples);
    return from_coeffs(grid, std::move(coeffs), true);
}

SpectralField SpectralField::zero(const Grid2D& grid) {
    return SpectralField(grid, std::vector<std::complex<double>>(grid.modes()), true);
}

std::complex<double> SpectralField::coeff(int mx, int my) const {
    const int n = grid_.size();
    if (mx < -n / 2 || mx >= n / 2 || my < -n / 2 || my >= n / 2)
        throw std::out_of_range("SpectralField::coeff: frequency outside grid");
    return coeffs_[static_cast<std::size_t>(grid_.index_of(my)) * n + grid_.index_of(mx)];
}

std::vector<double> SpectralField::to_physical() const {
    return fft::inverse_real(grid_, coeffs_);
}

std::vector<std::complex<double>> SpectralField::to_physical_complex() const {
    return fft::inverse(grid_, coeffs_);
}

}  // namespace mhdlab

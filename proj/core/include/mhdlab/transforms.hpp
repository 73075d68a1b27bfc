// Deterministic FFT layer over FFTW (plan caching, fixed normalization).
#pragma once

#include <complex>
#include <vector>

#include "mhdlab/grid.hpp"

namespace mhdlab::fft {

// Forward transform: physical samples -> Fourier coefficients c(k) such
// that f(x) = sum_k c(k) exp(i k.x). Scaled by 1/n^2.
std::vector<std::complex<double>> forward(const Grid2D& grid,
                                          const std::vector<std::complex<double>>& physical);

// Inverse transform: coefficients -> physical samples (plain sum, no scaling).
std::vector<std::complex<double>> inverse(const Grid2D& grid,
                                          const std::vector<std::complex<double>>& coeffs);

// Convenience for real-valued samples.
std::vector<std::complex<double>> forward_real(const Grid2D& grid,
                                               const std::vector<double>& physical);

// Inverse transform discarding imaginary parts (caller asserts real symmetry).
std::vector<double> inverse_real(const Grid2D& grid,
                                 const std::vector<std::complex<double>>& coeffs);

// Plans are cached per grid size and created under a mutex with
// FFTW_ESTIMATE so planning never touches caller data and repeated runs
// are bit-for-bit reproducible. Exposed for tests.
void clear_plan_cache();

}  // namespace mhdlab::fft

// Spectral calculus, norms, products and field utilities.
#pragma once

#include <cstdint>
#include <vector>

#include "mhdlab/field.hpp"

namespace mhdlab {

enum class Axis { x, y };

// --- linear spectral operators -------------------------------------------

// d^order/d(axis)^order: multiplies coefficients by (i k_axis)^order.
// The unpaired Nyquist mode is zeroed for odd orders.
SpectralField spectral_derivative(const SpectralField& f, Axis axis, int order);

// (-Δ)^alpha: multiplies coefficients by |k|^{2 alpha}; the k=0 mode maps
// to 0 for alpha > 0 and is left untouched for alpha = 0.
SpectralField fractional_laplacian(const SpectralField& f, double alpha);

// v - ∇Δ⁻¹(div v): kills the gradient part mode by mode (k=0 untouched).
// Idempotent; output is flagged divergence_free.
VectorField2D leray_project(const VectorField2D& v);

// max_k |k.v̂(k)| relative to the spectral l2 size of v (0 for v = 0).
double divergence_residual(const VectorField2D& v);

SpectralField zero_mean(const SpectralField& f);
SpectralField transform_roundtrip(const SpectralField& f);

// --- norms -----------------------------------------------------------------

// L^p norm by uniform-grid quadrature ((L/n)^2 node weight); p = inf is the
// grid max. For p = 2 the result is cross-checked against Plancherel and a
// disagreement beyond 1e-10 (relative) throws. Requires a real-valued field.
double lp_norm(const SpectralField& f, double p);
constexpr double kInfNorm = -1.0;  // sentinel accepted by lp_norm for L^inf

// Spectral L^2 norm: L * sqrt(sum |c(k)|^2). Fast path, no transform.
double l2_norm(const SpectralField& f);

double sup_abs(const SpectralField& f);                  // grid max of |f|
double sup_abs(const VectorField2D& v);                  // grid max of |(vx,vy)|

// --- products ---------------------------------------------------------------

SpectralField add(const SpectralField& a, const SpectralField& b);
SpectralField subtract(const SpectralField& a, const SpectralField& b);
SpectralField scale(const SpectralField& f, double factor);
VectorField2D add(const VectorField2D& a, const VectorField2D& b);
VectorField2D subtract(const VectorField2D& a, const VectorField2D& b);
VectorField2D scale(const VectorField2D& v, double factor);

// Projection onto integer frequencies |m| <= n/3 per axis (2/3 rule).
SpectralField dealias(const SpectralField& f);

// Plain pointwise physical product (aliased for generic inputs).
SpectralField multiply(const SpectralField& f, const SpectralField& g);

// P(Pf . Pg) with P the 2/3-rule projection: exact on the retained band,
// since alias images of retained-mode products fall outside it.
SpectralField dealiased_product(const SpectralField& f, const SpectralField& g);

// u.∇f with dealiased products.
SpectralField advect(const VectorField2D& u, const SpectralField& f);

// --- construction utilities --------------------------------------------------

// Seeded white-noise real field (unit-variance iid physical samples). Uses a
// fixed Box-Muller over mt19937_64 so every platform draws identical fields.
SpectralField random_real_field(const Grid2D& grid, std::uint64_t seed);

// Copy coefficients into a finer grid (same period, larger n) by integer
// frequency; exact for band-limited data. Refinement studies only.
SpectralField embed(const SpectralField& f, const Grid2D& finer);
VectorField2D embed(const VectorField2D& v, const Grid2D& finer);

}  // namespace mhdlab

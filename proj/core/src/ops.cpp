#include "mhdlab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>

#include "mhdlab/transforms.hpp"

namespace mhdlab {

namespace {

void require_same_grid(const Grid2D& a, const Grid2D& b) {
    if (a != b) throw std::invalid_argument("fields live on different grids");
}

}  // namespace

SpectralField spectral_derivative(const SpectralField& f, Axis axis, int order) {
    if (order < 0) throw std::invalid_argument("spectral_derivative: order must be >= 0");
    if (order == 0) return f;
    const Grid2D& g = f.grid();
    const int n = g.size();
    const bool kill_nyquist = (order % 2) == 1;
    std::vector<std::complex<double>> c(f.coeffs());
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int m = (axis == Axis::x) ? g.freq(ix) : g.freq(iy);
            auto& v = c[static_cast<std::size_t>(iy) * n + ix];
            if (kill_nyquist && m == -n / 2) {
                v = 0.0;
                continue;
            }
            const std::complex<double> ik(0.0, m * g.k_unit());
            std::complex<double> mult(1.0, 0.0);
            for (int r = 0; r < order; ++r) mult *= ik;
            v *= mult;
        }
    }
    return SpectralField::from_coeffs(g, std::move(c), f.real_valued());
}

SpectralField fractional_laplacian(const SpectralField& f, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("fractional_laplacian: alpha must be >= 0");
    if (alpha == 0.0) return f;
    const Grid2D& g = f.grid();
    const int n = g.size();
    std::vector<std::complex<double>> c(f.coeffs());
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double kx = g.wavenumber(ix), ky = g.wavenumber(iy);
            const double k2 = kx * kx + ky * ky;
            c[static_cast<std::size_t>(iy) * n + ix] *= std::pow(k2, alpha);
        }
    }
    return SpectralField::from_coeffs(g, std::move(c), f.real_valued());
}

VectorField2D leray_project(const VectorField2D& v) {
    require_same_grid(v.x_comp.grid(), v.y_comp.grid());
    const Grid2D& g = v.grid();
    const int n = g.size();
    std::vector<std::complex<double>> cx(v.x_comp.coeffs());
    std::vector<std::complex<double>> cy(v.y_comp.coeffs());
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            if (ix == 0 && iy == 0) continue;
            const std::size_t i = static_cast<std::size_t>(iy) * n + ix;
            // The Nyquist frequency has no consistent sign, so k (x) k is
            // ambiguous there; annihilate those modes instead.
            if (ix == n / 2 || iy == n / 2) {
                cx[i] = 0.0;
                cy[i] = 0.0;
                continue;
            }
            const double kx = g.wavenumber(ix), ky = g.wavenumber(iy);
            const double k2 = kx * kx + ky * ky;
            const std::complex<double> kv = (kx * cx[i] + ky * cy[i]) / k2;
            cx[i] -= kx * kv;
            cy[i] -= ky * kv;
        }
    }
    const bool real = v.x_comp.real_valued() && v.y_comp.real_valued();
    return VectorField2D{SpectralField::from_coeffs(g, std::move(cx), real),
                         SpectralField::from_coeffs(g, std::move(cy), real),
                         /*divergence_free=*/true};
}

double divergence_residual(const VectorField2D& v) {
    require_same_grid(v.x_comp.grid(), v.y_comp.grid());
    const Grid2D& g = v.grid();
    const int n = g.size();
    const auto& cx = v.x_comp.coeffs();
    const auto& cy = v.y_comp.coeffs();
    double max_div = 0.0, sum2 = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double kx = g.wavenumber(ix), ky = g.wavenumber(iy);
            const std::size_t i = static_cast<std::size_t>(iy) * n + ix;
            max_div = std::max(max_div, std::abs(kx * cx[i] + ky * cy[i]));
            sum2 += std::norm(cx[i]) + std::norm(cy[i]);
        }
    }
    const double size = std::sqrt(sum2);
    if (size == 0.0) return 0.0;
    return max_div / size;
}

SpectralField zero_mean(const SpectralField& f) {
    std::vector<std::complex<double>> c(f.coeffs());
    c[0] = 0.0;
    return SpectralField::from_coeffs(f.grid(), std::move(c), f.real_valued());
}

SpectralField transform_roundtrip(const SpectralField& f) {
    if (f.real_valued()) return SpectralField::from_physical(f.grid(), f.to_physical());
    return SpectralField::from_coeffs(f.grid(), fft::forward(f.grid(), f.to_physical_complex()),
                                      false);
}

double lp_norm(const SpectralField& f, double p) {
    if (!f.real_valued()) throw std::invalid_argument("lp_norm: field must be real-valued");
    const std::vector<double> phys = f.to_physical();
    if (p == kInfNorm || std::isinf(p)) {
        double m = 0.0;
        for (double v : phys) m = std::max(m, std::abs(v));
        return m;
    }
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    const double w = f.grid().cell_area();
    double acc = 0.0;
    if (p == 2.0) {
        for (double v : phys) acc += v * v;
        const double quad2 = w * acc;
        // Plancherel cross-check: L^2 sum of |c|^2 must match the quadrature.
        const double spec = l2_norm(f);
        const double spec2 = spec * spec;
        const double denom = std::max(quad2, spec2);
        if (denom > 0.0 && std::abs(quad2 - spec2) > 1e-10 * denom)
            throw std::runtime_error("lp_norm: Plancherel cross-check failed");
        return std::sqrt(quad2);
    }
    if (p == 1.0) {
        for (double v : phys) acc += std::abs(v);
    } else {
        for (double v : phys) acc += std::pow(std::abs(v), p);
    }
    return std::pow(w * acc, 1.0 / p);
}

double l2_norm(const SpectralField& f) {
    double acc = 0.0;
    for (const auto& v : f.coeffs()) acc += std::norm(v);
    return f.grid().length() * std::sqrt(acc);
}

double sup_abs(const SpectralField& f) {
    double m = 0.0;
    for (double v : f.to_physical()) m = std::max(m, std::abs(v));
    return m;
}

double sup_abs(const VectorField2D& v) {
    const auto px = v.x_comp.to_physical();
    const auto py = v.y_comp.to_physical();
    double m = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) m = std::max(m, std::hypot(px[i], py[i]));
    return m;
}

namespace {

SpectralField combine(const SpectralField& a, const SpectralField& b, double sb) {
    require_same_grid(a.grid(), b.grid());
    std::vector<std::complex<double>> c(a.coeffs());
    const auto& cb = b.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += sb * cb[i];
    return SpectralField::from_coeffs(a.grid(), std::move(c),
                                      a.real_valued() && b.real_valued());
}

}  // namespace

SpectralField add(const SpectralField& a, const SpectralField& b) { return combine(a, b, 1.0); }
SpectralField subtract(const SpectralField& a, const SpectralField& b) {
    return combine(a, b, -1.0);
}

SpectralField scale(const SpectralField& f, double factor) {
    std::vector<std::complex<double>> c(f.coeffs());
    for (auto& v : c) v *= factor;
    return SpectralField::from_coeffs(f.grid(), std::move(c), f.real_valued());
}

VectorField2D add(const VectorField2D& a, const VectorField2D& b) {
    return VectorField2D{add(a.x_comp, b.x_comp), add(a.y_comp, b.y_comp),
                         a.divergence_free && b.divergence_free};
}

VectorField2D subtract(const VectorField2D& a, const VectorField2D& b) {
    return VectorField2D{subtract(a.x_comp, b.x_comp), subtract(a.y_comp, b.y_comp),
                         a.divergence_free && b.divergence_free};
}

VectorField2D scale(const VectorField2D& v, double factor) {
    return VectorField2D{scale(v.x_comp, factor), scale(v.y_comp, factor), v.divergence_free};
}

SpectralField dealias(const SpectralField& f) {
    const Grid2D& g = f.grid();
    const int n = g.size();
    const int cut = g.dealias_cutoff();
    std::vector<std::complex<double>> c(f.coeffs());
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            if (std::abs(g.freq(ix)) > cut || std::abs(g.freq(iy)) > cut)
                c[static_cast<std::size_t>(iy) * n + ix] = 0.0;
        }
    }
    return SpectralField::from_coeffs(g, std::move(c), f.real_valued());
}

SpectralField multiply(const SpectralField& f, const SpectralField& g) {
    require_same_grid(f.grid(), g.grid());
    if (!f.real_valued() || !g.real_valued())
        throw std::invalid_argument("multiply: fields must be real-valued");
    const auto pf = f.to_physical();
    const auto pg = g.to_physical();
    std::vector<double> prod(pf.size());
    for (std::size_t i = 0; i < pf.size(); ++i) prod[i] = pf[i] * pg[i];
    return SpectralField::from_physical(f.grid(), prod);
}

SpectralField dealiased_product(const SpectralField& f, const SpectralField& g) {
    return dealias(multiply(dealias(f), dealias(g)));
}

SpectralField advect(const VectorField2D& u, const SpectralField& f) {
    require_same_grid(u.grid(), f.grid());
    const SpectralField fx = spectral_derivative(f, Axis::x, 1);
    const SpectralField fy = spectral_derivative(f, Axis::y, 1);
    return add(dealiased_product(u.x_comp, fx), dealiased_product(u.y_comp, fy));
}

SpectralField random_real_field(const Grid2D& grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    // Hand-rolled Box-Muller: std::normal_distribution's stream is
    // implementation-defined, and identical draws across toolchains matter.
    auto uniform = [&rng]() {
        return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    };
    std::vector<double> samples(grid.modes());
    for (std::size_t i = 0; i < samples.size(); i += 2) {
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        samples[i] = r * std::cos(2.0 * std::numbers::pi * u2);
        if (i + 1 < samples.size()) samples[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
    }
    return SpectralField::from_physical(grid, samples);
}

SpectralField embed(const SpectralField& f, const Grid2D& finer) {
    const Grid2D& g = f.grid();
    if (finer.length() != g.length())
        throw std::invalid_argument("embed: grids must share the same period");
    if (finer.size() < g.size())
        throw std::invalid_argument("embed: target grid must not be coarser");
    if (finer.size() == g.size()) return f;
    const int n = g.size();
    // The coarse Nyquist frequency -n/2 is split half-and-half between the
    // fine frequencies -n/2 and +n/2 so real fields stay conjugate symmetric.
    auto split = [n](int m) -> std::vector<std::pair<int, double>> {
        if (m == -n / 2) return {{-n / 2, 0.5}, {n / 2, 0.5}};
        return {{m, 1.0}};
    };
    std::vector<std::complex<double>> c(finer.modes());
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const auto v = f.coeffs()[static_cast<std::size_t>(iy) * n + ix];
            for (const auto& [my, wy] : split(g.freq(iy)))
                for (const auto& [mx, wx] : split(g.freq(ix)))
                    c[static_cast<std::size_t>(finer.index_of(my)) * finer.size() +
                      finer.index_of(mx)] += wy * wx * v;
        }
    }
    return SpectralField::from_coeffs(finer, std::move(c), f.real_valued());
}

VectorField2D embed(const VectorField2D& v, const Grid2D& finer) {
    return VectorField2D{embed(v.x_comp, finer), embed(v.y_comp, finer), v.divergence_free};
}

}  // namespace mhdlab

// Spectral calculus against finite-difference and convolution oracles.

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mhdlab/ops.hpp"

using namespace mhdlab;

namespace {

const double kPi = std::numbers::pi;

std::vector<double> sampled(const Grid2D& g, double (*f)(double, double)) {
    std::vector<double> out(g.modes());
    for (int y = 0; y < g.size(); ++y)
        for (int x = 0; x < g.size(); ++x)
            out[static_cast<std::size_t>(y) * g.size() + x] = f(x * g.spacing(), y * g.spacing());
    return out;
}

// Centered second-order difference along x on periodic samples.
std::vector<double> fd_x(const Grid2D& g, const std::vector<double>& f) {
    const int n = g.size();
    const double h = g.spacing();
    std::vector<double> out(f.size());
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const int xp = (x + 1) % n, xm = (x + n - 1) % n;
            out[static_cast<std::size_t>(y) * n + x] =
                (f[static_cast<std::size_t>(y) * n + xp] -
                 f[static_cast<std::size_t>(y) * n + xm]) /
                (2.0 * h);
        }
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_SUITE("ops") {

TEST_CASE("derivative of a single mode is exact") {
    const Grid2D g(32, 2.0 * kPi);
    const SpectralField f = SpectralField::from_physical(
        g, sampled(g, [](double x, double y) { return std::cos(3.0 * x - y); }));
    const SpectralField dx = spectral_derivative(f, Axis::x, 1);
    // d/dx cos(3x - y) = -3 sin(3x - y)
    const auto expect = sampled(g, [](double x, double y) { return -3.0 * std::sin(3.0 * x - y); });
    CHECK(max_abs_diff(dx.to_physical(), expect) < 1e-13);
}

TEST_CASE("finite differences converge to the spectral derivative at order 2") {
    // keep kh small on both grids so the leading h^2 term dominates the
    // centered-difference error and the refinement ratio is close to 4
    const Grid2D band(16, 2.0 * kPi);  // modes |m| <= 8
    const Grid2D coarse(128, 2.0 * kPi);
    const Grid2D fine(256, 2.0 * kPi);
    const SpectralField f = zero_mean(random_real_field(band, 42));

    const SpectralField f_c = embed(f, coarse);
    const SpectralField f_f = embed(f, fine);
    const double err_c =
        max_abs_diff(fd_x(coarse, f_c.to_physical()),
                     spectral_derivative(f_c, Axis::x, 1).to_physical());
    const double err_f =
        max_abs_diff(fd_x(fine, f_f.to_physical()),
                     spectral_derivative(f_f, Axis::x, 1).to_physical());
    CHECK(err_c / err_f == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("second derivatives assemble the laplacian") {
    const Grid2D g(32, 2.0 * kPi);
    const SpectralField f = zero_mean(random_real_field(g, 7));
    const SpectralField lap =
        add(spectral_derivative(f, Axis::x, 2), spectral_derivative(f, Axis::y, 2));
    const SpectralField frac = fractional_laplacian(f, 1.0);  // (-Lap)^1
    const auto& a = lap.coeffs();
    const auto& b = frac.coeffs();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] + b[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("half laplacians compose") {
    const Grid2D g(16, 2.0 * kPi);
    const SpectralField f = zero_mean(random_real_field(g, 9));
    const SpectralField twice = fractional_laplacian(fractional_laplacian(f, 0.5), 0.5);
    const SpectralField once = fractional_laplacian(f, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < once.coeffs().size(); ++i)
        worst = std::max(worst, std::abs(twice.coeffs()[i] - once.coeffs()[i]));
    CHECK(worst < 1e-12 * l2_norm(once));
    // alpha = 0 is the identity, bit for bit
    const SpectralField same = fractional_laplacian(f, 0.0);
    for (std::size_t i = 0; i < f.coeffs().size(); ++i) CHECK(same.coeffs()[i] == f.coeffs()[i]);
}

TEST_CASE("leray projection kills gradients and fixes solenoidal fields") {
    const Grid2D g(16, 2.0 * kPi);
    const SpectralField psi = dealias(zero_mean(random_real_field(g, 3)));

    // gradient part projects to zero
    const VectorField2D grad{spectral_derivative(psi, Axis::x, 1),
                             spectral_derivative(psi, Axis::y, 1), false};
    const VectorField2D pg = leray_project(grad);
    CHECK(l2_norm(pg.x_comp) < 1e-13 * l2_norm(grad.x_comp));
    CHECK(l2_norm(pg.y_comp) < 1e-13 * l2_norm(grad.x_comp));

    // curl form is untouched
    const VectorField2D curl{scale(spectral_derivative(psi, Axis::y, 1), -1.0),
                             spectral_derivative(psi, Axis::x, 1), false};
    const VectorField2D pc = leray_project(curl);
    CHECK(l2_norm(subtract(pc.x_comp, curl.x_comp)) < 1e-13 * l2_norm(curl.x_comp));
    CHECK(l2_norm(subtract(pc.y_comp, curl.y_comp)) < 1e-13 * l2_norm(curl.y_comp));
    CHECK(pc.divergence_free);
}

TEST_CASE("leray projection is idempotent and annihilates divergence") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Grid2D g(32, 2.0 * kPi);
        VectorField2D v{random_real_field(g, seed), random_real_field(g, seed + 100), false};
        const VectorField2D p1 = leray_project(v);
        const VectorField2D p2 = leray_project(p1);
        CHECK(divergence_residual(p1) < 1e-13);
        const double ref = l2_norm(p1.x_comp) + l2_norm(p1.y_comp);
        CHECK(l2_norm(subtract(p2.x_comp, p1.x_comp)) < 1e-12 * ref);
        CHECK(l2_norm(subtract(p2.y_comp, p1.y_comp)) < 1e-12 * ref);
        // Nyquist rows are annihilated
        CHECK(std::abs(p1.x_comp.coeff(-16, 3)) == 0.0);
        CHECK(std::abs(p1.y_comp.coeff(5, -16)) == 0.0);
    }
}

TEST_CASE("dealias zeroes only the outer band") {
    const Grid2D g(16, 2.0 * kPi);
    const SpectralField f = random_real_field(g, 4);
    const SpectralField d = dealias(f);
    const int cutoff = g.dealias_cutoff();
    CHECK(cutoff == 5);
    for (int my = -8; my < 8; ++my)
        for (int mx = -8; mx < 8; ++mx) {
            if (std::abs(mx) <= cutoff && std::abs(my) <= cutoff)
                CHECK(d.coeff(mx, my) == f.coeff(mx, my));
            else
                CHECK(std::abs(d.coeff(mx, my)) == 0.0);
        }
}

TEST_CASE("dealiased product matches the convolution oracle") {
    const Grid2D g(16, 2.0 * kPi);
    const SpectralField f = dealias(random_real_field(g, 5));
    const SpectralField h = dealias(random_real_field(g, 6));
    const SpectralField prod = dealiased_product(f, h);
    const int cutoff = g.dealias_cutoff();
    for (int my = -cutoff; my <= cutoff; ++my)
        for (int mx = -cutoff; mx <= cutoff; ++mx) {
            std::complex<double> conv = 0.0;
            for (int by = -cutoff; by <= cutoff; ++by)
                for (int bx = -cutoff; bx <= cutoff; ++bx) {
                    const int ax = mx - bx, ay = my - by;
                    if (std::abs(ax) > cutoff || std::abs(ay) > cutoff) continue;
                    conv += f.coeff(ax, ay) * h.coeff(bx, by);
                }
            CHECK(std::abs(prod.coeff(mx, my) - conv) < 1e-14);
        }
}

TEST_CASE("pointwise product matches physical samples") {
    const Grid2D g(32, 2.0 * kPi);
    const SpectralField f = random_real_field(g, 8);
    const SpectralField h = random_real_field(g, 9);
    const auto pf = f.to_physical();
    const auto ph = h.to_physical();
    const auto prod = multiply(f, h).to_physical();
    for (std::size_t i = 0; i < prod.size(); ++i)
        CHECK(prod[i] == doctest::Approx(pf[i] * ph[i]).epsilon(1e-12));
}

TEST_CASE("advection of analytic fields") {
    const Grid2D g(16, 2.0 * kPi);
    const SpectralField ux = SpectralField::from_physical(
        g, sampled(g, [](double, double y) { return std::sin(y); }));
    const SpectralField uy = SpectralField::from_physical(
        g, sampled(g, [](double x, double) { return std::cos(x); }));
    const SpectralField f = SpectralField::from_physical(
        g, sampled(g, [](double x, double) { return std::cos(x); }));
    // u.grad f = sin(y)(-sin x) + cos(x) * 0 = -sin(x) sin(y)
    const SpectralField a = advect(VectorField2D{ux, uy, false}, f);
    CHECK(std::abs(a.coeff(1, 1) - 0.25) < 1e-15);
    CHECK(std::abs(a.coeff(-1, -1) - 0.25) < 1e-15);
    CHECK(std::abs(a.coeff(1, -1) + 0.25) < 1e-15);
    CHECK(std::abs(a.coeff(-1, 1) + 0.25) < 1e-15);
    CHECK(std::abs(a.mean()) < 1e-16);
}

TEST_CASE("embedding preserves band-limited data exactly") {
    const Grid2D coarse(16, 2.0 * kPi);
    const Grid2D fine(32, 2.0 * kPi);
    const SpectralField f = dealias(random_real_field(coarse, 10));
    const SpectralField e = embed(f, fine);
    CHECK(l2_norm(e) == doctest::Approx(l2_norm(f)).epsilon(1e-15));
    for (int my = -5; my <= 5; ++my)
        for (int mx = -5; mx <= 5; ++mx) CHECK(e.coeff(mx, my) == f.coeff(mx, my));
    CHECK(std::abs(e.coeff(9, 0)) == 0.0);
}

TEST_CASE("embedding a full-spectrum field keeps grid samples") {
    const Grid2D coarse(8, 2.0 * kPi);
    const Grid2D fine(16, 2.0 * kPi);
    const SpectralField f = random_real_field(coarse, 11);  // occupied Nyquist
    const SpectralField e = embed(f, fine);
    const auto pc = f.to_physical();
    const auto pf = e.to_physical();
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            CHECK(pf[static_cast<std::size_t>(2 * y) * 16 + 2 * x] ==
                  doctest::Approx(pc[static_cast<std::size_t>(y) * 8 + x]).epsilon(1e-12));
    CHECK_THROWS_AS(embed(e, coarse), std::invalid_argument);  // no coarsening
}

TEST_CASE("norm closed forms") {
    const Grid2D g(64, 2.0 * kPi);
    const SpectralField one =
        SpectralField::from_physical(g, std::vector<double>(g.modes(), 1.0));
    CHECK(lp_norm(one, 2.0) == doctest::Approx(2.0 * kPi).epsilon(1e-13));
    CHECK(lp_norm(one, kInfNorm) == doctest::Approx(1.0).epsilon(1e-13));

    const SpectralField sine =
        SpectralField::from_physical(g, sampled(g, [](double x, double) { return std::sin(x); }));
    CHECK(lp_norm(sine, 2.0) == doctest::Approx(kPi * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(l2_norm(sine) == doctest::Approx(kPi * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(sup_abs(sine) == doctest::Approx(1.0).epsilon(1e-12));

    // smooth positive integrand: quadrature of a trig polynomial is exact
    const SpectralField pos = SpectralField::from_physical(
        g, sampled(g, [](double x, double) { return 2.0 + std::cos(x); }));
    CHECK(lp_norm(pos, 1.0) == doctest::Approx(8.0 * kPi * kPi).epsilon(1e-13));

    CHECK_THROWS_AS(lp_norm(pos, 0.5), std::invalid_argument);
}

TEST_CASE("plancherel cross-check runs clean on random fields") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Grid2D g(32, 2.0 * kPi);
        const SpectralField f = random_real_field(g, seed);
        CHECK(lp_norm(f, 2.0) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
    }
}

TEST_CASE("vector sup combines components") {
    const Grid2D g(16, 2.0 * kPi);
    const SpectralField a = SpectralField::from_physical(
        g, sampled(g, [](double x, double) { return 3.0 * std::cos(x); }));
    const SpectralField b = SpectralField::from_physical(
        g, sampled(g, [](double x, double) { return 4.0 * std::cos(x); }));
    CHECK(sup_abs(VectorField2D{a, b, false}) == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("zero_mean clears exactly the mean") {
    const Grid2D g(16, 2.0 * kPi);
    const SpectralField f = random_real_field(g, 12);
    const SpectralField z = zero_mean(f);
    CHECK(z.mean() == std::complex<double>{0.0, 0.0});
    CHECK(z.coeff(1, 2) == f.coeff(1, 2));
}

TEST_CASE("random fields are seed deterministic") {
    const Grid2D g(32, 2.0 * kPi);
    const SpectralField a = random_real_field(g, 77);
    const SpectralField b = random_real_field(g, 77);
    const SpectralField c = random_real_field(g, 78);
    bool identical = true, different = false;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
        identical = identical && a.coeffs()[i] == b.coeffs()[i];
        different = different || a.coeffs()[i] != c.coeffs()[i];
    }
    CHECK(identical);
    CHECK(different);
}

}  // TEST_SUITE

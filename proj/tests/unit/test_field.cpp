// SpectralField construction, symmetry enforcement and accessors.

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mhdlab/field.hpp"
#include "mhdlab/ops.hpp"

using namespace mhdlab;

namespace {
const Grid2D g8(8, 2.0 * std::numbers::pi);
}

TEST_SUITE("field") {

TEST_CASE("from_physical reproduces samples") {
    std::vector<double> f(g8.modes());
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            f[static_cast<std::size_t>(y) * 8 + x] =
                std::sin(x * g8.spacing()) + 0.25 * std::cos(2.0 * y * g8.spacing());
    const SpectralField s = SpectralField::from_physical(g8, f);
    CHECK(s.real_valued());
    const auto back = s.to_physical();
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-13));
}

TEST_CASE("cosine coefficients sit at plus and minus the mode") {
    std::vector<double> f(g8.modes());
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) f[static_cast<std::size_t>(y) * 8 + x] = std::cos(x * g8.spacing());
    const SpectralField s = SpectralField::from_physical(g8, f);
    CHECK(std::abs(s.coeff(1, 0) - 0.5) < 1e-14);
    CHECK(std::abs(s.coeff(-1, 0) - 0.5) < 1e-14);
    CHECK(std::abs(s.coeff(0, 1)) < 1e-15);
    CHECK(std::abs(s.mean()) < 1e-15);
}

TEST_CASE("conjugate symmetry is verified and enforced") {
    std::vector<std::complex<double>> c(g8.modes(), 0.0);
    const auto idx = [&](int mx, int my) {
        return static_cast<std::size_t>(g8.index_of(my)) * 8 + g8.index_of(mx);
    };
    c[idx(1, 2)] = {0.5, -0.25};
    c[idx(-1, -2)] = {0.5, 0.25};
    const SpectralField s = SpectralField::from_coeffs(g8, c);
    // exact pairing after construction
    CHECK(s.coeff(1, 2) == std::conj(s.coeff(-1, -2)));

    c[idx(-1, -2)] = {0.3, 0.25};  // breaks the pairing
    CHECK_THROWS_AS(SpectralField::from_coeffs(g8, c), std::invalid_argument);
}

TEST_CASE("nyquist modes pair with themselves") {
    std::vector<std::complex<double>> c(g8.modes(), 0.0);
    const auto idx = [&](int mx, int my) {
        return static_cast<std::size_t>(g8.index_of(my)) * 8 + g8.index_of(mx);
    };
    c[idx(-4, 0)] = {1.0, 0.5};  // self-paired, imaginary part inconsistent
    CHECK_THROWS_AS(SpectralField::from_coeffs(g8, c), std::invalid_argument);
    c[idx(-4, 0)] = {1.0, 0.0};
    CHECK_NOTHROW(SpectralField::from_coeffs(g8, c));
}

TEST_CASE("non-finite coefficients are rejected") {
    std::vector<std::complex<double>> c(g8.modes(), 0.0);
    c[3] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_THROWS_AS(SpectralField::from_coeffs(g8, c), std::invalid_argument);
}

TEST_CASE("coeff accessor checks its range") {
    const SpectralField s = SpectralField::zero(g8);
    CHECK_THROWS_AS(s.coeff(4, 0), std::out_of_range);   // +n/2 is not stored
    CHECK_THROWS_AS(s.coeff(0, -5), std::out_of_range);
    CHECK(s.coeff(-4, 3) == std::complex<double>{0.0, 0.0});
}

TEST_CASE("random fields are real valued and symmetric across seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SpectralField f = random_real_field(g8, seed);
        CHECK(f.real_valued());
        const int n = g8.size();
        for (int my = -n / 2; my < n / 2; ++my)
            for (int mx = -n / 2; mx < n / 2; ++mx) {
                if (mx == -n / 2 || my == -n / 2) continue;
                CHECK(f.coeff(mx, my) == std::conj(f.coeff(-mx, -my)));
            }
    }
}

TEST_CASE("vector field carries its grid") {
    const VectorField2D v{SpectralField::zero(g8), SpectralField::zero(g8), true};
    CHECK(v.grid() == g8);
    CHECK(v.divergence_free);
}

}  // TEST_SUITE

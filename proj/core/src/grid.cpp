#include "mhdlab/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mhdlab {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid2D::Grid2D(int n, double length) : n_(n), length_(length) {
    if (!is_power_of_two(n) || n < 8)
        throw std::invalid_argument("Grid2D: n must be a power of two >= 8");
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("Grid2D: length must be positive and finite");
    k_unit_ = 2.0 * std::numbers::pi / length_;
}

double Grid2D::max_wavenumber() const {
    const double m = n_ / 2;
    return std::hypot(m, m) * k_unit_;
}

}  // namespace mhdlab

// Uniform periodic grid on the torus [0,L)^2.
#pragma once

#include <cstddef>

namespace mhdlab {

// n points per axis (power of two, n >= 8), period L per axis.
// Integer frequencies per axis are {-n/2, ..., n/2-1}, stored in FFT
// order (frequency m lives at index m mod n); physical wavenumbers are
// the integer frequencies scaled by 2*pi/L. Quadrature weight per node
// is (L/n)^2.
class Grid2D {
public:
    Grid2D(int n, double length);

    int size() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return length_ / n_; }
    double cell_area() const { return spacing() * spacing(); }
    std::size_t modes() const { return static_cast<std::size_t>(n_) * n_; }

    // integer frequency of storage index i in [0, n)
    int freq(int index) const { return index < n_ / 2 ? index : index - n_; }
    // storage index of integer frequency m in [-n/2, n/2)
    int index_of(int m) const { return m >= 0 ? m : m + n_; }

    double k_unit() const { return k_unit_; }  // 2*pi/L
    double wavenumber(int index) const { return freq(index) * k_unit_; }

    double min_wavenumber() const { return k_unit_; }
    double max_wavenumber() const;  // corner mode (-n/2, -n/2)

    // 2/3-rule dealiasing keeps integer frequencies |m| <= dealias_cutoff()
    int dealias_cutoff() const { return n_ / 3; }

    bool operator==(const Grid2D& o) const { return n_ == o.n_ && length_ == o.length_; }
    bool operator!=(const Grid2D& o) const { return !(*this == o); }

private:
    int n_;
    double length_;
    double k_unit_;
};

}  // namespace mhdlab

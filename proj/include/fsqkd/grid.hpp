#pragma once

#include <cmath>
#include <cstddef>

#include "fsqkd/errors.hpp"

namespace fsqkd {

/// Uniform square sampling grid centered on the optical axis.
/// Sample k maps to coordinate (k - n/2) * dx, so the axis falls on a
/// sample for even n.
struct Grid {
    int n = 0;        ///< samples per side
    double dx = 0.0;  ///< sample spacing [m]

    Grid() = default;
    Grid(int n_, double dx_) : n(n_), dx(dx_) {
        if (n < 64) throw invalid_parameter("Grid: n must be >= 64");
        if (dx <= 0.0) throw invalid_parameter("Grid: dx must be positive");
    }

    double extent() const { return n * dx; }
    double coord(int k) const { return (k - n / 2) * dx; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * n + ix;
    }
    /// Area element for quadrature.
    double cell_area() const { return dx * dx; }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.n == b.n && a.dx == b.dx;
    }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw grid_mismatch(std::string(what) + ": grids differ");
}

}  // namespace fsqkd

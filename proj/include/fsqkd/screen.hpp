#pragma once

#include <cstdint>
#include <vector>

#include "fsqkd/grid.hpp"

namespace fsqkd {

/// One sampled turbulent phase surface. Statistics are Kolmogorov over the
/// aperture; outside the aperture the phase is held at its boundary value.
struct PhaseScreen {
    Grid grid;
    std::vector<double> phase;  ///< radians, grid.size() samples
    double r0 = 0.0;            ///< Fried parameter the screen was drawn for [m]
    double aperture_diameter = 0.0;  ///< Zernike aperture [m]
    int zernike_terms = 0;           ///< number of Noll terms (piston excluded)
    std::uint64_t seed = 0;          ///< RNG seed used for the draw

    PhaseScreen() = default;
    PhaseScreen(const Grid& g, std::vector<double> values)
        : grid(g), phase(std::move(values)) {}

    /// All-zero screen (no turbulence).
    static PhaseScreen zero(const Grid& g) {
        return PhaseScreen(g, std::vector<double>(g.size(), 0.0));
    }
};

}  // namespace fsqkd

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fsqkd/field.hpp"

namespace fsqkd {

/// Laguerre-Gaussian mode parameters. Only the zero radial index is in
/// scope; p != 0 is rejected.
struct ModeSpec {
    double w0 = 0.0;          ///< beam waist [m]
    int l = 0;                ///< azimuthal (OAM) index
    int p = 0;                ///< radial index, must be 0
    double z = 0.0;           ///< evaluation plane [m]
    double wavelength = 0.0;  ///< [m]
};

inline double rayleigh_range(double w0, double wavelength) {
    return std::numbers::pi * w0 * w0 / wavelength;
}

/// D(z) = 2 w0 sqrt((|l|+1) (1 + (z/zR)^2)).
inline double analytic_diameter(double w0, int l, double z, double wavelength) {
    if (w0 <= 0.0 || wavelength <= 0.0)
        throw invalid_parameter("analytic_diameter: w0 and wavelength must be positive");
    const double zr = rayleigh_range(w0, wavelength);
    return 2.0 * w0 * std::sqrt((std::abs(l) + 1.0) * (1.0 + (z / zr) * (z / zr)));
}

/// Normalized LG_{p=0}^{l} field at plane z. Phase convention matches the
/// angular-spectrum propagator exp(+i dz kz): diverging beams carry
/// exp(+i k r^2 / 2R) and Gouy phase exp(-i (|l|+1) atan(z/zR)).
inline ComplexField lg_mode(const ModeSpec& spec, const Grid& grid) {
    if (spec.w0 <= 0.0) throw invalid_parameter("lg_mode: w0 must be positive");
    if (spec.p != 0) throw invalid_parameter("lg_mode: only p = 0 is supported");
    if (spec.wavelength <= 0.0)
        throw invalid_parameter("lg_mode: wavelength must be positive");
    const double D = analytic_diameter(spec.w0, spec.l, spec.z, spec.wavelength);
    if (grid.extent() < 4.0 * D)
        throw grid_undersampled("lg_mode: grid extent below 4x mode diameter");

    const int labs = std::abs(spec.l);
    const double zr = rayleigh_range(spec.w0, spec.wavelength);
    const double wz = spec.w0 * std::sqrt(1.0 + (spec.z / zr) * (spec.z / zr));
    const double k = 2.0 * std::numbers::pi / spec.wavelength;
    double lfact = 1.0;
    for (int i = 2; i <= labs; ++i) lfact *= i;
    const double amp0 = std::sqrt(2.0 / (std::numbers::pi * lfact)) / wz;
    const double inv_w2 = 1.0 / (wz * wz);
    // Curvature term: 1/R = z / (z^2 + zR^2), finite at z = 0.
    const double inv_R = spec.z / (spec.z * spec.z + zr * zr);
    const double gouy = (labs + 1.0) * std::atan(spec.z / zr);

    ComplexField out(grid, spec.wavelength);
    for (int iy = 0; iy < grid.n; ++iy) {
        const double y = grid.coord(iy);
        for (int ix = 0; ix < grid.n; ++ix) {
            const double x = grid.coord(ix);
            const double r2 = x * x + y * y;
            const double rho = std::sqrt(2.0 * r2) / wz;
            double radial = amp0 * std::exp(-r2 * inv_w2);
            for (int i = 0; i < labs; ++i) radial *= rho;
            const double phase = spec.l * std::atan2(y, x)
                               + 0.5 * k * r2 * inv_R - gouy;
            out.at(ix, iy) = radial * cplx(std::cos(phase), std::sin(phase));
        }
    }
    return normalized(out);
}

/// Normalized coefficient-weighted sum of modes sharing one grid.
inline ComplexField superpose(const std::vector<cplx>& coeffs,
                              const std::vector<ComplexField>& modes) {
    if (coeffs.size() != modes.size() || modes.empty())
        throw invalid_parameter("superpose: coefficient/mode count mismatch");
    for (std::size_t i = 1; i < modes.size(); ++i)
        require_same_grid(modes[0].grid, modes[i].grid, "superpose");
    ComplexField out(modes[0].grid, modes[0].wavelength);
    for (std::size_t m = 0; m < modes.size(); ++m) {
        if (coeffs[m] == cplx(0.0)) continue;
        for (std::size_t i = 0; i < out.samples.size(); ++i)
            out.samples[i] += coeffs[m] * modes[m].samples[i];
    }
    const double n2 = squared_norm(out);
    if (!(n2 > 1e-24)) throw numerical_error("superpose: sum vanishes");
    return normalized(out);
}

}  // namespace fsqkd

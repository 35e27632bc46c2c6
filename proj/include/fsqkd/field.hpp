#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "fsqkd/errors.hpp"
#include "fsqkd/fft.hpp"
#include "fsqkd/grid.hpp"
#include "fsqkd/screen.hpp"

namespace fsqkd {

using cplx = std::complex<double>;

/// Sampled complex scalar field on a Grid. Treated as an immutable value:
/// every operation returns a new field.
struct ComplexField {
    Grid grid;
    double wavelength = 0.0;  ///< [m]
    std::vector<cplx> samples;

    ComplexField() = default;
    ComplexField(const Grid& g, double lambda)
        : grid(g), wavelength(lambda), samples(g.size()) {
        if (lambda <= 0.0)
            throw invalid_parameter("ComplexField: wavelength must be positive");
    }
    ComplexField(const Grid& g, double lambda, std::vector<cplx> data)
        : grid(g), wavelength(lambda), samples(std::move(data)) {}

    cplx& at(int ix, int iy) { return samples[grid.index(ix, iy)]; }
    const cplx& at(int ix, int iy) const { return samples[grid.index(ix, iy)]; }
};

/// <a|b> = sum conj(a) * b * dx^2.
inline cplx inner_product(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        acc += std::conj(a.samples[i]) * b.samples[i];
    return acc * a.grid.cell_area();
}

/// ||u||^2 = <u|u>.
inline double squared_norm(const ComplexField& u) {
    double acc = 0.0;
    for (const auto& v : u.samples) acc += std::norm(v);
    return acc * u.grid.cell_area();
}

inline ComplexField normalized(const ComplexField& u) {
    const double n2 = squared_norm(u);
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw numerical_error("normalized: zero or non-finite field");
    ComplexField out = u;
    const double s = 1.0 / std::sqrt(n2);
    for (auto& v : out.samples) v *= s;
    return out;
}

/// Pointwise complex conjugate (phase-conjugate mirror of the field).
inline ComplexField conjugate(const ComplexField& u) {
    ComplexField out = u;
    for (auto& v : out.samples) v = std::conj(v);
    return out;
}

/// Multiply by exp(i*theta) of a phase screen; norm-preserving.
inline ComplexField apply_phase(const ComplexField& u, const PhaseScreen& screen) {
    require_same_grid(u.grid, screen.grid, "apply_phase");
    ComplexField out = u;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] *= cplx(std::cos(screen.phase[i]), std::sin(screen.phase[i]));
    return out;
}

/// Standard second-moment (ISO-style) diameter: D = 2*sqrt(2*<r^2>) with
/// <r^2> the intensity-weighted radial variance about the centroid.
/// Equals 2*w0 for a fundamental Gaussian at waist.
inline double second_moment_diameter(const ComplexField& u) {
    double total = 0.0, mx = 0.0, my = 0.0;
    const int n = u.grid.n;
    for (int iy = 0; iy < n; ++iy) {
        const double y = u.grid.coord(iy);
        for (int ix = 0; ix < n; ++ix) {
            const double I = std::norm(u.at(ix, iy));
            total += I;
            mx += I * u.grid.coord(ix);
            my += I * y;
        }
    }
    if (!(total > 0.0)) throw numerical_error("second_moment_diameter: zero field");
    mx /= total;
    my /= total;
    double var = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        const double y = u.grid.coord(iy) - my;
        for (int ix = 0; ix < n; ++ix) {
            const double x = u.grid.coord(ix) - mx;
            var += std::norm(u.at(ix, iy)) * (x * x + y * y);
        }
    }
    var /= total;
    return 2.0 * std::sqrt(2.0 * var);
}

/// Angular spectrum of the field: Utilde(q) = sum u * dx^2 * exp(-i q r),
/// returned on the FFT frequency layout (q_k = 2 pi k / extent, wrapped).
inline std::vector<cplx> angular_spectrum(const ComplexField& u) {
    std::vector<cplx> spec = u.samples;
    detail::fft2_inplace(spec, u.grid.n);
    const double a = u.grid.cell_area();
    for (auto& v : spec) v *= a;
    return spec;
}

/// Norm computed in the spectral domain; equals squared_norm by Parseval.
inline double spectral_squared_norm(const ComplexField& u) {
    const auto spec = angular_spectrum(u);
    double acc = 0.0;
    for (const auto& v : spec) acc += std::norm(v);
    const double ext = u.grid.extent();
    return acc / (ext * ext);
}

}  // namespace fsqkd

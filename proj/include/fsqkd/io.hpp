#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "fsqkd/field.hpp"

namespace fsqkd {

/// Two-plane delimited text dump of a field: a header line
/// "fsqkd-field n dx wavelength", then n rows of amplitudes, a blank
/// line, and n rows of phases (radians).
inline void write_field_text(const ComplexField& u, std::ostream& os) {
    os << "fsqkd-field " << u.grid.n << ' ' << std::setprecision(17)
       << u.grid.dx << ' ' << u.wavelength << '\n';
    os << std::setprecision(9);
    for (int pass = 0; pass < 2; ++pass) {
        for (int iy = 0; iy < u.grid.n; ++iy) {
            for (int ix = 0; ix < u.grid.n; ++ix) {
                const cplx v = u.at(ix, iy);
                os << (pass == 0 ? std::abs(v) : std::arg(v));
                os << (ix + 1 < u.grid.n ? ' ' : '\n');
            }
        }
        if (pass == 0) os << '\n';
    }
}

inline void write_field_text(const ComplexField& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw invalid_parameter("write_field_text: cannot open " + path);
    write_field_text(u, os);
}

inline ComplexField read_field_text(std::istream& is) {
    std::string magic;
    int n = 0;
    double dx = 0.0, wavelength = 0.0;
    is >> magic >> n >> dx >> wavelength;
    if (magic != "fsqkd-field" || !is)
        throw invalid_parameter("read_field_text: bad header");
    ComplexField u(Grid(n, dx), wavelength);
    std::vector<double> amp(u.grid.size()), ph(u.grid.size());
    for (auto& v : amp) is >> v;
    for (auto& v : ph) is >> v;
    if (!is) throw invalid_parameter("read_field_text: truncated data");
    for (std::size_t i = 0; i < u.samples.size(); ++i)
        u.samples[i] = amp[i] * cplx(std::cos(ph[i]), std::sin(ph[i]));
    return u;
}

inline ComplexField read_field_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw invalid_parameter("read_field_text: cannot open " + path);
    return read_field_text(is);
}

/// Screens reuse the field container with unit amplitude and the screen
/// phase, wavelength written as 0-placeholder-free 1.0 (not meaningful).
inline void write_screen_text(const PhaseScreen& s, const std::string& path) {
    ComplexField u(s.grid, 1.0);
    for (std::size_t i = 0; i < u.samples.size(); ++i)
        u.samples[i] = cplx(std::cos(s.phase[i]), std::sin(s.phase[i]));
    write_field_text(u, path);
}

}  // namespace fsqkd

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "fsqkd/grid.hpp"

namespace fsqkd {

/// Zernike term under Noll's single-index convention (j >= 1).
struct NollTerm {
    int n = 0;            ///< radial degree
    int m = 0;            ///< azimuthal order, >= 0
    bool cosine = false;  ///< cos(m phi) vs sin(m phi); irrelevant for m = 0
};

/// Noll mapping: j=1 piston, j=2,3 tilts, j=4 defocus, ... Within a row of
/// fixed n the orders run [0,2,2,4,4,...] (even n) or [1,1,3,3,...] (odd n);
/// even j carries cos, odd j carries sin.
inline NollTerm noll_term(int j) {
    if (j < 1) throw invalid_parameter("noll_term: j must be >= 1");
    int n = 0;
    while ((n + 1) * (n + 2) / 2 < j) ++n;
    const int k = j - n * (n + 1) / 2;  // 1-based position within the row
    NollTerm t;
    t.n = n;
    t.m = (n % 2 == 0) ? 2 * (k / 2) : 2 * ((k - 1) / 2) + 1;
    t.cosine = (j % 2 == 0);
    return t;
}

namespace detail {

inline double factorial(int k) {
    static const auto table = [] {
        std::vector<double> f(64, 1.0);
        for (int i = 1; i < 64; ++i) f[i] = f[i - 1] * i;
        return f;
    }();
    return table[k];
}

/// Coefficients c[p] of rho^p in R_n^m(rho).
inline std::vector<double> radial_coeffs(int n, int m) {
    std::vector<double> c(n + 1, 0.0);
    for (int s = 0; s <= (n - m) / 2; ++s) {
        const double v = ((s % 2) ? -1.0 : 1.0) * factorial(n - s) /
                         (factorial(s) * factorial((n + m) / 2 - s) *
                          factorial((n - m) / 2 - s));
        c[n - 2 * s] += v;
    }
    return c;
}

}  // namespace detail

inline double zernike_radial(int n, int m, double rho) {
    const auto c = detail::radial_coeffs(n, m);
    double acc = 0.0;
    for (int p = n; p >= 0; --p) acc = acc * rho + c[p];
    return acc;
}

/// Noll-normalized Z_j at polar point (rho, phi). Points outside the unit
/// disc are clamped radially, i.e. take the boundary value at (1, phi).
inline double zernike_eval(int j, double rho, double phi) {
    const NollTerm t = noll_term(j);
    if (rho > 1.0) rho = 1.0;
    double v = std::sqrt(t.n + 1.0) * zernike_radial(t.n, t.m, rho);
    if (t.m != 0) {
        v *= std::sqrt(2.0) *
             (t.cosine ? std::cos(t.m * phi) : std::sin(t.m * phi));
    }
    return v;
}

/// Evaluate sum_j amps[j - first_j] * Z_j over a grid, with the Zernike
/// unit disc mapped to the given aperture diameter and radial clamping
/// outside it. Terms sharing an azimuthal signature are merged into one
/// radial polynomial, so the cost is ~ n_max polynomials per pixel rather
/// than one per term.
inline std::vector<double> zernike_sum(const Grid& grid, double aperture_diameter,
                                       int first_j,
                                       const std::vector<double>& amps) {
    if (aperture_diameter <= 0.0)
        throw invalid_parameter("zernike_sum: aperture must be positive");
    if (amps.empty()) return std::vector<double>(grid.size(), 0.0);

    // key = (m, cosine?1:0); value = merged rho-polynomial coefficients
    std::map<std::pair<int, int>, std::vector<double>> groups;
    int nmax = 0, mmax = 0;
    for (std::size_t idx = 0; idx < amps.size(); ++idx) {
        const int j = first_j + static_cast<int>(idx);
        const NollTerm t = noll_term(j);
        nmax = std::max(nmax, t.n);
        mmax = std::max(mmax, t.m);
        const double norm =
            std::sqrt(t.n + 1.0) * (t.m != 0 ? std::sqrt(2.0) : 1.0);
        auto& poly = groups[{t.m, t.m != 0 && t.cosine ? 1 : 0}];
        const auto rc = detail::radial_coeffs(t.n, t.m);
        if (poly.size() < rc.size()) poly.resize(rc.size(), 0.0);
        for (std::size_t p = 0; p < rc.size(); ++p)
            poly[p] += amps[idx] * norm * rc[p];
    }

    std::vector<double> out(grid.size(), 0.0);
    const double inv_rad = 2.0 / aperture_diameter;
    std::vector<double> pw(nmax + 1);
    std::vector<double> cm(mmax + 1), sm(mmax + 1);
    for (int iy = 0; iy < grid.n; ++iy) {
        const double y = grid.coord(iy);
        for (int ix = 0; ix < grid.n; ++ix) {
            const double x = grid.coord(ix);
            const double r = std::sqrt(x * x + y * y);
            double rho = r * inv_rad;
            if (rho > 1.0) rho = 1.0;
            pw[0] = 1.0;
            for (int p = 1; p <= nmax; ++p) pw[p] = pw[p - 1] * rho;
            const double c1 = (r > 0.0) ? x / r : 1.0;
            const double s1 = (r > 0.0) ? y / r : 0.0;
            cm[0] = 1.0;
            sm[0] = 0.0;
            for (int m = 1; m <= mmax; ++m) {
                cm[m] = cm[m - 1] * c1 - sm[m - 1] * s1;
                sm[m] = sm[m - 1] * c1 + cm[m - 1] * s1;
            }
            double acc = 0.0;
            for (const auto& [key, poly] : groups) {
                const int m = key.first;
                // R_n^m only carries powers with the parity of m
                double radial = 0.0;
                for (std::size_t p = m; p < poly.size(); p += 2)
                    radial += poly[p] * pw[p];
                if (m == 0)
                    acc += radial;
                else
                    acc += radial * (key.second ? cm[m] : sm[m]);
            }
            out[grid.index(ix, iy)] = acc;
        }
    }
    return out;
}

}  // namespace fsqkd

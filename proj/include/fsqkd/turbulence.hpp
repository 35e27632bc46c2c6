#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fsqkd/rng.hpp"
#include "fsqkd/screen.hpp"
#include "fsqkd/zernike.hpp"

namespace fsqkd {

/// r0 = (0.423 Cn^2 k^2 Z)^{-3/5}.
inline double fried_parameter(double cn2, double wavelength, double path_length) {
    if (cn2 <= 0.0 || wavelength <= 0.0 || path_length <= 0.0)
        throw invalid_parameter("fried_parameter: inputs must be positive");
    const double k = 2.0 * std::numbers::pi / wavelength;
    return std::pow(0.423 * cn2 * k * k * path_length, -3.0 / 5.0);
}

/// sigma_R^2 = 1.23 Cn^2 k^{7/6} Z^{11/6}.
inline double rytov_variance(double cn2, double wavelength, double path_length) {
    if (cn2 <= 0.0 || wavelength <= 0.0 || path_length <= 0.0)
        throw invalid_parameter("rytov_variance: inputs must be positive");
    const double k = 2.0 * std::numbers::pi / wavelength;
    return 1.23 * cn2 * std::pow(k, 7.0 / 6.0) * std::pow(path_length, 11.0 / 6.0);
}

/// Kolmogorov phase structure function D(r) = 6.88 (r/r0)^{5/3}.
inline double theoretical_structure(double r, double r0) {
    if (r < 0.0 || r0 <= 0.0)
        throw invalid_parameter("theoretical_structure: need r >= 0, r0 > 0");
    return 6.88 * std::pow(r / r0, 5.0 / 3.0);
}

/// Channel strength, given either as physical-path parameters or directly
/// as the D/r0 ratio over an aperture. Wavelength and path length are
/// always required (propagation needs them). At most one strength
/// parameterization may be set; neither set means no turbulence.
struct TurbulenceSpec {
    double wavelength = 0.0;   ///< [m]
    double path_length = 0.0;  ///< Z_T [m]
    double cn2 = 0.0;          ///< [m^{-2/3}]; 0 = unset
    double d_over_r0 = 0.0;    ///< 0 = unset
    double aperture = 0.0;     ///< D [m], required with d_over_r0

    bool turbulent() const { return cn2 > 0.0 || d_over_r0 > 0.0; }

    /// Fried parameter implied by whichever parameterization is active;
    /// +infinity for the turbulence-free spec.
    double r0() const {
        validate();
        if (cn2 > 0.0) return fried_parameter(cn2, wavelength, path_length);
        if (d_over_r0 > 0.0) return aperture / d_over_r0;
        return std::numeric_limits<double>::infinity();
    }

    /// Cn^2, derived by inverting the Fried formula when the spec was
    /// given as a ratio.
    double effective_cn2() const {
        validate();
        if (cn2 > 0.0) return cn2;
        if (d_over_r0 == 0.0) return 0.0;
        const double k = 2.0 * std::numbers::pi / wavelength;
        return std::pow(r0(), -5.0 / 3.0) / (0.423 * k * k * path_length);
    }

    void validate() const {
        if (wavelength <= 0.0 || path_length <= 0.0)
            throw invalid_parameter(
                "TurbulenceSpec: wavelength and path_length must be positive");
        if (cn2 > 0.0 && d_over_r0 > 0.0)
            throw invalid_parameter(
                "TurbulenceSpec: set at most one of cn2 or d_over_r0");
        if (d_over_r0 > 0.0 && aperture <= 0.0)
            throw invalid_parameter(
                "TurbulenceSpec: aperture required with d_over_r0");
        if (cn2 < 0.0 || d_over_r0 < 0.0 || aperture < 0.0)
            throw invalid_parameter("TurbulenceSpec: negative parameter");
    }
};

/// Smallest m with per-segment Rytov variance below threshold.
inline int segment_path(const TurbulenceSpec& spec, double threshold = 1.0) {
    if (threshold <= 0.0)
        throw invalid_parameter("segment_path: threshold must be positive");
    const double cn2 = spec.effective_cn2();
    if (cn2 == 0.0) return 1;
    int m = 1;
    while (rytov_variance(cn2, spec.wavelength, spec.path_length / m) >= threshold)
        ++m;
    return m;
}

namespace detail {

/// Closed-form Kolmogorov covariance <a_j a_j'> of Noll-normalized Zernike
/// coefficients at D/r0 = 1 (Noll 1976). Nonzero only for equal azimuthal
/// order and matching trig type.
inline double noll_cov_entry(int j, int jp) {
    const NollTerm t = noll_term(j);
    const NollTerm tp = noll_term(jp);
    if (t.m != tp.m) return 0.0;
    if (t.m != 0 && t.cosine != tp.cosine) return 0.0;
    const int n = t.n, np = tp.n;
    const double sign = (((n + np - 2 * t.m) / 2) % 2) ? -1.0 : 1.0;
    const double lg = std::lgamma(14.0 / 3.0) +
                      std::lgamma((n + np - 5.0 / 3.0) / 2.0) -
                      std::lgamma((np - n + 17.0 / 3.0) / 2.0) -
                      std::lgamma((n - np + 17.0 / 3.0) / 2.0) -
                      std::lgamma((n + np + 23.0 / 3.0) / 2.0);
    return sign * 0.0229 * 8.0 * std::pow(std::numbers::pi, 8.0 / 3.0) *
           std::sqrt((n + 1.0) * (np + 1.0)) * std::exp(lg) /
           std::pow(2.0, 14.0 / 3.0);
}

}  // namespace detail

/// J x J covariance of Zernike coefficients a_j for j = 2..J+1 (piston
/// excluded), scaled by (D/r0)^{5/3}.
inline Eigen::MatrixXd noll_covariance(int terms, double d_over_r0 = 1.0) {
    if (terms < 3) throw invalid_parameter("noll_covariance: need J >= 3");
    if (d_over_r0 <= 0.0)
        throw invalid_parameter("noll_covariance: d_over_r0 must be positive");
    Eigen::MatrixXd cov(terms, terms);
    const double scale = std::pow(d_over_r0, 5.0 / 3.0);
    for (int a = 0; a < terms; ++a)
        for (int b = a; b < terms; ++b) {
            const double v = detail::noll_cov_entry(a + 2, b + 2) * scale;
            cov(a, b) = v;
            cov(b, a) = v;
        }
    return cov;
}

namespace detail {

/// Symmetric factorization L with L L^T = cov; tiny negative eigenvalues
/// are clamped to zero, anything below -1e-10 * trace is an error.
inline Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw numerical_error("covariance_factor: eigendecomposition failed");
    Eigen::VectorXd lam = solver.eigenvalues();
    const double floor = -1e-10 * cov.trace();
    for (int i = 0; i < lam.size(); ++i) {
        if (lam(i) < floor)
            throw numerical_error(
                "covariance_factor: covariance is not positive semidefinite");
        if (lam(i) < 0.0) lam(i) = 0.0;
    }
    return solver.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
           solver.eigenvectors().transpose();
}

}  // namespace detail

/// One Kolmogorov screen for aperture D from a seed-derived Gaussian draw,
/// Theta = sum_{j=2}^{J+1} a_j Z_j, radially clamped outside the aperture.
inline PhaseScreen sample_screen(std::uint64_t seed, const TurbulenceSpec& spec,
                                 double aperture, const Grid& grid,
                                 int terms = 172) {
    if (aperture <= 0.0)
        throw invalid_parameter("sample_screen: aperture must be positive");
    if (grid.extent() < aperture)
        throw invalid_parameter("sample_screen: grid does not cover aperture");
    const double dr0 = spec.turbulent() ? aperture / spec.r0() : 0.0;
    if (dr0 == 0.0) {
        PhaseScreen screen = PhaseScreen::zero(grid);
        screen.r0 = std::numeric_limits<double>::infinity();
        screen.aperture_diameter = aperture;
        screen.zernike_terms = terms;
        screen.seed = seed;
        return screen;
    }

    // Factorization cache: the expensive part depends only on J.
    static std::mutex cache_mutex;
    static std::map<int, Eigen::MatrixXd> factor_cache;
    Eigen::MatrixXd L;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = factor_cache.find(terms);
        if (it == factor_cache.end())
            it = factor_cache
                     .emplace(terms,
                              detail::covariance_factor(noll_covariance(terms)))
                     .first;
        L = it->second;
    }

    GaussianRng rng(seed);
    Eigen::VectorXd g(terms);
    for (int i = 0; i < terms; ++i) g(i) = rng();
    const Eigen::VectorXd a = std::pow(dr0, 5.0 / 6.0) * (L * g);

    PhaseScreen screen(grid, zernike_sum(grid, aperture, 2,
                                         std::vector<double>(a.data(),
                                                             a.data() + terms)));
    screen.r0 = spec.r0();
    screen.aperture_diameter = aperture;
    screen.zernike_terms = terms;
    screen.seed = seed;
    for (double v : screen.phase)
        if (!std::isfinite(v))
            throw numerical_error("sample_screen: non-finite phase value");
    return screen;
}

/// Ensemble-averaged phase structure function <(Theta(x) - Theta(x-r))^2>
/// at the requested separations, averaged over in-aperture positions,
/// the four grid axes, and all screens.
inline std::vector<double> structure_function_estimate(
    const std::vector<PhaseScreen>& screens,
    const std::vector<double>& separations) {
    if (screens.size() < 2)
        throw invalid_parameter("structure_function_estimate: need >= 2 screens");
    const Grid& grid = screens.front().grid;
    const double D = screens.front().aperture_diameter;
    std::vector<double> out(separations.size(), 0.0);
    for (std::size_t si = 0; si < separations.size(); ++si) {
        const double r = separations[si];
        if (r < 0.0 || r > D)
            throw invalid_parameter(
                "structure_function_estimate: separation outside aperture");
        const int kr = static_cast<int>(std::lround(r / grid.dx));
        double acc = 0.0;
        std::size_t count = 0;
        const double rad2 = 0.25 * D * D;
        for (const PhaseScreen& s : screens) {
            require_same_grid(grid, s.grid, "structure_function_estimate");
            for (int iy = 0; iy < grid.n; ++iy) {
                const double y = grid.coord(iy);
                for (int ix = 0; ix < grid.n; ++ix) {
                    const double x = grid.coord(ix);
                    if (x * x + y * y > rad2) continue;
                    const double p = s.phase[grid.index(ix, iy)];
                    // four axis-aligned partners, kept if still in aperture
                    const int px[4] = {ix + kr, ix - kr, ix, ix};
                    const int py[4] = {iy, iy, iy + kr, iy - kr};
                    for (int q = 0; q < 4; ++q) {
                        if (px[q] < 0 || px[q] >= grid.n || py[q] < 0 ||
                            py[q] >= grid.n)
                            continue;
                        const double xq = grid.coord(px[q]);
                        const double yq = grid.coord(py[q]);
                        if (xq * xq + yq * yq > rad2) continue;
                        const double dphi =
                            p - s.phase[grid.index(px[q], py[q])];
                        acc += dphi * dphi;
                        ++count;
                    }
                }
            }
        }
        if (count == 0)
            throw invalid_parameter(
                "structure_function_estimate: no valid sample pairs");
        out[si] = acc / count;
    }
    return out;
}

}  // namespace fsqkd

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fsqkd/mub.hpp"
#include "fsqkd/propagation.hpp"

namespace fsqkd {

/// Waist geometry of the stimulated down-conversion stage. Degenerate
/// operation only: probe and idler share a wavelength.
struct StimConfig {
    double gamma = 2.0;           ///< w_B / w_A
    double w_A = 0.0;             ///< pump waist [m]
    double wavelength = 0.0;      ///< pump wavelength [m]
    double wavelength_probe = 0.0;
    double wavelength_idler = 0.0;

    double w_B() const { return gamma * w_A; }
    void validate() const {
        if (gamma <= 0.0 || w_A <= 0.0 || wavelength <= 0.0)
            throw invalid_parameter("StimConfig: gamma, w_A, wavelength > 0 required");
        if (wavelength_idler != wavelength_probe)
            throw invalid_parameter(
                "StimConfig: degenerate operation requires idler = probe wavelength");
    }
};

/// Thin-crystal, low-gain idler: normalized pointwise pump * conj(seed).
/// The idler inherits the seed's wavelength (degenerate return leg).
inline ComplexField stimulate_idler(const ComplexField& pump,
                                    const ComplexField& seed) {
    require_same_grid(pump.grid, seed.grid, "stimulate_idler");
    ComplexField out(pump.grid, seed.wavelength);
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = pump.samples[i] * std::conj(seed.samples[i]);
    const double n2 = squared_norm(out);
    const double ref = squared_norm(pump) * squared_norm(seed);
    if (!(n2 > 1e-12 * ref) || ref == 0.0)
        throw numerical_error("stimulate_idler: pump/seed overlap vanishes");
    return normalized(out);
}

/// Mode-transfer fidelity between pump mode U_A and the idler stimulated
/// by seed envelope U_B:
///   F = |int U_A* U_B* U_A|^2 / (int |U_A|^2 * int |U_B* U_A|^2).
inline double transfer_fidelity(const ComplexField& pump_mode,
                                const ComplexField& seed_envelope) {
    require_same_grid(pump_mode.grid, seed_envelope.grid, "transfer_fidelity");
    cplx num = 0.0;
    double na = 0.0, nprod = 0.0;
    for (std::size_t i = 0; i < pump_mode.samples.size(); ++i) {
        const cplx a = pump_mode.samples[i];
        const cplx prod = a * std::conj(seed_envelope.samples[i]);
        num += std::conj(a) * prod;
        na += std::norm(a);
        nprod += std::norm(prod);
    }
    if (!(na > 0.0) || !(nprod > 0.0))
        throw numerical_error("transfer_fidelity: zero field");
    return std::norm(num) / (na * nprod);
}

/// Probe and idler diameters along the return path. The probe curve is
/// the analytic Gaussian law from w_B. The idler (pump = largest-|l|
/// basis mode, seed = Gaussian probe at waist) carries no radial chirp
/// at the crystal, so its free-space second moment follows
///   <r^2>(z) = <r^2>(0) + z^2 <q^2> / k^2
/// exactly; both moments come from the sampled crystal-plane field. This
/// sidesteps the impossible grid that resolving both the mm-scale waist
/// and the far field at once would need.
struct DiameterCurve {
    std::vector<double> z;        ///< [m]
    std::vector<double> probe;    ///< D_B(z) [m]
    std::vector<double> idler;    ///< D_i(z) [m]
};

inline DiameterCurve idler_diameter_curve(const StimConfig& config, int l_max,
                                          const std::vector<double>& z_samples,
                                          const Grid& grid) {
    config.validate();
    if (l_max < 0) throw invalid_parameter("idler_diameter_curve: l_max >= 0");
    const ComplexField pump =
        lg_mode({config.w_A, l_max, 0, 0.0, config.wavelength}, grid);
    const ComplexField seed =
        lg_mode({config.w_B(), 0, 0, 0.0, config.wavelength}, grid);
    const ComplexField idler0 = stimulate_idler(pump, seed);

    const double d0 = second_moment_diameter(idler0);
    const double r2_0 = d0 * d0 / 8.0;
    const std::vector<cplx> spectrum = angular_spectrum(idler0);
    const double dq = 2.0 * std::numbers::pi / grid.extent();
    // spectrum is in FFT layout: bin i holds frequency i, or i - n, past n/2
    auto freq = [&](int i) {
        return dq * (i < grid.n / 2 ? i : i - grid.n);
    };
    double q2_sum = 0.0, p_sum = 0.0;
    for (int iy = 0; iy < grid.n; ++iy)
        for (int ix = 0; ix < grid.n; ++ix) {
            const double qx = freq(ix);
            const double qy = freq(iy);
            const double p = std::norm(spectrum[grid.index(ix, iy)]);
            q2_sum += p * (qx * qx + qy * qy);
            p_sum += p;
        }
    if (!(p_sum > 0.0))
        throw numerical_error("idler_diameter_curve: empty spectrum");
    const double k = 2.0 * std::numbers::pi / config.wavelength;
    const double q2_over_k2 = q2_sum / p_sum / (k * k);

    DiameterCurve curve;
    curve.z = z_samples;
    for (double z : z_samples) {
        if (z < 0.0)
            throw invalid_parameter("idler_diameter_curve: z must be >= 0");
        curve.probe.push_back(
            analytic_diameter(config.w_B(), 0, z, config.wavelength));
        curve.idler.push_back(
            2.0 * std::sqrt(2.0 * (r2_0 + z * z * q2_over_k2)));
    }
    return curve;
}

namespace detail {

/// Grid resolving both beams at the crystal plane. Far-field diameters
/// come from the moment law, so the window only needs the z = 0
/// footprints plus headroom for the mode-synthesis sampling guard.
inline Grid stim_grid(double w_B, double gamma, int l_max, double wavelength,
                      int n = 512) {
    const double w_A = w_B / gamma;
    const double d1 = analytic_diameter(w_B, 0, 0.0, wavelength);
    const double d2 = analytic_diameter(w_A, l_max, 0.0, wavelength);
    return Grid(n, 4.5 * std::max(d1, d2) / n);
}

}  // namespace detail

/// Solves D_B(Z_T) = D_i(Z_T) for the probe waist w_B by bisection on the
/// sign change of the difference over [1 mm, 50 cm]. The difference is
/// monotone: small waists diffract the probe wide while the idler (born
/// narrower but from a tighter pump) spreads faster still.
inline double optimize_probe_waist(double z_t, double gamma, double wavelength,
                                   int l_max) {
    if (z_t <= 0.0)
        throw invalid_parameter("optimize_probe_waist: Z_T must be positive");
    if (gamma <= 0.0 || wavelength <= 0.0 || l_max < 0)
        throw invalid_parameter("optimize_probe_waist: bad parameter");

    auto difference = [&](double w_B) {
        StimConfig cfg;
        cfg.gamma = gamma;
        cfg.w_A = w_B / gamma;
        cfg.wavelength = wavelength;
        const Grid grid = detail::stim_grid(w_B, gamma, l_max, wavelength);
        const DiameterCurve c = idler_diameter_curve(cfg, l_max, {z_t}, grid);
        return c.probe[0] - c.idler[0];
    };

    double lo = 1e-3, hi = 0.5;
    double flo = difference(lo), fhi = difference(hi);
    if (flo * fhi > 0.0)
        throw numerical_error(
            "optimize_probe_waist: no sign change of D_B - D_i in [1 mm, 50 cm]; "
            "for very short paths the idler is narrower at every waist");
    for (int iter = 0; iter < 60 && (hi - lo) / hi > 1e-4; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = difference(mid);
        if (flo * fmid <= 0.0) {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace fsqkd

#pragma once

#include <atomic>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "fsqkd/field.hpp"
#include "fsqkd/turbulence.hpp"

namespace fsqkd {

namespace detail {

/// kz(q) = sqrt(k^2 - |q|^2) on the FFT frequency layout; negative entries
/// mark evanescent components. Cached per (n, dx, wavelength).
inline const std::vector<double>& kz_table(const Grid& grid, double wavelength) {
    static std::mutex mutex;
    static std::map<std::tuple<int, double, double>, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    const auto key = std::make_tuple(grid.n, grid.dx, wavelength);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const int n = grid.n;
    const double k = 2.0 * std::numbers::pi / wavelength;
    const double dq = 2.0 * std::numbers::pi / grid.extent();
    std::vector<double> table(grid.size());
    for (int iy = 0; iy < n; ++iy) {
        const int fy = (iy <= n / 2) ? iy : iy - n;
        const double qy = fy * dq;
        for (int ix = 0; ix < n; ++ix) {
            const int fx = (ix <= n / 2) ? ix : ix - n;
            const double qx = fx * dq;
            const double arg = k * k - qx * qx - qy * qy;
            table[grid.index(ix, iy)] = (arg > 0.0) ? std::sqrt(arg) : -1.0;
        }
    }
    return cache.emplace(key, std::move(table)).first->second;
}

inline std::atomic<long>& window_warning_count() {
    static std::atomic<long> count{0};
    return count;
}

/// Fraction of field energy outside the central 0.8 x 0.8 of the window.
inline double border_energy_fraction(const ComplexField& u) {
    const double half = 0.4 * u.grid.extent();
    double border = 0.0, total = 0.0;
    for (int iy = 0; iy < u.grid.n; ++iy) {
        const double y = u.grid.coord(iy);
        for (int ix = 0; ix < u.grid.n; ++ix) {
            const double I = std::norm(u.at(ix, iy));
            total += I;
            if (std::abs(u.grid.coord(ix)) > half || std::abs(y) > half)
                border += I;
        }
    }
    return (total > 0.0) ? border / total : 0.0;
}

}  // namespace detail

/// Free-space angular-spectrum step: multiply the spectrum by
/// exp(i dz kz(q)), zeroing evanescent components. Negative dz
/// back-propagates. Warns (once per process, then counts) when more than
/// 0.1% of the output energy sits outside the central 80% of the window,
/// the precursor of wrap-around aliasing.
inline ComplexField angular_spectrum_propagate(const ComplexField& u, double dz) {
    if (dz == 0.0) return u;
    const auto& kz = detail::kz_table(u.grid, u.wavelength);
    ComplexField out = u;
    detail::fft2_inplace(out.samples, u.grid.n);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        if (kz[i] < 0.0) {
            out.samples[i] = 0.0;
        } else {
            const double ph = dz * kz[i];
            out.samples[i] *= cplx(std::cos(ph), std::sin(ph));
        }
    }
    detail::ifft2_inplace(out.samples, u.grid.n);
    if (detail::border_energy_fraction(out) > 1e-3) {
        if (detail::window_warning_count()++ == 0)
            std::cerr << "warning: propagated field approaching window edge; "
                         "enlarge the grid\n";
    }
    return out;
}

/// One frozen draw of the segmented turbulent channel.
struct ChannelRealization {
    struct Segment {
        double dz = 0.0;  ///< [m]
        PhaseScreen screen;
    };
    std::vector<Segment> segments;
    double total_length = 0.0;
    TurbulenceSpec spec;
    std::uint64_t seed = 0;
};

enum class Direction { forward, reverse };

/// Draws one screen per segment with independent seed-derived streams.
/// segment_count = 0 picks the smallest count keeping per-segment Rytov
/// variance below 1; an explicit count must meet the same criterion.
/// Cn^2 is distributed uniformly, so each segment screen carries
/// r0_segment = r0_total * m^{3/5}.
inline ChannelRealization make_channel(std::uint64_t seed,
                                       const TurbulenceSpec& spec,
                                       double aperture, const Grid& grid,
                                       int segment_count = 0, int terms = 172) {
    spec.validate();
    const int min_m = segment_path(spec);
    if (segment_count == 0) segment_count = min_m;
    if (segment_count < min_m)
        throw invalid_parameter(
            "make_channel: segment count leaves per-segment Rytov variance >= 1");

    TurbulenceSpec seg_spec = spec;
    seg_spec.path_length = spec.path_length / segment_count;
    if (spec.d_over_r0 > 0.0) {
        // re-express strength as Cn^2 so segment r0 follows from length
        seg_spec.cn2 = spec.effective_cn2();
        seg_spec.d_over_r0 = 0.0;
        seg_spec.aperture = 0.0;
    }

    ChannelRealization ch;
    ch.spec = spec;
    ch.seed = seed;
    ch.total_length = spec.path_length;
    const double dz = spec.path_length / segment_count;
    for (int i = 0; i < segment_count; ++i) {
        std::uint64_t s = seed_combine(seed, "segment");
        s = seed_combine(s, static_cast<std::uint64_t>(i));
        ch.segments.push_back({dz, sample_screen(s, seg_spec, aperture, grid, terms)});
    }
    return ch;
}

/// Symmetric split-step transmission: half drift, screen, half drift per
/// segment, with adjacent half drifts merged. Reverse traverses the same
/// frozen screens in reversed order over the same distances.
inline ComplexField transmit(const ComplexField& field,
                             const ChannelRealization& channel,
                             Direction direction) {
    if (channel.segments.empty())
        throw invalid_parameter("transmit: channel has no segments");
    const int m = static_cast<int>(channel.segments.size());
    auto seg = [&](int i) -> const ChannelRealization::Segment& {
        return channel.segments[direction == Direction::forward ? i : m - 1 - i];
    };
    ComplexField u = angular_spectrum_propagate(field, seg(0).dz / 2.0);
    for (int i = 0; i < m; ++i) {
        u = apply_phase(u, seg(i).screen);
        const double drift =
            (i + 1 < m) ? (seg(i).dz + seg(i + 1).dz) / 2.0 : seg(i).dz / 2.0;
        u = angular_spectrum_propagate(u, drift);
    }
    return u;
}

}  // namespace fsqkd

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "fsqkd/field.hpp"

namespace fsqkd {

/// F_{j,j'} = |<reference_j | received_{j'}>|^2, received normalized first.
inline Eigen::MatrixXd fidelity_matrix(const std::vector<ComplexField>& received,
                                       const std::vector<ComplexField>& reference) {
    if (received.size() != reference.size() || received.empty())
        throw invalid_parameter("fidelity_matrix: state count mismatch");
    const int d = static_cast<int>(received.size());
    std::vector<ComplexField> recv;
    recv.reserve(d);
    for (const auto& r : received) recv.push_back(normalized(r));
    Eigen::MatrixXd f(d, d);
    for (int j = 0; j < d; ++j)
        for (int jp = 0; jp < d; ++jp)
            f(j, jp) = std::norm(inner_product(reference[j], recv[jp]));
    return f;
}

/// Row-normalized crosstalk matrix M_{j,j'} = F_{j,j'} / sum_j' F_{j,j'}.
struct CrosstalkMatrix {
    int d = 0;
    Eigen::MatrixXd entries;
};

inline CrosstalkMatrix normalize_crosstalk(const Eigen::MatrixXd& f) {
    if (f.rows() != f.cols() || f.rows() < 2)
        throw invalid_parameter("normalize_crosstalk: need square matrix, d >= 2");
    CrosstalkMatrix m;
    m.d = static_cast<int>(f.rows());
    m.entries = f;
    for (int j = 0; j < m.d; ++j) {
        const double s = f.row(j).sum();
        if (!(s > 0.0))
            throw numerical_error("normalize_crosstalk: zero row (state lost)");
        m.entries.row(j) /= s;
    }
    return m;
}

/// Q_b = 1 - (1/d) sum_j M_{jj}.
inline double qer(const CrosstalkMatrix& m) {
    return 1.0 - m.entries.diagonal().sum() / m.d;
}

/// r = log2(d) + 2(1-Q)log2(1-Q) + 2Q log2(Q/(d-1)); x log x -> 0 limits.
inline double secure_key_rate(int d, double q) {
    if (d < 2) throw invalid_parameter("secure_key_rate: d must be >= 2");
    if (q < 0.0 || q >= 1.0)
        throw invalid_parameter("secure_key_rate: Q must lie in [0, 1)");
    double r = std::log2(static_cast<double>(d));
    if (q < 1.0 && q > 0.0) r += 2.0 * (1.0 - q) * std::log2(1.0 - q);
    if (q > 0.0) r += 2.0 * q * std::log2(q / (d - 1));
    return r;
}

/// Unique root of r(d, Q) = 0 in (0, (d-1)/d), by bisection to 1e-6.
inline double q_max(int d) {
    if (d < 2) throw invalid_parameter("q_max: d must be >= 2");
    double lo = 1e-12, hi = (d - 1.0) / d - 1e-12;
    for (int i = 0; i < 100 && hi - lo > 1e-9; ++i) {
        const double mid = 0.5 * (lo + hi);
        (secure_key_rate(d, mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double total_qer(const std::vector<double>& per_basis) {
    if (per_basis.empty()) throw invalid_parameter("total_qer: empty list");
    double s = 0.0;
    for (double q : per_basis) s += q;
    return s / per_basis.size();
}

/// Detection model of the experimental on-axis measurement: the received
/// field is multiplied by the conjugated projection hologram and the
/// energy landing in an on-axis disc of the transform plane is compared
/// with the same measurement for a perfect input. disc_radius is in
/// transform-plane angular frequency units [rad/m]; a radius below one
/// frequency sample reduces to |<projection|received>|^2.
inline double on_axis_overlap(const ComplexField& received,
                              const ComplexField& projection,
                              double disc_radius) {
    require_same_grid(received.grid, projection.grid, "on_axis_overlap");
    if (disc_radius < 0.0)
        throw invalid_parameter("on_axis_overlap: disc radius must be >= 0");
    auto disc_energy = [&](const ComplexField& input) {
        ComplexField prod = input;
        for (std::size_t i = 0; i < prod.samples.size(); ++i)
            prod.samples[i] *= std::conj(projection.samples[i]);
        const auto spec = angular_spectrum(prod);
        const double dq = 2.0 * std::numbers::pi / prod.grid.extent();
        const int n = prod.grid.n;
        const int kmax = static_cast<int>(disc_radius / dq);
        double acc = 0.0;
        for (int fy = -kmax; fy <= kmax; ++fy)
            for (int fx = -kmax; fx <= kmax; ++fx) {
                if (static_cast<double>(fx) * fx + static_cast<double>(fy) * fy >
                    (disc_radius / dq) * (disc_radius / dq))
                    continue;
                const int ix = (fx + n) % n;
                const int iy = (fy + n) % n;
                acc += std::norm(spec[prod.grid.index(ix, iy)]);
            }
        return acc;
    };
    const double signal = disc_energy(normalized(received));
    const double norm = disc_energy(projection);
    if (!(norm > 0.0))
        throw numerical_error("on_axis_overlap: projection self-signal vanishes");
    return signal / norm;
}

/// Per-realization measurement fragment and its Monte Carlo aggregate.
struct ScenarioResult {
    int d = 0;
    int realizations = 0;
    double qer_mean = 0.0, qer_se = 0.0;        ///< total QER over both bases
    double dfidelity_mean = 0.0, dfidelity_se = 0.0;  ///< 1 - mean diag fidelity
    double key_rate_mean = 0.0, key_rate_se = 0.0;
};

struct RealizationFragment {
    double qer = 0.0;         ///< total QER across bases
    double dfidelity = 0.0;   ///< 1 - mean diagonal raw fidelity, both bases
    double key_rate = 0.0;
};

inline ScenarioResult aggregate(int d,
                                const std::vector<RealizationFragment>& frags) {
    if (frags.size() < 2)
        throw invalid_parameter("aggregate: need at least two realizations");
    const int n = static_cast<int>(frags.size());
    auto mean_se = [&](auto getter, double& mean, double& se) {
        double s = 0.0;
        for (const auto& f : frags) s += getter(f);
        mean = s / n;
        double var = 0.0;
        for (const auto& f : frags) {
            const double delta = getter(f) - mean;
            var += delta * delta;
        }
        se = std::sqrt(var / (n - 1)) / std::sqrt(static_cast<double>(n));
    };
    ScenarioResult out;
    out.d = d;
    out.realizations = n;
    mean_se([](const RealizationFragment& f) { return f.qer; }, out.qer_mean,
            out.qer_se);
    mean_se([](const RealizationFragment& f) { return f.dfidelity; },
            out.dfidelity_mean, out.dfidelity_se);
    mean_se([](const RealizationFragment& f) { return f.key_rate; },
            out.key_rate_mean, out.key_rate_se);
    return out;
}

}  // namespace fsqkd

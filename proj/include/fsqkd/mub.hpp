#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fsqkd/modes.hpp"

namespace fsqkd {

/// Generalized Pauli (Weyl) operators in dimension d:
/// X|i> = |i+1 mod d>, Z|i> = omega^i |i>, omega = exp(i 2 pi / d).
struct WeylOperators {
    Eigen::MatrixXcd X;
    Eigen::MatrixXcd Z;
};

inline WeylOperators weyl_operators(int d) {
    if (d < 2) throw invalid_parameter("weyl_operators: d must be >= 2");
    WeylOperators w;
    w.X = Eigen::MatrixXcd::Zero(d, d);
    w.Z = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        w.X((i + 1) % d, i) = 1.0;
        const double th = 2.0 * std::numbers::pi * i / d;
        w.Z(i, i) = cplx(std::cos(th), std::sin(th));
    }
    return w;
}

/// Eigenbasis of a (presumed unitary, non-degenerate) matrix with a
/// deterministic convention: columns sorted by eigenvalue phase in
/// [0, 2 pi) ascending, each column's first entry above 1e-8 in magnitude
/// rotated to the positive real axis.
inline Eigen::MatrixXcd eigenbasis(const Eigen::MatrixXcd& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success)
        throw numerical_error("eigenbasis: eigensolver failed");
    const int d = static_cast<int>(m.rows());
    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    auto phase = [&](int i) {
        double p = std::arg(solver.eigenvalues()(i));
        if (p < 0.0) p += 2.0 * std::numbers::pi;
        return p;
    };
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return phase(a) < phase(b); });
    Eigen::MatrixXcd basis(d, d);
    for (int c = 0; c < d; ++c) {
        Eigen::VectorXcd v = solver.eigenvectors().col(order[c]);
        v.normalize();
        for (int r = 0; r < d; ++r) {
            if (std::abs(v(r)) > 1e-8) {
                v *= std::conj(v(r)) / std::abs(v(r));
                break;
            }
        }
        basis.col(c) = v;
    }
    return basis;
}

/// Deviation report for a candidate pair of bases (columns = vectors).
struct MubReport {
    double orthonormality = 0.0;  ///< max |<a_i|a_j> - delta_ij| within a basis
    double unbiasedness = 0.0;    ///< max | |<a_i|b_j>| - 1/sqrt(d) |
    bool certified(double tol) const {
        return orthonormality <= tol && unbiasedness <= tol;
    }
};

inline MubReport verify_mub(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw invalid_parameter("verify_mub: bases must be square and same size");
    const int d = static_cast<int>(a.rows());
    MubReport rep;
    for (const auto* m : {&a, &b}) {
        Eigen::MatrixXcd g = m->adjoint() * (*m);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double target = (i == j) ? 1.0 : 0.0;
                rep.orthonormality =
                    std::max(rep.orthonormality, std::abs(g(i, j) - target));
            }
    }
    const double flat = 1.0 / std::sqrt(static_cast<double>(d));
    Eigen::MatrixXcd cross = a.adjoint() * b;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            rep.unbiasedness =
                std::max(rep.unbiasedness, std::abs(std::abs(cross(i, j)) - flat));
    return rep;
}

/// Two mutually unbiased bases built from eigenbases of X Z^a and X Z^b.
struct MubPair {
    int d = 0;
    int power_a = 0;  ///< first basis = eigenbasis of X Z^power_a
    int power_b = 0;
    Eigen::MatrixXcd basis_a;  ///< columns are basis vectors
    Eigen::MatrixXcd basis_b;
    MubReport report;
};

/// Picks eigenbases of X Z^a and X Z^b that certify as mutually unbiased
/// at 1e-10. d = 2 and d = 5 use fixed pairs matching the reference state
/// tables; other dimensions take the first (a, b), a < b <= d, that
/// certifies. Every vector of an X Z^a eigenbasis has flat magnitudes, so
/// the matched OAM superpositions share one diameter.
inline MubPair build_mub_pair(int d) {
    const WeylOperators w = weyl_operators(d);
    auto xz = [&](int p) {
        Eigen::MatrixXcd m = w.X;
        for (int i = 0; i < p; ++i) m = m * w.Z;
        return m;
    };
    auto make = [&](int a, int b) {
        MubPair pair;
        pair.d = d;
        pair.power_a = a;
        pair.power_b = b;
        pair.basis_a = eigenbasis(xz(a));
        pair.basis_b = eigenbasis(xz(b));
        pair.report = verify_mub(pair.basis_a, pair.basis_b);
        return pair;
    };
    constexpr double tol = 1e-10;
    if (d == 2) {
        MubPair p = make(0, 1);
        if (!p.report.certified(tol))
            throw numerical_error("build_mub_pair: d=2 pair failed certification");
        return p;
    }
    if (d == 5) {
        MubPair p = make(4, 1);
        if (!p.report.certified(tol))
            throw numerical_error("build_mub_pair: d=5 pair failed certification");
        return p;
    }
    for (int a = 0; a <= d; ++a)
        for (int b = a + 1; b <= d; ++b) {
            MubPair p = make(a, b);
            if (p.report.certified(tol)) return p;
        }
    throw numerical_error("build_mub_pair: no certified pair found");
}

/// OAM ladder backing the computational basis: symmetric about zero for
/// odd d; for even d the l = 0 slot is skipped so sizes stay paired.
inline std::vector<int> oam_indices(int d) {
    if (d < 2) throw invalid_parameter("oam_indices: d must be >= 2");
    std::vector<int> ls(d);
    if (d % 2 == 1) {
        for (int i = 0; i < d; ++i) ls[i] = i - (d - 1) / 2;
    } else {
        for (int i = 0; i < d; ++i) {
            const int l = i - d / 2;
            ls[i] = (l < 0) ? l : l + 1;
        }
    }
    return ls;
}

/// Sampled spatial states for every vector of both bases. Each column of
/// coefficients weights the LG_{p=0} ladder from oam_indices(d). Verifies
/// the sampled states stay orthonormal within 1e-3 and share one
/// second-moment diameter within 2%.
struct SpatialBasisSet {
    MubPair mub;
    std::vector<ComplexField> states_a;  ///< one per column of basis_a
    std::vector<ComplexField> states_b;
    double diameter = 0.0;  ///< common second-moment diameter [m]
};

inline SpatialBasisSet synthesize_states(const MubPair& mub, double w0,
                                         double wavelength, const Grid& grid) {
    const int d = mub.d;
    const std::vector<int> ls = oam_indices(d);
    std::vector<ComplexField> ladder;
    ladder.reserve(d);
    for (int l : ls)
        ladder.push_back(lg_mode({w0, l, 0, 0.0, wavelength}, grid));

    SpatialBasisSet set;
    set.mub = mub;
    auto build = [&](const Eigen::MatrixXcd& basis) {
        std::vector<ComplexField> states;
        for (int c = 0; c < d; ++c) {
            std::vector<cplx> coeffs(d);
            for (int r = 0; r < d; ++r) coeffs[r] = basis(r, c);
            states.push_back(superpose(coeffs, ladder));
        }
        return states;
    };
    set.states_a = build(mub.basis_a);
    set.states_b = build(mub.basis_b);

    for (const auto* states : {&set.states_a, &set.states_b})
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const cplx g = inner_product((*states)[i], (*states)[j]);
                const double target = (i == j) ? 1.0 : 0.0;
                if (std::abs(g - target) > 1e-3)
                    throw numerical_error(
                        "synthesize_states: sampled basis not orthonormal");
            }

    // family diameter about the optical axis, not the centroid: states
    // mixing adjacent l carry a phase-dependent centroid shift, while the
    // shared-diameter law is a statement about axis-referenced moments
    auto axis_diameter = [](const ComplexField& u) {
        double r2 = 0.0, p = 0.0;
        for (int iy = 0; iy < u.grid.n; ++iy) {
            const double y = u.grid.coord(iy);
            for (int ix = 0; ix < u.grid.n; ++ix) {
                const double x = u.grid.coord(ix);
                const double w = std::norm(u.samples[u.grid.index(ix, iy)]);
                r2 += w * (x * x + y * y);
                p += w;
            }
        }
        return 2.0 * std::sqrt(2.0 * r2 / p);
    };
    double dmin = 0.0, dmax = 0.0;
    bool first = true;
    double dsum = 0.0;
    int count = 0;
    for (const auto* states : {&set.states_a, &set.states_b})
        for (const auto& s : *states) {
            const double diam = axis_diameter(s);
            dsum += diam;
            ++count;
            if (first) {
                dmin = dmax = diam;
                first = false;
            } else {
                dmin = std::min(dmin, diam);
                dmax = std::max(dmax, diam);
            }
        }
    set.diameter = dsum / count;
    if ((dmax - dmin) / set.diameter > 0.02)
        throw numerical_error("synthesize_states: state diameters spread above 2%");
    return set;
}

}  // namespace fsqkd

#include <doctest.h>

#include "fsqkd/mub.hpp"
#include "fsqkd/qkd.hpp"
#include "fsqkd/rng.hpp"

using namespace fsqkd;

namespace {

double binary_entropy(double p) {
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace

TEST_SUITE("qkd") {

TEST_CASE("fidelity matrix on exact and shifted state sets") {
    const Grid grid(256, 0.24 / 256);
    const SpatialBasisSet set =
        synthesize_states(build_mub_pair(5), 0.01, 810e-9, grid);

    const Eigen::MatrixXd ident =
        fidelity_matrix(set.states_a, set.states_a);
    CHECK((ident - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <
          1e-6);

    std::vector<ComplexField> shifted;
    for (int j = 0; j < 5; ++j) shifted.push_back(set.states_a[(j + 1) % 5]);
    const Eigen::MatrixXd perm = fidelity_matrix(shifted, set.states_a);
    for (int j = 0; j < 5; ++j)
        for (int jp = 0; jp < 5; ++jp) {
            const double want = (j == (jp + 1) % 5) ? 1.0 : 0.0;
            CHECK(std::abs(perm(j, jp) - want) < 1e-3);
        }

    const Eigen::MatrixXd cross = fidelity_matrix(set.states_b, set.states_a);
    for (int j = 0; j < 5; ++j)
        for (int jp = 0; jp < 5; ++jp)
            CHECK(std::abs(cross(j, jp) - 0.2) < 1e-3);
}

TEST_CASE("crosstalk normalization and qer") {
    Eigen::MatrixXd f(2, 2);
    f << 0.9, 0.1, 0.2, 0.6;
    const CrosstalkMatrix m = normalize_crosstalk(f);
    CHECK(m.entries.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.entries.row(1).sum() == doctest::Approx(1.0).epsilon(1e-12));

    Eigen::MatrixXd diag(2, 2);
    diag << 0.9, 0.1, 0.2, 0.8;
    // already row-normalized: Q = 1 - (0.9 + 0.8)/2
    const CrosstalkMatrix md = normalize_crosstalk(diag);
    CHECK(qer(md) == doctest::Approx(0.15).epsilon(1e-12));

    const CrosstalkMatrix id =
        normalize_crosstalk(Eigen::MatrixXd::Identity(4, 4));
    CHECK(qer(id) == doctest::Approx(0.0));
    const CrosstalkMatrix uni =
        normalize_crosstalk(Eigen::MatrixXd::Ones(4, 4));
    CHECK(qer(uni) == doctest::Approx(0.75));

    Eigen::MatrixXd zero_row = Eigen::MatrixXd::Identity(3, 3);
    zero_row.row(1).setZero();
    CHECK_THROWS_AS(normalize_crosstalk(zero_row), numerical_error);
}

TEST_CASE("secure key rate endpoints and d=2 entropy form") {
    CHECK(secure_key_rate(2, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(secure_key_rate(5, 0.0) ==
          doctest::Approx(std::log2(5.0)).epsilon(1e-12));
    for (double q = 0.01; q < 0.5; q += 0.02)
        CHECK(secure_key_rate(2, q) ==
              doctest::Approx(1.0 - 2.0 * binary_entropy(q)).epsilon(1e-12));
    CHECK_THROWS_AS(secure_key_rate(2, 1.0), invalid_parameter);
    CHECK_THROWS_AS(secure_key_rate(2, -0.1), invalid_parameter);
    CHECK_THROWS_AS(secure_key_rate(1, 0.1), invalid_parameter);
}

TEST_CASE("key rate decreases with qer up to the zero crossing") {
    for (int d : {2, 5, 10}) {
        const double qm = q_max(d);
        double prev = secure_key_rate(d, 0.0);
        for (int i = 1; i <= 50; ++i) {
            const double q = qm * i / 50.0;
            const double r = secure_key_rate(d, q);
            CHECK(r < prev);
            prev = r;
        }
    }
}

TEST_CASE("q_max values and monotonicity") {
    // independent oracle: bisect 1 - 2 H2(q) = 0 directly
    double lo = 1e-9, hi = 0.49;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (1.0 - 2.0 * binary_entropy(mid) > 0.0 ? lo : hi) = mid;
    }
    CHECK(q_max(2) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
    CHECK(std::abs(q_max(2) - 0.1100) < 1e-4);
    for (int d = 2; d <= 9; ++d) CHECK(q_max(d + 1) > q_max(d));
    for (int d = 2; d <= 10; ++d)
        CHECK(std::abs(secure_key_rate(d, q_max(d))) < 1e-6);
}

TEST_CASE("total qer") {
    CHECK(total_qer({0.0, 0.0}) == 0.0);
    CHECK(total_qer({0.1, 0.3}) == doctest::Approx(0.2));
    CHECK(total_qer({0.4}) == doctest::Approx(0.4));
    CHECK_THROWS_AS(total_qer({}), invalid_parameter);
}

TEST_CASE("on-axis overlap reduces to the exact inner product") {
    const Grid grid(128, 0.2 / 128);
    const SpatialBasisSet set =
        synthesize_states(build_mub_pair(2), 0.008, 810e-9, grid);
    GaussianRng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<cplx> c(2);
        for (auto& v : c) v = cplx(rng(), rng());
        std::vector<ComplexField> ladder = {set.states_a[0], set.states_a[1]};
        const ComplexField a = superpose({c[0], c[1]}, ladder);
        for (auto& v : c) v = cplx(rng(), rng());
        const ComplexField b = superpose({c[0], c[1]}, ladder);
        const double exact = std::norm(inner_product(b, a));
        CHECK(std::abs(on_axis_overlap(a, b, 0.0) - exact) < 1e-6);
    }
}

TEST_CASE("finite detection disc stays close to the inner product") {
    const Grid grid(256, 0.24 / 256);
    const SpatialBasisSet set =
        synthesize_states(build_mub_pair(2), 0.01, 810e-9, grid);
    const double dq = 2.0 * std::numbers::pi / grid.extent();
    for (const auto& recv : set.states_b) {
        for (const auto& proj : set.states_a) {
            const double exact = std::norm(inner_product(proj, recv));
            const double disc = on_axis_overlap(recv, proj, 2.5 * dq);
            CHECK(std::abs(disc - exact) < 0.02);
        }
    }
}

TEST_CASE("aggregation of realization fragments") {
    std::vector<RealizationFragment> same(3, {0.2, 0.1, 0.9});
    const ScenarioResult r1 = aggregate(2, same);
    CHECK(r1.qer_mean == doctest::Approx(0.2));
    CHECK(r1.qer_se == doctest::Approx(0.0));

    std::vector<RealizationFragment> two = {{0.1, 0.0, 0.0}, {0.3, 0.0, 0.0}};
    const ScenarioResult r2 = aggregate(2, two);
    CHECK(r2.qer_mean == doctest::Approx(0.2));
    CHECK(r2.qer_se == doctest::Approx(0.1));

    CHECK_THROWS_AS(aggregate(2, {{0.1, 0.1, 0.1}}), invalid_parameter);
}

}  // TEST_SUITE

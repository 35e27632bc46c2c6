#include <doctest.h>

#include "fsqkd/turbulence.hpp"

using namespace fsqkd;

namespace {

TurbulenceSpec ratio_spec(double d_over_r0, double aperture = 0.06) {
    TurbulenceSpec s;
    s.wavelength = 810e-9;
    s.path_length = 1000.0;
    s.d_over_r0 = d_over_r0;
    s.aperture = aperture;
    return s;
}

}  // namespace

TEST_SUITE("turbulence") {

TEST_CASE("fried and rytov formulas") {
    CHECK(rytov_variance(4.2e-14, 810e-9, 1000.0) ==
          doctest::Approx(1.78).epsilon(0.02));
    CHECK(rytov_variance(4.2e-14, 810e-9, 250.0) ==
          doctest::Approx(0.14).epsilon(0.05));
    CHECK(rytov_variance(4.2e-9, 840e-9, 1.0) ==
          doctest::Approx(0.54).epsilon(0.02));

    const double r0 = fried_parameter(4.2e-14, 810e-9, 1000.0);
    // formula value; the doubled-Cn2 power law is the robust check
    CHECK(0.06 / r0 == doctest::Approx(3.9404).epsilon(0.001));
    CHECK(fried_parameter(8.4e-14, 810e-9, 1000.0) ==
          doctest::Approx(r0 * std::pow(2.0, -3.0 / 5.0)).epsilon(1e-9));
    CHECK_THROWS_AS(fried_parameter(0.0, 810e-9, 1000.0), invalid_parameter);
    CHECK_THROWS_AS(rytov_variance(1e-14, -1.0, 1000.0), invalid_parameter);
}

TEST_CASE("structure function formula") {
    CHECK(theoretical_structure(0.0, 0.01) == 0.0);
    CHECK(theoretical_structure(0.01, 0.01) == doctest::Approx(6.88));
    CHECK(theoretical_structure(0.02, 0.01) ==
          doctest::Approx(6.88 * std::pow(2.0, 5.0 / 3.0)));
}

TEST_CASE("spec parameterizations resolve consistently") {
    TurbulenceSpec phys;
    phys.wavelength = 810e-9;
    phys.path_length = 1000.0;
    phys.cn2 = 4.2e-14;
    CHECK(phys.r0() == doctest::Approx(0.06 / 3.9404).epsilon(1e-3));

    const TurbulenceSpec ratio = ratio_spec(4.0);
    CHECK(ratio.r0() == doctest::Approx(0.015));
    // inverting back through Cn2 reproduces the same r0
    TurbulenceSpec round = ratio;
    round.cn2 = ratio.effective_cn2();
    round.d_over_r0 = 0.0;
    round.aperture = 0.0;
    CHECK(round.r0() == doctest::Approx(ratio.r0()).epsilon(1e-9));

    TurbulenceSpec both = ratio;
    both.cn2 = 1e-14;
    CHECK_THROWS_AS(both.validate(), invalid_parameter);
}

TEST_CASE("segment_path picks the smallest valid split") {
    TurbulenceSpec s;
    s.wavelength = 810e-9;
    s.path_length = 1000.0;
    s.cn2 = 4.2e-14;  // sigma^2 = 1.78
    const int m = segment_path(s);
    CHECK(m == 2);
    CHECK(rytov_variance(s.cn2, s.wavelength, s.path_length / m) < 1.0);
    CHECK(rytov_variance(s.cn2, s.wavelength, s.path_length / (m - 1)) >= 1.0);

    s.cn2 = 4.2e-14 * 0.5 / 1.783;  // sigma^2 = 0.5
    CHECK(segment_path(s) == 1);
}

TEST_CASE("noll covariance: structure, oracle values, scaling") {
    const Eigen::MatrixXd cov = noll_covariance(200);
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    CHECK(es.eigenvalues().minCoeff() > -1e-12 * cov.trace());

    // tip/tilt variance and piston-removed total against the published
    // Kolmogorov residual table (delta_1 = 1.0299, delta_3 = 0.134)
    const double tilt = cov(0, 0) + cov(1, 1);
    CHECK(tilt == doctest::Approx(1.0299 - 0.134).epsilon(0.05));
    const Eigen::MatrixXd cov400 = noll_covariance(400);
    CHECK(cov400.trace() == doctest::Approx(1.0299).epsilon(0.05));

    // terms with different azimuthal parity are uncorrelated:
    // j=2 (tilt, m=1) vs j=4 (defocus, m=0)
    CHECK(cov(0, 2) == 0.0);

    const Eigen::MatrixXd cov2 = noll_covariance(200, 2.0);
    CHECK((cov2 - std::pow(2.0, 5.0 / 3.0) * cov).cwiseAbs().maxCoeff() <
          1e-12);

    CHECK_THROWS_AS(noll_covariance(2), invalid_parameter);
}

TEST_CASE("screen sampling: determinism, zero limit, strength scaling") {
    const Grid grid(64, 0.072 / 64);
    const PhaseScreen a = sample_screen(42, ratio_spec(3.0), 0.06, grid, 54);
    const PhaseScreen b = sample_screen(42, ratio_spec(3.0), 0.06, grid, 54);
    CHECK(a.phase == b.phase);
    const PhaseScreen c = sample_screen(43, ratio_spec(3.0), 0.06, grid, 54);
    CHECK(a.phase != c.phase);

    TurbulenceSpec calm;
    calm.wavelength = 810e-9;
    calm.path_length = 1000.0;
    const PhaseScreen zero = sample_screen(42, calm, 0.06, grid, 54);
    for (double v : zero.phase) CHECK(v == 0.0);

    // equal seeds: the whole screen scales by (ratio)^{5/6} exactly
    const PhaseScreen weak = sample_screen(7, ratio_spec(1.0), 0.06, grid, 54);
    const PhaseScreen strong = sample_screen(7, ratio_spec(2.0), 0.06, grid, 54);
    const double scale = std::pow(2.0, 5.0 / 6.0);
    double maxdev = 0.0;
    for (std::size_t i = 0; i < weak.phase.size(); ++i)
        maxdev = std::max(maxdev,
                          std::abs(strong.phase[i] - scale * weak.phase[i]));
    CHECK(maxdev < 1e-9);
}

TEST_CASE("screen ensemble is zero-mean") {
    const Grid grid(64, 0.072 / 64);
    const int n = 100;
    std::vector<double> means;
    const double rad2 = 0.03 * 0.03;
    for (int i = 0; i < n; ++i) {
        const PhaseScreen s = sample_screen(
            seed_combine(1234, static_cast<std::uint64_t>(i)), ratio_spec(3.0),
            0.06, grid, 54);
        double acc = 0.0;
        std::size_t count = 0;
        for (int iy = 0; iy < grid.n; ++iy)
            for (int ix = 0; ix < grid.n; ++ix) {
                const double x = grid.coord(ix), y = grid.coord(iy);
                if (x * x + y * y > rad2) continue;
                acc += s.phase[grid.index(ix, iy)];
                ++count;
            }
        means.push_back(acc / count);
    }
    double mean = 0.0;
    for (double v : means) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : means) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (n - 1));
    CHECK(std::abs(mean) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ensemble structure function tracks the 5/3 law") {
    const double D = 0.06;
    const Grid grid(128, 1.2 * D / 128);
    const TurbulenceSpec spec = ratio_spec(3.0, D);
    std::vector<PhaseScreen> screens;
    for (int i = 0; i < 100; ++i)
        screens.push_back(sample_screen(
            seed_combine(777, static_cast<std::uint64_t>(i)), spec, D, grid));

    std::vector<double> seps;
    for (double r = 0.1 * D; r <= 0.5 * D + 1e-12; r += 0.1 * D)
        seps.push_back(grid.dx * std::lround(r / grid.dx));
    const auto est = structure_function_estimate(screens, seps);
    const double r0 = spec.r0();
    for (std::size_t i = 0; i < seps.size(); ++i)
        CHECK(est[i] ==
              doctest::Approx(theoretical_structure(seps[i], r0)).epsilon(0.10));

    CHECK(structure_function_estimate(screens, {0.0})[0] == 0.0);
    CHECK_THROWS_AS(structure_function_estimate({screens[0]}, {0.01}),
                    invalid_parameter);
    CHECK_THROWS_AS(structure_function_estimate(screens, {2.0 * D}),
                    invalid_parameter);
}

}  // TEST_SUITE

#include <doctest.h>

#include "fsqkd/stimpdc.hpp"

using namespace fsqkd;

namespace {

const double lambda = 810e-9;

std::vector<ComplexField> all_states(const SpatialBasisSet& set) {
    std::vector<ComplexField> out = set.states_a;
    out.insert(out.end(), set.states_b.begin(), set.states_b.end());
    return out;
}

}  // namespace

TEST_SUITE("stimpdc") {

TEST_CASE("broad seed transfers the pump mode almost perfectly") {
    const Grid grid(512, 0.9 / 512);
    const ComplexField pump = lg_mode({0.01, 2, 0, 0.0, lambda}, grid);
    const ComplexField seed = lg_mode({0.1, 0, 0, 0.0, lambda}, grid);
    const ComplexField idler = stimulate_idler(pump, seed);
    CHECK(std::norm(inner_product(pump, idler)) > 0.99);
    CHECK(transfer_fidelity(pump, seed) > 0.99);
}

TEST_CASE("gaussian pump and seed give the product-rule idler waist") {
    const double w_a = 0.01, gamma = 2.0;
    const Grid grid(512, 0.24 / 512);
    const ComplexField pump = lg_mode({w_a, 0, 0, 0.0, lambda}, grid);
    const ComplexField seed = lg_mode({gamma * w_a, 0, 0, 0.0, lambda}, grid);
    const ComplexField idler = stimulate_idler(pump, seed);
    // 1/w_i^2 = 1/w_A^2 + 1/w_B^2
    const double w_i = w_a * gamma / std::sqrt(1.0 + gamma * gamma);
    CHECK(second_moment_diameter(idler) ==
          doctest::Approx(2.0 * w_i).epsilon(0.005));
}

TEST_CASE("screen phase on the seed appears conjugated on the idler") {
    const Grid grid(128, 0.16 / 128);
    const ComplexField pump = lg_mode({0.01, 1, 0, 0.0, lambda}, grid);
    const ComplexField seed = lg_mode({0.02, 0, 0, 0.0, lambda}, grid);
    PhaseScreen screen(grid, std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < screen.phase.size(); ++i)
        screen.phase[i] = std::cos(0.11 * i);
    PhaseScreen neg = screen;
    for (auto& v : neg.phase) v = -v;

    const ComplexField with_screen =
        stimulate_idler(pump, apply_phase(seed, screen));
    const ComplexField expected =
        apply_phase(stimulate_idler(pump, seed), neg);
    double dev = 0.0;
    for (std::size_t i = 0; i < with_screen.samples.size(); ++i)
        dev = std::max(dev,
                       std::abs(with_screen.samples[i] - expected.samples[i]));
    CHECK(dev < 1e-12);
}

TEST_CASE("transfer fidelity reference values and uniformity") {
    const Grid grid(512, 0.3 / 512);
    const double w_a = 0.01;
    auto fidelities = [&](int d, double gamma) {
        const SpatialBasisSet set =
            synthesize_states(build_mub_pair(d), w_a, lambda, grid);
        const ComplexField seed =
            lg_mode({gamma * w_a, 0, 0, 0.0, lambda}, grid);
        std::vector<double> out;
        for (const auto& s : all_states(set))
            out.push_back(transfer_fidelity(s, seed));
        return out;
    };

    auto check_band = [](const std::vector<double>& fs, double center,
                         double tol) {
        double lo = fs[0], hi = fs[0];
        for (double f : fs) {
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        CHECK(hi - lo < 0.01);  // every state of the set behaves alike
        for (double f : fs) CHECK(std::abs(f - center) < tol);
    };

    check_band(fidelities(2, 1.0), 0.79, 0.02);
    check_band(fidelities(5, 1.0), 0.73, 0.02);
    check_band(fidelities(2, 2.0), 0.97, 0.01);
    check_band(fidelities(5, 2.0), 0.97, 0.01);
}

TEST_CASE("fidelity depends only on the waist ratio") {
    auto fid = [&](double w_a, int n, double window) {
        const Grid grid(n, window / n);
        const ComplexField pump = lg_mode({w_a, 2, 0, 0.0, lambda}, grid);
        const ComplexField seed =
            lg_mode({2.0 * w_a, 0, 0, 0.0, lambda}, grid);
        return transfer_fidelity(pump, seed);
    };
    // grids scaled with the waists: quadrature is identical
    const double f1 = fid(0.01, 512, 0.24);
    const double f2 = fid(0.015, 512, 0.36);
    CHECK(std::abs(f1 - f2) < 1e-6);
}

TEST_CASE("fidelity is monotone in gamma") {
    const Grid grid(512, 0.52 / 512);
    const double w_a = 0.008;
    const SpatialBasisSet set =
        synthesize_states(build_mub_pair(2), w_a, lambda, grid);
    for (const auto& s : all_states(set)) {
        double prev = 0.0;
        for (double gamma : {0.5, 1.0, 2.0, 3.0, 4.0}) {
            const ComplexField seed =
                lg_mode({gamma * w_a, 0, 0, 0.0, lambda}, grid);
            const double f = transfer_fidelity(s, seed);
            CHECK(f >= prev - 1e-9);
            prev = f;
        }
    }
}

TEST_CASE("product form and overlap form of the fidelity agree") {
    const Grid grid(256, 0.24 / 256);
    const ComplexField pump = lg_mode({0.01, -2, 0, 0.0, lambda}, grid);
    const ComplexField seed = lg_mode({0.017, 0, 0, 0.0, lambda}, grid);
    const double via_eq = transfer_fidelity(pump, seed);
    const double via_overlap =
        std::norm(inner_product(pump, stimulate_idler(pump, seed)));
    CHECK(std::abs(via_eq - via_overlap) < 1e-9);
}

TEST_CASE("waist optimizer rejects degenerate short paths") {
    CHECK_THROWS_AS(optimize_probe_waist(0.1, 2.0, lambda, 2),
                    numerical_error);
    CHECK_THROWS_AS(optimize_probe_waist(-1.0, 2.0, lambda, 2),
                    invalid_parameter);
}

TEST_CASE("idler starts narrower than the probe") {
    StimConfig cfg;
    cfg.gamma = 2.0;
    cfg.w_A = 0.015;
    cfg.wavelength = lambda;
    const Grid grid = detail::stim_grid(0.03, 2.0, 2, lambda);
    const DiameterCurve c = idler_diameter_curve(cfg, 2, {0.0, 1000.0}, grid);
    CHECK(c.idler[0] < c.probe[0]);
}

}  // TEST_SUITE

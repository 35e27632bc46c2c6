// Command-line front end: turbulence sweep runner plus the smaller
// diagnostic subcommands (screen validation, waist optimization, basis
// certification, key-rate analytics).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fsqkd/harness.hpp"
#include "fsqkd/io.hpp"

namespace {

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 int threads) {
    std::ifstream is(config_path);
    if (!is) {
        std::cerr << "error: cannot open config " << config_path << "\n";
        return 1;
    }
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config parse: " << e.what() << "\n";
        return 1;
    }
    fsqkd::ScenarioConfig config;
    try {
        config = fsqkd::ScenarioConfig::from_json(j);
    } catch (const fsqkd::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<fsqkd::SweepRow> rows;
    try {
        rows = fsqkd::sweep(config, threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir + "/results.csv");
        csv << fsqkd::sweep_csv(rows);
    }
    {
        std::ofstream manifest(out_dir + "/manifest.json");
        manifest << fsqkd::sweep_manifest(config, rows, wall);
    }
    int failed = 0;
    for (const auto& r : rows)
        if (!r.ok) {
            ++failed;
            std::cerr << "point failed: " << fsqkd::scheme_name(r.scheme)
                      << " d=" << r.d << " D/r0=" << r.d_over_r0 << ": "
                      << r.error << "\n";
        }
    std::cout << "wrote " << rows.size() << " sweep points to " << out_dir
              << "/results.csv (" << failed << " failed)\n";
    return failed == 0 ? 0 : 3;
}

int run_validate_screens(double d_over_r0, int terms, int count) {
    const double aperture = 0.06;
    const fsqkd::Grid grid(256, 1.2 * aperture / 256);
    fsqkd::TurbulenceSpec spec;
    spec.wavelength = 810e-9;
    spec.path_length = 1000.0;
    spec.d_over_r0 = d_over_r0;
    spec.aperture = aperture;

    std::vector<fsqkd::PhaseScreen> screens;
    screens.reserve(count);
    for (int i = 0; i < count; ++i) {
        const std::uint64_t seed =
            fsqkd::seed_combine(fsqkd::seed_combine(1, "validate-screens"),
                                static_cast<std::uint64_t>(i));
        screens.push_back(
            fsqkd::sample_screen(seed, spec, aperture, grid, terms));
    }

    std::vector<double> seps;
    for (double r = 0.1 * aperture; r <= 0.5 * aperture + 1e-12;
         r += 0.025 * aperture)
        seps.push_back(grid.dx * std::lround(r / grid.dx));
    const auto est = fsqkd::structure_function_estimate(screens, seps);

    std::cout << "r_m,D_est,D_theory\n";
    std::cout.precision(9);
    const double r0 = spec.r0();
    for (std::size_t i = 0; i < seps.size(); ++i)
        std::cout << seps[i] << ',' << est[i] << ','
                  << fsqkd::theoretical_structure(seps[i], r0) << '\n';
    return 0;
}

int run_optimize_waist(double z_t, double gamma, double lambda, int lmax) {
    const double w_b = fsqkd::optimize_probe_waist(z_t, gamma, lambda, lmax);
    std::cout << "w_B_m," << w_b << "\n";
    fsqkd::StimConfig cfg;
    cfg.gamma = gamma;
    cfg.w_A = w_b / gamma;
    cfg.wavelength = lambda;
    const fsqkd::Grid grid =
        fsqkd::detail::stim_grid(w_b, gamma, lmax, lambda);
    std::vector<double> zs;
    for (int i = 0; i <= 40; ++i) zs.push_back(z_t * i / 40.0);
    const auto curve = fsqkd::idler_diameter_curve(cfg, lmax, zs, grid);
    std::cout << "z_m,D_probe,D_idler\n";
    std::cout.precision(9);
    for (std::size_t i = 0; i < zs.size(); ++i)
        std::cout << curve.z[i] << ',' << curve.probe[i] << ','
                  << curve.idler[i] << '\n';
    return 0;
}

int run_mub_check(int dim) {
    const fsqkd::MubPair pair = fsqkd::build_mub_pair(dim);
    std::cout << "d=" << pair.d << " bases: eig(XZ^" << pair.power_a
              << "), eig(XZ^" << pair.power_b << ")\n";
    std::cout << "orthonormality deviation: " << pair.report.orthonormality
              << "\n";
    std::cout << "unbiasedness deviation:   " << pair.report.unbiasedness
              << "\n";
    const bool ok = pair.report.certified(1e-10);
    std::cout << (ok ? "certified" : "NOT certified") << " at 1e-10\n";
    return ok ? 0 : 2;
}

int run_mub_export(int dim) {
    const fsqkd::MubPair pair = fsqkd::build_mub_pair(dim);
    std::cout.precision(17);
    for (const auto* basis : {&pair.basis_a, &pair.basis_b}) {
        for (int r = 0; r < dim; ++r) {
            for (int c = 0; c < dim; ++c) {
                const auto v = (*basis)(r, c);
                std::cout << v.real() << ',' << v.imag();
                std::cout << (c + 1 < dim ? ' ' : '\n');
            }
        }
        std::cout << '\n';
    }
    return 0;
}

int run_keyrate(int dim, double q) {
    std::cout.precision(9);
    std::cout << "r," << fsqkd::secure_key_rate(dim, q) << "\n";
    std::cout << "q_max," << fsqkd::q_max(dim) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatial-mode QKD turbulence simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    int threads = 1;
    auto* simulate = app.add_subcommand("simulate", "run a configured sweep");
    simulate->add_option("--config", config_path, "JSON config path")
        ->required();
    simulate->add_option("--out", out_dir, "output directory");
    simulate->add_option("--threads", threads, "worker threads");

    double d_over_r0 = 3.0;
    int terms = 172, count = 100;
    auto* screens =
        app.add_subcommand("validate-screens", "structure-function check");
    screens->add_option("--d-over-r0", d_over_r0, "D/r0 ratio")->required();
    screens->add_option("--terms", terms, "Zernike terms J");
    screens->add_option("--count", count, "screen count N");

    double z_t = 1000.0, gamma = 2.0, lambda = 810e-9;
    int lmax = 2;
    auto* waist = app.add_subcommand("optimize-waist", "solve D_B = D_i");
    waist->add_option("--zt", z_t, "path length [m]")->required();
    waist->add_option("--gamma", gamma, "w_B/w_A ratio");
    waist->add_option("--lambda", lambda, "wavelength [m]");
    waist->add_option("--lmax", lmax, "largest |l| in the basis");

    int dim = 2;
    auto* mub = app.add_subcommand("mub", "basis construction");
    mub->require_subcommand(1);
    auto* mub_check = mub->add_subcommand("check", "certification report");
    mub_check->add_option("--dim", dim, "dimension")->required();
    auto* mub_export = mub->add_subcommand("export", "print matrices (re,im)");
    mub_export->add_option("--dim", dim, "dimension")->required();

    int kr_dim = 2;
    double kr_q = 0.0;
    auto* keyrate = app.add_subcommand("keyrate", "key-rate analytics");
    keyrate->add_option("--dim", kr_dim, "dimension")->required();
    keyrate->add_option("--qer", kr_q, "quantum error rate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return run_simulate(config_path, out_dir, threads);
        if (*screens) return run_validate_screens(d_over_r0, terms, count);
        if (*waist) return run_optimize_waist(z_t, gamma, lambda, lmax);
        if (*mub) {
            if (*mub_check) return run_mub_check(dim);
            if (*mub_export) return run_mub_export(dim);
        }
        if (*keyrate) return run_keyrate(kr_dim, kr_q);
    } catch (const fsqkd::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fsqkd::invalid_parameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

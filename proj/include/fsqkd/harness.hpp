#pragma once

#include <bit>
#include <chrono>
#include <cstdint>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fsqkd/qkd.hpp"
#include "fsqkd/stimpdc.hpp"

namespace fsqkd {

enum class Scheme { pm, stimpdc };

inline std::string scheme_name(Scheme s) {
    return s == Scheme::pm ? "pm" : "stimpdc";
}

inline Scheme scheme_from_name(const std::string& name) {
    if (name == "pm") return Scheme::pm;
    if (name == "stimpdc") return Scheme::stimpdc;
    throw config_error("unknown scheme '" + name + "' (expected pm|stimpdc)");
}

/// Full sweep description. Loaded from JSON with strict key checking;
/// round-trips losslessly through to_json.
struct ScenarioConfig {
    std::vector<Scheme> schemes{Scheme::pm, Scheme::stimpdc};
    std::vector<int> dimensions{2, 5};
    std::vector<double> d_over_r0{1, 2, 3, 4, 5};
    double path_length = 1000.0;   ///< Z_T [m]
    double wavelength = 810e-9;    ///< [m]
    double gamma = 2.0;            ///< w_B / w_A
    double probe_waist = 0.03;     ///< w_B [m]; ignored when auto
    bool probe_waist_auto = false;
    int grid_samples = 512;
    double grid_window = 0.0;      ///< [m]; ignored when auto
    bool grid_window_auto = true;
    int realizations = 50;
    std::uint64_t master_seed = 20250825;
    int zernike_terms = 172;
    int segments = 0;              ///< 0 = smallest count with Rytov < 1
    std::string projection = "inner_product";  ///< or "on_axis_disc"
    double disc_radius = 0.0;      ///< [rad/m]; 0 = single spectral sample

    void validate() const {
        if (schemes.empty() || dimensions.empty() || d_over_r0.empty())
            throw config_error("config: schemes/dimensions/d_over_r0 empty");
        for (int d : dimensions)
            if (d < 2 || d > 10) throw config_error("config: dimension outside 2..10");
        for (double x : d_over_r0)
            if (x < 0.0) throw config_error("config: negative D/r0");
        if (path_length <= 0.0 || wavelength <= 0.0 || gamma <= 0.0)
            throw config_error("config: path_length, wavelength, gamma must be > 0");
        if (!probe_waist_auto && probe_waist <= 0.0)
            throw config_error("config: probe_waist must be > 0 or \"auto\"");
        if (grid_samples < 64) throw config_error("config: grid_samples < 64");
        if (!grid_window_auto && grid_window <= 0.0)
            throw config_error("config: grid_window must be > 0 or \"auto\"");
        if (realizations < 1) throw config_error("config: realizations < 1");
        if (zernike_terms < 3) throw config_error("config: zernike_terms < 3");
        if (segments < 0) throw config_error("config: segments < 0");
        if (projection != "inner_product" && projection != "on_axis_disc")
            throw config_error("config: projection must be inner_product|on_axis_disc");
        if (disc_radius < 0.0) throw config_error("config: disc_radius < 0");
    }

    static ScenarioConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

inline ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "schemes",      "dimensions",   "d_over_r0",    "path_length",
        "wavelength",   "gamma",        "probe_waist",  "grid_samples",
        "grid_window",  "realizations", "master_seed",  "zernike_terms",
        "segments",     "projection",   "disc_radius"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool found = false;
        for (const auto& k : known) found = found || (it.key() == k);
        if (!found) throw config_error("config: unknown key '" + it.key() + "'");
    }
    ScenarioConfig c;
    try {
        if (j.contains("schemes")) {
            c.schemes.clear();
            for (const auto& s : j.at("schemes"))
                c.schemes.push_back(scheme_from_name(s.get<std::string>()));
        }
        if (j.contains("dimensions"))
            c.dimensions = j.at("dimensions").get<std::vector<int>>();
        if (j.contains("d_over_r0"))
            c.d_over_r0 = j.at("d_over_r0").get<std::vector<double>>();
        if (j.contains("path_length")) c.path_length = j.at("path_length");
        if (j.contains("wavelength")) c.wavelength = j.at("wavelength");
        if (j.contains("gamma")) c.gamma = j.at("gamma");
        if (j.contains("probe_waist")) {
            if (j.at("probe_waist").is_string()) {
                if (j.at("probe_waist") != "auto")
                    throw config_error("config: probe_waist string must be \"auto\"");
                c.probe_waist_auto = true;
            } else {
                c.probe_waist = j.at("probe_waist");
                c.probe_waist_auto = false;
            }
        }
        if (j.contains("grid_samples")) c.grid_samples = j.at("grid_samples");
        if (j.contains("grid_window")) {
            if (j.at("grid_window").is_string()) {
                if (j.at("grid_window") != "auto")
                    throw config_error("config: grid_window string must be \"auto\"");
                c.grid_window_auto = true;
            } else {
                c.grid_window = j.at("grid_window");
                c.grid_window_auto = false;
            }
        }
        if (j.contains("realizations")) c.realizations = j.at("realizations");
        if (j.contains("master_seed"))
            c.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("zernike_terms")) c.zernike_terms = j.at("zernike_terms");
        if (j.contains("segments")) c.segments = j.at("segments");
        if (j.contains("projection")) c.projection = j.at("projection");
        if (j.contains("disc_radius")) c.disc_radius = j.at("disc_radius");
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline nlohmann::json ScenarioConfig::to_json() const {
    nlohmann::json j;
    j["schemes"] = nlohmann::json::array();
    for (Scheme s : schemes) j["schemes"].push_back(scheme_name(s));
    j["dimensions"] = dimensions;
    j["d_over_r0"] = d_over_r0;
    j["path_length"] = path_length;
    j["wavelength"] = wavelength;
    j["gamma"] = gamma;
    if (probe_waist_auto)
        j["probe_waist"] = "auto";
    else
        j["probe_waist"] = probe_waist;
    j["grid_samples"] = grid_samples;
    if (grid_window_auto)
        j["grid_window"] = "auto";
    else
        j["grid_window"] = grid_window;
    j["realizations"] = realizations;
    j["master_seed"] = master_seed;
    j["zernike_terms"] = zernike_terms;
    j["segments"] = segments;
    j["projection"] = projection;
    j["disc_radius"] = disc_radius;
    return j;
}

/// Everything a sweep point reuses across realizations: synthesized
/// states, turbulence-free references at Bob's plane, and the probe.
struct PipelineContext {
    ScenarioConfig config;
    int d = 0;
    Grid grid{64, 1.0};
    double w_B = 0.0;       ///< probe waist [m]
    double w_A = 0.0;       ///< pump waist [m]
    double aperture = 0.0;  ///< reference D for D/r0 (= 2 w_B) [m]
    double screen_aperture = 0.0;  ///< Zernike aperture covering the beam [m]
    SpatialBasisSet states;
    std::vector<ComplexField> refs_a, refs_b;
    ComplexField probe;  ///< Gaussian w_B at Bob's plane
};

namespace detail {

/// Largest analytic footprint any participating beam reaches along the
/// path: the max-|l| pump mode and the Gaussian probe, both at distance Z_T.
inline double max_footprint(const ScenarioConfig& c, double w_B, int d) {
    const double w_A = w_B / c.gamma;
    int lmax = 0;
    for (int l : oam_indices(d)) lmax = std::max(lmax, std::abs(l));
    const double d_pump =
        analytic_diameter(w_A, lmax, c.path_length, c.wavelength);
    const double d_probe =
        analytic_diameter(w_B, 0, c.path_length, c.wavelength);
    return std::max(d_pump, d_probe);
}

inline std::uint64_t point_seed(std::uint64_t master, Scheme scheme, int d,
                                double d_over_r0, int realization) {
    std::uint64_t s = seed_combine(master, scheme_name(scheme));
    s = seed_combine(s, static_cast<std::uint64_t>(d));
    s = seed_combine(s, std::bit_cast<std::uint64_t>(d_over_r0));
    s = seed_combine(s, static_cast<std::uint64_t>(realization));
    return s;
}

}  // namespace detail

/// Resolves waist/grid choices and builds states, references, and probe
/// for one dimension.
inline PipelineContext make_context(const ScenarioConfig& config, int d) {
    config.validate();
    PipelineContext ctx;
    ctx.config = config;
    ctx.d = d;

    int lmax_all = 0;
    for (int dim : config.dimensions)
        for (int l : oam_indices(dim)) lmax_all = std::max(lmax_all, std::abs(l));
    ctx.w_B = config.probe_waist_auto
                  ? optimize_probe_waist(config.path_length, config.gamma,
                                         config.wavelength, lmax_all)
                  : config.probe_waist;
    ctx.w_A = ctx.w_B / config.gamma;
    ctx.aperture = 2.0 * ctx.w_B;

    double window = config.grid_window;
    if (config.grid_window_auto) {
        double foot = 0.0;
        for (int dim : config.dimensions)
            foot = std::max(foot, detail::max_footprint(config, ctx.w_B, dim));
        window = 4.5 * foot;
    }
    ctx.grid = Grid(config.grid_samples, window / config.grid_samples);
    ctx.screen_aperture =
        1.25 * detail::max_footprint(config, ctx.w_B, d);

    ctx.states = synthesize_states(build_mub_pair(d), ctx.w_A,
                                   config.wavelength, ctx.grid);
    for (const auto& s : ctx.states.states_a)
        ctx.refs_a.push_back(
            normalized(angular_spectrum_propagate(s, config.path_length)));
    for (const auto& s : ctx.states.states_b)
        ctx.refs_b.push_back(
            normalized(angular_spectrum_propagate(s, config.path_length)));
    ctx.probe = lg_mode({ctx.w_B, 0, 0, 0.0, config.wavelength}, ctx.grid);
    return ctx;
}

namespace detail {

inline Eigen::MatrixXd project(const PipelineContext& ctx,
                               const std::vector<ComplexField>& received,
                               const std::vector<ComplexField>& refs) {
    if (ctx.config.projection == "inner_product")
        return fidelity_matrix(received, refs);
    const int d = static_cast<int>(received.size());
    Eigen::MatrixXd f(d, d);
    for (int j = 0; j < d; ++j)
        for (int jp = 0; jp < d; ++jp)
            f(j, jp) =
                on_axis_overlap(received[jp], refs[j], ctx.config.disc_radius);
    return f;
}

}  // namespace detail

/// Raw per-basis fidelity matrices for one frozen channel realization.
struct BasisMatrices {
    Eigen::MatrixXd basis_a;
    Eigen::MatrixXd basis_b;
};

/// Prepare-and-measure: each state crosses Alice -> Bob once; scored
/// against the turbulence-free diffracted references.
inline BasisMatrices run_pm(const PipelineContext& ctx,
                            const ChannelRealization& channel) {
    auto pass = [&](const std::vector<ComplexField>& states,
                    const std::vector<ComplexField>& refs) {
        std::vector<ComplexField> received;
        received.reserve(states.size());
        for (const auto& s : states)
            received.push_back(transmit(s, channel, Direction::forward));
        return detail::project(ctx, received, refs);
    };
    return {pass(ctx.states.states_a, ctx.refs_a),
            pass(ctx.states.states_b, ctx.refs_b)};
}

/// Phase-conjugation scheme: the probe crosses Bob -> Alice, stimulates
/// the idler against the pump state, and the idler returns Alice -> Bob
/// through the same frozen screens in reversed order.
inline BasisMatrices run_stimpdc(const PipelineContext& ctx,
                                 const ChannelRealization& channel) {
    const ComplexField probe_at_alice =
        transmit(ctx.probe, channel, Direction::reverse);
    auto pass = [&](const std::vector<ComplexField>& states,
                    const std::vector<ComplexField>& refs) {
        std::vector<ComplexField> received;
        received.reserve(states.size());
        for (const auto& s : states) {
            const ComplexField idler = stimulate_idler(s, probe_at_alice);
            received.push_back(transmit(idler, channel, Direction::forward));
        }
        return detail::project(ctx, received, refs);
    };
    return {pass(ctx.states.states_a, ctx.refs_a),
            pass(ctx.states.states_b, ctx.refs_b)};
}

/// Collapse one realization's matrices into the scalar statistics.
inline RealizationFragment fragment_from(const BasisMatrices& m, int d) {
    const double qa = qer(normalize_crosstalk(m.basis_a));
    const double qb = qer(normalize_crosstalk(m.basis_b));
    RealizationFragment f;
    f.qer = total_qer({qa, qb});
    f.dfidelity = 1.0 - (m.basis_a.diagonal().mean() +
                         m.basis_b.diagonal().mean()) / 2.0;
    f.key_rate = secure_key_rate(d, std::min(f.qer, 1.0 - 1e-12));
    return f;
}

/// One line of the sweep output.
struct SweepRow {
    Scheme scheme = Scheme::pm;
    int d = 0;
    double d_over_r0 = 0.0;
    bool ok = false;
    std::string error;
    ScenarioResult result;
};

/// Full sweep over (scheme, d, D/r0). Realizations are distributed over
/// `threads` workers into preassigned slots, so output is independent of
/// scheduling. A failing point is recorded and skipped.
inline std::vector<SweepRow> sweep(const ScenarioConfig& config, int threads = 1) {
    config.validate();
    if (threads < 1) throw invalid_parameter("sweep: threads must be >= 1");
    std::vector<SweepRow> rows;
    for (int d : config.dimensions) {
        PipelineContext ctx;
        std::string ctx_error;
        bool ctx_ok = true;
        try {
            ctx = make_context(config, d);
        } catch (const error& e) {
            ctx_ok = false;
            ctx_error = e.what();
        }
        for (Scheme scheme : config.schemes)
            for (double x : config.d_over_r0) {
                SweepRow row;
                row.scheme = scheme;
                row.d = d;
                row.d_over_r0 = x;
                if (!ctx_ok) {
                    row.error = ctx_error;
                    rows.push_back(row);
                    continue;
                }
                try {
                    TurbulenceSpec spec;
                    spec.wavelength = config.wavelength;
                    spec.path_length = config.path_length;
                    spec.d_over_r0 = x;
                    spec.aperture = ctx.aperture;
                    if (x == 0.0) {
                        spec.d_over_r0 = 0.0;
                        spec.aperture = 0.0;
                    }

                    const int n = config.realizations;
                    std::vector<RealizationFragment> frags(n);
                    std::vector<std::string> worker_errors(threads);
                    auto work = [&](int w) {
                        try {
                            for (int i = w; i < n; i += threads) {
                                const std::uint64_t s = detail::point_seed(
                                    config.master_seed, scheme, d, x, i);
                                const ChannelRealization ch = make_channel(
                                    s, spec, ctx.screen_aperture, ctx.grid,
                                    config.segments, config.zernike_terms);
                                const BasisMatrices m =
                                    scheme == Scheme::pm
                                        ? run_pm(ctx, ch)
                                        : run_stimpdc(ctx, ch);
                                frags[i] = fragment_from(m, d);
                            }
                        } catch (const std::exception& e) {
                            worker_errors[w] = e.what();
                        }
                    };
                    if (threads == 1) {
                        work(0);
                    } else {
                        std::vector<std::thread> pool;
                        for (int w = 0; w < threads; ++w)
                            pool.emplace_back(work, w);
                        for (auto& t : pool) t.join();
                    }
                    for (const auto& e : worker_errors)
                        if (!e.empty()) throw numerical_error(e);

                    if (n == 1) {
                        // single realization: report it with zero SE
                        row.result.d = d;
                        row.result.realizations = 1;
                        row.result.qer_mean = frags[0].qer;
                        row.result.dfidelity_mean = frags[0].dfidelity;
                        row.result.key_rate_mean = frags[0].key_rate;
                    } else {
                        row.result = aggregate(d, frags);
                    }
                    row.ok = true;
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                rows.push_back(row);
            }
    }
    return rows;
}

/// CSV with the fixed column set; failed points keep their axes and carry
/// "nan" metrics so the row count is predictable.
inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "scheme,d,D_over_r0,Q_mean,Q_se,dF_mean,dF_se,r_mean,q_max\n";
    os.precision(9);
    for (const auto& r : rows) {
        os << scheme_name(r.scheme) << ',' << r.d << ',' << r.d_over_r0 << ',';
        if (r.ok) {
            os << r.result.qer_mean << ',' << r.result.qer_se << ','
               << r.result.dfidelity_mean << ',' << r.result.dfidelity_se << ','
               << r.result.key_rate_mean << ',' << q_max(r.d) << '\n';
        } else {
            os << "nan,nan,nan,nan,nan," << q_max(r.d) << '\n';
        }
    }
    return os.str();
}

/// Run manifest: config echo, seed, library version, failures, wall time.
inline std::string sweep_manifest(const ScenarioConfig& config,
                                  const std::vector<SweepRow>& rows,
                                  double wall_seconds) {
    nlohmann::json j;
    j["config"] = config.to_json();
    j["master_seed"] = config.master_seed;
    j["version"] = "fsqkd 1.0";
    j["wall_seconds"] = wall_seconds;
    j["points_total"] = rows.size();
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& r : rows)
        if (!r.ok) {
            nlohmann::json f;
            f["scheme"] = scheme_name(r.scheme);
            f["d"] = r.d;
            f["D_over_r0"] = r.d_over_r0;
            f["error"] = r.error;
            failures.push_back(f);
        }
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

}  // namespace fsqkd

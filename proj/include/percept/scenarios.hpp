#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "percept/cochlea.hpp"
#include "percept/config.hpp"
#include "percept/csv.hpp"
#include "percept/depth.hpp"
#include "percept/network.hpp"

namespace percept {

struct RunArtifacts {
    std::vector<std::filesystem::path> csv_files;
    std::vector<std::pair<std::string, std::string>> summary;
    ExperimentConfig config_echo;
    std::filesystem::path summary_path;
    std::filesystem::path config_echo_path;
};

namespace detail {

inline std::string summary_number(double x) { return format_csv_number(x); }

inline void add_summary(RunArtifacts& art, const std::string& key, double value) {
    art.summary.emplace_back(key, summary_number(value));
}

inline void add_summary(RunArtifacts& art, const std::string& key, std::size_t value) {
    art.summary.emplace_back(key, std::to_string(value));
}

/* Standard two-layer retina for the training scenarios: a photoreceptor row
 * tuned per the config and one plastic (bipolar) layer competing through its
 * horizontal-cell pool. */
inline NetworkState make_retina(const ExperimentConfig& cfg, std::size_t receptors,
                                std::size_t bipolars, std::size_t fan_in, std::uint64_t seed) {
    LayerSpec photo;
    photo.kind = LayerKind::photoreceptor;
    photo.cell_count = receptors;
    photo.tuning = cfg.tuning;

    LayerSpec bipolar;
    bipolar.kind = LayerKind::bipolar;
    bipolar.cell_count = bipolars;
    bipolar.fan_in = fan_in;
    bipolar.activation = cfg.activation;
    bipolar.inhibition = cfg.inhibition;
    bipolar.plasticity = cfg.plasticity;

    return build_network({photo, bipolar}, seed);
}

inline double network_budget(const NetworkState& net) {
    double total = 0.0;
    for (std::size_t l = 1; l < net.layers.size(); ++l)
        total += static_cast<double>(net.layers[l].cell_count) * net.layers[l].plasticity.resource_budget;
    return total;
}

/* Theorem-1 emergence: alternate two point colours on a 2-cone/4-bipolar
 * retina, trace winners and resource totals per step, then probe the
 * detector map. */
inline RunArtifacts run_colour_detector(const ExperimentConfig& cfg, RunArtifacts art) {
    const double reach = cfg.tuning.reach;
    const StimulusPattern a = full_field_stimulus(AttributeKind::colour, 2, -0.05 * reach);
    const StimulusPattern b = full_field_stimulus(AttributeKind::colour, 2, 1.05 * reach);
    NetworkState net = make_retina(cfg, 2, 4, 2, cfg.seed);

    Table trace;
    trace.columns = {"step",       "time",   "stimulus",    "winner",      "winner_raw",
                     "winner_settled", "r_cell0", "r_cell1", "r_cell2", "r_cell3",
                     "shared_pool"};
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const StimulusPattern& stim = (k % 2 == 0) ? a : b;
        auto [next, sweep] = present_step(std::move(net), stim, cfg.dt);
        net = std::move(next);
        const auto& activity = sweep.layers.back();
        const double winner = activity.growth_winner
                                  ? static_cast<double>(*activity.growth_winner)
                                  : -1.0;
        std::vector<double> row = {static_cast<double>(k),
                                   net.clock,
                                   static_cast<double>(k % 2),
                                   winner,
                                   activity.growth_winner ? activity.raw[*activity.growth_winner] : 0.0,
                                   activity.growth_winner ? activity.settled[*activity.growth_winner]
                                                          : 0.0};
        for (const auto& cell : net.synapses[1]) row.push_back(allocated_resource(cell));
        row.push_back(net.shared_pool);
        trace.rows.push_back(std::move(row));
    }
    art.csv_files.push_back(emit_csv(trace, cfg.output_dir / "training_trace.csv"));

    const std::vector<StimulusPattern> inputs = {a, b};
    const DetectorMap map = build_detector_map(net, inputs, cfg.dt);
    Table detectors;
    detectors.columns = {"cell", "input", "margin"};
    for (const auto& e : map.entries)
        detectors.rows.push_back(
            {static_cast<double>(e.cell), static_cast<double>(e.input), e.margin});
    art.csv_files.push_back(emit_csv(detectors, cfg.output_dir / "detectors.csv"));

    add_summary(art, "detector_count", map.entries.size());
    add_summary(art, "collision_count", map.collisions.size());
    add_summary(art, "final_clock", net.clock);
    return art;
}

/* Theorem-2 optimum: output drive as a function of the dendrite count for a
 * fixed number of active points. */
inline RunArtifacts run_frequency_sweep(const ExperimentConfig& cfg, RunArtifacts art) {
    constexpr std::size_t n = 5;
    constexpr std::size_t m_max = 20;
    Table table;
    table.columns = {"m", "n", "sigma"};
    std::size_t argmax = 1;
    double best = 0.0;
    for (std::size_t m = 1; m <= m_max; ++m) {
        const double sigma =
            frequency_sigma(m, n, cfg.plasticity.resource_budget, cfg.plasticity.weight_gain, 1.0);
        if (sigma > best) {
            best = sigma;
            argmax = m;
        }
        table.rows.push_back({static_cast<double>(m), static_cast<double>(n), sigma});
    }
    art.csv_files.push_back(emit_csv(table, cfg.output_dir / "frequency_sweep.csv"));
    add_summary(art, "argmax_m", argmax);
    add_summary(art, "sigma_max", best);
    return art;
}

/* Receptive-field scan under the configured constants and under the two
 * regime presets (single-point and full-field). */
inline RunArtifacts run_receptive_field(const ExperimentConfig& cfg, RunArtifacts art) {
    const ReceptiveFieldParams point{0.01, 1.0, 0.01};
    const ReceptiveFieldParams background{10.0, 0.001, 1.0};
    const std::size_t n_max = cfg.steps;
    Table table;
    table.columns = {"n", "g_config", "g_point", "g_background"};
    for (std::size_t n = 1; n <= n_max; ++n)
        table.rows.push_back({static_cast<double>(n), receptive_field_response(cfg.receptive_field, n),
                              receptive_field_response(point, n),
                              receptive_field_response(background, n)});
    art.csv_files.push_back(emit_csv(table, cfg.output_dir / "receptive_field.csv"));
    add_summary(art, "n0_config", receptive_field_optimum(cfg.receptive_field, n_max));
    add_summary(art, "n0_point", receptive_field_optimum(point, n_max));
    add_summary(art, "n0_background", receptive_field_optimum(background, n_max));
    return art;
}

/* Critical-period resource transfer between a closed and an open eye. */
inline RunArtifacts run_deprivation(const ExperimentConfig& cfg, RunArtifacts art) {
    NetworkState left = make_retina(cfg, 2, 4, 2, cfg.seed);
    NetworkState right = make_retina(cfg, 2, 4, 2, cfg.seed + 1);
    const double shared_budget = network_budget(left) + network_budget(right);
    const StimulusPattern stim = full_field_stimulus(AttributeKind::colour, 2, 0.0);
    const double duration = static_cast<double>(cfg.steps) * cfg.dt;

    const auto result =
        monocular_deprivation(std::move(left), std::move(right), shared_budget, Eye::left,
                              duration, cfg.dt, stim);

    Table table;
    table.columns = {"time", "left_total", "right_total", "shared_pool", "combined"};
    double conservation_error = 0.0;
    for (const auto& s : result.trajectory) {
        const double combined = s.left_total + s.right_total + s.shared_pool;
        conservation_error = std::max(conservation_error, std::abs(combined - shared_budget));
        table.rows.push_back({s.time, s.left_total, s.right_total, s.shared_pool, combined});
    }
    art.csv_files.push_back(emit_csv(table, cfg.output_dir / "deprivation_trajectory.csv"));

    add_summary(art, "shared_budget", shared_budget);
    add_summary(art, "left_initial", result.trajectory.front().left_total);
    add_summary(art, "left_final", result.trajectory.back().left_total);
    add_summary(art, "right_initial", result.trajectory.front().right_total);
    add_summary(art, "right_final", result.trajectory.back().right_total);
    add_summary(art, "conservation_error", conservation_error);
    return art;
}

/* Forward-construct random binocular scenes and invert them through the
 * disparity formula. */
inline RunArtifacts run_depth_roundtrip(const ExperimentConfig& cfg, RunArtifacts art) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> baseline_dist(0.04, 0.12);
    std::uniform_real_distribution<double> radius_dist(0.010, 0.014);
    std::uniform_real_distribution<double> x_dist(-3.0, -0.3);
    std::uniform_real_distribution<double> h_dist(0.3, 3.0);

    Table table;
    table.columns = {"scene", "true_depth", "recovered_depth", "rel_error", "linearity_error"};
    double max_rel = 0.0;
    double max_lin = 0.0;
    std::size_t produced = 0;
    std::size_t attempts = 0;
    while (produced < cfg.steps && attempts < cfg.steps * 10 + 100) {
        ++attempts;
        const double baseline = baseline_dist(rng);
        const double radius = radius_dist(rng);
        const double fx = x_dist(rng), fh = h_dist(rng);
        const double tx = x_dist(rng), th = h_dist(rng);
        DepthScene scene = make_scene(baseline, radius, fx, fh, tx, th);
        double depth = 0.0;
        try {
            depth = depth_from_disparity(scene);
        } catch (const degenerate_geometry_error&) {
            continue;  // rays parallel within the guard; redraw
        }
        const double rel = std::abs(depth - th) / th;
        DepthScene doubled = scene;
        doubled.baseline *= 2.0;
        const double lin = std::abs(depth_from_disparity(doubled) - 2.0 * depth) /
                           std::max(1e-300, std::abs(2.0 * depth));
        max_rel = std::max(max_rel, rel);
        max_lin = std::max(max_lin, lin);
        table.rows.push_back({static_cast<double>(produced), th, depth, rel, lin});
        ++produced;
    }
    art.csv_files.push_back(emit_csv(table, cfg.output_dir / "depth_roundtrip.csv"));
    add_summary(art, "scenes", produced);
    add_summary(art, "max_rel_error", max_rel);
    add_summary(art, "max_linearity_error", max_lin);
    return art;
}

/* Synthesize sounds from known incidence angles and recover them through
 * the position-detector readout. */
inline RunArtifacts run_cochlea_localize(const ExperimentConfig& cfg, RunArtifacts art) {
    const CochleaModel model = make_linear_cochlea(9, cfg.tuning);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> angle_dist(-kHalfPi, kHalfPi);

    std::vector<double> angles;
    for (const auto& d : model.detectors) angles.push_back(d.preferred_angle);
    const std::size_t preferred_count = angles.size();
    for (std::size_t i = 0; i < cfg.steps; ++i) angles.push_back(angle_dist(rng));

    Table table;
    table.columns = {"true_angle", "position", "recovered_angle", "abs_error", "span_fraction"};
    double max_fraction = 0.0;
    double max_preferred = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double angle = angles[i];
        const double position = incidence_to_position(angle, model);
        const double recovered = localize_direction(cochlea_responses(model, angle), model);
        const double err = std::abs(recovered - angle);
        const double fraction = err / std::numbers::pi;
        max_fraction = std::max(max_fraction, fraction);
        if (i < preferred_count) max_preferred = std::max(max_preferred, err);
        table.rows.push_back({angle, position, recovered, err, fraction});
    }
    art.csv_files.push_back(emit_csv(table, cfg.output_dir / "cochlea_localize.csv"));
    add_summary(art, "angles", angles.size());
    add_summary(art, "max_span_fraction", max_fraction);
    add_summary(art, "max_error_at_preferred", max_preferred);
    return art;
}

/* Closed forms against brute force: the two-dendrite allocation optimum
 * against a simplex grid, the frequency optimum against an exhaustive sweep,
 * and the budget-split inequality against random sampling. */
inline RunArtifacts run_theorem_oracles(const ExperimentConfig& cfg, RunArtifacts art) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> budget_dist(0.5, 2.0);
    std::uniform_real_distribution<double> gain_dist(0.5, 3.0);

    Table allocation;
    allocation.columns = {"trial", "d1", "d2", "budget", "weight_gain", "sigma_closed",
                          "sigma_grid", "gap"};
    constexpr std::size_t grid_points = 10000;
    double max_gap = 0.0;
    for (std::size_t trial = 0; trial < cfg.steps; ++trial) {
        TuningParams tuning = cfg.tuning;
        PlasticityParams plast = cfg.plasticity;
        plast.resource_budget = budget_dist(rng);
        plast.weight_gain = gain_dist(rng);
        const double d1 = unit(rng) * tuning.reach;
        const double d2 = unit(rng) * tuning.reach;
        const std::vector<double> distances = {d1, d2};

        const auto closed = optimal_allocation(distances, tuning, plast);
        const double sigma_closed = allocation_sigma(closed, distances, tuning, plast);
        double sigma_grid = 0.0;
        for (std::size_t g = 0; g <= grid_points; ++g) {
            const double r1 =
                plast.resource_budget * static_cast<double>(g) / static_cast<double>(grid_points);
            const std::vector<double> r = {r1, plast.resource_budget - r1};
            sigma_grid = std::max(sigma_grid, allocation_sigma(r, distances, tuning, plast));
        }
        const double gap = sigma_grid - sigma_closed;
        max_gap = std::max(max_gap, gap);
        allocation.rows.push_back({static_cast<double>(trial), d1, d2, plast.resource_budget,
                                   plast.weight_gain, sigma_closed, sigma_grid, gap});
    }
    art.csv_files.push_back(emit_csv(allocation, cfg.output_dir / "allocation_oracle.csv"));

    Table frequency;
    frequency.columns = {"n", "argmax_m", "ok"};
    std::size_t argmax_failures = 0;
    for (std::size_t n = 1; n <= 30; ++n) {
        std::size_t argmax = 1;
        double best = 0.0;
        for (std::size_t m = 1; m <= 100; ++m) {
            const double sigma =
                frequency_sigma(m, n, cfg.plasticity.resource_budget, cfg.plasticity.weight_gain, 1.0);
            if (sigma > best) {
                best = sigma;
                argmax = m;
            }
        }
        const bool ok = (argmax == n);
        if (!ok) ++argmax_failures;
        frequency.rows.push_back(
            {static_cast<double>(n), static_cast<double>(argmax), ok ? 1.0 : 0.0});
    }
    art.csv_files.push_back(emit_csv(frequency, cfg.output_dir / "frequency_argmax.csv"));

    std::uniform_real_distribution<double> x_dist(0.01, 10.0);
    std::uniform_int_distribution<std::size_t> n_dist(1, 30);
    constexpr std::size_t inequality_samples = 100000;
    std::size_t violations = 0;
    for (std::size_t i = 0; i < inequality_samples; ++i) {
        const double x = x_dist(rng);
        const std::size_t n = n_dist(rng);
        std::uniform_int_distribution<std::size_t> m_dist(1, n);
        const std::size_t m = m_dist(rng);
        const double nd = static_cast<double>(n), md = static_cast<double>(m);
        const double lhs = 1.0 - std::exp(-nd * x / md);
        const double rhs = (nd / md) * (1.0 - std::exp(-x));
        if (lhs > rhs + 1e-12) ++violations;
    }
    add_summary(art, "max_sigma_gap", max_gap);
    add_summary(art, "argmax_failures", argmax_failures);
    add_summary(art, "inequality_samples", inequality_samples);
    add_summary(art, "inequality_violations", violations);
    return art;
}

}  // namespace detail

/* Run one named scenario: emits its CSV tables, a flat key=value summary and
 * a full config echo into output_dir. Deterministic per (config, seed). */
inline RunArtifacts run_scenario(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    RunArtifacts art;
    art.config_echo = cfg;

    if (cfg.scenario == "colour-detector")
        art = detail::run_colour_detector(cfg, std::move(art));
    else if (cfg.scenario == "frequency-sweep")
        art = detail::run_frequency_sweep(cfg, std::move(art));
    else if (cfg.scenario == "receptive-field")
        art = detail::run_receptive_field(cfg, std::move(art));
    else if (cfg.scenario == "deprivation")
        art = detail::run_deprivation(cfg, std::move(art));
    else if (cfg.scenario == "depth-roundtrip")
        art = detail::run_depth_roundtrip(cfg, std::move(art));
    else if (cfg.scenario == "cochlea-localize")
        art = detail::run_cochlea_localize(cfg, std::move(art));
    else if (cfg.scenario == "theorem-oracles")
        art = detail::run_theorem_oracles(cfg, std::move(art));
    else
        throw config_error("scenario", "unknown scenario '" + cfg.scenario + "'");

    art.summary_path = cfg.output_dir / "summary.txt";
    {
        std::ofstream out(art.summary_path, std::ios::binary);
        if (!out) throw std::runtime_error("run_scenario: cannot open " + art.summary_path.string());
        for (const auto& [key, value] : art.summary) out << key << '=' << value << '\n';
    }
    art.config_echo_path = cfg.output_dir / "config_echo.json";
    {
        std::ofstream out(art.config_echo_path, std::ios::binary);
        if (!out)
            throw std::runtime_error("run_scenario: cannot open " + art.config_echo_path.string());
        out << config_to_json(cfg).dump(2) << '\n';
    }
    return art;
}

}  // namespace percept

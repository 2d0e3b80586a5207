#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "percept/network.hpp"
#include "percept/snapshot.hpp"

using namespace percept;

namespace {

LayerSpec photoreceptor_layer(std::size_t count) {
    LayerSpec l;
    l.kind = LayerKind::photoreceptor;
    l.cell_count = count;
    l.tuning = {1.0, 1.0, 1.0};
    return l;
}

LayerSpec bipolar_layer(std::size_t count, std::size_t fan_in) {
    LayerSpec l;
    l.kind = LayerKind::bipolar;
    l.cell_count = count;
    l.fan_in = fan_in;
    l.activation = {1.0, 1.0};
    l.inhibition = {1.0, 1.0, 0.2, CompetitionMode::soft};
    l.plasticity = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1e30};
    return l;
}

NetworkState two_cone_retina(std::uint64_t seed) {
    return build_network({photoreceptor_layer(2), bipolar_layer(4, 2)}, seed);
}

/* Point colour seen by every cone: the paper's Fig. 1B situation. */
StimulusPattern colour_point(double wavelength, std::size_t cones) {
    return full_field_stimulus(AttributeKind::colour, cones, wavelength);
}

std::size_t strongest_cell(const NetworkState& net, std::size_t layer) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < net.synapses[layer].size(); ++c)
        if (allocated_resource(net.synapses[layer][c]) >
            allocated_resource(net.synapses[layer][best]))
            best = c;
    return best;
}

}  // namespace

TEST_CASE("build_network: deterministic per seed, jittered per dendrite") {
    const auto a = two_cone_retina(42);
    const auto b = two_cone_retina(42);
    const auto c = two_cone_retina(43);
    CHECK(a == b);
    CHECK(a != c);

    std::size_t dendrites = 0;
    const double r0 = 0.01 * 1.0 / 2.0;
    for (const auto& cell : a.synapses[1]) {
        dendrites += cell.resources.size();
        for (double r : cell.resources) {
            REQUIRE(r >= 0.9 * r0);
            REQUIRE(r <= 1.1 * r0);
        }
        REQUIRE(allocated_resource(cell) <= 1.0);
    }
    CHECK(dendrites == 8);

    // the pool holds exactly the unallocated budget
    CHECK_THAT(a.shared_pool + allocated_total(a), Catch::Matchers::WithinAbs(4.0, 1e-12));
}

TEST_CASE("build_network: rejects malformed specs") {
    CHECK_THROWS_AS(build_network({}, 1), std::domain_error);
    CHECK_THROWS_AS(build_network({bipolar_layer(4, 2)}, 1), std::domain_error);
    CHECK_THROWS_AS(build_network({photoreceptor_layer(2), photoreceptor_layer(2)}, 1),
                    std::domain_error);
    auto bad = bipolar_layer(4, 2);
    bad.fan_in = 0;
    CHECK_THROWS_AS(build_network({photoreceptor_layer(2), bad}, 1), std::domain_error);
}

TEST_CASE("photoreceptor_response: position routing and attribute tuning") {
    const auto net = two_cone_retina(1);

    StimulusPattern at_one;
    at_one.samples = {{1.0, 1.0, 2.0}};  // at cone 1's position and preferred value
    const auto v = photoreceptor_response(net, at_one);
    CHECK(v[0] == 0.0);
    CHECK_THAT(v[1], Catch::Matchers::WithinAbs(2.0, 1e-15));

    StimulusPattern detuned;
    detuned.samples = {{0.0, 0.5, 1.0}};
    CHECK_THAT(photoreceptor_response(net, detuned)[0],
               Catch::Matchers::WithinAbs(std::exp(-0.5), 1e-15));

    StimulusPattern outside;
    outside.samples = {{5.0, 0.0, 1.0}};
    CHECK_THROWS_AS(photoreceptor_response(net, outside), std::domain_error);
    CHECK_THROWS_AS(present(net, outside, 1.0, 0.1), std::domain_error);
}

TEST_CASE("present: clock past the critical period leaves synapses untouched") {
    auto net = two_cone_retina(7);
    for (auto& layer : net.layers) layer.plasticity.plastic_until = 1.0;
    net.clock = 2.0;
    const auto before = net.synapses;
    const auto after = present(net, colour_point(0.0, 2), 1.0, 0.1);
    CHECK(after.synapses == before);
    CHECK_THAT(after.clock, Catch::Matchers::WithinAbs(3.0, 1e-12));
}

TEST_CASE("present: zero-intensity stimulus only decays, releases to the pool") {
    auto net = two_cone_retina(7);
    StimulusPattern dark = colour_point(0.0, 2);
    for (auto& s : dark.samples) s.intensity = 0.0;

    const double allocated_before = allocated_total(net);
    const double combined_before = allocated_before + net.shared_pool;
    const auto after = present(net, dark, 1.0, 0.05);
    CHECK(allocated_total(after) < allocated_before);
    CHECK_THAT(allocated_total(after) + after.shared_pool,
               Catch::Matchers::WithinAbs(combined_before, 1e-9));
}

TEST_CASE("present: the trained winner's allocation approaches the closed-form optimum") {
    // orange between the red and green cones: d = (0.4, 0.6), d1 + d2 = reach
    auto net = two_cone_retina(11);
    const double wavelength = 0.4;
    const auto trained = present(net, colour_point(wavelength, 2), 20.0, 0.05);
    const std::size_t winner = strongest_cell(trained, 1);

    // attribute distances in the winner's own dendrite order
    std::vector<double> distances;
    for (std::size_t d = 0; d < trained.synapses[1][winner].resources.size(); ++d) {
        const std::size_t cone = dendrite_source(trained, 1, winner, d);
        distances.push_back(
            std::abs(wavelength - photoreceptor_preferred_value(trained.layers[0], cone)));
    }
    const auto optimal =
        optimal_allocation(distances, net.layers[0].tuning, net.layers[1].plasticity);
    const auto& r = trained.synapses[1][winner].resources;
    REQUIRE_THAT(r[0], Catch::Matchers::WithinRel(optimal[0], 0.05));
    REQUIRE_THAT(r[1], Catch::Matchers::WithinRel(optimal[1], 0.05));
}

TEST_CASE("train: one stimulus, one detector; duplicates merge into it") {
    const std::vector<TrainingStimulus> one = {{colour_point(0.3, 2), 200}};
    auto [net, map] = train(two_cone_retina(3), one, 0.05);
    REQUIRE(map.entries.size() == 1);
    CHECK(map.collisions.empty());
    CHECK(map.entries[0].margin > 0.0);

    const std::vector<TrainingStimulus> twice = {{colour_point(0.3, 2), 100},
                                                 {colour_point(0.3, 2), 100}};
    auto [net2, map2] = train(two_cone_retina(3), twice, 0.05);
    REQUIRE(map2.entries.size() == 1);
    CHECK(map2.collisions.empty());
}

TEST_CASE("train: stimuli separated by at least the reach recruit distinct detectors") {
    const std::vector<TrainingStimulus> stimuli = {{colour_point(-0.05, 2), 150},
                                                   {colour_point(1.05, 2), 150}};
    auto [net, map] = train(two_cone_retina(19), stimuli, 0.05);
    REQUIRE(map.entries.size() == 2);
    CHECK(map.collisions.empty());

    const std::vector<StimulusPattern> probes = {colour_point(-0.05, 2), colour_point(1.05, 2)};
    for (const auto& e : map.entries) {
        CHECK(e.margin > 0.0);
        CHECK(is_detector(net, e.cell, probes, e.input, 0.05));
    }
    CHECK(map.entries[0].cell != map.entries[1].cell);
}

TEST_CASE("train: three mutually separated stimuli give exactly three detectors") {
    const auto base = build_network({photoreceptor_layer(4), bipolar_layer(6, 4)}, 77);
    const std::vector<TrainingStimulus> stimuli = {{colour_point(-0.05, 4), 120},
                                                   {colour_point(1.0, 4), 120},
                                                   {colour_point(2.05, 4), 120}};
    auto [net, map] = train(base, stimuli, 0.05);
    REQUIRE(map.entries.size() == 3);
    CHECK(map.collisions.empty());

    std::vector<StimulusPattern> probes;
    for (const auto& s : stimuli) probes.push_back(s.pattern);
    for (const auto& e : map.entries) REQUIRE(is_detector(net, e.cell, probes, e.input, 0.05));
}

TEST_CASE("train: determinism, identical seeds give identical detector maps") {
    const std::vector<TrainingStimulus> stimuli = {{colour_point(-0.05, 2), 80},
                                                   {colour_point(1.05, 2), 80}};
    auto [net_a, map_a] = train(two_cone_retina(5), stimuli, 0.05);
    auto [net_b, map_b] = train(two_cone_retina(5), stimuli, 0.05);
    CHECK(net_a == net_b);
    CHECK(map_a == map_b);
}

TEST_CASE("is_detector: a uniform untrained network detects nothing") {
    auto net = two_cone_retina(0);
    for (auto& cell : net.synapses[1])
        for (double& r : cell.resources) r = 0.005;  // strip the jitter

    const std::vector<StimulusPattern> probes = {colour_point(-0.05, 2), colour_point(1.05, 2)};
    for (std::size_t cell = 0; cell < 4; ++cell)
        for (std::size_t target = 0; target < probes.size(); ++target)
            CHECK_FALSE(is_detector(net, cell, probes, target, 0.05));
}

TEST_CASE("is_detector: rejects bad arguments") {
    const auto net = two_cone_retina(1);
    const std::vector<StimulusPattern> none;
    CHECK_THROWS_AS(is_detector(net, 0, none, 0, 0.05), std::domain_error);
    const std::vector<StimulusPattern> probes = {colour_point(0.0, 2)};
    CHECK_THROWS_AS(is_detector(net, 0, probes, 3, 0.05), std::domain_error);
}

TEST_CASE("frequency_sigma: closed form, zero input, argmax at m = n") {
    CHECK_THAT(frequency_sigma(1, 1, 1.0, 1.0, 1.0),
               Catch::Matchers::WithinAbs(0.6321205588285577, 1e-15));
    for (std::size_t m = 1; m <= 20; ++m) CHECK(frequency_sigma(m, 7, 1.0, 1.0, 0.0) == 0.0);

    std::size_t argmax = 1;
    double best = 0.0;
    for (std::size_t m = 1; m <= 20; ++m) {
        const double sigma = frequency_sigma(m, 5, 1.0, 1.0, 1.0);
        if (sigma > best) {
            best = sigma;
            argmax = m;
        }
    }
    CHECK(argmax == 5);
}

TEST_CASE("frequency_sigma: exhaustive sweep finds the optimum at n for random draws") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> budget_dist(0.5, 2.0);
    std::uniform_real_distribution<double> gain_dist(0.5, 3.0);
    std::uniform_real_distribution<double> v_dist(0.5, 2.0);
    for (std::size_t n = 1; n <= 30; ++n) {
        for (int draw = 0; draw < 5; ++draw) {
            const double budget = budget_dist(rng), gain = gain_dist(rng), v = v_dist(rng);
            std::size_t argmax = 1;
            double best = 0.0;
            for (std::size_t m = 1; m <= 3 * n + 10; ++m) {
                const double sigma = frequency_sigma(m, n, budget, gain, v);
                if (sigma > best) {
                    best = sigma;
                    argmax = m;
                }
            }
            REQUIRE(argmax == n);
        }
    }
}

TEST_CASE("budget-split inequality: 1-exp(-nx/m) <= (n/m)(1-exp(-x)), tight only at m = n") {
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> x_dist(0.01, 10.0);
    std::uniform_int_distribution<std::size_t> n_dist(1, 30);
    for (int trial = 0; trial < 2000; ++trial) {
        const double x = x_dist(rng);
        const std::size_t n = n_dist(rng);
        std::uniform_int_distribution<std::size_t> m_dist(1, n);
        const std::size_t m = m_dist(rng);
        const double nd = static_cast<double>(n), md = static_cast<double>(m);
        const double lhs = 1.0 - std::exp(-nd * x / md);
        const double rhs = (nd / md) * (1.0 - std::exp(-x));
        REQUIRE(lhs <= rhs + 1e-12);
        if (m == n)
            REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-12));
        else
            REQUIRE(lhs < rhs);
    }
}

TEST_CASE("receptive_field_optimum: the two regimes of the corrected response") {
    CHECK(receptive_field_optimum({0.01, 1.0, 0.01}, 50) == 1);
    CHECK(receptive_field_optimum({10.0, 0.001, 1.0}, 50) >= 45);
}

TEST_CASE("receptive_field_optimum: the integer scan matches a fine continuous sweep") {
    const ReceptiveFieldParams p{1.0, 1.0, 0.1};
    const std::size_t n_max = 50;
    const std::size_t n0 = receptive_field_optimum(p, n_max);

    // the scan is its own oracle over the integers
    for (std::size_t n = 1; n <= n_max; ++n)
        REQUIRE(receptive_field_response(p, n0) >= receptive_field_response(p, n));

    // continuous relaxation, evaluated independently
    const auto g = [&](double x) {
        return x * (1.0 - std::exp(-p.gain / x)) * (std::exp(-p.crowding * x) + p.floor);
    };
    double best_x = 1.0;
    for (double x = 1.0; x <= static_cast<double>(n_max); x += 1e-3)
        if (g(x) > g(best_x)) best_x = x;
    const auto lo = static_cast<std::size_t>(std::floor(best_x));
    const auto hi = static_cast<std::size_t>(std::ceil(best_x));
    const std::size_t continuous_pick =
        g(static_cast<double>(lo)) >= g(static_cast<double>(hi)) ? lo : hi;
    REQUIRE(n0 == continuous_pick);
}

TEST_CASE("monocular_deprivation: transfer is monotone and resource is conserved") {
    auto left = two_cone_retina(101);
    auto right = two_cone_retina(102);
    for (auto& l : left.layers) l.plasticity.plastic_until = 5.0;
    for (auto& l : right.layers) l.plasticity.plastic_until = 5.0;
    const double shared_budget = 8.0;

    const auto result = monocular_deprivation(left, right, shared_budget, Eye::left, 8.0, 0.05,
                                              colour_point(0.0, 2));
    REQUIRE(result.trajectory.size() == 161);

    for (std::size_t k = 1; k < result.trajectory.size(); ++k) {
        const auto& prev = result.trajectory[k - 1];
        const auto& cur = result.trajectory[k];
        REQUIRE(cur.left_total <= prev.left_total);    // closed eye never grows
        REQUIRE(cur.right_total >= prev.right_total);  // open eye never shrinks
        REQUIRE_THAT(cur.left_total + cur.right_total + cur.shared_pool,
                     Catch::Matchers::WithinAbs(shared_budget, 1e-9));
        if (prev.time > 5.0) {
            REQUIRE(cur.left_total == prev.left_total);  // frozen after the critical period
            REQUIRE(cur.right_total == prev.right_total);
        }
    }
    CHECK(result.trajectory.back().left_total < result.trajectory.front().left_total);
    CHECK(result.trajectory.back().right_total > result.trajectory.front().right_total);
    CHECK(result.shared_pool == result.trajectory.back().shared_pool);
}

TEST_CASE("monocular_deprivation: rejects runs starting outside the critical period") {
    auto left = two_cone_retina(1);
    auto right = two_cone_retina(2);
    for (auto& l : left.layers) l.plasticity.plastic_until = 1.0;
    left.clock = 2.0;
    CHECK_THROWS_AS(
        monocular_deprivation(left, right, 8.0, Eye::left, 1.0, 0.05, colour_point(0.0, 2)),
        std::domain_error);
}

TEST_CASE("two open eyes with identical stimulation stay symmetric") {
    auto left = two_cone_retina(55);
    auto right = left;
    const auto stim = colour_point(0.5, 2);
    for (int step = 0; step < 100; ++step) {
        left = present(left, stim, 0.05, 0.05);
        right = present(right, stim, 0.05, 0.05);
        REQUIRE(allocated_total(left) == allocated_total(right));
    }
    CHECK(left == right);
}

TEST_CASE("snapshot: save/load round-trips bit-exactly and resumes identically") {
    const auto path = std::filesystem::temp_directory_path() / "percept_snapshot_test.json";
    auto net = two_cone_retina(91);
    net = present(net, colour_point(0.3, 2), 2.0, 0.05);

    save_network(net, path);
    const auto loaded = load_network(path);
    REQUIRE(loaded == net);

    const auto resumed_a = present(net, colour_point(0.7, 2), 1.0, 0.05);
    const auto resumed_b = present(loaded, colour_point(0.7, 2), 1.0, 0.05);
    REQUIRE(resumed_a == resumed_b);
    std::filesystem::remove(path);
}

TEST_CASE("snapshot: version and format are enforced") {
    auto net = two_cone_retina(1);
    auto j = to_snapshot_json(net);
    j["version"] = 999;
    CHECK_THROWS_AS(network_from_snapshot_json(j), std::runtime_error);
    j = to_snapshot_json(net);
    j["format"] = "something-else";
    CHECK_THROWS_AS(network_from_snapshot_json(j), std::runtime_error);
}

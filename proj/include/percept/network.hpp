#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "percept/neuron.hpp"
#include "percept/plasticity.hpp"

namespace percept {

enum class LayerKind { photoreceptor, bipolar, ganglion };
enum class AttributeKind { colour, luminance, delay, position };

/* One retinal layer. Photoreceptors sense the stimulus through their tuning
 * curve and carry no dendrites; bipolar and ganglion cells carry fan_in
 * plastic dendrites onto the previous layer and compete through their
 * interneuron pool (horizontal cells for bipolars, amacrine for ganglions). */
struct LayerSpec {
    LayerKind kind = LayerKind::bipolar;
    std::size_t cell_count = 1;
    std::size_t fan_in = 1;
    ActivationParams activation;
    TuningParams tuning;          // photoreceptors only
    InhibitionParams inhibition;  // interneuron pool for this layer
    PlasticityParams plasticity;

    bool operator==(const LayerSpec&) const = default;
};

/* A spatial pattern of attribute intensities: each sample targets the
 * photoreceptor at its (rounded) position and carries one attribute value on
 * the pattern's axis. Positions are photoreceptor indices. */
struct StimulusSample {
    double position = 0.0;
    double attribute_value = 0.0;
    double intensity = 1.0;

    bool operator==(const StimulusSample&) const = default;
};

struct StimulusPattern {
    AttributeKind attribute_kind = AttributeKind::colour;
    std::vector<StimulusSample> samples;

    bool operator==(const StimulusPattern&) const = default;
};

/* Whole-retina state. shared_pool holds the network's unallocated resource:
 * it is seeded with the total budget headroom at construction, fed by decay
 * releases and drained by growth, so allocated + pool stays constant. */
struct NetworkState {
    std::vector<LayerSpec> layers;
    std::vector<std::vector<SynapseState>> synapses;  // [layer][cell]; empty for layer 0
    double shared_pool = 0.0;
    double clock = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const NetworkState&) const = default;
};

struct DetectorEntry {
    std::size_t cell = 0;    // cell id in the detecting (last) layer
    std::size_t input = 0;   // canonical index into the probe set
    double margin = 0.0;     // winner's raw potential minus the runner-up's

    bool operator==(const DetectorEntry&) const = default;
};

/* Diagnostic: several distinct inputs probed to the same winning cell. */
struct DetectionCollision {
    std::size_t cell = 0;
    std::vector<std::size_t> inputs;

    bool operator==(const DetectionCollision&) const = default;
};

struct DetectorMap {
    std::vector<DetectorEntry> entries;
    std::vector<DetectionCollision> collisions;

    bool operator==(const DetectorMap&) const = default;
};

/* Upper bound on inner competition steps per sweep. */
inline constexpr std::size_t kCompetitionMaxSteps = 100000;

/* Preferred attribute value of photoreceptor k: adjacent receptors sit one
 * tuning reach apart, so a point stimulus between neighbours splits its
 * distances d1 + d2 = reach. */
inline double photoreceptor_preferred_value(const LayerSpec& layer0, std::size_t k) {
    return static_cast<double>(k) * layer0.tuning.reach;
}

namespace detail {

inline std::size_t effective_fan_in(const LayerSpec& layer, std::size_t prev_count) {
    return std::min(layer.fan_in, prev_count);
}

/* Previous-layer cell fed by the given dendrite. Dendrites cover a window of
 * the previous layer anchored at the cell's relative position. */
inline std::size_t dendrite_source(std::size_t prev_count, std::size_t cell_count,
                                   std::size_t cell, std::size_t dendrite) {
    const std::size_t base = (cell * prev_count) / cell_count;
    return (base + dendrite) % prev_count;
}

}  // namespace detail

inline void validate_network_spec(std::span<const LayerSpec> spec) {
    if (spec.empty()) throw std::domain_error("build_network: empty layer spec");
    if (spec.front().kind != LayerKind::photoreceptor)
        throw std::domain_error("build_network: first layer must be photoreceptor");
    validate(spec.front().tuning);
    for (std::size_t l = 0; l < spec.size(); ++l) {
        if (spec[l].cell_count == 0) throw std::domain_error("build_network: cell_count must be > 0");
        if (l == 0) continue;
        if (spec[l].kind == LayerKind::photoreceptor)
            throw std::domain_error("build_network: photoreceptors allowed only as the first layer");
        if (spec[l].fan_in == 0) throw std::domain_error("build_network: fan_in must be > 0");
        validate(spec[l].activation);
        validate(spec[l].inhibition);
        validate(spec[l].plasticity);
    }
}

/* Build a network with near-uniform initial resources: r0 = 1% of budget per
 * dendrite slot, times multiplicative jitter U(0.9, 1.1) from the seeded
 * generator. The shared pool starts with all remaining budget headroom.
 * Deterministic for a given seed. */
inline NetworkState build_network(std::vector<LayerSpec> spec, std::uint64_t seed) {
    validate_network_spec(spec);
    NetworkState net;
    net.layers = std::move(spec);
    net.seed = seed;
    net.synapses.resize(net.layers.size());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);

    double total_budget = 0.0;
    double total_allocated = 0.0;
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        const std::size_t fan = detail::effective_fan_in(layer, net.layers[l - 1].cell_count);
        const double r0 = 0.01 * layer.plasticity.resource_budget / static_cast<double>(fan);
        net.synapses[l].resize(layer.cell_count);
        for (auto& cell : net.synapses[l]) {
            cell.resources.resize(fan);
            for (double& r : cell.resources) {
                r = r0 * jitter(rng);
                total_allocated += r;
            }
            total_budget += layer.plasticity.resource_budget;
        }
    }
    net.shared_pool = std::max(0.0, total_budget - total_allocated);
    return net;
}

/* Previous-layer cell fed by the given dendrite of a cell in layer l >= 1. */
inline std::size_t dendrite_source(const NetworkState& net, std::size_t layer, std::size_t cell,
                                   std::size_t dendrite) {
    if (layer == 0 || layer >= net.layers.size())
        throw std::domain_error("dendrite_source: layer without dendrites");
    return detail::dendrite_source(net.layers[layer - 1].cell_count, net.layers[layer].cell_count,
                                   cell, dendrite);
}

/* Total resource currently allocated across all dendrites of the network. */
inline double allocated_total(const NetworkState& net) {
    double total = 0.0;
    for (const auto& layer : net.synapses)
        for (const auto& cell : layer) total += allocated_resource(cell);
    return total;
}

/* Photoreceptor potentials for a stimulus: each sample drives the receptor
 * at its position with intensity times the tuned response to the attribute
 * distance from that receptor's preferred value. */
inline PotentialVector photoreceptor_response(const NetworkState& net, const StimulusPattern& stim) {
    const auto& layer0 = net.layers.front();
    PotentialVector v(layer0.cell_count, 0.0);
    for (const auto& s : stim.samples) {
        if (s.intensity < 0.0) throw std::domain_error("stimulus: negative intensity");
        const auto idx = static_cast<long long>(std::llround(s.position));
        if (idx < 0 || idx >= static_cast<long long>(layer0.cell_count))
            throw std::domain_error("stimulus position outside retina extent");
        const double d = std::abs(s.attribute_value -
                                  photoreceptor_preferred_value(layer0, static_cast<std::size_t>(idx)));
        v[static_cast<std::size_t>(idx)] += s.intensity * tuning_response(layer0.tuning, d);
    }
    return v;
}

/* Full-field pattern: the same attribute value delivered at every
 * photoreceptor position (a single point seen by all receptor types). */
inline StimulusPattern full_field_stimulus(AttributeKind kind, std::size_t receptor_count,
                                           double attribute_value, double intensity = 1.0) {
    StimulusPattern p;
    p.attribute_kind = kind;
    p.samples.reserve(receptor_count);
    for (std::size_t k = 0; k < receptor_count; ++k)
        p.samples.push_back({static_cast<double>(k), attribute_value, intensity});
    return p;
}

/* Per-layer record of one sweep. */
struct LayerActivity {
    PotentialVector raw;      // activate() outputs before competition
    PotentialVector settled;  // after the layer's interneuron competition
    std::optional<std::size_t> growth_winner;
    std::size_t competition_steps = 0;
};

struct SweepTrace {
    std::vector<LayerActivity> layers;
};

namespace detail {

inline double weight_norm(const SynapseState& cell, const PlasticityParams& p) {
    double sq = 0.0;
    for (double r : cell.resources) {
        const double w = weight_from_resource(p, r);
        sq += w * w;
    }
    return std::sqrt(sq);
}

inline PotentialVector layer_raw_potentials(const NetworkState& net, std::size_t l,
                                            const PotentialVector& prev) {
    const auto& layer = net.layers[l];
    const std::size_t prev_count = net.layers[l - 1].cell_count;
    PotentialVector raw(layer.cell_count, 0.0);
    std::vector<WeightedInput> inputs;
    for (std::size_t c = 0; c < layer.cell_count; ++c) {
        const auto& syn = net.synapses[l][c];
        inputs.clear();
        for (std::size_t d = 0; d < syn.resources.size(); ++d) {
            const std::size_t src = dendrite_source(prev_count, layer.cell_count, c, d);
            inputs.push_back({weight_from_resource(layer.plasticity, syn.resources[d]), prev[src]});
        }
        raw[c] = activate(layer.activation, inputs);
    }
    return raw;
}

/* Growth recipient: the best cell by weight-normalized raw potential.
 * Normalizing by the dendritic weight norm means a cell already committed to
 * some other pattern scores poorly on a novel one, so new patterns recruit
 * uncommitted cells instead of piling onto the strongest absolute responder.
 * Raw potentials are used because inhibition rescales rivals by absolute
 * dominance, which is exactly what the normalization must undo. */
inline std::optional<std::size_t> growth_winner(const NetworkState& net, std::size_t l,
                                                const PotentialVector& raw) {
    const auto& layer = net.layers[l];
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t c = 0; c < layer.cell_count; ++c) {
        if (raw[c] <= kActivityEpsilon) continue;
        const double norm = weight_norm(net.synapses[l][c], layer.plasticity);
        if (norm <= 0.0) continue;
        const double score = raw[c] / norm;
        if (!best || score > best_score) {
            best = c;
            best_score = score;
        }
    }
    return best;
}

/* One full sweep: photoreceptor responses, forward activation with per-layer
 * competition, growth on each layer's winner and decay on every unstimulated
 * dendrite. Growth draws on the external pool (never beyond it); releases
 * flow back into it. Plasticity is gated per layer by its critical period. */
inline SweepTrace sweep(NetworkState& net, const StimulusPattern& stim, double dt, double& pool) {
    SweepTrace trace;
    trace.layers.resize(net.layers.size());

    PotentialVector prev = photoreceptor_response(net, stim);
    trace.layers[0].raw = prev;
    trace.layers[0].settled = prev;

    const double now = net.clock;
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        auto& activity = trace.layers[l];
        activity.raw = layer_raw_potentials(net, l, prev);
        auto comp = compete(activity.raw, layer.inhibition, dt, kCompetitionMaxSteps);
        activity.settled = std::move(comp.potentials);
        activity.competition_steps = comp.steps_run;

        const bool plastic = now <= layer.plasticity.plastic_until;
        if (plastic) {
            activity.growth_winner = growth_winner(net, l, activity.raw);
            if (activity.growth_winner) {
                const std::size_t c = *activity.growth_winner;
                auto& syn = net.synapses[l][c];
                PotentialVector presyn(syn.resources.size());
                for (std::size_t d = 0; d < syn.resources.size(); ++d)
                    presyn[d] = prev[dendrite_source(net.layers[l - 1].cell_count, layer.cell_count, c, d)];
                auto inc = growth_increments(syn, presyn, layer.plasticity, dt);
                double total = 0.0;
                for (double x : inc) total += x;
                if (total > pool && total > 0.0) {
                    const double scale = pool / total;
                    for (double& x : inc) x *= scale;
                    total = pool;
                }
                for (std::size_t d = 0; d < inc.size(); ++d) syn.resources[d] += inc[d];
                pool -= total;
            }
            for (std::size_t c = 0; c < layer.cell_count; ++c) {
                auto& syn = net.synapses[l][c];
                std::vector<bool> stimulated(syn.resources.size());
                for (std::size_t d = 0; d < syn.resources.size(); ++d)
                    stimulated[d] =
                        prev[dendrite_source(net.layers[l - 1].cell_count, layer.cell_count, c, d)] > 0.0;
                syn = decay_step(std::move(syn), layer.plasticity, dt, stimulated);
                pool += syn.free_pool;
                syn.free_pool = 0.0;
            }
        }
        prev = activity.settled;
    }
    return trace;
}

}  // namespace detail

/* Advance the network by a single dt step and report the sweep trace. */
inline std::pair<NetworkState, SweepTrace> present_step(NetworkState net, const StimulusPattern& stim,
                                                        double dt) {
    if (!(dt > 0.0)) throw std::domain_error("present_step: dt must be > 0");
    SweepTrace trace = detail::sweep(net, stim, dt, net.shared_pool);
    net.clock += dt;
    return {std::move(net), std::move(trace)};
}

/* Present a stimulus for the given duration in dt-sized sweeps. */
inline NetworkState present(NetworkState net, const StimulusPattern& stim, double duration, double dt) {
    if (!(duration > 0.0)) throw std::domain_error("present: duration must be > 0");
    if (!(dt > 0.0)) throw std::domain_error("present: dt must be > 0");
    const auto steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)));
    const double start = net.clock;
    for (std::size_t k = 0; k < steps; ++k) {
        detail::sweep(net, stim, dt, net.shared_pool);
        net.clock = start + static_cast<double>(k + 1) * dt;
    }
    net.clock = start + duration;
    return net;
}

/* Forward pass without plasticity; the final (detecting) layer competes in
 * hard mode regardless of its configured inhibition, so a unique winner is
 * identified per Definition 1. margin is the raw-potential gap between the
 * winner and the best rival in the detecting layer. */
struct ProbeResult {
    std::optional<std::size_t> winner;
    PotentialVector raw;      // detecting-layer potentials before competition
    PotentialVector settled;  // after the forced hard competition
    double margin = 0.0;
};

inline ProbeResult probe(const NetworkState& net, const StimulusPattern& stim, double dt) {
    if (!(dt > 0.0)) throw std::domain_error("probe: dt must be > 0");
    PotentialVector prev = photoreceptor_response(net, stim);
    ProbeResult result;
    if (net.layers.size() == 1) {
        result.raw = prev;
        result.settled = prev;
        return result;
    }
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        PotentialVector raw = detail::layer_raw_potentials(net, l, prev);
        InhibitionParams inhibition = net.layers[l].inhibition;
        const bool last = (l + 1 == net.layers.size());
        if (last) inhibition.mode = CompetitionMode::hard;
        auto comp = compete(raw, inhibition, dt, kCompetitionMaxSteps);
        if (last) {
            result.winner = comp.winner;
            result.raw = std::move(raw);
            result.settled = std::move(comp.potentials);
            if (result.winner) {
                double runner_up = 0.0;
                for (std::size_t c = 0; c < result.raw.size(); ++c)
                    if (c != *result.winner) runner_up = std::max(runner_up, result.raw[c]);
                result.margin = result.raw[*result.winner] - runner_up;
            }
        } else {
            prev = std::move(comp.potentials);
        }
    }
    return result;
}

/* True iff the cell wins the hard competition on inputs[target] and on no
 * other probe input: Definition 1's one-detector-per-input reading. */
inline bool is_detector(const NetworkState& net, std::size_t cell,
                        std::span<const StimulusPattern> inputs, std::size_t target, double dt) {
    if (inputs.empty()) throw std::domain_error("is_detector: empty input set");
    if (target >= inputs.size()) throw std::domain_error("is_detector: target out of range");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto r = probe(net, inputs[i], dt);
        const bool wins = r.winner && *r.winner == cell;
        if (i == target && !wins) return false;
        if (i != target && wins) return false;
    }
    return true;
}

/* Probe every pattern and map each distinct input to its hard-WTA winner.
 * Exact duplicate patterns are folded into one canonical input (a repeated
 * input merges into the same detector). Distinct inputs claiming the same
 * winner are reported as collisions rather than entries. */
inline DetectorMap build_detector_map(const NetworkState& net,
                                      std::span<const StimulusPattern> inputs, double dt) {
    DetectorMap map;
    std::vector<std::size_t> canonical;  // canonical input ids, in first-seen order
    std::vector<std::optional<std::size_t>> winners;
    std::vector<double> margins;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        bool duplicate = false;
        for (std::size_t c : canonical)
            if (inputs[c] == inputs[i]) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;
        const auto r = probe(net, inputs[i], dt);
        canonical.push_back(i);
        winners.push_back(r.winner);
        margins.push_back(r.margin);
    }
    for (std::size_t a = 0; a < canonical.size(); ++a) {
        if (!winners[a]) continue;
        std::vector<std::size_t> claimants;
        for (std::size_t b = 0; b < canonical.size(); ++b)
            if (winners[b] && *winners[b] == *winners[a]) claimants.push_back(canonical[b]);
        if (claimants.size() == 1) {
            map.entries.push_back({*winners[a], canonical[a], margins[a]});
        } else if (claimants.front() == canonical[a]) {
            map.collisions.push_back({*winners[a], std::move(claimants)});
        }
    }
    return map;
}

struct TrainingStimulus {
    StimulusPattern pattern;
    std::size_t repetitions = 1;
};

/* Round-robin training: one dt sweep per visit, cycling through the stimuli
 * until every repetition budget is spent, then a detector map built from
 * hard-WTA probes of the training set. */
inline std::pair<NetworkState, DetectorMap> train(NetworkState net,
                                                  std::span<const TrainingStimulus> stimuli,
                                                  double dt) {
    if (stimuli.empty()) throw std::domain_error("train: at least one stimulus required");
    std::vector<std::size_t> remaining;
    remaining.reserve(stimuli.size());
    for (const auto& s : stimuli) remaining.push_back(s.repetitions);
    bool any = true;
    while (any) {
        any = false;
        for (std::size_t i = 0; i < stimuli.size(); ++i) {
            if (remaining[i] == 0) continue;
            net = present(std::move(net), stimuli[i].pattern, dt, dt);
            --remaining[i];
            any = true;
        }
    }
    std::vector<StimulusPattern> patterns;
    patterns.reserve(stimuli.size());
    for (const auto& s : stimuli) patterns.push_back(s.pattern);
    DetectorMap map = build_detector_map(net, patterns, dt);
    return {std::move(net), std::move(map)};
}

/* Output drive of a cell with m dendrites splitting its budget uniformly
 * over min(m, n) connected active inputs of equal potential v. Maximal at
 * m = n: fewer dendrites miss active points, more dilute the budget. */
inline double frequency_sigma(std::size_t m, std::size_t n, double budget, double weight_gain,
                              double v) {
    if (m == 0 || n == 0) throw std::domain_error("frequency_sigma: m and n must be >= 1");
    const double connected = static_cast<double>(std::min(m, n));
    return connected * (1.0 - std::exp(-weight_gain * budget / static_cast<double>(m))) * v;
}

/* Constants of the inhibition-corrected receptive-field response. */
struct ReceptiveFieldParams {
    double gain = 1.0;      // budget-sharing exponent scale
    double crowding = 1.0;  // lateral-inhibition growth with active-point count
    double floor = 0.1;     // residual drive under full inhibition

    bool operator==(const ReceptiveFieldParams&) const = default;
};

inline void validate(const ReceptiveFieldParams& p) {
    if (!(p.gain > 0.0)) throw std::domain_error("ReceptiveFieldParams: gain must be > 0");
    if (!(p.crowding > 0.0)) throw std::domain_error("ReceptiveFieldParams: crowding must be > 0");
    if (!(p.floor >= 0.0)) throw std::domain_error("ReceptiveFieldParams: floor must be >= 0");
}

inline double receptive_field_response(const ReceptiveFieldParams& p, std::size_t n) {
    if (n == 0) throw std::domain_error("receptive_field_response: n must be >= 1");
    const double nd = static_cast<double>(n);
    return nd * (1.0 - std::exp(-p.gain / nd)) * (std::exp(-p.crowding * nd) + p.floor);
}

/* Exhaustive scan for the active-point count maximizing the corrected
 * response; ties go to the smaller n. Small gain relative to crowding gives
 * the single-point (concentric) regime, large gain the full-field regime. */
inline std::size_t receptive_field_optimum(const ReceptiveFieldParams& p, std::size_t n_max) {
    if (n_max == 0) throw std::domain_error("receptive_field_optimum: n_max must be >= 1");
    std::size_t best = 1;
    double best_value = receptive_field_response(p, 1);
    for (std::size_t n = 2; n <= n_max; ++n) {
        const double value = receptive_field_response(p, n);
        if (value > best_value) {
            best = n;
            best_value = value;
        }
    }
    return best;
}

enum class Eye { left, right };

struct DeprivationSample {
    double time = 0.0;
    double left_total = 0.0;
    double right_total = 0.0;
    double shared_pool = 0.0;

    bool operator==(const DeprivationSample&) const = default;
};

struct DeprivationResult {
    NetworkState left;
    NetworkState right;
    double shared_pool = 0.0;  // remaining unallocated resource after the run
    std::vector<DeprivationSample> trajectory;
};

namespace detail {

inline double min_plastic_until(const NetworkState& net) {
    double m = std::numeric_limits<double>::max();
    for (std::size_t l = 1; l < net.layers.size(); ++l)
        m = std::min(m, net.layers[l].plasticity.plastic_until);
    return m;
}

}  // namespace detail

/* Two-eye critical-period experiment: the closed eye sees the stimulus at
 * zero intensity and only decays, releasing resource into one pool shared by
 * both eyes; the open eye sees the stimulus and grows out of that pool. The
 * pool starts at shared_budget minus what is already allocated, so allocated
 * plus pool stays equal to shared_budget throughout. */
inline DeprivationResult monocular_deprivation(NetworkState left, NetworkState right,
                                               double shared_budget, Eye closed, double duration,
                                               double dt, const StimulusPattern& stim) {
    if (!(duration > 0.0)) throw std::domain_error("monocular_deprivation: duration must be > 0");
    if (!(dt > 0.0)) throw std::domain_error("monocular_deprivation: dt must be > 0");
    if (left.clock > detail::min_plastic_until(left) || right.clock > detail::min_plastic_until(right))
        throw std::domain_error("monocular_deprivation: both networks must start inside the critical period");

    DeprivationResult result;
    double pool = shared_budget - allocated_total(left) - allocated_total(right);
    if (pool < 0.0)
        throw std::domain_error("monocular_deprivation: shared_budget below already-allocated resource");

    StimulusPattern dark = stim;
    for (auto& s : dark.samples) s.intensity = 0.0;

    const auto steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)));
    result.trajectory.reserve(steps + 1);
    result.trajectory.push_back({left.clock, allocated_total(left), allocated_total(right), pool});

    const double left_start = left.clock;
    const double right_start = right.clock;
    for (std::size_t k = 0; k < steps; ++k) {
        NetworkState& closed_net = (closed == Eye::left) ? left : right;
        NetworkState& open_net = (closed == Eye::left) ? right : left;
        detail::sweep(closed_net, dark, dt, pool);
        detail::sweep(open_net, stim, dt, pool);
        left.clock = left_start + static_cast<double>(k + 1) * dt;
        right.clock = right_start + static_cast<double>(k + 1) * dt;
        result.trajectory.push_back({left.clock, allocated_total(left), allocated_total(right), pool});
    }
    left.shared_pool = 0.0;
    right.shared_pool = 0.0;
    result.left = std::move(left);
    result.right = std::move(right);
    result.shared_pool = pool;
    return result;
}

}  // namespace percept

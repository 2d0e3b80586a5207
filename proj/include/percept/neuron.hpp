#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace percept {

/* Graded potentials are plain doubles, one per cell; potentials are clamped
 * at zero from below everywhere in this library. */
using PotentialVector = std::vector<double>;

/* Cells at or below this potential count as inactive. Pure exponential
 * hyperpolarization never reaches zero exactly, so competition needs a
 * floor to terminate on. */
inline constexpr double kActivityEpsilon = 1e-6;

/* Saturating output nonlinearity v = ceiling * (1 - exp(-gain * sigma)),
 * sigma = sum of weighted inputs. */
struct ActivationParams {
    double ceiling = 1.0;  // asymptotic output potential, never attained
    double gain = 1.0;     // 1/potential

    bool operator==(const ActivationParams&) const = default;
};

/* Receptor tuning curve: peak response at zero attribute distance,
 * exponential falloff with the attribute distance, hard zero beyond reach. */
struct TuningParams {
    double peak = 1.0;   // potential at zero distance
    double decay = 1.0;  // 1/attribute-distance
    double reach = 1.0;  // attribute-distance cutoff

    bool operator==(const TuningParams&) const = default;
};

enum class CompetitionMode { soft, hard };

/* Lateral-inhibition pool dynamics. Hard mode runs until a single survivor;
 * soft mode stops once elapsed time exceeds soft_duration, possibly leaving
 * several cells active. */
struct InhibitionParams {
    double rate_ceiling = 1.0;   // potential/time
    double rate_gain = 1.0;      // 1/potential
    double soft_duration = 1.0;  // time budget, soft mode only
    CompetitionMode mode = CompetitionMode::hard;

    bool operator==(const InhibitionParams&) const = default;
};

struct WeightedInput {
    double weight = 0.0;
    double potential = 0.0;
};

inline void validate(const ActivationParams& p) {
    if (!(p.ceiling > 0.0)) throw std::domain_error("ActivationParams: ceiling must be > 0");
    if (!(p.gain > 0.0)) throw std::domain_error("ActivationParams: gain must be > 0");
}

inline void validate(const TuningParams& p) {
    if (!(p.peak > 0.0)) throw std::domain_error("TuningParams: peak must be > 0");
    if (!(p.decay > 0.0)) throw std::domain_error("TuningParams: decay must be > 0");
    if (!(p.reach > 0.0)) throw std::domain_error("TuningParams: reach must be > 0");
}

inline void validate(const InhibitionParams& p) {
    if (!(p.rate_ceiling > 0.0)) throw std::domain_error("InhibitionParams: rate_ceiling must be > 0");
    if (!(p.rate_gain > 0.0)) throw std::domain_error("InhibitionParams: rate_gain must be > 0");
    if (p.mode == CompetitionMode::soft && !(p.soft_duration > 0.0))
        throw std::domain_error("InhibitionParams: soft_duration must be > 0 in soft mode");
}

/* Graded output of a cell given its weighted dendritic inputs. Bounded in
 * [0, ceiling), monotone nondecreasing in every input. */
inline double activate(const ActivationParams& p, std::span<const WeightedInput> inputs) {
    double sigma = 0.0;
    for (const auto& in : inputs) {
        if (in.weight < 0.0) throw std::domain_error("activate: negative synaptic weight");
        if (in.potential < 0.0) throw std::domain_error("activate: negative input potential");
        sigma += in.weight * in.potential;
    }
    // the ceiling is an open bound; keep it open even when exp underflows
    const double v = p.ceiling * (1.0 - std::exp(-p.gain * sigma));
    return std::min(v, std::nextafter(p.ceiling, 0.0));
}

/* Receptor response at the given attribute distance (wavelength, luminance,
 * delay or position offset). Exactly zero beyond reach. */
inline double tuning_response(const TuningParams& p, double distance) {
    if (distance < 0.0) throw std::domain_error("tuning_response: negative attribute distance");
    if (distance > p.reach) return 0.0;
    return p.peak * std::exp(-p.decay * distance);
}

/* One explicit-Euler step of mutual hyperpolarization: every cell is pushed
 * down at a rate saturating in the summed potential of its neighbours, then
 * clamped at zero. Cells with larger neighbour sums lose more. */
inline PotentialVector inhibition_step(const PotentialVector& layer, const InhibitionParams& p,
                                       double dt) {
    if (!(dt > 0.0)) throw std::domain_error("inhibition_step: dt must be > 0");
    double total = 0.0;
    for (double v : layer) {
        if (v < 0.0) throw std::domain_error("inhibition_step: negative potential");
        total += v;
    }
    PotentialVector out(layer.size());
    for (std::size_t i = 0; i < layer.size(); ++i) {
        const double neighbour_sum = total - layer[i];
        const double rate = p.rate_ceiling * (1.0 - std::exp(-p.rate_gain * neighbour_sum));
        out[i] = std::max(0.0, layer[i] - dt * rate);
    }
    return out;
}

struct CompetitionResult {
    std::optional<std::size_t> winner;  // none iff the layer started all-zero
    PotentialVector potentials;
    std::size_t steps_run = 0;
};

namespace detail {

inline std::size_t argmax(const PotentialVector& v) {
    // ties broken by lowest index
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

inline std::size_t active_count(const PotentialVector& v) {
    std::size_t n = 0;
    for (double x : v)
        if (x > kActivityEpsilon) ++n;
    return n;
}

}  // namespace detail

/* Run the lateral-inhibition competition. Hard mode iterates until at most
 * one cell stays above kActivityEpsilon (or max_steps); soft mode runs only
 * while elapsed time fits in soft_duration. The winner is the argmax of the
 * settled potentials, ties to the lowest index. */
inline CompetitionResult compete(PotentialVector layer, const InhibitionParams& p, double dt,
                                 std::size_t max_steps) {
    if (!(dt > 0.0)) throw std::domain_error("compete: dt must be > 0");
    if (max_steps == 0) throw std::domain_error("compete: max_steps must be > 0");

    bool any_active = false;
    for (double v : layer) {
        if (v < 0.0) throw std::domain_error("compete: negative potential");
        if (v > 0.0) any_active = true;
    }
    if (!any_active) return {std::nullopt, std::move(layer), 0};

    std::size_t step_budget = max_steps;
    if (p.mode == CompetitionMode::soft) {
        const auto soft_steps =
            static_cast<std::size_t>(std::max(0.0, std::floor(p.soft_duration / dt + 1e-12)));
        step_budget = std::min(max_steps, soft_steps);
    }

    std::size_t steps = 0;
    while (steps < step_budget) {
        if (p.mode == CompetitionMode::hard && detail::active_count(layer) <= 1) break;
        layer = inhibition_step(layer, p, dt);
        ++steps;
    }
    const std::size_t winner = detail::argmax(layer);
    return {winner, std::move(layer), steps};
}

/* Probability that the encoded object occurs given independent attribute
 * potentials: 1 - prod exp(-gain*v_i) = 1 - exp(-gain * sum v_i). Equals
 * activate with unit weights and ceiling factored out. */
inline double occurrence_probability(double gain, std::span<const double> attribute_potentials) {
    if (gain < 0.0) throw std::domain_error("occurrence_probability: negative gain");
    double total = 0.0;
    for (double v : attribute_potentials) {
        if (v < 0.0) throw std::domain_error("occurrence_probability: negative potential");
        total += v;
    }
    return 1.0 - std::exp(-gain * total);
}

}  // namespace percept

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "percept/neuron.hpp"

namespace percept {

/* Constants of the dendritic-synapse dynamics. Growth converts unallocated
 * budget into resource on stimulated dendrites of the competition winner;
 * decay drains unstimulated dendrites back into a free pool. Both freeze
 * once the clock passes plastic_until. */
struct PlasticityParams {
    double weight_ceiling = 1.0;  // asymptotic synaptic weight
    double weight_gain = 1.0;     // 1/resource
    double growth_rate = 1.0;     // 1/time
    double resource_budget = 1.0; // per-cell cap on allocated resource
    double decay_rate = 1.0;      // resource/(weight*time)
    double log_offset = 1.0;      // additive constant of the log growth drive
    double plastic_until = 1e30;  // critical-period end (large = effectively always plastic)

    bool operator==(const PlasticityParams&) const = default;
};

inline void validate(const PlasticityParams& p) {
    if (!(p.weight_ceiling > 0.0)) throw std::domain_error("PlasticityParams: weight_ceiling must be > 0");
    if (!(p.weight_gain > 0.0)) throw std::domain_error("PlasticityParams: weight_gain must be > 0");
    if (!(p.growth_rate > 0.0)) throw std::domain_error("PlasticityParams: growth_rate must be > 0");
    if (!(p.resource_budget > 0.0)) throw std::domain_error("PlasticityParams: resource_budget must be > 0");
    if (!(p.decay_rate > 0.0)) throw std::domain_error("PlasticityParams: decay_rate must be > 0");
    if (!(p.plastic_until >= 0.0)) throw std::domain_error("PlasticityParams: plastic_until must be >= 0");
}

/* Per-cell dendritic state: one resource amount per dendrite plus the pool
 * of released but not yet re-allocated resource. */
struct SynapseState {
    std::vector<double> resources;
    double free_pool = 0.0;

    bool operator==(const SynapseState&) const = default;
};

inline double allocated_resource(const SynapseState& s) {
    return std::accumulate(s.resources.begin(), s.resources.end(), 0.0);
}

/* Synaptic weight as a saturating function of allocated resource. */
inline double weight_from_resource(const PlasticityParams& p, double r) {
    if (r < 0.0) throw std::domain_error("weight_from_resource: negative resource");
    const double w = p.weight_ceiling * (1.0 - std::exp(-p.weight_gain * r));
    return std::min(w, std::nextafter(p.weight_ceiling, 0.0));
}

/* Growth drive F(v) = max(0, log v + log_offset); zero for an unstimulated
 * dendrite, whose dynamics belong to decay_step instead. */
inline double growth_drive(double v, const PlasticityParams& p) {
    if (v <= 0.0) return 0.0;
    return std::max(0.0, std::log(v) + p.log_offset);
}

namespace detail {

/* Euler increments for one growth step, uniformly rescaled so the total
 * allocation lands exactly on the budget instead of overshooting it. */
inline std::vector<double> growth_increments(const SynapseState& s, std::span<const double> inputs,
                                             const PlasticityParams& p, double dt) {
    if (inputs.size() != s.resources.size())
        throw std::domain_error("growth_step: inputs length does not match dendrite count");
    if (!(dt > 0.0)) throw std::domain_error("growth_step: dt must be > 0");

    std::vector<double> inc(s.resources.size(), 0.0);
    const double headroom = p.resource_budget - allocated_resource(s);
    if (headroom <= 0.0) return inc;

    double total = 0.0;
    for (std::size_t i = 0; i < inc.size(); ++i) {
        inc[i] = dt * p.growth_rate * headroom * growth_drive(inputs[i], p);
        total += inc[i];
    }
    if (total > headroom) {
        const double scale = headroom / total;
        for (double& x : inc) x *= scale;
    }
    return inc;
}

}  // namespace detail

/* One growth step: each stimulated dendrite gains resource in proportion to
 * the remaining budget headroom and its growth drive. Consumes the free pool
 * first. A no-op once now passes plastic_until. */
inline SynapseState growth_step(SynapseState s, const PotentialVector& inputs,
                                const PlasticityParams& p, double dt, double now) {
    if (now > p.plastic_until) return s;
    const auto inc = detail::growth_increments(s, inputs, p, dt);
    double total = 0.0;
    for (std::size_t i = 0; i < inc.size(); ++i) {
        s.resources[i] += inc[i];
        total += inc[i];
    }
    s.free_pool -= std::min(s.free_pool, total);
    return s;
}

/* One decay step: every unstimulated dendrite loses resource at a rate set
 * by its current weight; the exact amount lost is moved into the free pool.
 * Stimulated dendrites are untouched. */
inline SynapseState decay_step(SynapseState s, const PlasticityParams& p, double dt,
                               const std::vector<bool>& stimulated) {
    if (!(dt > 0.0)) throw std::domain_error("decay_step: dt must be > 0");
    if (stimulated.size() != s.resources.size())
        throw std::domain_error("decay_step: stimulated flags length does not match dendrite count");
    for (std::size_t i = 0; i < s.resources.size(); ++i) {
        if (stimulated[i]) continue;
        const double w = weight_from_resource(p, s.resources[i]);
        const double next = std::max(0.0, s.resources[i] - dt * p.decay_rate * w);
        s.free_pool += s.resources[i] - next;
        s.resources[i] = next;
    }
    return s;
}

/* Objective the allocation maximizes: sum over dendrites of the saturating
 * weight term times the tuned input at that dendrite's attribute distance. */
inline double allocation_sigma(std::span<const double> resources, std::span<const double> distances,
                               const TuningParams& t, const PlasticityParams& p) {
    if (resources.size() != distances.size())
        throw std::domain_error("allocation_sigma: length mismatch");
    double sigma = 0.0;
    for (std::size_t i = 0; i < resources.size(); ++i)
        sigma += (1.0 - std::exp(-p.weight_gain * resources[i])) * tuning_response(t, distances[i]);
    return sigma;
}

/* Resource allocation maximizing allocation_sigma subject to the budget.
 * The stationarity condition gives r_i affine-decreasing in the attribute
 * distance; the additive constant is fixed by the budget and the
 * nonnegativity constraints by water-filling over the active set. */
inline std::vector<double> optimal_allocation(std::span<const double> distances,
                                              const TuningParams& t, const PlasticityParams& p) {
    const std::size_t n = distances.size();
    std::vector<double> r(n, 0.0);
    if (n == 0) return r;
    for (double d : distances)
        if (d < 0.0 || d > t.reach)
            throw std::domain_error("optimal_allocation: distance outside [0, reach]");

    const double g = p.weight_gain;
    std::vector<double> level(n);
    for (std::size_t i = 0; i < n; ++i) level[i] = std::log(g * tuning_response(t, distances[i]));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return level[a] > level[b]; });

    double prefix = 0.0;
    double threshold = 0.0;
    std::size_t active = n;
    for (std::size_t k = 1; k <= n; ++k) {
        prefix += level[order[k - 1]];
        const double candidate = (prefix - g * p.resource_budget) / static_cast<double>(k);
        const bool last_positive = candidate < level[order[k - 1]];
        const bool rest_excluded = (k == n) || (candidate >= level[order[k]]);
        if (last_positive && rest_excluded) {
            threshold = candidate;
            active = k;
            break;
        }
        if (k == n) threshold = candidate;
    }
    for (std::size_t j = 0; j < active; ++j) {
        const std::size_t i = order[j];
        r[i] = std::max(0.0, (level[i] - threshold) / g);
    }
    return r;
}

}  // namespace percept

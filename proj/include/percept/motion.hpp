#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "percept/network.hpp"

namespace percept {

struct TrajectoryPoint {
    double position = 0.0;
    double time = 0.0;
};

struct DelaySample {
    double position = 0.0;
    double delay = 0.0;
};

/* A motion rendered as what it is to the retina: a spatial pattern of time
 * delays. A constant-velocity trajectory gives delays affine in position
 * with slope 1/velocity; a static flash gives all-zero delays. */
struct DelayPattern {
    std::vector<DelaySample> samples;
};

inline DelayPattern motion_to_delays(std::span<const TrajectoryPoint> trajectory,
                                     double reference_time) {
    DelayPattern out;
    out.samples.reserve(trajectory.size());
    double prev_time = reference_time;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const auto& p = trajectory[i];
        if (p.time < reference_time)
            throw std::domain_error("motion_to_delays: trajectory time before reference");
        if (i > 0 && p.time < prev_time)
            throw std::domain_error("motion_to_delays: trajectory times must be nondecreasing");
        prev_time = p.time;
        out.samples.push_back({p.position, p.time - reference_time});
    }
    return out;
}

/* Delay pattern as an ordinary stimulus on the delay axis, detectable by the
 * same retinal machinery as any other attribute. */
inline StimulusPattern to_stimulus(const DelayPattern& delays, double intensity = 1.0) {
    StimulusPattern p;
    p.attribute_kind = AttributeKind::delay;
    p.samples.reserve(delays.samples.size());
    for (const auto& s : delays.samples) p.samples.push_back({s.position, s.delay, intensity});
    return p;
}

}  // namespace percept

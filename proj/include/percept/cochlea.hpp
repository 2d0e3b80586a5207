#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "percept/neuron.hpp"

namespace percept {

struct no_signal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* A position detector on the basilar-membrane cross-section: tuned to a
 * preferred position in [0, 1], with the matching incidence angle cached so
 * an unambiguous winner reports its angle exactly. */
struct PositionDetector {
    double preferred_position = 0.5;
    double preferred_angle = 0.0;
    TuningParams tuning;
};

/* Single-ear direction model: a strictly increasing map from the incidence
 * angle [-pi/2, pi/2] onto the cross-section position [0, 1], sampled by
 * position detectors at strictly increasing preferred positions. The inverse
 * map may be supplied analytically; otherwise it is recovered by bisection. */
struct CochleaModel {
    std::vector<PositionDetector> detectors;
    std::function<double(double)> angle_to_position;
    std::function<double(double)> position_to_angle;  // optional analytic inverse
};

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

inline void validate(const CochleaModel& m) {
    if (m.detectors.empty()) throw std::domain_error("CochleaModel: no detectors");
    if (!m.angle_to_position) throw std::domain_error("CochleaModel: missing angle_to_position map");
    for (std::size_t i = 0; i + 1 < m.detectors.size(); ++i)
        if (!(m.detectors[i].preferred_position < m.detectors[i + 1].preferred_position))
            throw std::domain_error("CochleaModel: preferred positions must be strictly increasing");
}

/* Cross-section position receiving maximal stimulus from a sound at the
 * given incidence angle. */
inline double incidence_to_position(double angle, const CochleaModel& m) {
    if (angle < -kHalfPi || angle > kHalfPi)
        throw std::domain_error("incidence_to_position: angle outside [-pi/2, pi/2]");
    return m.angle_to_position(angle);
}

/* Invert the angle-to-position map: analytically when provided, otherwise by
 * bisection over the strictly monotone forward map. */
inline double position_to_incidence(const CochleaModel& m, double position) {
    if (m.position_to_angle) return m.position_to_angle(position);
    double lo = -kHalfPi, hi = kHalfPi;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (m.angle_to_position(mid) < position)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/* Default model: detectors evenly spread over the membrane and a linear
 * angle map with its exact analytic inverse. */
inline CochleaModel make_linear_cochlea(std::size_t detector_count, const TuningParams& tuning) {
    if (detector_count == 0) throw std::domain_error("make_linear_cochlea: need at least one detector");
    CochleaModel m;
    m.angle_to_position = [](double angle) { return (angle + kHalfPi) / std::numbers::pi; };
    m.position_to_angle = [](double position) { return position * std::numbers::pi - kHalfPi; };
    m.detectors.reserve(detector_count);
    for (std::size_t k = 0; k < detector_count; ++k) {
        const double position =
            detector_count == 1
                ? 0.5
                : static_cast<double>(k) / static_cast<double>(detector_count - 1);
        m.detectors.push_back({position, m.position_to_angle(position), tuning});
    }
    return m;
}

/* Forward response synthesis: each detector reports its tuned response to
 * the membrane position excited by the given incidence angle. */
inline PotentialVector cochlea_responses(const CochleaModel& m, double angle) {
    const double position = incidence_to_position(angle, m);
    PotentialVector v;
    v.reserve(m.detectors.size());
    for (const auto& d : m.detectors)
        v.push_back(tuning_response(d.tuning, std::abs(position - d.preferred_position)));
    return v;
}

/* Winner-take-all over the position detectors, then the incidence angle of
 * the winning position. When the better adjacent neighbour also responds,
 * the position is refined by log-ratio interpolation between the two
 * exponential tuning curves (exact for noiseless responses), and only then
 * mapped back to an angle. A lone active detector reports its preferred
 * angle exactly. */
inline double localize_direction(const PotentialVector& responses, const CochleaModel& m) {
    validate(m);
    if (responses.size() != m.detectors.size())
        throw std::domain_error("localize_direction: response/detector count mismatch");
    bool any = false;
    for (double v : responses) {
        if (v < 0.0) throw std::domain_error("localize_direction: negative response");
        if (v > 0.0) any = true;
    }
    if (!any) throw no_signal_error("localize_direction: all responses are zero");

    std::size_t win = 0;
    for (std::size_t i = 1; i < responses.size(); ++i)
        if (responses[i] > responses[win]) win = i;

    std::size_t neighbour = win;
    double neighbour_response = 0.0;
    if (win > 0 && responses[win - 1] > neighbour_response) {
        neighbour = win - 1;
        neighbour_response = responses[win - 1];
    }
    if (win + 1 < responses.size() && responses[win + 1] > neighbour_response) {
        neighbour = win + 1;
        neighbour_response = responses[win + 1];
    }
    if (neighbour == win || neighbour_response <= 0.0) return m.detectors[win].preferred_angle;

    const auto& lo = m.detectors[std::min(win, neighbour)];
    const auto& hi = m.detectors[std::max(win, neighbour)];
    const double v_lo = responses[std::min(win, neighbour)];
    const double v_hi = responses[std::max(win, neighbour)];
    // log-ratio of two exponential tuning curves is affine in the position
    const double numerator = lo.tuning.decay * lo.preferred_position +
                             hi.tuning.decay * hi.preferred_position -
                             std::log(v_lo / v_hi) + std::log(lo.tuning.peak / hi.tuning.peak);
    double position = numerator / (lo.tuning.decay + hi.tuning.decay);
    position = std::clamp(position, lo.preferred_position, hi.preferred_position);
    return position_to_incidence(m, position);
}

}  // namespace percept

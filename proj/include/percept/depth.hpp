#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "percept/network.hpp"

namespace percept {

/* Thrown when the two view rays are (near-)parallel and triangulated depth
 * is unbounded. */
struct degenerate_geometry_error : std::domain_error {
    using std::domain_error::domain_error;
};

/* Guard on the tangent difference below which the geometry counts as
 * degenerate. */
inline constexpr double kParallelRayGuard = 1e-9;

/* Binocular fixation geometry. Both eyes sit on the baseline axis; alpha and
 * theta are the oculomotor angles of the left and right gaze rays, measured
 * from the baseline direction on the fixation side, and are in (0, pi/2).
 * Disparities are signed retinal arc offsets of the target from the fovea:
 * disparity_left = b, disparity_right = a in the angle conversions
 * beta = b/r, eta = a/r. */
struct DepthScene {
    double baseline = 0.065;        // interocular distance c
    double eyeball_radius = 0.012;  // r
    double alpha = 0.5;             // left oculomotor angle, radians
    double theta = 0.5;             // right oculomotor angle, radians
    double disparity_left = 0.0;    // b
    double disparity_right = 0.0;   // a

    bool operator==(const DepthScene&) const = default;
};

/* Retinal arc offsets to disparity angles: (eta, beta) = (a/r, b/r). */
inline std::pair<double, double> disparity_angles(double a, double b, double r) {
    if (!(r > 0.0)) throw std::domain_error("disparity_angles: eyeball radius must be > 0");
    if (a < 0.0 || b < 0.0) throw std::domain_error("disparity_angles: negative disparity");
    return {a / r, b / r};
}

/* Triangulated depth d = c * tan(alpha+beta) * tan(theta+eta)
 *                          / [tan(alpha+beta) - tan(theta+eta)].
 *
 * Sign convention: d is the signed perpendicular distance of the viewed
 * point from the interocular baseline. It is positive when the two rays
 * cross on the fixation side and negative when the disparity geometry puts
 * the virtual crossing on the opposite side. Applying the formula to the
 * bare oculomotor angles (zero disparities) gives the fixated point's own
 * distance, so differences of two evaluations give relative depth. */
inline double depth_from_disparity(const DepthScene& s) {
    if (!(s.baseline > 0.0)) throw std::domain_error("depth_from_disparity: baseline must be > 0");
    if (!(s.eyeball_radius > 0.0))
        throw std::domain_error("depth_from_disparity: eyeball radius must be > 0");
    constexpr double half_pi = std::numbers::pi / 2.0;
    if (!(s.alpha > 0.0 && s.alpha < half_pi) || !(s.theta > 0.0 && s.theta < half_pi))
        throw std::domain_error("depth_from_disparity: oculomotor angles must be in (0, pi/2)");
    const double beta = s.disparity_left / s.eyeball_radius;
    const double eta = s.disparity_right / s.eyeball_radius;
    const double left_angle = s.alpha + beta;
    const double right_angle = s.theta + eta;
    if (!(left_angle > 0.0 && left_angle < half_pi) || !(right_angle > 0.0 && right_angle < half_pi))
        throw std::domain_error("depth_from_disparity: view angles must stay in (0, pi/2)");
    const double tl = std::tan(left_angle);
    const double tr = std::tan(right_angle);
    if (std::abs(tl - tr) < kParallelRayGuard)
        throw degenerate_geometry_error("depth_from_disparity: view rays are parallel");
    return s.baseline * tl * tr / (tl - tr);
}

/* Forward construction used by the depth scenarios: eyes at 0 and baseline
 * on the x axis, fixation and target at (x, height) with x < 0 (the side
 * where both view angles stay in (0, pi/2)) and height > 0. Disparities come
 * out signed; depth_from_disparity applied to the result recovers
 * target_height. */
inline DepthScene make_scene(double baseline, double eyeball_radius, double fix_x,
                             double fix_height, double target_x, double target_height) {
    if (!(baseline > 0.0) || !(eyeball_radius > 0.0))
        throw std::domain_error("make_scene: baseline and eyeball radius must be > 0");
    if (!(fix_x < 0.0) || !(target_x < 0.0))
        throw std::domain_error("make_scene: points must lie on the negative-x side");
    if (!(fix_height > 0.0) || !(target_height > 0.0))
        throw std::domain_error("make_scene: points must lie above the baseline");
    DepthScene s;
    s.baseline = baseline;
    s.eyeball_radius = eyeball_radius;
    s.alpha = std::atan2(fix_height, -fix_x);
    s.theta = std::atan2(fix_height, baseline - fix_x);
    const double target_left = std::atan2(target_height, -target_x);
    const double target_right = std::atan2(target_height, baseline - target_x);
    s.disparity_left = (target_left - s.alpha) * eyeball_radius;
    s.disparity_right = (target_right - s.theta) * eyeball_radius;
    return s;
}

/* Overlap the two retinal fields into one pattern: all samples keep their
 * positions, and the eye of origin is folded into the attribute axis as a
 * constant offset on the right eye's values. The merged pattern is an
 * ordinary stimulus, so depth differences become learnable spatial patterns
 * without any explicit disparity computation. */
inline StimulusPattern overlay_retinas(const StimulusPattern& left, const StimulusPattern& right,
                                       double right_eye_tag = 1.0) {
    if (left.attribute_kind != right.attribute_kind)
        throw std::domain_error("overlay_retinas: mismatched attribute kinds");
    StimulusPattern merged;
    merged.attribute_kind = left.attribute_kind;
    merged.samples.reserve(left.samples.size() + right.samples.size());
    for (const auto& s : left.samples) merged.samples.push_back(s);
    for (const auto& s : right.samples)
        merged.samples.push_back({s.position, s.attribute_value + right_eye_tag, s.intensity});
    return merged;
}

}  // namespace percept

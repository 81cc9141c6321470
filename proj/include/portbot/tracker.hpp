#pragma once

#include "portbot/geometry.hpp"
#include "portbot/platforms.hpp"

namespace portbot::tracker {

/// Proportional way-point tracker gains. Ground fields: k_turn, k_speed,
/// v_max, turn_threshold. Air fields: k_xy, k_v, tilt_max, k_z.
struct TrackerGains {
    double k_turn = 2.0;         // 1/s
    double k_speed = 1.0;        // 1/s
    double v_max = 0.5;          // m/s
    double turn_threshold = 0.5; // rad; turn in place above this heading error
    double k_xy = 0.06;          // rad of tilt per meter of error
    double k_v = 0.14;           // rad of tilt per m/s of velocity (damping)
    double tilt_max = 0.2;       // rad
    double k_z = 1.0;            // 1/s
    double accept_radius = 0.06; // m

    /// Defaults for a platform; accept_radius = 0.6 * q_d.
    static TrackerGains defaults_for(const platform::PlatformSpec& spec);

    /// Throws std::invalid_argument if a gain is non-positive, tilt_max >= pi/2
    /// or accept_radius exceeds q_d.
    void validate(const platform::PlatformSpec& spec) const;
};

platform::Command track_step_diffdrive(const platform::DiffDriveState& s, const Position3& wp, const TrackerGains& g,
                                       const platform::Limits& lim);

/// Yaw reference is held at the current yaw; horizontal error maps to tilt through the inverse of
/// the attitude-to-acceleration map at the current yaw.
platform::Command track_step_quad(const platform::QuadState& s, const Position3& wp, const TrackerGains& g,
                                  const platform::Limits& lim);

platform::Command track_step(const platform::PlatformState& s, const Position3& wp, const TrackerGains& g,
                             const platform::Limits& lim);

/// Whether the tracker considers wp reached from s.
bool arrived(const platform::PlatformState& s, const Position3& wp, const TrackerGains& g);

} // namespace portbot::tracker

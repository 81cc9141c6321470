#include "portbot/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace portbot::tracker {

using namespace platform;

namespace {

double clip(double v, double bound) { return std::clamp(v, -bound, bound); }

} // namespace

TrackerGains TrackerGains::defaults_for(const PlatformSpec& spec)
{
    TrackerGains g;
    g.accept_radius = 0.6 * spec.quant_dist;
    return g;
}

void TrackerGains::validate(const PlatformSpec& spec) const
{
    const std::pair<double, const char*> fields[] = {
        {k_turn, "k_turn"}, {k_speed, "k_speed"}, {v_max, "v_max"},   {turn_threshold, "turn_threshold"},
        {k_xy, "k_xy"},     {k_v, "k_v"},         {tilt_max, "tilt_max"}, {k_z, "k_z"},
        {accept_radius, "accept_radius"},
    };
    for (auto [v, name] : fields)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("tracker: ") + name + " must be positive");
    if (tilt_max >= kPi / 2)
        throw std::invalid_argument("tracker: tilt_max must be below pi/2");
    if (accept_radius > spec.quant_dist)
        throw std::invalid_argument("tracker: accept_radius exceeds q_d");
}

Command track_step_diffdrive(const DiffDriveState& s, const Position3& wp, const TrackerGains& g, const Limits& lim)
{
    const double dx = wp.x - s.x;
    const double dy = wp.y - s.y;
    const double d = std::hypot(dx, dy);
    if (d <= g.accept_radius)
        return Straight{0.0};

    const double err = wrap_angle(std::atan2(dy, dx) - s.theta);
    const double rate = clip(g.k_turn * err, lim.a_max);
    if (std::abs(err) > g.turn_threshold)
        return Turn{rate};

    const double v = std::min({g.k_speed * d, g.v_max, lim.v_max});
    if (std::abs(rate) < 1e-9)
        return Straight{v};
    return Curve{v, v / rate};
}

Command track_step_quad(const QuadState& s, const Position3& wp, const TrackerGains& g, const Limits& lim)
{
    if (!s.airborne() || s.phase == FlightPhase::TakingOff)
        return TakeOff{};

    // desired tilt-equivalent acceleration in the world frame
    const double ux = g.k_xy * (wp.x - s.x) - g.k_v * s.vx;
    const double uy = g.k_xy * (wp.y - s.y) - g.k_v * s.vy;

    // world accel ~ [-cos(psi) -sin(psi); sin(psi) cos(psi)] * [pitch; roll]
    // singular near |psi| = pi/4; steer yaw back to zero there
    double psi = s.yaw;
    double yaw_ref = s.yaw;
    double det = -std::cos(2.0 * psi);
    if (std::abs(det) < 0.2) {
        psi = 0.0;
        det = -1.0;
        yaw_ref = 0.0;
    }
    const double c = std::cos(psi), sn = std::sin(psi);
    double pitch = (ux * c + uy * sn) / det;
    double roll = -(ux * sn + uy * c) / det;

    const double tilt = std::min(g.tilt_max, lim.tilt_max);
    pitch = clip(pitch, tilt);
    roll = clip(roll, tilt);
    const double gaz = clip(g.k_z * (wp.z - s.z), lim.gaz_max);
    return SetAttitude{yaw_ref, pitch, roll, gaz};
}

Command track_step(const PlatformState& s, const Position3& wp, const TrackerGains& g, const Limits& lim)
{
    if (const auto* dd = std::get_if<DiffDriveState>(&s))
        return track_step_diffdrive(*dd, wp, g, lim);
    return track_step_quad(std::get<QuadState>(s), wp, g, lim);
}

bool arrived(const PlatformState& s, const Position3& wp, const TrackerGains& g)
{
    return dist(position_of(s), wp) <= g.accept_radius;
}

} // namespace portbot::tracker

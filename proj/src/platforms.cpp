#include "portbot/platforms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace portbot::platform {

namespace {

double clip(double v, double bound) { return std::clamp(v, -bound, bound); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

bool is_diffdrive_command(const Command& c)
{
    return std::holds_alternative<Straight>(c) || std::holds_alternative<Turn>(c) || std::holds_alternative<Curve>(c);
}

std::string describe(const Command& c)
{
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Straight& s) { os << "straight(" << s.v_ref << ")"; },
                   [&](const Turn& t) { os << "turn(" << t.a_ref << ")"; },
                   [&](const Curve& cv) { os << "curve(" << cv.v_ref << ", " << cv.r << ")"; },
                   [&](const TakeOff&) { os << "takeOff()"; },
                   [&](const Land&) { os << "land()"; },
                   [&](const Hover&) { os << "hover()"; },
                   [&](const SetAttitude& a) {
                       os << "setAttitude(" << a.yaw_ref << ", " << a.pitch_ref << ", " << a.roll_ref << ", "
                          << a.gaz << ")";
                   },
               },
               c);
    return os.str();
}

std::string to_string(Kind k) { return k == Kind::Quad ? "quad" : "diffdrive"; }

Kind kind_from_string(const std::string& s)
{
    if (s == "quad")
        return Kind::Quad;
    if (s == "diffdrive")
        return Kind::DiffDrive;
    throw std::invalid_argument("unknown platform kind '" + s + "'");
}

PlatformSpec PlatformSpec::diff_drive_defaults()
{
    PlatformSpec s;
    s.kind = Kind::DiffDrive;
    s.dwell_time = 0.3;
    s.quant_dist = 0.10;
    return s;
}

PlatformSpec PlatformSpec::quad_defaults()
{
    PlatformSpec s;
    s.kind = Kind::Quad;
    s.dwell_time = 0.5;
    s.quant_dist = 0.15;
    return s;
}

void PlatformSpec::validate() const
{
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("platform: ") + what + " must be positive");
    };
    positive(mass, "mass");
    positive(attitude_gain, "attitude_gain");
    positive(limits.v_max, "limits.v_max");
    positive(limits.a_max, "limits.a_max");
    positive(limits.tilt_max, "limits.tilt_max");
    positive(limits.yaw_max, "limits.yaw_max");
    positive(limits.gaz_max, "limits.gaz_max");
    positive(dwell_time, "dwell_time");
    positive(quant_dist, "quant_dist");
    positive(sensor_period, "sensor_period");
    positive(integration_step, "integration_step");
    positive(hover_altitude, "hover_altitude");
    positive(vertical_rate, "vertical_rate");
    if (limits.tilt_max >= kPi / 2)
        throw std::invalid_argument("platform: tilt_max must be below pi/2");
    if (integration_step > sensor_period)
        throw std::invalid_argument("platform: integration_step exceeds sensor_period");
}

DiffDriveState step_diffdrive(const DiffDriveState& s, const Command& c, double h, const PlatformSpec& spec)
{
    if (!(h > 0.0))
        throw std::invalid_argument("step_diffdrive: h must be positive");
    double v = 0.0;
    double rate = 0.0;
    const Limits& lim = spec.limits;
    std::visit(overloaded{
                   [&](const Straight& st) { v = clip(st.v_ref, lim.v_max); },
                   [&](const Turn& t) { rate = clip(t.a_ref, lim.a_max); },
                   [&](const Curve& cv) {
                       v = clip(cv.v_ref, lim.v_max);
                       if (v != 0.0)
                           rate = clip(cv.r == 0.0 ? std::copysign(lim.a_max, v) : v / cv.r, lim.a_max);
                   },
                   [&](const auto&) {
                       throw WrongPlatformCommand("diff-drive robot cannot execute " + describe(c));
                   },
               },
               c);

    DiffDriveState n;
    n.x = s.x + h * v * std::cos(s.theta);
    n.y = s.y + h * v * std::sin(s.theta);
    n.theta = wrap_angle(s.theta + h * rate);
    return n;
}

QuadAccel quad_acceleration(const QuadState& s, double gaz, const PlatformSpec& spec, Disturbance d)
{
    const double sphi = std::sin(s.roll), cphi = std::cos(s.roll);
    const double sth = std::sin(s.pitch), cth = std::cos(s.pitch);
    const double spsi = std::sin(s.yaw), cpsi = std::cos(s.yaw);
    QuadAccel a;
    a.thrust = (gaz + 10.0) / cphi / cth;
    a.ax = -a.thrust * (sphi * spsi + cphi * sth * cpsi) / spec.mass + d.ax;
    a.ay = a.thrust * (sphi * cpsi + cphi * sth * spsi) / spec.mass + d.ay;
    return a;
}

QuadState step_quad(const QuadState& s, const Command& c, double h, const PlatformSpec& spec, Disturbance d)
{
    if (!(h > 0.0))
        throw std::invalid_argument("step_quad: h must be positive");
    if (is_diffdrive_command(c))
        throw WrongPlatformCommand("quadrotor cannot execute " + describe(c));

    const Limits& lim = spec.limits;
    QuadState n = s;

    if (std::holds_alternative<TakeOff>(c)) {
        if (s.phase == FlightPhase::Flying)
            return step_quad(s, Hover{}, h, spec, d);
        n.phase = FlightPhase::TakingOff;
        n.vx = n.vy = 0.0;
        n.z = std::min(spec.hover_altitude, s.z + spec.vertical_rate * h);
        if (n.z >= spec.hover_altitude)
            n.phase = FlightPhase::Flying;
        return n;
    }
    if (std::holds_alternative<Land>(c)) {
        if (s.phase == FlightPhase::Grounded)
            return n;
        n.phase = FlightPhase::Landing;
        n.vx = n.vy = 0.0;
        n.z = std::max(0.0, s.z - spec.vertical_rate * h);
        if (n.z <= 0.0)
            n = QuadState{s.x, s.y, 0.0, 0.0, 0.0, s.yaw, 0.0, 0.0, FlightPhase::Grounded};
        return n;
    }

    SetAttitude ref;
    if (std::holds_alternative<Hover>(c)) {
        if (!s.airborne())
            return n;
        ref = SetAttitude{s.yaw, 0.0, 0.0, 0.0};
    } else {
        if (!s.airborne())
            throw CommandWhileGrounded("setAttitude issued while grounded");
        const auto& a = std::get<SetAttitude>(c);
        ref = SetAttitude{clip(a.yaw_ref, lim.yaw_max), clip(a.pitch_ref, lim.tilt_max), clip(a.roll_ref, lim.tilt_max),
                          clip(a.gaz, lim.gaz_max)};
    }

    const QuadAccel acc = quad_acceleration(s, ref.gaz, spec, d);
    n.phase = FlightPhase::Flying;
    n.x = s.x + h * s.vx;
    n.y = s.y + h * s.vy;
    n.z = std::max(0.0, s.z + h * ref.gaz);
    n.vx = s.vx + h * acc.ax;
    n.vy = s.vy + h * acc.ay;
    n.yaw = wrap_angle(s.yaw + h * spec.attitude_gain * (ref.yaw_ref - s.yaw));
    n.pitch = wrap_angle(s.pitch + h * spec.attitude_gain * (ref.pitch_ref - s.pitch));
    n.roll = wrap_angle(s.roll + h * spec.attitude_gain * (ref.roll_ref - s.roll));
    return n;
}

PlatformState step(const PlatformState& s, const Command& c, double h, const PlatformSpec& spec, Disturbance d)
{
    return std::visit(overloaded{
                          [&](const DiffDriveState& dd) -> PlatformState { return step_diffdrive(dd, c, h, spec); },
                          [&](const QuadState& q) -> PlatformState { return step_quad(q, c, h, spec, d); },
                      },
                      s);
}

Position3 position_of(const PlatformState& s)
{
    return std::visit(overloaded{
                          [](const DiffDriveState& dd) { return Position3{dd.x, dd.y, 0.0}; },
                          [](const QuadState& q) { return Position3{q.x, q.y, q.z}; },
                      },
                      s);
}

PlatformState initial_state(const PlatformSpec& spec, const Position3& p, double heading, bool airborne)
{
    if (spec.kind == Kind::DiffDrive)
        return DiffDriveState{p.x, p.y, wrap_angle(heading)};
    QuadState q;
    q.x = p.x;
    q.y = p.y;
    q.yaw = wrap_angle(heading);
    if (airborne) {
        q.z = p.z > 0.0 ? p.z : spec.hover_altitude;
        q.phase = FlightPhase::Flying;
    }
    return q;
}

} // namespace portbot::platform

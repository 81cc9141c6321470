#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include "portbot/geometry.hpp"

namespace portbot::platform {

// Ground robot commands.
struct Straight {
    double v_ref = 0.0; // m/s
};
struct Turn {
    double a_ref = 0.0; // rad/s
};
struct Curve {
    double v_ref = 0.0; // m/s
    double r = 1.0;     // m, signed (positive turns left)
};

// Quadrotor commands. SetAttitude bundles the four combinable references
// (yaw, pitch, roll, gaz); the other three are exclusive.
struct TakeOff {};
struct Land {};
struct Hover {};
struct SetAttitude {
    double yaw_ref = 0.0;   // rad
    double pitch_ref = 0.0; // rad
    double roll_ref = 0.0;  // rad
    double gaz = 0.0;       // m/s
};

using Command = std::variant<Straight, Turn, Curve, TakeOff, Land, Hover, SetAttitude>;

bool is_diffdrive_command(const Command& c);
std::string describe(const Command& c);

enum class Kind { DiffDrive, Quad };

std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);

struct Limits {
    double v_max = 1.0;    // |v_ref|
    double a_max = 2.0;    // |a_ref| and curve turn rate
    double tilt_max = 0.35; // |pitch_ref|, |roll_ref|
    double yaw_max = kPi;  // |yaw_ref|
    double gaz_max = 1.0;  // |gaz|
};

struct PlatformSpec {
    Kind kind = Kind::DiffDrive;
    double mass = 1.0;          // kg
    double attitude_gain = 2.0; // 1/s
    Limits limits;
    double dwell_time = 0.3;       // d_t, s
    double quant_dist = 0.10;      // q_d, m
    double sensor_period = 0.1;    // s
    double integration_step = 1e-3; // s
    double hover_altitude = 1.0;   // m, takeoff target
    double vertical_rate = 0.5;    // m/s, takeoff and landing ramps

    static PlatformSpec diff_drive_defaults();
    static PlatformSpec quad_defaults();

    /// Altitude at which configured way-points are flown: 0 on the ground,
    /// hover_altitude in the air.
    double operating_altitude() const { return kind == Kind::Quad ? hover_altitude : 0.0; }

    /// Throws std::invalid_argument if a field is out of range.
    void validate() const;
};

struct DiffDriveState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0; // (-pi, pi]

    friend bool operator==(const DiffDriveState&, const DiffDriveState&) = default;
};

enum class FlightPhase { Grounded, TakingOff, Flying, Landing };

struct QuadState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
    FlightPhase phase = FlightPhase::Grounded;

    bool airborne() const { return phase != FlightPhase::Grounded; }

    friend bool operator==(const QuadState&, const QuadState&) = default;
};

using PlatformState = std::variant<DiffDriveState, QuadState>;

/// Horizontal disturbance acceleration (wind), m/s^2.
struct Disturbance {
    double ax = 0.0;
    double ay = 0.0;
};

class WrongPlatformCommand : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class CommandWhileGrounded : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// One explicit Euler step of the unicycle model.
DiffDriveState step_diffdrive(const DiffDriveState& s, const Command& c, double h, const PlatformSpec& spec);

struct QuadAccel {
    double ax = 0.0;
    double ay = 0.0;
    double thrust = 0.0;
};

/// Horizontal acceleration of the attitude model at the current angles.
QuadAccel quad_acceleration(const QuadState& s, double gaz, const PlatformSpec& spec, Disturbance d = {});

/// One explicit Euler step of the quadrotor model. Pitch and roll follow
/// first-order lags toward their references with the same gain as yaw.
QuadState step_quad(const QuadState& s, const Command& c, double h, const PlatformSpec& spec, Disturbance d = {});

PlatformState step(const PlatformState& s, const Command& c, double h, const PlatformSpec& spec, Disturbance d = {});

Position3 position_of(const PlatformState& s);

/// Initial state at a ground position (quads start grounded unless airborne is set).
PlatformState initial_state(const PlatformSpec& spec, const Position3& p, double heading, bool airborne);

} // namespace portbot::platform

#include <gtest/gtest.h>

#include "portbot/platforms.hpp"

using namespace portbot;
using namespace portbot::platform;

namespace {

DiffDriveState run_dd(DiffDriveState s, const Command& c, double h, double T, const PlatformSpec& spec)
{
    const auto n = static_cast<int>(std::llround(T / h));
    for (int i = 0; i < n; ++i)
        s = step_diffdrive(s, c, h, spec);
    return s;
}

} // namespace

TEST(DiffDrive, StraightAndTurn)
{
    const auto spec = PlatformSpec::diff_drive_defaults();
    const auto s = run_dd({0, 0, 0}, Straight{0.5}, 1e-3, 2.0, spec);
    EXPECT_NEAR(s.x, 1.0, 1e-9);
    EXPECT_NEAR(s.y, 0.0, 1e-12);
    const auto t = run_dd({0, 0, 0}, Turn{1.0}, 1e-3, 1.0, spec);
    EXPECT_NEAR(t.theta, 1.0, 1e-9);
    EXPECT_EQ(t.x, 0.0);
}

TEST(DiffDrive, CommandsAreClipped)
{
    auto spec = PlatformSpec::diff_drive_defaults();
    spec.limits.v_max = 0.4;
    const auto s = run_dd({0, 0, 0}, Straight{3.0}, 1e-3, 1.0, spec);
    EXPECT_NEAR(s.x, 0.4, 1e-9);
}

// Exact arc of radius r at speed v from the origin heading +x:
// centre (0, r), angle swept v T / r.
TEST(DiffDrive, CurveFollowsCircleWithinEulerError)
{
    const auto spec = PlatformSpec::diff_drive_defaults();
    const double v = 0.5, r = 1.0, T = 3.0;
    const double phi = v * T / r;
    const Position3 exact{r * std::sin(phi), r * (1 - std::cos(phi)), 0};

    auto err = [&](double h) {
        const auto s = run_dd({0, 0, 0}, Curve{v, r}, h, T, spec);
        return dist(Position3{s.x, s.y, 0}, exact);
    };
    const double e1 = err(1e-2), e2 = err(5e-3), e3 = err(1e-3);
    EXPECT_LT(e3, 2e-3);
    // first order: halving h roughly halves the error
    EXPECT_NEAR(e1 / e2, 2.0, 0.2);
    EXPECT_GT(e1, e3);
}

TEST(DiffDrive, RejectsQuadCommands)
{
    const auto spec = PlatformSpec::diff_drive_defaults();
    EXPECT_THROW(step_diffdrive({}, TakeOff{}, 1e-3, spec), WrongPlatformCommand);
    EXPECT_THROW(step_diffdrive({}, SetAttitude{}, 1e-3, spec), WrongPlatformCommand);
}

TEST(Quad, PitchAccelerationMatchesHandComputation)
{
    // thrust (gaz + g) / (cos(roll) cos(pitch)), g = 10; at roll = yaw = 0:
    // ax = -thrust sin(pitch) = -10 tan(pitch)
    const auto spec = PlatformSpec::quad_defaults();
    QuadState s;
    s.phase = FlightPhase::Flying;
    s.z = 1;
    s.pitch = 0.1;
    const auto a = quad_acceleration(s, 0.0, spec);
    EXPECT_NEAR(a.ax, -1.0033467208545055, 1e-12);
    EXPECT_NEAR(a.ay, 0.0, 1e-15);

    s.pitch = 0.0;
    s.roll = 0.1;
    const auto b = quad_acceleration(s, 0.0, spec);
    EXPECT_NEAR(b.ay, 1.0033467208545055, 1e-12);
    EXPECT_NEAR(b.ax, 0.0, 1e-15);

    // at yaw pi/2 the pitch term moves to y: ay = thrust cos(roll) sin(pitch) sin(yaw)
    s.roll = 0.0;
    s.pitch = 0.1;
    s.yaw = kPi / 2;
    const auto c = quad_acceleration(s, 0.0, spec);
    EXPECT_NEAR(c.ax, 0.0, 1e-12);
    EXPECT_NEAR(c.ay, 1.0033467208545055, 1e-12);
}

TEST(Quad, DisturbanceAddsToAcceleration)
{
    const auto spec = PlatformSpec::quad_defaults();
    QuadState s;
    s.phase = FlightPhase::Flying;
    const auto a = quad_acceleration(s, 0.0, spec, Disturbance{0.2, -0.1});
    EXPECT_DOUBLE_EQ(a.ax, 0.2);
    EXPECT_DOUBLE_EQ(a.ay, -0.1);
}

TEST(Quad, TakeOffRampsToHoverAltitude)
{
    const auto spec = PlatformSpec::quad_defaults();
    QuadState s;
    int steps = 0;
    while (s.phase != FlightPhase::Flying && steps < 10000) {
        s = step_quad(s, TakeOff{}, 1e-3, spec);
        ++steps;
    }
    EXPECT_EQ(s.phase, FlightPhase::Flying);
    EXPECT_DOUBLE_EQ(s.z, spec.hover_altitude);
    EXPECT_NEAR(steps * 1e-3, spec.hover_altitude / spec.vertical_rate, 2e-3);

    for (int i = 0; i < 3000; ++i)
        s = step_quad(s, Land{}, 1e-3, spec);
    EXPECT_EQ(s.phase, FlightPhase::Grounded);
    EXPECT_EQ(s.z, 0.0);
}

TEST(Quad, GroundedRejectsAttitude)
{
    const auto spec = PlatformSpec::quad_defaults();
    EXPECT_THROW(step_quad({}, SetAttitude{0, 0.1, 0, 0}, 1e-3, spec), CommandWhileGrounded);
    EXPECT_THROW(step_quad({}, Straight{1}, 1e-3, spec), WrongPlatformCommand);
    // hover on the ground is a no-op
    EXPECT_EQ(step_quad({}, Hover{}, 1e-3, spec), QuadState{});
}

TEST(Quad, AttitudeFollowsFirstOrderLag)
{
    const auto spec = PlatformSpec::quad_defaults();
    QuadState s;
    s.phase = FlightPhase::Flying;
    s.z = 1;
    const double h = 1e-4, T = 0.5;
    for (int i = 0; i < static_cast<int>(T / h); ++i)
        s = step_quad(s, SetAttitude{0, 0.2, 0, 0}, h, spec);
    // pitch(t) = ref (1 - exp(-k t))
    EXPECT_NEAR(s.pitch, 0.2 * (1 - std::exp(-spec.attitude_gain * T)), 1e-4);
    EXPECT_LT(s.vx, 0.0);
}

TEST(Quad, ReferencesAreClippedToTiltLimit)
{
    auto spec = PlatformSpec::quad_defaults();
    spec.limits.tilt_max = 0.1;
    QuadState s;
    s.phase = FlightPhase::Flying;
    s.z = 1;
    for (int i = 0; i < 20000; ++i)
        s = step_quad(s, SetAttitude{0, 1.0, -1.0, 0}, 1e-3, spec);
    EXPECT_NEAR(s.pitch, 0.1, 1e-6);
    EXPECT_NEAR(s.roll, -0.1, 1e-6);
}

TEST(Platform, SpecValidation)
{
    auto spec = PlatformSpec::quad_defaults();
    EXPECT_NO_THROW(spec.validate());
    spec.limits.tilt_max = 2.0;
    EXPECT_THROW(spec.validate(), std::invalid_argument);
    spec = PlatformSpec::diff_drive_defaults();
    spec.integration_step = 0.5;
    EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Platform, DefaultsAndInitialState)
{
    const auto dd = PlatformSpec::diff_drive_defaults();
    const auto q = PlatformSpec::quad_defaults();
    EXPECT_DOUBLE_EQ(dd.dwell_time, 0.3);
    EXPECT_DOUBLE_EQ(dd.quant_dist, 0.10);
    EXPECT_DOUBLE_EQ(q.dwell_time, 0.5);
    EXPECT_DOUBLE_EQ(q.quant_dist, 0.15);
    EXPECT_EQ(position_of(initial_state(q, {1, 2, 0}, 0, true)), (Position3{1, 2, q.hover_altitude}));
    EXPECT_EQ(position_of(initial_state(q, {1, 2, 0}, 0, false)), (Position3{1, 2, 0}));
    EXPECT_EQ(position_of(initial_state(dd, {1, 2, 0}, 3.5, false)), (Position3{1, 2, 0}));
    EXPECT_EQ(kind_from_string(to_string(Kind::Quad)), Kind::Quad);
    EXPECT_THROW(kind_from_string("blimp"), std::invalid_argument);
}

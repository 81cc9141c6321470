#include "portbot/scenarios.hpp"

#include <cmath>
#include <stdexcept>

#include "portbot/apps.hpp"
#include "portbot/rng.hpp"

namespace portbot::scenarios {

namespace {

sim::ConfigPoint planar(double x, double y) { return sim::ConfigPoint{{x, y, 0.0}, true}; }

sim::RobotConfig robot(RobotId id, platform::Kind kind, double x, double y, const Box& arena, bool airborne = false)
{
    sim::RobotConfig r = sim::make_robot(id, kind, {x, y, 0.0}, arena);
    r.planar_pose = true;
    r.airborne = airborne && kind == platform::Kind::Quad;
    if (r.airborne)
        r.pose.z = r.spec.hover_altitude;
    return r;
}

Box tall_box(double x0, double y0, double x1, double y1) { return Box{{x0, y0, -1.0}, {x1, y1, 5.0}}; }

const char* kDsmProgram = R"(// each robot publishes a counter for a while, then goes quiet
sharedsw int v[];
sharedmw int top = 0;
local int k = 0;
param int rounds = 20;

init start() eff { k = 0; }

bump() pre (k < rounds) eff {
  k = k + 1;
  v[getId()] = k * 10 + getId();
  top = max(top, k);
}
)";

} // namespace

Region wall()
{
    Region r;
    r.id = "wall";
    r.boxes.push_back(tall_box(-0.2, -1.2, 0.2, 1.2));
    return r;
}

std::vector<Position3> four_waypoints()
{
    return {{-3.0, 0.5, 0.0}, {0.0, 2.5, 0.0}, {2.8, 0.5, 0.0}, {0.0, -1.8, 0.0}};
}

sim::Scenario four_waypoint(platform::Kind kind, std::uint64_t seed)
{
    sim::Scenario s;
    s.name = std::string("four-waypoint-") + platform::to_string(kind);
    s.seed = seed;
    s.time_limit = 60.0;
    s.arena = Box{{-4, -4, 0}, {4, 3.5, 3}};
    s.unsafe = wall();
    s.app.name = "waypoints";
    for (const auto& w : four_waypoints())
        s.app.waypoints.push_back(planar(w.x, w.y));
    s.disturbance.enabled = true;
    s.disturbance.gust_accel = 0.05;
    s.robots.push_back(robot(0, kind, -3.0, -3.1, s.arena));
    s.robots[0].sensor_noise = 0.01;
    return s;
}

sim::Scenario wind_failure(std::uint64_t seed)
{
    sim::Scenario s = four_waypoint(platform::Kind::Quad, seed);
    s.name = "wind-failure";
    s.time_limit = 30.0;
    s.app.waypoints = {planar(-0.45, 0.0)};
    s.robots[0] = robot(0, platform::Kind::Quad, -3.0, 0.0, s.arena);
    s.disturbance.bias_x = 0.1;
    s.disturbance.gust_accel = 0.15;
    s.disturbance.gust_period = 1.0;
    return s;
}

sim::Scenario enclosed(platform::Kind kind, std::uint64_t seed)
{
    sim::Scenario s;
    s.name = std::string("enclosed-") + platform::to_string(kind);
    s.seed = seed;
    s.time_limit = 20.0;
    s.arena = Box{{-5, -5, 0}, {5, 5, 3}};
    s.unsafe.id = "cage";
    s.unsafe.boxes = {tall_box(1.5, 1.5, 4.5, 1.8), tall_box(1.5, 4.2, 4.5, 4.5), tall_box(1.5, 1.5, 1.8, 4.5),
                      tall_box(4.2, 1.5, 4.5, 4.5), Box{{1.5, 1.5, 2.5}, {4.5, 4.5, 3.0}}};
    s.app.name = "waypoints";
    s.app.waypoints = {planar(3.0, 3.0)};
    s.robots.push_back(robot(0, kind, -2.0, -2.0, s.arena));
    return s;
}

sim::Scenario formation(platform::Kind kind, int n, std::uint64_t seed)
{
    apps::FormationConfig fc;
    fc.n = n;
    fc.validate();
    sim::Scenario s;
    s.name = std::string("formation-") + std::to_string(n) + "-" + platform::to_string(kind);
    s.seed = seed;
    s.time_limit = 60.0;
    s.arena = Box{{-5, -5, 0}, {5, 5, 3}};
    s.app.name = "formation";
    const double radius = fc.len / (1.0 + std::cos(kPi / n));
    RngStream rng = RngStream::derive(seed, "scenario");
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * kPi * i / n;
        const double x = radius * std::cos(a) + rng.uniform(-0.1, 0.1) * radius;
        const double y = radius * std::sin(a) + rng.uniform(-0.1, 0.1) * radius;
        s.robots.push_back(robot(i, kind, x, y, s.arena, true));
    }
    return s;
}

sim::Scenario race(platform::Kind kind, std::uint64_t seed)
{
    sim::Scenario s;
    s.name = std::string("race-") + platform::to_string(kind);
    s.seed = seed;
    s.time_limit = 90.0;
    s.arena = Box{{-5, -5, 0}, {5, 5, 3}};
    s.unsafe = wall();
    s.app.name = "race";
    s.app.waypoints = {planar(-2.5, 1.5), planar(0.0, 2.5),  planar(2.5, 1.5),
                       planar(2.5, -1.5), planar(0.0, -2.5), planar(-2.5, -1.5)};
    s.robots.push_back(robot(0, kind, -3.5, 0.0, s.arena));
    s.robots.push_back(robot(1, kind, 3.5, 0.0, s.arena));
    return s;
}

sim::Scenario search(platform::Kind kind, std::uint64_t seed)
{
    sim::Scenario s;
    s.name = std::string("search-") + platform::to_string(kind);
    s.seed = seed;
    s.time_limit = 90.0;
    s.arena = Box{{-6, -6, 0}, {6, 6, 3}};
    s.unsafe.id = "partitions";
    s.unsafe.boxes = {tall_box(-2.1, 1.0, -1.9, 5.0), tall_box(1.9, 1.0, 2.1, 5.0)};
    s.app.name = "search";
    s.app.rooms = {
        {planar(-4.0, 1.5), {planar(-4.0, 3.0), planar(-3.0, 4.0)}},
        {planar(0.0, 1.5), {planar(-1.0, 3.5), planar(1.0, 3.5)}},
        {planar(4.0, 1.5), {planar(3.0, 4.0), planar(4.0, 3.0)}},
    };
    s.app.election_timeout = 3.0;
    s.robots.push_back(robot(0, kind, -2.0, -3.0, s.arena));
    s.robots.push_back(robot(1, kind, 0.0, -3.0, s.arena));
    s.robots.push_back(robot(2, kind, 2.0, -3.0, s.arena));
    return s;
}

sim::Scenario dsm_convergence(std::uint64_t seed)
{
    sim::Scenario s;
    s.name = "dsm-convergence";
    s.seed = seed;
    s.channel.loss_prob = 0.2;
    s.channel.rebroadcast_period = 0.5;
    // writes end at kDsmWritesEnd; 50 rebroadcast periods after that
    s.time_limit = 30.0;
    s.app.name = "program";
    s.app.source = kDsmProgram;
    for (int i = 0; i < 4; ++i)
        s.robots.push_back(robot(i, platform::Kind::DiffDrive, -3.0 + 2.0 * i, 0.0, s.arena));
    return s;
}

std::vector<std::string> names()
{
    return {"reachavoid", "failure", "enclosed", "formation", "formation5", "race", "search", "dsm"};
}

sim::Scenario demo(const std::string& name, platform::Kind kind, std::uint64_t seed)
{
    if (name == "reachavoid")
        return four_waypoint(kind, seed);
    if (name == "failure")
        return wind_failure(seed);
    if (name == "enclosed")
        return enclosed(kind, seed);
    if (name == "formation")
        return formation(kind, 3, seed);
    if (name == "formation5")
        return formation(kind, 5, seed);
    if (name == "race")
        return race(kind, seed);
    if (name == "search")
        return search(kind, seed);
    if (name == "dsm")
        return dsm_convergence(seed);
    throw std::invalid_argument("unknown demo '" + name + "'");
}

} // namespace portbot::scenarios

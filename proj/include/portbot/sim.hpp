#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "portbot/app_runtime.hpp"
#include "portbot/dsm.hpp"
#include "portbot/geometry.hpp"
#include "portbot/planner.hpp"
#include "portbot/platforms.hpp"
#include "portbot/reach_avoid.hpp"
#include "portbot/trace.hpp"
#include "portbot/tracker.hpp"

/// Deterministic discrete-event simulator. Scenario schema: docs/scenario.md.
namespace portbot::sim {

inline constexpr int kScenarioVersion = 1;

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string where, const std::string& message)
        : std::runtime_error(where + ": " + message), where_(std::move(where))
    {
    }
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

/// A configured point. Planar points (given as [x, y]) are flown at the
/// robot's operating altitude.
struct ConfigPoint {
    Position3 p;
    bool planar = false;

    Position3 resolve(const platform::PlatformSpec& spec) const
    {
        return planar ? Position3{p.x, p.y, spec.operating_altitude()} : p;
    }
};

struct RoomConfig {
    ConfigPoint entrance;
    std::vector<ConfigPoint> interior;
};

struct AppConfig {
    std::string name = "waypoints"; // waypoints | race | formation | search | program
    std::string source;              // program text for name == "program"
    std::string program_file;        // alternative to source, relative to the scenario file
    std::map<std::string, Value> params;
    std::vector<ConfigPoint> waypoints;
    std::vector<RoomConfig> rooms;
    double election_timeout = 3.0;
    int fairness_skips = 8;
};

struct DisturbanceModel {
    bool enabled = false;
    double bias_x = 0.0;      // steady wind, m/s^2
    double bias_y = 0.0;
    double gust_accel = 0.0;  // gust magnitude bound, m/s^2
    double gust_period = 1.0; // s between gust redraws
};

struct RobotConfig {
    RobotId id = 0;
    platform::PlatformSpec spec;
    Position3 pose;
    bool planar_pose = false;
    double heading = 0.0;
    bool airborne = false;
    double app_period = 0.1;
    double app_jitter = 0.0; // +- s, drawn per step
    double sensor_noise = 0.0;
    double plan_latency = 0.2;
    tracker::TrackerGains gains;
    planner::PlanParams plan;
    std::optional<AppConfig> app; // overrides the scenario-wide app
};

struct RecordOptions {
    bool dsm = true;
    bool plans = true;
    bool blocks = true;
};

struct Scenario {
    int version = kScenarioVersion;
    std::string name = "scenario";
    std::uint64_t seed = 0;
    double time_limit = 10.0;
    Box arena{{-10, -10, 0}, {10, 10, 3}};
    Region unsafe;
    dsm::ChannelModel channel;
    DisturbanceModel disturbance;
    AppConfig app;
    std::vector<RobotConfig> robots;
    RecordOptions record;
    std::string base_dir; // for program_file lookups

    const AppConfig& app_for(const RobotConfig& r) const { return r.app ? *r.app : app; }
};

/// Default gains and planner parameters for a platform inside an arena.
RobotConfig make_robot(RobotId id, platform::Kind kind, const Position3& pose, const Box& arena);

/// Throws ScenarioError with a JSON-pointer-like location.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& s);

/// Invariants: seed given, unique robot ids 0..n-1, one integration step
/// shared by all robots, sensor periods multiples of it, app periods
/// multiples of the sensor period, initial poses outside the unsafe set.
void validate(const Scenario& s);

struct RobotStats {
    std::uint64_t plans = 0;
    std::uint64_t blocks = 0;
    std::optional<std::string> fault;
};

class Engine {
public:
    explicit Engine(Scenario s);
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Advances one base step. Returns false once time_limit is reached.
    bool step();
    /// Runs to the time limit and returns the trace.
    trace::Trace run();

    SimTime now() const;
    std::int64_t tick() const { return tick_; }
    double base_step() const { return h_; }
    const Scenario& scenario() const { return scenario_; }
    const trace::Trace& trace() const { return trace_; }
    trace::Trace take_trace();

    std::size_t robot_count() const;
    const dsm::DsmReplica& replica(RobotId id) const;
    const platform::PlatformState& state(RobotId id) const;
    const reach_avoid::VariableHolder& variables(RobotId id) const;
    const app::AppInstance* app(RobotId id) const;
    const dsm::Channel& channel() const { return *channel_; }
    RobotStats stats(RobotId id) const;

private:
    struct Robot;

    void emit(RobotId robot, trace::Payload p);
    void drain_robot(Robot& r);

    Scenario scenario_;
    double h_ = 1e-3;
    std::int64_t tick_ = 0;
    std::int64_t end_tick_ = 0;
    std::unique_ptr<dsm::Channel> channel_;
    std::vector<std::unique_ptr<Robot>> robots_;
    trace::Trace trace_;
};

/// run(scenario): validate, simulate, return the trace.
trace::Trace run(const Scenario& s);

bool has_fault(const trace::Trace& tr);

/// Columns t, robot, x, y, z, epoch, done, failed, active, target_x,
/// target_y, target_z; one row per pose sample, target empty before the
/// first call.
void export_csv(const trace::Trace& tr, std::ostream& os);

/// Every single-writer variable's applied values at every replica form a
/// subsequence of its writer's write sequence. Returns the violations.
std::vector<std::string> dsm_subsequence_violations(const trace::Trace& tr);

/// Distinct successive values a variable takes at replica `at`,
/// reconstructed from the trace (writes by `at` and deliveries to it).
std::vector<Value> replica_history(const trace::Trace& tr, RobotId at, const std::string& name);

} // namespace portbot::sim

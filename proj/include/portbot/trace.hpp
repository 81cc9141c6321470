#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "portbot/dsm.hpp"
#include "portbot/geometry.hpp"
#include "portbot/value.hpp"

/// Trace file format: newline-delimited JSON. The first line is a header
/// record, every following line is one event. See docs/trace.md.
namespace portbot::trace {

inline constexpr int kFormatVersion = 1;
inline constexpr RobotId kSystem = -1;

enum class Flag { Active, Done, Failed };

/// Which thread wrote a control API variable.
enum class Writer { App, Sensor, Controller };

std::string to_string(Flag f);
std::string to_string(Writer w);

struct Pose {
    Position3 pos;      // currentPos as recorded by the sensor task
    Position3 true_pos; // physical position
    Writer writer = Writer::Sensor;
};

struct FlagChange {
    std::uint64_t epoch = 0;
    Flag flag = Flag::Active;
    bool value = false;
    Writer writer = Writer::Controller;
};

struct ReachAvoidCall {
    std::uint64_t epoch = 0;
    Position3 target;
    Region unsafe;
    Writer writer = Writer::App;
};

struct PlanOutcome {
    std::uint64_t epoch = 0;
    bool found = false;
    std::vector<Position3> waypoints;
    std::uint64_t tree_size = 0;
};

struct DsmWrite {
    dsm::DsmUpdate update;
};

/// An update applied at the receiving replica (event robot = receiver).
struct DsmDeliver {
    dsm::DsmUpdate update;
};

struct AppBlock {
    std::string name;
};

struct Fault {
    std::string message;
};

using Payload = std::variant<Pose, FlagChange, ReachAvoidCall, PlanOutcome, DsmWrite, DsmDeliver, AppBlock, Fault>;

struct TraceEvent {
    SimTime t = 0.0;
    RobotId robot = kSystem;
    Payload payload;
};

std::string kind_name(const Payload& p);

struct RobotMeta {
    RobotId id = 0;
    std::string platform;
    double dwell_time = 0.0;
    double quant_dist = 0.0;
    double sensor_period = 0.0;
};

struct Trace {
    int version = kFormatVersion;
    std::uint64_t seed = 0;
    std::string scenario;
    std::vector<RobotMeta> robots;
    std::vector<TraceEvent> events;

    const RobotMeta* meta(RobotId id) const;
};

class MalformedTrace : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const Position3& p);
Position3 position_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);
nlohmann::json to_json(const dsm::DsmUpdate& u);
dsm::DsmUpdate update_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TraceEvent& e);
TraceEvent event_from_json(const nlohmann::json& j);

void write_trace(std::ostream& os, const Trace& tr);
std::string to_ndjson(const Trace& tr);

/// Parses an NDJSON trace. Throws MalformedTrace with the offending line number.
Trace read_trace(std::istream& is);
Trace read_trace_file(const std::string& path);
void write_trace_file(const std::string& path, const Trace& tr);

/// Time order and epoch bookkeeping: timestamps non-decreasing, every flag
/// change tagged with the epoch of the latest call of its robot.
/// Throws MalformedTrace.
void check_well_formed(const Trace& tr);

/// Control API variables only written by their declared writer
/// (targetPos/unsafePos: app, currentPos: sensor, flags: controller).
/// Returns a description of each violation.
std::vector<std::string> writer_violations(const Trace& tr);

} // namespace portbot::trace

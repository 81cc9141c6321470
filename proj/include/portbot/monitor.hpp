#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "portbot/geometry.hpp"
#include "portbot/trace.hpp"

/// Offline checker for the reach-avoid flag semantics. Works from the trace
/// format alone; it shares no code with the controller.
namespace portbot::monitor {

enum class Condition { D1, D2, F1, F2, A1 };
inline constexpr std::array<Condition, 5> kConditions{Condition::D1, Condition::D2, Condition::F1, Condition::F2,
                                                      Condition::A1};

enum class Status { Pass, Fail, Vacuous };

std::string to_string(Condition c);
std::string to_string(Status s);

struct Witness {
    SimTime from = 0.0;
    SimTime to = 0.0;
    std::string explanation;
};

struct ConditionVerdict {
    Status status = Status::Vacuous;
    std::optional<Witness> witness;
    /// D2/F2 only: the flag came later than d_t + one sensor period after the
    /// persistence window opened. Reported, not failed.
    bool latency_exceeded = false;
    std::optional<double> latency; // flag time minus window end
};

struct EpochVerdict {
    RobotId robot = 0;
    std::uint64_t epoch = 0;
    SimTime t0 = 0.0;
    SimTime end = 0.0;
    std::array<ConditionVerdict, 5> conditions;

    const ConditionVerdict& operator[](Condition c) const { return conditions[static_cast<std::size_t>(c)]; }
};

struct Params {
    double dwell_time = 0.0;
    double quant_dist = 0.0;
    double sensor_period = 0.0;
};

struct Overrides {
    std::optional<double> dwell_time;
    std::optional<double> quant_dist;
    std::map<RobotId, double> dwell_time_for;
    std::map<RobotId, double> quant_dist_for;
};

struct Verdicts {
    std::vector<EpochVerdict> epochs;

    bool any_fail() const;
};

/// Evaluates D1, D2, F1, F2 and A1 for every epoch of every robot.
/// Epoch k of a robot spans its k-th reachavoid_call up to the next one (or
/// the end of its events). The evaluation grid is the robot's distinct
/// event times within the epoch, each taken after all events at that time.
/// "pred holds on [t1, t1 + d_t]" means pred holds at every pose sample in
/// the closed window, the window contains at least ceil(d_t / sensor_period)
/// samples, and the epoch extends to t1 + d_t. Throws trace::MalformedTrace.
Verdicts check_trace(const trace::Trace& tr, const Overrides& overrides = {});

Params params_for(const trace::Trace& tr, RobotId robot, const Overrides& overrides);

struct Summary {
    std::array<std::array<int, 3>, 5> counts{}; // [condition][status]
    int latency_notes = 0;
    int epochs = 0;
    bool ok = true;
    std::string text;
    nlohmann::json machine;

    int exit_status() const { return ok ? 0 : 2; }
};

Summary summarize(const Verdicts& v);

} // namespace portbot::monitor

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "portbot/geometry.hpp"
#include "portbot/planner.hpp"
#include "portbot/platforms.hpp"
#include "portbot/rng.hpp"
#include "portbot/trace.hpp"
#include "portbot/tracker.hpp"

namespace portbot::reach_avoid {

using trace::Flag;
using trace::Writer;

class WriterViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Control API variables of one robot. Every mutation names its writer and
/// is checked against the writer column (targetPos, unsafePos: app;
/// currentPos: sensor; active, done, failed: controller). Mutations are
/// logged as trace payloads for the engine to timestamp.
class VariableHolder {
public:
    const std::optional<Position3>& target() const { return target_; }
    const Position3& current() const { return current_; }
    const Region& unsafe() const { return unsafe_; }
    bool active() const { return active_; }
    bool done() const { return done_; }
    bool failed() const { return failed_; }
    std::uint64_t epoch() const { return epoch_; }

    /// targetPos := x; unsafePos := U; opens a new epoch.
    void set_target(Writer w, const Position3& x, const Region& u);
    void set_current(Writer w, const Position3& p, const Position3& true_pos);
    void set_flag(Writer w, Flag f, bool value);

    std::vector<trace::Payload> drain();

private:
    static void require(Writer got, Writer want, const char* var);

    std::optional<Position3> target_;
    Position3 current_;
    Region unsafe_;
    bool active_ = false;
    bool done_ = false;
    bool failed_ = false;
    std::uint64_t epoch_ = 0;
    std::vector<trace::Payload> log_;
};

/// Reports whether a sampled predicate has held continuously for d_t.
class DwellDetector {
public:
    explicit DwellDetector(double dwell_time) : dwell_time_(dwell_time) {}

    /// Feeds the predicate value observed at now; true once it has held
    /// at every sample since some t with now - t >= d_t.
    bool update(bool holds, SimTime now);
    void reset() { since_.reset(); }
    const std::optional<SimTime>& since() const { return since_; }

private:
    double dwell_time_;
    std::optional<SimTime> since_;
};

/// Periodic position sensor with optional bounded noise.
class PositionSensor {
public:
    PositionSensor(double noise_bound, RngStream rng) : noise_bound_(noise_bound), rng_(std::move(rng)) {}

    /// currentPos := true_pos + noise, |noise| <= bound.
    void update(VariableHolder& vh, const Position3& true_pos);

private:
    double noise_bound_;
    RngStream rng_;
};

struct ControllerConfig {
    platform::PlatformSpec spec;
    tracker::TrackerGains gains;
    planner::PlanParams plan;
    double plan_latency = 0.2;          // s between plan request and result
    double replan_deviation_factor = 2.0; // replan beyond factor * q_d off the predicted path
};

/// Planner + tracker controller. Sets done/failed/active from dwell-filtered
/// reach and crossed predicates. Each flag is raised by its own detector
/// and stays set for the epoch, so both can be set when the target lies
/// within 2 q_d of the unsafe set; failed is raised first on a tie.
class ReachAvoidController {
public:
    ReachAvoidController(ControllerConfig cfg, VariableHolder& vh, RngStream planner_rng);

    /// Application call: new target and unsafe set, flags reset, replan.
    void do_reach_avoid(const Position3& x, const Region& u, const platform::PlatformState& state, SimTime now);

    /// One control tick, after the sensor update. Returns the low-level
    /// command to hold until the next tick.
    platform::Command controller_tick(const platform::PlatformState& state, SimTime now);

    const std::vector<Position3>& waypoints() const { return path_; }
    bool plan_pending() const { return pending_.has_value(); }
    std::size_t plans_requested() const { return plans_requested_; }
    const ControllerConfig& config() const { return cfg_; }

    /// Plan results applied since the last call.
    std::vector<trace::Payload> drain_events();

    /// Distance from p to the predicted path polyline (infinite without a path).
    Distance deviation(const Position3& p) const;

private:
    struct PendingPlan {
        std::uint64_t epoch;
        SimTime ready;
        Position3 start;
        planner::PlanResult result;
    };

    void request_plan(const platform::PlatformState& state, SimTime now);
    void apply_plan(PendingPlan&& p, const platform::PlatformState& state);
    platform::Command hold(const platform::PlatformState& state) const;

    ControllerConfig cfg_;
    VariableHolder& vh_;
    RngStream rng_;
    DwellDetector reach_dwell_;
    DwellDetector cross_dwell_;
    std::optional<PendingPlan> pending_;
    std::vector<Position3> path_;
    std::vector<Position3> predicted_;
    std::size_t wp_index_ = 0;
    std::optional<Position3> hold_point_;
    std::optional<Position3> no_path_at_;
    std::size_t plans_requested_ = 0;
    std::vector<trace::Payload> events_;
};

} // namespace portbot::reach_avoid

#include "portbot/reach_avoid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace portbot::reach_avoid {

namespace {
constexpr double kTimeEps = 1e-9;

double point_segment_dist(const Position3& p, const Position3& a, const Position3& b)
{
    const Position3 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y + ab.z * ab.z;
    if (len2 == 0.0)
        return dist(p, a);
    const Position3 ap = p - a;
    const double t = std::clamp((ap.x * ab.x + ap.y * ab.y + ap.z * ab.z) / len2, 0.0, 1.0);
    return dist(p, a + ab * t);
}
} // namespace

void VariableHolder::require(Writer got, Writer want, const char* var)
{
    if (got != want)
        throw WriterViolation(std::string(var) + " written by " + trace::to_string(got) + ", declared writer is " +
                              trace::to_string(want));
}

void VariableHolder::set_target(Writer w, const Position3& x, const Region& u)
{
    require(w, Writer::App, "targetPos");
    target_ = x;
    unsafe_ = u;
    ++epoch_;
    log_.push_back(trace::ReachAvoidCall{epoch_, x, u, w});
}

void VariableHolder::set_current(Writer w, const Position3& p, const Position3& true_pos)
{
    require(w, Writer::Sensor, "currentPos");
    current_ = p;
    log_.push_back(trace::Pose{p, true_pos, w});
}

void VariableHolder::set_flag(Writer w, Flag f, bool value)
{
    require(w, Writer::Controller, "control flag");
    bool& slot = f == Flag::Active ? active_ : f == Flag::Done ? done_ : failed_;
    if (slot == value)
        return;
    slot = value;
    log_.push_back(trace::FlagChange{epoch_, f, value, w});
}

std::vector<trace::Payload> VariableHolder::drain()
{
    std::vector<trace::Payload> out;
    out.swap(log_);
    return out;
}

bool DwellDetector::update(bool holds, SimTime now)
{
    if (!holds) {
        since_.reset();
        return false;
    }
    if (!since_)
        since_ = now;
    return now - *since_ >= dwell_time_ - kTimeEps;
}

void PositionSensor::update(VariableHolder& vh, const Position3& true_pos)
{
    Position3 p = true_pos;
    if (noise_bound_ > 0.0) {
        Position3 n{rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0)};
        n = n * noise_bound_;
        const double len = dist(n, Position3{});
        if (len > noise_bound_)
            n = n * (noise_bound_ / len);
        p = p + n;
    }
    vh.set_current(Writer::Sensor, p, true_pos);
}

ReachAvoidController::ReachAvoidController(ControllerConfig cfg, VariableHolder& vh, RngStream planner_rng)
    : cfg_(std::move(cfg)),
      vh_(vh),
      rng_(std::move(planner_rng)),
      reach_dwell_(cfg_.spec.dwell_time),
      cross_dwell_(cfg_.spec.dwell_time)
{
}

void ReachAvoidController::do_reach_avoid(const Position3& x, const Region& u, const platform::PlatformState& state,
                                          SimTime now)
{
    vh_.set_target(Writer::App, x, u);
    vh_.set_flag(Writer::Controller, Flag::Done, false);
    vh_.set_flag(Writer::Controller, Flag::Failed, false);
    vh_.set_flag(Writer::Controller, Flag::Active, true);
    reach_dwell_.reset();
    cross_dwell_.reset();
    no_path_at_.reset();
    pending_.reset();
    request_plan(state, now);
}

void ReachAvoidController::request_plan(const platform::PlatformState& state, SimTime now)
{
    ++plans_requested_;
    const Position3 start = vh_.current();
    auto result = planner::plan(start, state, *vh_.target(), vh_.unsafe(), cfg_.spec, cfg_.gains, cfg_.plan, rng_);
    pending_ = PendingPlan{vh_.epoch(), now + cfg_.plan_latency, start, std::move(result)};
}

void ReachAvoidController::apply_plan(PendingPlan&& p, const platform::PlatformState& state)
{
    events_.push_back(trace::PlanOutcome{p.epoch, p.result.found, p.result.waypoints, p.result.tree_size});
    if (p.result.found) {
        path_ = std::move(p.result.waypoints);
        predicted_.clear();
        predicted_.push_back(p.start);
        predicted_.insert(predicted_.end(), p.result.predicted.begin(), p.result.predicted.end());
        wp_index_ = 0;
        no_path_at_.reset();
        if (!vh_.done() && !vh_.failed())
            vh_.set_flag(Writer::Controller, Flag::Active, true);
    } else {
        path_.clear();
        predicted_.clear();
        hold_point_ = platform::position_of(state);
        no_path_at_ = vh_.current();
        vh_.set_flag(Writer::Controller, Flag::Active, false);
    }
}

std::vector<trace::Payload> ReachAvoidController::drain_events()
{
    std::vector<trace::Payload> out;
    out.swap(events_);
    return out;
}

Distance ReachAvoidController::deviation(const Position3& p) const
{
    if (predicted_.empty())
        return Distance::infinite();
    double best = dist(p, predicted_.front());
    for (std::size_t i = 1; i < predicted_.size(); ++i)
        best = std::min(best, point_segment_dist(p, predicted_[i - 1], predicted_[i]));
    return Distance(best);
}

platform::Command ReachAvoidController::hold(const platform::PlatformState& state) const
{
    if (const auto* q = std::get_if<platform::QuadState>(&state); q && !q->airborne())
        return platform::Hover{};
    const Position3 at = hold_point_ ? *hold_point_ : platform::position_of(state);
    return tracker::track_step(state, at, cfg_.gains, cfg_.spec.limits);
}

platform::Command ReachAvoidController::controller_tick(const platform::PlatformState& state, SimTime now)
{
    if (pending_ && pending_->ready <= now + kTimeEps) {
        PendingPlan p = std::move(*pending_);
        pending_.reset();
        if (p.epoch == vh_.epoch())
            apply_plan(std::move(p), state);
    }

    if (vh_.target()) {
        const Position3& cur = vh_.current();
        const bool reach = dist(cur, *vh_.target()) <= cfg_.spec.quant_dist;
        const bool crossed = dist_to_region(cur, vh_.unsafe()) <= cfg_.spec.quant_dist;
        const bool fire_reach = reach_dwell_.update(reach, now);
        const bool fire_cross = cross_dwell_.update(crossed, now);
        // each flag follows its own detector; failed is raised first when both fire
        if (fire_cross && !vh_.failed()) {
            vh_.set_flag(Writer::Controller, Flag::Failed, true);
            vh_.set_flag(Writer::Controller, Flag::Active, false);
        }
        if (fire_reach && !vh_.done()) {
            vh_.set_flag(Writer::Controller, Flag::Done, true);
            vh_.set_flag(Writer::Controller, Flag::Active, false);
        }

        if (!vh_.done() && !vh_.failed() && !pending_) {
            const double limit = cfg_.replan_deviation_factor * cfg_.spec.quant_dist;
            if (!path_.empty() && deviation(cur) > limit)
                request_plan(state, now);
            else if (path_.empty() && no_path_at_ && dist(cur, *no_path_at_) > limit)
                request_plan(state, now);
        }
    }

    if (path_.empty())
        return hold(state);
    while (wp_index_ + 1 < path_.size() && tracker::arrived(state, path_[wp_index_], cfg_.gains))
        ++wp_index_;
    return tracker::track_step(state, path_[wp_index_], cfg_.gains, cfg_.spec.limits);
}

} // namespace portbot::reach_avoid

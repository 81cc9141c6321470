#include "portbot/monitor.hpp"

#include <cmath>
#include <sstream>

namespace portbot::monitor {

using namespace trace;

namespace {

constexpr double kTimeEps = 1e-9;

struct GridPoint {
    SimTime t = 0.0;
    bool pose = false; // a pose sample was recorded at this instant
    bool reach = false;
    bool crossed = false;
    bool active = false;
    bool done = false;
    bool failed = false;
};

struct Segment {
    std::uint64_t epoch = 0;
    SimTime t0 = 0.0;
    std::vector<GridPoint> grid;
};

/// Splits one robot's events into epoch segments and samples the state
/// after the last event of every time instant.
std::vector<Segment> build_segments(const Trace& tr, RobotId robot, const Params& p)
{
    std::vector<Segment> segs;
    std::optional<Position3> pos;
    Position3 target;
    Region unsafe;
    bool active = false, done = false, failed = false;
    bool open_group = false;
    GridPoint pending;

    auto flush = [&] {
        if (!open_group || segs.empty())
            return;
        pending.reach = pos && dist(*pos, target) <= p.quant_dist;
        pending.crossed = pos && dist_to_region(*pos, unsafe) <= p.quant_dist;
        pending.active = active;
        pending.done = done;
        pending.failed = failed;
        segs.back().grid.push_back(pending);
        open_group = false;
    };

    for (const auto& e : tr.events) {
        if (e.robot != robot)
            continue;
        const bool relevant = std::holds_alternative<Pose>(e.payload) || std::holds_alternative<FlagChange>(e.payload) ||
                              std::holds_alternative<ReachAvoidCall>(e.payload);
        if (!relevant)
            continue;
        if (open_group && e.t != pending.t)
            flush();

        if (const auto* c = std::get_if<ReachAvoidCall>(&e.payload)) {
            flush();
            segs.push_back(Segment{c->epoch, e.t, {}});
            target = c->target;
            unsafe = c->unsafe;
        } else if (const auto* f = std::get_if<FlagChange>(&e.payload)) {
            if (segs.empty() || segs.back().epoch != f->epoch)
                throw MalformedTrace("robot " + std::to_string(robot) + ": orphan flag change at t=" +
                                     std::to_string(e.t));
            (f->flag == Flag::Active ? active : f->flag == Flag::Done ? done : failed) = f->value;
        } else if (const auto* ps = std::get_if<Pose>(&e.payload)) {
            pos = ps->pos;
        }

        if (segs.empty())
            continue;
        if (!open_group) {
            pending = GridPoint{};
            pending.t = e.t;
            open_group = true;
        }
        if (std::holds_alternative<Pose>(e.payload))
            pending.pose = true;
    }
    flush();
    return segs;
}

ConditionVerdict precedes(const Segment& s, bool GridPoint::*flag, bool GridPoint::*pred, const char* flag_name,
                          const char* pred_name)
{
    ConditionVerdict v;
    bool seen_pred = false;
    for (const auto& g : s.grid) {
        seen_pred = seen_pred || g.*pred;
        if (g.*flag) {
            if (seen_pred) {
                v.status = Status::Pass;
            } else {
                v.status = Status::Fail;
                v.witness = Witness{s.t0, g.t,
                                    std::string(flag_name) + " set at t=" + std::to_string(g.t) + " but " + pred_name +
                                        " never held since the call"};
            }
            return v;
        }
    }
    return v;
}

ConditionVerdict persists_then_set(const Segment& s, const Params& p, bool GridPoint::*pred, bool GridPoint::*flag,
                                   const char* flag_name, const char* pred_name)
{
    ConditionVerdict v;
    if (s.grid.empty())
        return v;
    const auto need = static_cast<std::size_t>(std::ceil(p.dwell_time / p.sensor_period - kTimeEps));
    const SimTime last_t = s.grid.back().t;

    std::optional<SimTime> window_start;
    for (std::size_t a = 0; a < s.grid.size() && !window_start; ++a) {
        const auto& ga = s.grid[a];
        if (!ga.pose || ga.t <= s.t0 || !(ga.*pred))
            continue;
        const SimTime te = ga.t + p.dwell_time;
        if (last_t < te - kTimeEps)
            break;
        std::size_t count = 0;
        bool holds = true;
        for (std::size_t b = a; b < s.grid.size() && s.grid[b].t <= te + kTimeEps; ++b) {
            if (!s.grid[b].pose)
                continue;
            if (!(s.grid[b].*pred)) {
                holds = false;
                break;
            }
            ++count;
        }
        if (holds && count >= need)
            window_start = ga.t;
    }
    if (!window_start)
        return v;

    const SimTime t1 = *window_start;
    // start of the maximal suffix on which the flag holds
    std::optional<SimTime> suffix;
    for (auto it = s.grid.rbegin(); it != s.grid.rend() && (*it).*flag; ++it)
        suffix = it->t;

    if (!suffix) {
        v.status = Status::Fail;
        v.witness = Witness{t1, t1 + p.dwell_time,
                            std::string(pred_name) + " held on [" + std::to_string(t1) + ", " +
                                std::to_string(t1 + p.dwell_time) + "] but " + flag_name +
                                " does not hold through the end of the epoch"};
        return v;
    }
    v.status = Status::Pass;
    const SimTime t2 = std::max(*suffix, t1);
    v.latency = t2 - (t1 + p.dwell_time);
    v.latency_exceeded = t2 > t1 + p.dwell_time + p.sensor_period + kTimeEps;
    return v;
}

ConditionVerdict active_not_preceded(const Segment& s)
{
    ConditionVerdict v;
    std::optional<SimTime> first_flag;
    for (const auto& g : s.grid) {
        if ((g.done || g.failed) && !first_flag)
            first_flag = g.t;
        if (!g.active)
            continue;
        if (first_flag) {
            v.status = Status::Fail;
            v.witness = Witness{*first_flag, g.t,
                                "active at t=" + std::to_string(g.t) + " after done/failed at t=" +
                                    std::to_string(*first_flag)};
            return v;
        }
        v.status = Status::Pass;
    }
    return v;
}

} // namespace

std::string to_string(Condition c)
{
    switch (c) {
    case Condition::D1: return "D1";
    case Condition::D2: return "D2";
    case Condition::F1: return "F1";
    case Condition::F2: return "F2";
    case Condition::A1: return "A1";
    }
    return "?";
}

std::string to_string(Status s)
{
    switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Vacuous: return "VACUOUS";
    }
    return "?";
}

bool Verdicts::any_fail() const
{
    for (const auto& e : epochs)
        for (const auto& c : e.conditions)
            if (c.status == Status::Fail)
                return true;
    return false;
}

Params params_for(const Trace& tr, RobotId robot, const Overrides& o)
{
    const RobotMeta* m = tr.meta(robot);
    if (!m)
        throw MalformedTrace("robot " + std::to_string(robot) + " missing from trace header");
    Params p{m->dwell_time, m->quant_dist, m->sensor_period};
    if (o.dwell_time)
        p.dwell_time = *o.dwell_time;
    if (o.quant_dist)
        p.quant_dist = *o.quant_dist;
    if (auto it = o.dwell_time_for.find(robot); it != o.dwell_time_for.end())
        p.dwell_time = it->second;
    if (auto it = o.quant_dist_for.find(robot); it != o.quant_dist_for.end())
        p.quant_dist = it->second;
    if (!(p.dwell_time > 0.0) || !(p.quant_dist > 0.0) || !(p.sensor_period > 0.0))
        throw MalformedTrace("robot " + std::to_string(robot) + ": d_t, q_d and sensor_period must be positive");
    return p;
}

Verdicts check_trace(const Trace& tr, const Overrides& overrides)
{
    check_well_formed(tr);
    Verdicts out;
    for (const auto& meta : tr.robots) {
        const Params p = params_for(tr, meta.id, overrides);
        for (const auto& s : build_segments(tr, meta.id, p)) {
            EpochVerdict ev;
            ev.robot = meta.id;
            ev.epoch = s.epoch;
            ev.t0 = s.t0;
            ev.end = s.grid.empty() ? s.t0 : s.grid.back().t;
            auto& c = ev.conditions;
            c[0] = precedes(s, &GridPoint::done, &GridPoint::reach, "done", "reach");
            c[1] = persists_then_set(s, p, &GridPoint::reach, &GridPoint::done, "done", "reach");
            c[2] = precedes(s, &GridPoint::failed, &GridPoint::crossed, "failed", "crossed");
            c[3] = persists_then_set(s, p, &GridPoint::crossed, &GridPoint::failed, "failed", "crossed");
            c[4] = active_not_preceded(s);
            out.epochs.push_back(std::move(ev));
        }
    }
    return out;
}

Summary summarize(const Verdicts& v)
{
    Summary s;
    s.epochs = static_cast<int>(v.epochs.size());
    nlohmann::json failures = nlohmann::json::array();
    nlohmann::json latency = nlohmann::json::array();
    std::ostringstream fails;
    for (const auto& e : v.epochs) {
        for (Condition c : kConditions) {
            const auto& cv = e[c];
            ++s.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(cv.status)];
            if (cv.status == Status::Fail) {
                s.ok = false;
                fails << "  FAIL " << to_string(c) << " robot " << e.robot << " epoch " << e.epoch;
                if (cv.witness)
                    fails << " [" << cv.witness->from << ", " << cv.witness->to << "] " << cv.witness->explanation;
                fails << '\n';
                failures.push_back({{"robot", e.robot},
                                    {"epoch", e.epoch},
                                    {"condition", to_string(c)},
                                    {"from", cv.witness ? cv.witness->from : e.t0},
                                    {"to", cv.witness ? cv.witness->to : e.end},
                                    {"explanation", cv.witness ? cv.witness->explanation : ""}});
            }
            if (cv.latency_exceeded) {
                ++s.latency_notes;
                latency.push_back(
                    {{"robot", e.robot}, {"epoch", e.epoch}, {"condition", to_string(c)}, {"latency", *cv.latency}});
            }
        }
    }

    std::ostringstream os;
    os << "epochs checked: " << s.epochs << '\n';
    os << "condition   PASS   FAIL   VACUOUS\n";
    nlohmann::json counts = nlohmann::json::object();
    for (Condition c : kConditions) {
        const auto& k = s.counts[static_cast<std::size_t>(c)];
        char line[64];
        std::snprintf(line, sizeof line, "%-9s %6d %6d %9d\n", to_string(c).c_str(), k[0], k[1], k[2]);
        os << line;
        counts[to_string(c)] = {{"pass", k[0]}, {"fail", k[1]}, {"vacuous", k[2]}};
    }
    os << "latency beyond d_t + sensor_period: " << s.latency_notes << '\n';
    os << fails.str();
    os << (s.ok ? "result: OK\n" : "result: VIOLATIONS\n");
    s.text = os.str();
    s.machine = {{"epochs", s.epochs},
                 {"counts", counts},
                 {"failures", failures},
                 {"latency", latency},
                 {"ok", s.ok}};
    return s;
}

} // namespace portbot::monitor

#include "portbot/trace.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace portbot::trace {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Flag flag_from_string(const std::string& s)
{
    if (s == "active")
        return Flag::Active;
    if (s == "done")
        return Flag::Done;
    if (s == "failed")
        return Flag::Failed;
    throw MalformedTrace("unknown flag '" + s + "'");
}

Writer writer_from_string(const std::string& s)
{
    if (s == "app")
        return Writer::App;
    if (s == "sensor")
        return Writer::Sensor;
    if (s == "controller")
        return Writer::Controller;
    throw MalformedTrace("unknown writer '" + s + "'");
}

} // namespace

std::string to_string(Flag f)
{
    switch (f) {
    case Flag::Active: return "active";
    case Flag::Done: return "done";
    case Flag::Failed: return "failed";
    }
    return "?";
}

std::string to_string(Writer w)
{
    switch (w) {
    case Writer::App: return "app";
    case Writer::Sensor: return "sensor";
    case Writer::Controller: return "controller";
    }
    return "?";
}

std::string kind_name(const Payload& p)
{
    return std::visit(overloaded{
                          [](const Pose&) { return "pose"; },
                          [](const FlagChange&) { return "flag_change"; },
                          [](const ReachAvoidCall&) { return "reachavoid_call"; },
                          [](const PlanOutcome&) { return "plan_result"; },
                          [](const DsmWrite&) { return "dsm_write"; },
                          [](const DsmDeliver&) { return "dsm_deliver"; },
                          [](const AppBlock&) { return "app_block"; },
                          [](const Fault&) { return "fault"; },
                      },
                      p);
}

const RobotMeta* Trace::meta(RobotId id) const
{
    for (const auto& m : robots)
        if (m.id == id)
            return &m;
    return nullptr;
}

json to_json(const Position3& p) { return json::array({p.x, p.y, p.z}); }

Position3 position_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 3)
        throw MalformedTrace("position must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Region& r)
{
    json boxes = json::array();
    for (const auto& b : r.boxes)
        boxes.push_back(json::array({b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z}));
    return json{{"id", r.id}, {"boxes", boxes}};
}

Region region_from_json(const json& j)
{
    Region r;
    r.id = j.value("id", std::string{});
    for (const auto& b : j.at("boxes")) {
        if (!b.is_array() || b.size() != 6)
            throw MalformedTrace("box must be [minx, miny, minz, maxx, maxy, maxz]");
        r.boxes.push_back(Box{{b[0].get<double>(), b[1].get<double>(), b[2].get<double>()},
                              {b[3].get<double>(), b[4].get<double>(), b[5].get<double>()}});
    }
    return r;
}

json to_json(const Value& v)
{
    return std::visit(overloaded{
                          [](const std::monostate&) { return json(nullptr); },
                          [](bool b) { return json{{"bool", b}}; },
                          [](std::int64_t i) { return json{{"int", i}}; },
                          [](double d) { return json{{"real", d}}; },
                          [](const Position3& p) { return json{{"pos", to_json(p)}}; },
                          [](const Region& r) { return json{{"region", to_json(r)}}; },
                      },
                      v);
}

Value value_from_json(const json& j)
{
    if (j.is_null())
        return std::monostate{};
    if (j.contains("bool"))
        return j["bool"].get<bool>();
    if (j.contains("int"))
        return j["int"].get<std::int64_t>();
    if (j.contains("real"))
        return j["real"].get<double>();
    if (j.contains("pos"))
        return position_from_json(j["pos"]);
    if (j.contains("region"))
        return region_from_json(j["region"]);
    throw MalformedTrace("unrecognised value encoding");
}

json to_json(const dsm::DsmUpdate& u)
{
    return json{{"name", u.name},
                {"value", to_json(u.value)},
                {"ts", json::array({u.timestamp.time, u.timestamp.seq, u.timestamp.id})},
                {"origin", u.origin}};
}

dsm::DsmUpdate update_from_json(const json& j)
{
    dsm::DsmUpdate u;
    u.name = j.at("name").get<std::string>();
    u.value = value_from_json(j.at("value"));
    const auto& ts = j.at("ts");
    u.timestamp = dsm::Timestamp{ts.at(0).get<double>(), ts.at(1).get<std::uint64_t>(), ts.at(2).get<RobotId>()};
    u.origin = j.at("origin").get<RobotId>();
    return u;
}

json to_json(const TraceEvent& e)
{
    json j{{"t", e.t}, {"robot", e.robot}, {"kind", kind_name(e.payload)}};
    std::visit(overloaded{
                   [&](const Pose& p) {
                       j["pos"] = to_json(p.pos);
                       j["true_pos"] = to_json(p.true_pos);
                       j["writer"] = to_string(p.writer);
                   },
                   [&](const FlagChange& f) {
                       j["epoch"] = f.epoch;
                       j["flag"] = to_string(f.flag);
                       j["value"] = f.value;
                       j["writer"] = to_string(f.writer);
                   },
                   [&](const ReachAvoidCall& c) {
                       j["epoch"] = c.epoch;
                       j["target"] = to_json(c.target);
                       j["unsafe"] = to_json(c.unsafe);
                       j["writer"] = to_string(c.writer);
                   },
                   [&](const PlanOutcome& p) {
                       j["epoch"] = p.epoch;
                       j["found"] = p.found;
                       json wps = json::array();
                       for (const auto& w : p.waypoints)
                           wps.push_back(to_json(w));
                       j["waypoints"] = wps;
                       j["tree_size"] = p.tree_size;
                   },
                   [&](const DsmWrite& w) { j["update"] = to_json(w.update); },
                   [&](const DsmDeliver& d) { j["update"] = to_json(d.update); },
                   [&](const AppBlock& b) { j["block"] = b.name; },
                   [&](const Fault& f) { j["message"] = f.message; },
               },
               e.payload);
    return j;
}

TraceEvent event_from_json(const json& j)
{
    TraceEvent e;
    e.t = j.at("t").get<double>();
    e.robot = j.at("robot").get<RobotId>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "pose") {
        e.payload = Pose{position_from_json(j.at("pos")),
                         j.contains("true_pos") ? position_from_json(j["true_pos"]) : position_from_json(j.at("pos")),
                         writer_from_string(j.value("writer", std::string("sensor")))};
    } else if (kind == "flag_change") {
        e.payload = FlagChange{j.at("epoch").get<std::uint64_t>(), flag_from_string(j.at("flag").get<std::string>()),
                               j.at("value").get<bool>(),
                               writer_from_string(j.value("writer", std::string("controller")))};
    } else if (kind == "reachavoid_call") {
        e.payload = ReachAvoidCall{j.at("epoch").get<std::uint64_t>(), position_from_json(j.at("target")),
                                   j.contains("unsafe") ? region_from_json(j["unsafe"]) : Region{},
                                   writer_from_string(j.value("writer", std::string("app")))};
    } else if (kind == "plan_result") {
        PlanOutcome p;
        p.epoch = j.at("epoch").get<std::uint64_t>();
        p.found = j.at("found").get<bool>();
        for (const auto& w : j.value("waypoints", json::array()))
            p.waypoints.push_back(position_from_json(w));
        p.tree_size = j.value("tree_size", std::uint64_t{0});
        e.payload = std::move(p);
    } else if (kind == "dsm_write") {
        e.payload = DsmWrite{update_from_json(j.at("update"))};
    } else if (kind == "dsm_deliver") {
        e.payload = DsmDeliver{update_from_json(j.at("update"))};
    } else if (kind == "app_block") {
        e.payload = AppBlock{j.at("block").get<std::string>()};
    } else if (kind == "fault") {
        e.payload = Fault{j.at("message").get<std::string>()};
    } else {
        throw MalformedTrace("unknown event kind '" + kind + "'");
    }
    return e;
}

void write_trace(std::ostream& os, const Trace& tr)
{
    json robots = json::array();
    for (const auto& r : tr.robots)
        robots.push_back(json{{"id", r.id},
                              {"platform", r.platform},
                              {"d_t", r.dwell_time},
                              {"q_d", r.quant_dist},
                              {"sensor_period", r.sensor_period}});
    json header{{"kind", "header"},
                {"version", tr.version},
                {"seed", tr.seed},
                {"scenario", tr.scenario},
                {"robots", robots}};
    os << header.dump() << '\n';
    for (const auto& e : tr.events)
        os << to_json(e).dump() << '\n';
}

std::string to_ndjson(const Trace& tr)
{
    std::ostringstream os;
    write_trace(os, tr);
    return os.str();
}

Trace read_trace(std::istream& is)
{
    Trace tr;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        try {
            const json j = json::parse(line);
            if (!header_seen) {
                if (j.value("kind", std::string{}) != "header")
                    throw MalformedTrace("first record must be the header");
                tr.version = j.at("version").get<int>();
                if (tr.version != kFormatVersion)
                    throw MalformedTrace("unsupported trace version " + std::to_string(tr.version));
                tr.seed = j.value("seed", std::uint64_t{0});
                tr.scenario = j.value("scenario", std::string{});
                for (const auto& r : j.at("robots"))
                    tr.robots.push_back(RobotMeta{r.at("id").get<RobotId>(), r.value("platform", std::string{}),
                                                  r.at("d_t").get<double>(), r.at("q_d").get<double>(),
                                                  r.at("sensor_period").get<double>()});
                header_seen = true;
                continue;
            }
            tr.events.push_back(event_from_json(j));
        } catch (const MalformedTrace& e) {
            throw MalformedTrace("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const json::exception& e) {
            throw MalformedTrace("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header_seen)
        throw MalformedTrace("missing header record");
    return tr;
}

Trace read_trace_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open trace file '" + path + "'");
    return read_trace(in);
}

void write_trace_file(const std::string& path, const Trace& tr)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write trace file '" + path + "'");
    write_trace(out, tr);
}

void check_well_formed(const Trace& tr)
{
    std::map<RobotId, std::uint64_t> epoch;
    SimTime last = 0.0;
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
        const auto& e = tr.events[i];
        const std::string where = "event " + std::to_string(i) + " (t=" + std::to_string(e.t) + ")";
        if (i > 0 && e.t < last)
            throw MalformedTrace(where + ": time decreases");
        if (e.t < 0.0)
            throw MalformedTrace(where + ": negative time");
        last = e.t;
        if (const auto* c = std::get_if<ReachAvoidCall>(&e.payload)) {
            auto it = epoch.find(e.robot);
            if (it != epoch.end() && c->epoch <= it->second)
                throw MalformedTrace(where + ": epoch does not increase");
            epoch[e.robot] = c->epoch;
        } else if (const auto* f = std::get_if<FlagChange>(&e.payload)) {
            auto it = epoch.find(e.robot);
            if (it == epoch.end() || it->second != f->epoch)
                throw MalformedTrace(where + ": orphan flag change for epoch " + std::to_string(f->epoch));
        }
    }
}

std::vector<std::string> writer_violations(const Trace& tr)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
        const auto& e = tr.events[i];
        auto report = [&](const std::string& var, Writer got, Writer want) {
            if (got != want)
                out.push_back("event " + std::to_string(i) + ": " + var + " written by " + to_string(got) +
                              ", declared writer is " + to_string(want));
        };
        if (const auto* p = std::get_if<Pose>(&e.payload))
            report("currentPos", p->writer, Writer::Sensor);
        else if (const auto* f = std::get_if<FlagChange>(&e.payload))
            report(to_string(f->flag), f->writer, Writer::Controller);
        else if (const auto* c = std::get_if<ReachAvoidCall>(&e.payload))
            report("targetPos/unsafePos", c->writer, Writer::App);
    }
    return out;
}

} // namespace portbot::trace

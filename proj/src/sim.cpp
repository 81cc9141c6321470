#include "portbot/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "portbot/apps.hpp"

namespace portbot::sim {

using nlohmann::json;

namespace {

constexpr double kTimeEps = 1e-9;

// ---------------------------------------------------------------- JSON reading

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& msg, const std::string& key = "") const
    {
        throw ScenarioError(key.empty() ? (path_.empty() ? "/" : path_) : path_ + "/" + key, msg);
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = false;
            for (const char* k : keys)
                ok = ok || it.key() == k;
            if (!ok)
                fail("unknown key", it.key());
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) const { return j_.at(key); }
    std::string child(const char* key) const { return path_ + "/" + key; }

    Reader object(const char* key) const
    {
        if (!has(key))
            fail("missing required key", key);
        return Reader(j_.at(key), child(key));
    }

    double number(const char* key) const
    {
        if (!has(key))
            fail("missing required key", key);
        const json& v = j_.at(key);
        if (!v.is_number())
            fail("expected a number", key);
        const double d = v.get<double>();
        if (!std::isfinite(d))
            fail("expected a finite number", key);
        return d;
    }

    void number(const char* key, double& out) const
    {
        if (has(key))
            out = number(key);
    }

    void integer(const char* key, int& out) const
    {
        if (!has(key))
            return;
        if (!j_.at(key).is_number_integer())
            fail("expected an integer", key);
        out = j_.at(key).get<int>();
    }

    void size(const char* key, std::size_t& out) const
    {
        if (!has(key))
            return;
        if (!j_.at(key).is_number_unsigned())
            fail("expected a non-negative integer", key);
        out = j_.at(key).get<std::size_t>();
    }

    void boolean(const char* key, bool& out) const
    {
        if (!has(key))
            return;
        if (!j_.at(key).is_boolean())
            fail("expected true or false", key);
        out = j_.at(key).get<bool>();
    }

    void string(const char* key, std::string& out) const
    {
        if (!has(key))
            return;
        if (!j_.at(key).is_string())
            fail("expected a string", key);
        out = j_.at(key).get<std::string>();
    }

    ConfigPoint point(const json& v, const std::string& where) const
    {
        if (!v.is_array() || (v.size() != 2 && v.size() != 3))
            throw ScenarioError(where, "expected [x, y] or [x, y, z]");
        double c[3] = {0, 0, 0};
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
                throw ScenarioError(where, "coordinates must be finite numbers");
            c[i] = v[i].get<double>();
        }
        return ConfigPoint{{c[0], c[1], c[2]}, v.size() == 2};
    }

    ConfigPoint point(const char* key) const
    {
        if (!has(key))
            fail("missing required key", key);
        return point(j_.at(key), child(key));
    }

    std::vector<ConfigPoint> points(const char* key) const
    {
        std::vector<ConfigPoint> out;
        if (!has(key))
            return out;
        const json& a = j_.at(key);
        if (!a.is_array())
            fail("expected an array of points", key);
        for (std::size_t i = 0; i < a.size(); ++i)
            out.push_back(point(a[i], child(key) + "/" + std::to_string(i)));
        return out;
    }

    Position3 point3(const char* key) const
    {
        const ConfigPoint p = point(key);
        if (p.planar)
            fail("expected [x, y, z]", key);
        return p.p;
    }

    Box box(const char* key) const
    {
        const Reader b = object(key);
        b.allow({"min", "max"});
        Box out{b.point3("min"), b.point3("max")};
        if (out.min.x > out.max.x || out.min.y > out.max.y || out.min.z > out.max.z)
            fail("min exceeds max", key);
        return out;
    }

    Region region(const char* key) const
    {
        Region r;
        if (!has(key))
            return r;
        const Reader g = object(key);
        g.allow({"id", "boxes"});
        g.string("id", r.id);
        if (!g.has("boxes"))
            return r;
        const json& boxes = g.raw("boxes");
        if (!boxes.is_array())
            g.fail("expected an array", "boxes");
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const json& b = boxes[i];
            const std::string where = g.child("boxes") + "/" + std::to_string(i);
            if (!b.is_array() || b.size() != 6)
                throw ScenarioError(where, "expected [min_x, min_y, min_z, max_x, max_y, max_z]");
            double c[6];
            for (std::size_t k = 0; k < 6; ++k) {
                if (!b[k].is_number())
                    throw ScenarioError(where, "coordinates must be numbers");
                c[k] = b[k].get<double>();
            }
            r.boxes.push_back(Box{{c[0], c[1], c[2]}, {c[3], c[4], c[5]}});
        }
        try {
            portbot::validate(r);
        } catch (const std::exception& e) {
            g.fail(e.what());
        }
        return r;
    }

    const json& j() const { return j_; }
    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
};

Value param_value(const json& v, const std::string& where)
{
    if (v.is_boolean())
        return v.get<bool>();
    if (v.is_number_integer())
        return v.get<std::int64_t>();
    if (v.is_number())
        return v.get<double>();
    if (v.is_array() && v.size() == 3) {
        Position3 p;
        try {
            p = trace::position_from_json(v);
        } catch (const std::exception& e) {
            throw ScenarioError(where, e.what());
        }
        return p;
    }
    throw ScenarioError(where, "parameter values must be bool, number or [x, y, z]");
}

AppConfig read_app(const Reader& r)
{
    AppConfig a;
    r.allow({"name", "source", "program_file", "params", "waypoints", "rooms", "election_timeout", "fairness_skips"});
    r.string("name", a.name);
    r.string("source", a.source);
    r.string("program_file", a.program_file);
    if (r.has("params")) {
        const Reader p = r.object("params");
        for (auto it = p.j().begin(); it != p.j().end(); ++it)
            a.params[it.key()] = param_value(it.value(), p.child(it.key().c_str()));
    }
    a.waypoints = r.points("waypoints");
    if (r.has("rooms")) {
        const json& rooms = r.raw("rooms");
        if (!rooms.is_array())
            r.fail("expected an array", "rooms");
        for (std::size_t i = 0; i < rooms.size(); ++i) {
            const Reader room(rooms[i], r.child("rooms") + "/" + std::to_string(i));
            room.allow({"entrance", "interior"});
            a.rooms.push_back(RoomConfig{room.point("entrance"), room.points("interior")});
        }
    }
    r.number("election_timeout", a.election_timeout);
    r.integer("fairness_skips", a.fairness_skips);
    return a;
}

void read_spec(const Reader& r, platform::PlatformSpec& s)
{
    r.allow({"mass", "attitude_gain", "dwell_time", "quant_dist", "sensor_period", "integration_step",
             "hover_altitude", "vertical_rate", "limits"});
    r.number("mass", s.mass);
    r.number("attitude_gain", s.attitude_gain);
    r.number("dwell_time", s.dwell_time);
    r.number("quant_dist", s.quant_dist);
    r.number("sensor_period", s.sensor_period);
    r.number("integration_step", s.integration_step);
    r.number("hover_altitude", s.hover_altitude);
    r.number("vertical_rate", s.vertical_rate);
    if (r.has("limits")) {
        const Reader l = r.object("limits");
        l.allow({"v_max", "a_max", "tilt_max", "yaw_max", "gaz_max"});
        l.number("v_max", s.limits.v_max);
        l.number("a_max", s.limits.a_max);
        l.number("tilt_max", s.limits.tilt_max);
        l.number("yaw_max", s.limits.yaw_max);
        l.number("gaz_max", s.limits.gaz_max);
    }
}

void read_gains(const Reader& r, tracker::TrackerGains& g)
{
    r.allow({"k_turn", "k_speed", "v_max", "turn_threshold", "k_xy", "k_v", "tilt_max", "k_z", "accept_radius"});
    r.number("k_turn", g.k_turn);
    r.number("k_speed", g.k_speed);
    r.number("v_max", g.v_max);
    r.number("turn_threshold", g.turn_threshold);
    r.number("k_xy", g.k_xy);
    r.number("k_v", g.k_v);
    r.number("tilt_max", g.tilt_max);
    r.number("k_z", g.k_z);
    r.number("accept_radius", g.accept_radius);
}

void read_plan(const Reader& r, planner::PlanParams& p)
{
    r.allow({"max_tree_size", "clearance_margin", "min_extend_dist", "goal_radius", "goal_bias", "steer_horizon",
             "sample_bounds"});
    r.size("max_tree_size", p.max_tree_size);
    r.number("clearance_margin", p.clearance_margin);
    r.number("min_extend_dist", p.min_extend_dist);
    r.number("goal_radius", p.goal_radius);
    r.number("goal_bias", p.goal_bias);
    r.number("steer_horizon", p.steer_horizon);
    if (r.has("sample_bounds"))
        p.sample_bounds = r.box("sample_bounds");
}

RobotConfig read_robot(const Reader& r, const Box& arena)
{
    r.allow({"id", "platform", "pose", "heading", "airborne", "app_period", "app_jitter", "sensor_noise",
             "plan_latency", "spec", "gains", "plan", "app"});
    if (!r.has("id") || !r.raw("id").is_number_integer())
        r.fail("missing or non-integer id", "id");
    std::string kind = "diffdrive";
    r.string("platform", kind);
    platform::Kind k;
    try {
        k = platform::kind_from_string(kind);
    } catch (const std::exception& e) {
        r.fail(e.what(), "platform");
    }
    const ConfigPoint pose = r.point("pose");
    RobotConfig rc = make_robot(r.raw("id").get<RobotId>(), k, pose.p, arena);
    rc.planar_pose = pose.planar;
    r.number("heading", rc.heading);
    r.boolean("airborne", rc.airborne);
    r.number("app_period", rc.app_period);
    r.number("app_jitter", rc.app_jitter);
    r.number("sensor_noise", rc.sensor_noise);
    r.number("plan_latency", rc.plan_latency);
    if (r.has("spec")) {
        read_spec(r.object("spec"), rc.spec);
        // defaults that derive from q_d follow an overridden q_d
        rc.gains = tracker::TrackerGains::defaults_for(rc.spec);
        const Box b = rc.plan.sample_bounds;
        rc.plan = planner::PlanParams::defaults_for(rc.spec, b);
        rc.plan.sample_bounds.min.z = rc.plan.sample_bounds.max.z = rc.spec.operating_altitude();
    }
    if (r.has("gains"))
        read_gains(r.object("gains"), rc.gains);
    if (r.has("plan"))
        read_plan(r.object("plan"), rc.plan);
    if (r.has("app"))
        rc.app = read_app(r.object("app"));
    return rc;
}

json point_json(const ConfigPoint& c)
{
    return c.planar ? json::array({c.p.x, c.p.y}) : json::array({c.p.x, c.p.y, c.p.z});
}

json box_json(const Box& b)
{
    return {{"min", {b.min.x, b.min.y, b.min.z}}, {"max", {b.max.x, b.max.y, b.max.z}}};
}

json app_json(const AppConfig& a)
{
    json j{{"name", a.name}};
    if (!a.source.empty())
        j["source"] = a.source;
    if (!a.program_file.empty())
        j["program_file"] = a.program_file;
    if (!a.params.empty()) {
        json p = json::object();
        for (const auto& [k, v] : a.params) {
            if (const auto* b = std::get_if<bool>(&v))
                p[k] = *b;
            else if (const auto* i = std::get_if<std::int64_t>(&v))
                p[k] = *i;
            else if (const auto* d = std::get_if<double>(&v))
                p[k] = *d;
            else if (const auto* q = std::get_if<Position3>(&v))
                p[k] = trace::to_json(*q);
        }
        j["params"] = p;
    }
    if (!a.waypoints.empty()) {
        j["waypoints"] = json::array();
        for (const auto& w : a.waypoints)
            j["waypoints"].push_back(point_json(w));
    }
    if (!a.rooms.empty()) {
        j["rooms"] = json::array();
        for (const auto& r : a.rooms) {
            json room{{"entrance", point_json(r.entrance)}, {"interior", json::array()}};
            for (const auto& p : r.interior)
                room["interior"].push_back(point_json(p));
            j["rooms"].push_back(room);
        }
        j["election_timeout"] = a.election_timeout;
    }
    j["fairness_skips"] = a.fairness_skips;
    return j;
}

bool is_multiple(double a, double b)
{
    const double r = a / b;
    return std::llround(r) >= 1 && std::fabs(r - static_cast<double>(std::llround(r))) < 1e-6;
}

std::int64_t ticks(double period, double h) { return std::max<std::int64_t>(1, std::llround(period / h)); }

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ResolvedApp {
    std::shared_ptr<const dsl::Program> program;
    std::vector<Position3> waypoints;
};

/// Program and robot-specific waypoint list for one robot.
ResolvedApp resolve_app(const Scenario& s, const RobotConfig& rc, const std::string& where)
{
    const AppConfig& a = s.app_for(rc);
    ResolvedApp out;
    for (const auto& w : a.waypoints)
        out.waypoints.push_back(w.resolve(rc.spec));
    if (a.name == "none")
        return out;
    if (a.name == "waypoints") {
        if (a.waypoints.empty())
            throw ScenarioError(where + "/waypoints", "the waypoints app needs at least one waypoint");
        out.program = apps::waypoints_program();
    } else if (a.name == "race") {
        apps::RaceConfig rc2{out.waypoints, s.unsafe};
        try {
            rc2.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(where + "/waypoints", e.what());
        }
        out.program = apps::race_program();
    } else if (a.name == "formation") {
        apps::FormationConfig fc;
        fc.n = static_cast<int>(s.robots.size());
        try {
            fc.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(where, e.what());
        }
        out.program = apps::formation_program();
    } else if (a.name == "search") {
        apps::SearchConfig sc;
        for (const auto& r : a.rooms) {
            apps::Room room{r.entrance.resolve(rc.spec), {}};
            for (const auto& p : r.interior)
                room.interior.push_back(p.resolve(rc.spec));
            sc.rooms.push_back(room);
        }
        sc.unsafe = s.unsafe;
        sc.election_timeout = a.election_timeout;
        try {
            sc.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(where + "/rooms", e.what());
        }
        out.waypoints = sc.flattened();
        out.program = apps::search_program(sc.room_sizes(), sc.election_timeout);
    } else if (a.name == "program") {
        std::string text = a.source;
        if (text.empty()) {
            if (a.program_file.empty())
                throw ScenarioError(where, "program app needs 'source' or 'program_file'");
            const std::filesystem::path p = std::filesystem::path(s.base_dir) / a.program_file;
            try {
                text = read_file(p.string());
            } catch (const std::exception& e) {
                throw ScenarioError(where + "/program_file", e.what());
            }
        }
        try {
            out.program = std::make_shared<const dsl::Program>(dsl::parse_program(text));
        } catch (const dsl::ProgramError& e) {
            throw ScenarioError(where + (a.source.empty() ? "/program_file" : "/source"), e.what());
        }
    } else {
        throw ScenarioError(where + "/name", "unknown app '" + a.name + "'");
    }
    for (std::size_t i = 0; i < out.waypoints.size(); ++i)
        if (a.name != "search" && s.unsafe.contains(out.waypoints[i]))
            throw ScenarioError(where + "/waypoints/" + std::to_string(i), "waypoint inside the unsafe region");
    return out;
}

} // namespace

// ---------------------------------------------------------------- scenario I/O

RobotConfig make_robot(RobotId id, platform::Kind kind, const Position3& pose, const Box& arena)
{
    RobotConfig rc;
    rc.id = id;
    rc.spec = kind == platform::Kind::Quad ? platform::PlatformSpec::quad_defaults()
                                           : platform::PlatformSpec::diff_drive_defaults();
    rc.pose = pose;
    rc.gains = tracker::TrackerGains::defaults_for(rc.spec);
    Box bounds = arena;
    bounds.min.z = bounds.max.z = rc.spec.operating_altitude();
    rc.plan = planner::PlanParams::defaults_for(rc.spec, bounds);
    return rc;
}

Scenario scenario_from_json(const json& j)
{
    const Reader r(j, "");
    r.allow({"version", "name", "seed", "time_limit", "arena", "unsafe", "channel", "disturbance", "app", "robots",
             "record"});
    Scenario s;
    if (!r.has("version") || !r.raw("version").is_number_integer())
        r.fail("missing or non-integer version", "version");
    s.version = r.raw("version").get<int>();
    if (s.version != kScenarioVersion)
        r.fail("unsupported scenario version " + std::to_string(s.version), "version");
    r.string("name", s.name);
    if (!r.has("seed"))
        r.fail("seed is mandatory", "seed");
    if (!r.raw("seed").is_number_unsigned())
        r.fail("seed must be a non-negative 64-bit integer", "seed");
    s.seed = r.raw("seed").get<std::uint64_t>();
    s.time_limit = r.number("time_limit");
    if (r.has("arena"))
        s.arena = r.box("arena");
    s.unsafe = r.region("unsafe");
    if (r.has("channel")) {
        const Reader c = r.object("channel");
        c.allow({"min_delay", "max_delay", "loss_prob", "rebroadcast_period"});
        c.number("min_delay", s.channel.min_delay);
        c.number("max_delay", s.channel.max_delay);
        c.number("loss_prob", s.channel.loss_prob);
        c.number("rebroadcast_period", s.channel.rebroadcast_period);
    }
    if (r.has("disturbance")) {
        const Reader d = r.object("disturbance");
        d.allow({"enabled", "bias", "gust_accel", "gust_period"});
        s.disturbance.enabled = true;
        d.boolean("enabled", s.disturbance.enabled);
        if (d.has("bias")) {
            const ConfigPoint b = d.point("bias");
            s.disturbance.bias_x = b.p.x;
            s.disturbance.bias_y = b.p.y;
        }
        d.number("gust_accel", s.disturbance.gust_accel);
        d.number("gust_period", s.disturbance.gust_period);
    }
    if (r.has("app"))
        s.app = read_app(r.object("app"));
    if (!r.has("robots") || !r.raw("robots").is_array())
        r.fail("expected an array of robots", "robots");
    const json& robots = r.raw("robots");
    for (std::size_t i = 0; i < robots.size(); ++i)
        s.robots.push_back(read_robot(Reader(robots[i], "/robots/" + std::to_string(i)), s.arena));
    if (r.has("record")) {
        const Reader rec = r.object("record");
        rec.allow({"dsm", "plans", "blocks"});
        rec.boolean("dsm", s.record.dsm);
        rec.boolean("plans", s.record.plans);
        rec.boolean("blocks", s.record.blocks);
    }
    return s;
}

json to_json(const Scenario& s)
{
    json j{{"version", s.version},
           {"name", s.name},
           {"seed", s.seed},
           {"time_limit", s.time_limit},
           {"arena", box_json(s.arena)},
           {"unsafe", trace::to_json(s.unsafe)},
           {"channel",
            {{"min_delay", s.channel.min_delay},
             {"max_delay", s.channel.max_delay},
             {"loss_prob", s.channel.loss_prob},
             {"rebroadcast_period", s.channel.rebroadcast_period}}},
           {"app", app_json(s.app)},
           {"record", {{"dsm", s.record.dsm}, {"plans", s.record.plans}, {"blocks", s.record.blocks}}}};
    if (s.disturbance.enabled)
        j["disturbance"] = {{"enabled", true},
                            {"bias", {s.disturbance.bias_x, s.disturbance.bias_y}},
                            {"gust_accel", s.disturbance.gust_accel},
                            {"gust_period", s.disturbance.gust_period}};
    j["robots"] = json::array();
    for (const auto& r : s.robots) {
        const auto& sp = r.spec;
        const auto& g = r.gains;
        const auto& p = r.plan;
        json rj{{"id", r.id},
                {"platform", platform::to_string(sp.kind)},
                {"pose", point_json(ConfigPoint{r.pose, r.planar_pose})},
                {"heading", r.heading},
                {"airborne", r.airborne},
                {"app_period", r.app_period},
                {"app_jitter", r.app_jitter},
                {"sensor_noise", r.sensor_noise},
                {"plan_latency", r.plan_latency},
                {"spec",
                 {{"mass", sp.mass},
                  {"attitude_gain", sp.attitude_gain},
                  {"dwell_time", sp.dwell_time},
                  {"quant_dist", sp.quant_dist},
                  {"sensor_period", sp.sensor_period},
                  {"integration_step", sp.integration_step},
                  {"hover_altitude", sp.hover_altitude},
                  {"vertical_rate", sp.vertical_rate},
                  {"limits",
                   {{"v_max", sp.limits.v_max},
                    {"a_max", sp.limits.a_max},
                    {"tilt_max", sp.limits.tilt_max},
                    {"yaw_max", sp.limits.yaw_max},
                    {"gaz_max", sp.limits.gaz_max}}}}},
                {"gains",
                 {{"k_turn", g.k_turn},
                  {"k_speed", g.k_speed},
                  {"v_max", g.v_max},
                  {"turn_threshold", g.turn_threshold},
                  {"k_xy", g.k_xy},
                  {"k_v", g.k_v},
                  {"tilt_max", g.tilt_max},
                  {"k_z", g.k_z},
                  {"accept_radius", g.accept_radius}}},
                {"plan",
                 {{"max_tree_size", p.max_tree_size},
                  {"clearance_margin", p.clearance_margin},
                  {"min_extend_dist", p.min_extend_dist},
                  {"goal_radius", p.goal_radius},
                  {"goal_bias", p.goal_bias},
                  {"steer_horizon", p.steer_horizon},
                  {"sample_bounds", box_json(p.sample_bounds)}}}};
        if (r.app)
            rj["app"] = app_json(*r.app);
        j["robots"].push_back(rj);
    }
    return j;
}

Scenario load_scenario(const std::string& path)
{
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ScenarioError(path, e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(path, std::string("invalid JSON: ") + e.what());
    }
    Scenario s = scenario_from_json(j);
    s.base_dir = std::filesystem::path(path).parent_path().string();
    return s;
}

void save_scenario(const std::string& path, const Scenario& s)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << to_json(s).dump(2) << '\n';
}

void validate(const Scenario& s)
{
    if (s.version != kScenarioVersion)
        throw ScenarioError("/version", "unsupported scenario version");
    if (!(s.time_limit > 0.0))
        throw ScenarioError("/time_limit", "must be positive");
    if (s.robots.empty())
        throw ScenarioError("/robots", "at least one robot is required");
    try {
        s.channel.validate();
    } catch (const std::exception& e) {
        throw ScenarioError("/channel", e.what());
    }
    try {
        portbot::validate(s.unsafe);
    } catch (const std::exception& e) {
        throw ScenarioError("/unsafe", e.what());
    }
    const auto& d = s.disturbance;
    if (d.enabled && (!(d.gust_accel >= 0.0) || !(d.gust_period > 0.0)))
        throw ScenarioError("/disturbance", "gust_accel must be >= 0 and gust_period > 0");

    std::set<RobotId> ids;
    const double h = s.robots.front().spec.integration_step;
    for (std::size_t i = 0; i < s.robots.size(); ++i) {
        const RobotConfig& r = s.robots[i];
        const std::string where = "/robots/" + std::to_string(i);
        if (!ids.insert(r.id).second)
            throw ScenarioError(where + "/id", "duplicate robot id " + std::to_string(r.id));
        try {
            r.spec.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(where + "/spec", e.what());
        }
        try {
            r.gains.validate(r.spec);
        } catch (const std::exception& e) {
            throw ScenarioError(where + "/gains", e.what());
        }
        try {
            r.plan.validate(r.spec);
        } catch (const std::exception& e) {
            throw ScenarioError(where + "/plan", e.what());
        }
        if (std::fabs(r.spec.integration_step - h) > 1e-15)
            throw ScenarioError(where + "/spec/integration_step", "all robots must share one integration step");
        if (!is_multiple(r.spec.sensor_period, h))
            throw ScenarioError(where + "/spec/sensor_period", "must be an integer multiple of the integration step");
        if (!is_multiple(r.app_period, r.spec.sensor_period))
            throw ScenarioError(where + "/app_period", "must be an integer multiple of the sensor period");
        if (!(r.app_jitter >= 0.0) || r.app_jitter >= r.app_period)
            throw ScenarioError(where + "/app_jitter", "must be in [0, app_period)");
        if (!(r.sensor_noise >= 0.0))
            throw ScenarioError(where + "/sensor_noise", "must be >= 0");
        if (!(r.plan_latency >= 0.0))
            throw ScenarioError(where + "/plan_latency", "must be >= 0");
        if (!r.pose.finite() || !std::isfinite(r.heading))
            throw ScenarioError(where + "/pose", "must be finite");
        if (!s.arena.contains(Position3{r.pose.x, r.pose.y, s.arena.min.z}))
            throw ScenarioError(where + "/pose", "outside the arena");
        const Position3 start = platform::position_of(platform::initial_state(r.spec, r.pose, r.heading, r.airborne));
        if (s.unsafe.contains(start))
            throw ScenarioError(where + "/pose", "initial pose inside the unsafe region");
        resolve_app(s, r, r.app ? where + "/app" : "/app");
    }
    for (RobotId i = 0; i < static_cast<RobotId>(s.robots.size()); ++i)
        if (!ids.count(i))
            throw ScenarioError("/robots", "robot ids must be 0..n-1");
    const std::int64_t end = std::llround(s.time_limit / h);
    if (std::fabs(static_cast<double>(end) * h - s.time_limit) > kTimeEps)
        throw ScenarioError("/time_limit", "must be an integer multiple of the integration step");
}

// ---------------------------------------------------------------- engine

struct Engine::Robot final : app::ControlPort {
    RobotConfig cfg;
    platform::PlatformState state;
    reach_avoid::VariableHolder vh;
    std::unique_ptr<reach_avoid::ReachAvoidController> ctrl;
    reach_avoid::PositionSensor sensor;
    dsm::DsmReplica replica;
    std::unique_ptr<app::AppInstance> app;
    platform::Command cmd;
    RngStream disturbance_rng;
    RngStream jitter_rng;
    platform::Disturbance wind;
    std::int64_t next_gust = 0;
    std::int64_t sensor_ticks = 1;
    std::int64_t app_ticks = 1;
    std::int64_t next_app = 0;
    std::uint64_t blocks = 0;
    SimTime now = 0.0;

    Robot(const RobotConfig& c, int n, const Scenario& s)
        : cfg(c),
          state(platform::initial_state(c.spec, c.pose, c.heading, c.airborne)),
          sensor(c.sensor_noise, RngStream::derive(s.seed, "sensor-noise/" + std::to_string(c.id))),
          replica(c.id, n, s.channel.rebroadcast_period),
          disturbance_rng(RngStream::derive(s.seed, "disturbance/" + std::to_string(c.id))),
          jitter_rng(RngStream::derive(s.seed, "app-jitter/" + std::to_string(c.id)))
    {
        reach_avoid::ControllerConfig cc{c.spec, c.gains, c.plan, c.plan_latency, 2.0};
        ctrl = std::make_unique<reach_avoid::ReachAvoidController>(
            cc, vh, RngStream::derive(s.seed, "planner/" + std::to_string(c.id)));
        if (c.spec.kind == platform::Kind::Quad)
            cmd = platform::Hover{};
        else
            cmd = platform::Straight{0.0};
    }

    Position3 current_pos() const override { return vh.current(); }
    bool active() const override { return vh.active(); }
    bool done() const override { return vh.done(); }
    bool failed() const override { return vh.failed(); }
    void do_reach_avoid(const Position3& x, const Region& u) override { ctrl->do_reach_avoid(x, u, state, now); }
};

Engine::Engine(Scenario s) : scenario_(std::move(s))
{
    validate(scenario_);
    h_ = scenario_.robots.front().spec.integration_step;
    end_tick_ = std::llround(scenario_.time_limit / h_);
    channel_ = std::make_unique<dsm::Channel>(scenario_.channel, RngStream::derive(scenario_.seed, "channel"));

    std::vector<RobotConfig> sorted = scenario_.robots;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    const int n = static_cast<int>(sorted.size());

    trace_.seed = scenario_.seed;
    trace_.scenario = scenario_.name;
    for (const auto& rc : sorted) {
        auto r = std::make_unique<Robot>(rc, n, scenario_);
        r->sensor_ticks = ticks(rc.spec.sensor_period, h_);
        r->app_ticks = ticks(rc.app_period, h_);
        const std::string where = rc.app ? "/robots/" + std::to_string(rc.id) + "/app" : "/app";
        ResolvedApp ra = resolve_app(scenario_, rc, where);
        if (ra.program) {
            const AppConfig& a = scenario_.app_for(rc);
            app::AppEnv env;
            env.self = rc.id;
            env.num_bots = n;
            env.waypoints = std::move(ra.waypoints);
            env.unsafe = scenario_.unsafe;
            env.params = a.params;
            env.fairness_skips = a.fairness_skips;
            try {
                r->app = std::make_unique<app::AppInstance>(
                    ra.program, std::move(env), r->replica,
                    RngStream::derive(scenario_.seed, "app-tiebreak/" + std::to_string(rc.id)));
            } catch (const app::RuntimeFault& e) {
                throw ScenarioError(where, e.what());
            } catch (const std::invalid_argument& e) {
                throw ScenarioError(where + "/params", e.what());
            }
        }
        trace_.robots.push_back(trace::RobotMeta{rc.id, platform::to_string(rc.spec.kind), rc.spec.dwell_time,
                                                 rc.spec.quant_dist, rc.spec.sensor_period});
        robots_.push_back(std::move(r));
    }
}

Engine::~Engine() = default;

SimTime Engine::now() const { return static_cast<double>(tick_) * h_; }

std::size_t Engine::robot_count() const { return robots_.size(); }
const dsm::DsmReplica& Engine::replica(RobotId id) const { return robots_.at(static_cast<std::size_t>(id))->replica; }
const platform::PlatformState& Engine::state(RobotId id) const
{
    return robots_.at(static_cast<std::size_t>(id))->state;
}
const reach_avoid::VariableHolder& Engine::variables(RobotId id) const
{
    return robots_.at(static_cast<std::size_t>(id))->vh;
}
const app::AppInstance* Engine::app(RobotId id) const { return robots_.at(static_cast<std::size_t>(id))->app.get(); }

RobotStats Engine::stats(RobotId id) const
{
    const Robot& r = *robots_.at(static_cast<std::size_t>(id));
    RobotStats st;
    st.plans = r.ctrl->plans_requested();
    st.blocks = r.blocks;
    if (r.app)
        st.fault = r.app->fault();
    return st;
}

void Engine::emit(RobotId robot, trace::Payload p) { trace_.events.push_back(trace::TraceEvent{now(), robot, std::move(p)}); }

void Engine::drain_robot(Robot& r)
{
    for (auto& p : r.vh.drain())
        emit(r.cfg.id, std::move(p));
    for (auto& p : r.ctrl->drain_events())
        if (scenario_.record.plans)
            emit(r.cfg.id, std::move(p));
}

bool Engine::step()
{
    if (tick_ >= end_tick_)
        return false;
    const SimTime t = now();

    for (auto& d : channel_->pop_due(t + kTimeEps)) {
        Robot& r = *robots_.at(static_cast<std::size_t>(d.to));
        if (r.replica.deliver(d.update) && scenario_.record.dsm)
            emit(d.to, trace::DsmDeliver{std::move(d.update)});
    }

    for (auto& rp : robots_) {
        Robot& r = *rp;
        if (tick_ % r.sensor_ticks != 0)
            continue;
        r.now = t;
        r.sensor.update(r.vh, platform::position_of(r.state));
        r.cmd = r.ctrl->controller_tick(r.state, t);
        drain_robot(r);
    }

    for (auto& rp : robots_) {
        Robot& r = *rp;
        if (!r.app || r.app->halted() || tick_ != r.next_app)
            continue;
        r.now = t;
        app::StepResult res = r.app->step(r, t);
        if (res.block) {
            ++r.blocks;
            if (scenario_.record.blocks)
                emit(r.cfg.id, trace::AppBlock{*res.block});
        }
        if (scenario_.record.dsm)
            for (auto& u : res.writes)
                emit(r.cfg.id, trace::DsmWrite{std::move(u)});
        channel_->send(res.messages, t);
        drain_robot(r);
        if (res.fault)
            emit(r.cfg.id, trace::Fault{*res.fault});
        std::int64_t next = r.app_ticks;
        if (r.cfg.app_jitter > 0.0)
            next += std::llround(r.jitter_rng.uniform(-r.cfg.app_jitter, r.cfg.app_jitter) / h_);
        r.next_app += std::max<std::int64_t>(1, next);
    }

    for (auto& rp : robots_) {
        Robot& r = *rp;
        if (tick_ % r.sensor_ticks == 0)
            channel_->send(r.replica.tick_rebroadcast(t), t);
    }

    const auto& dm = scenario_.disturbance;
    for (auto& rp : robots_) {
        Robot& r = *rp;
        platform::Disturbance d;
        if (dm.enabled) {
            if (tick_ >= r.next_gust) {
                const double rad = dm.gust_accel * std::sqrt(r.disturbance_rng.uniform01());
                const double ang = 2.0 * kPi * r.disturbance_rng.uniform01();
                r.wind = {rad * std::cos(ang), rad * std::sin(ang)};
                r.next_gust += ticks(dm.gust_period, h_);
            }
            d = {dm.bias_x + r.wind.ax, dm.bias_y + r.wind.ay};
        }
        r.state = platform::step(r.state, r.cmd, h_, r.cfg.spec, d);
    }
    ++tick_;
    return true;
}

trace::Trace Engine::run()
{
    while (step()) {
    }
    return take_trace();
}

trace::Trace Engine::take_trace()
{
    trace::Trace out = std::move(trace_);
    trace_ = trace::Trace{};
    trace_.seed = out.seed;
    trace_.scenario = out.scenario;
    trace_.robots = out.robots;
    return out;
}

trace::Trace run(const Scenario& s)
{
    Engine e(s);
    return e.run();
}

bool has_fault(const trace::Trace& tr)
{
    return std::any_of(tr.events.begin(), tr.events.end(),
                       [](const auto& e) { return std::holds_alternative<trace::Fault>(e.payload); });
}

// ---------------------------------------------------------------- analysis

void export_csv(const trace::Trace& tr, std::ostream& os)
{
    struct RobotView {
        std::uint64_t epoch = 0;
        bool active = false, done = false, failed = false;
        std::optional<Position3> target;
    };
    std::map<RobotId, RobotView> view;
    os << "t,robot,x,y,z,epoch,done,failed,active,target_x,target_y,target_z\n";
    char buf[256];
    for (const auto& e : tr.events) {
        RobotView& v = view[e.robot];
        if (const auto* c = std::get_if<trace::ReachAvoidCall>(&e.payload)) {
            v.epoch = c->epoch;
            v.target = c->target;
        } else if (const auto* f = std::get_if<trace::FlagChange>(&e.payload)) {
            (f->flag == trace::Flag::Active ? v.active : f->flag == trace::Flag::Done ? v.done : v.failed) = f->value;
        } else if (const auto* p = std::get_if<trace::Pose>(&e.payload)) {
            std::snprintf(buf, sizeof buf, "%.6f,%d,%.9g,%.9g,%.9g,%llu,%d,%d,%d,", e.t, e.robot, p->pos.x, p->pos.y,
                          p->pos.z, static_cast<unsigned long long>(v.epoch), v.done, v.failed, v.active);
            os << buf;
            if (v.target) {
                std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", v.target->x, v.target->y, v.target->z);
                os << buf;
            } else {
                os << ",,\n";
            }
        }
    }
}

std::vector<std::string> dsm_subsequence_violations(const trace::Trace& tr)
{
    std::map<std::string, std::vector<dsm::Timestamp>> writes;
    std::map<std::string, std::set<RobotId>> writers;
    std::map<std::pair<RobotId, std::string>, std::vector<dsm::Timestamp>> applied;
    for (const auto& e : tr.events) {
        if (const auto* w = std::get_if<trace::DsmWrite>(&e.payload)) {
            writes[w->update.name].push_back(w->update.timestamp);
            writers[w->update.name].insert(e.robot);
        } else if (const auto* d = std::get_if<trace::DsmDeliver>(&e.payload)) {
            applied[{e.robot, d->update.name}].push_back(d->update.timestamp);
        }
    }
    std::vector<std::string> out;
    for (const auto& [key, seq] : applied) {
        const auto& [robot, name] = key;
        if (writers[name].size() > 1)
            continue;
        const auto& w = writes[name];
        std::size_t pos = 0;
        for (const auto& ts : seq) {
            while (pos < w.size() && w[pos] != ts)
                ++pos;
            if (pos == w.size()) {
                out.push_back("robot " + std::to_string(robot) + " applied " + name + " at t=" +
                              std::to_string(ts.time) + " out of writer order or never written");
                break;
            }
            ++pos;
        }
    }
    return out;
}

std::vector<Value> replica_history(const trace::Trace& tr, RobotId at, const std::string& name)
{
    std::vector<Value> out;
    auto push = [&](const Value& v) {
        if (out.empty() || out.back() != v)
            out.push_back(v);
    };
    for (const auto& e : tr.events) {
        if (e.robot != at)
            continue;
        if (const auto* w = std::get_if<trace::DsmWrite>(&e.payload); w && w->update.name == name)
            push(w->update.value);
        else if (const auto* d = std::get_if<trace::DsmDeliver>(&e.payload); d && d->update.name == name)
            push(d->update.value);
    }
    return out;
}

} // namespace portbot::sim

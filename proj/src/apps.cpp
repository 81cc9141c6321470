#include "portbot/apps.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "portbot/app_runtime.hpp"

namespace portbot::apps {

namespace {

const std::string kFormation = R"(// Regular-polygon formation for an odd number of robots.
sharedsw position pos[];
local int pid = getId();
local int loc = 0; // 0: compute a new target, 1: waiting
local int counter = 0;
local position target;
param real len = 1.5;
param int waits = 5;

init initialize() eff {
  pos[pid] = getPos();
  loc = 0;
}

update() pre ((loc == 0 || !active) && isSet(pos)) eff {
  target = bisector(pos, pid, numBots(), len);
  doReachAvoid(target, empty);
  loc = 1;
  counter = 0;
}

wait() pre (loc == 1) eff {
  pos[pid] = getPos();
  counter = counter + 1;
  if (counter >= waits) {
    loc = 0;
  }
}
)";

const std::string kRace = R"(// Robots collectively cover a stream of waypoints.
sharedmw int sharedIndex = 0;
local int currentIndex = -1;

init start() eff {
  currentIndex = -1;
}

race() pre (currentIndex != sharedIndex && sharedIndex < numWaypoints()) eff {
  currentIndex = sharedIndex;
  doReachAvoid(waypoint(currentIndex), unsafe());
}

reached() pre (done && currentIndex == sharedIndex) eff {
  sharedIndex = max(sharedIndex, currentIndex + 1);
}

retry() pre (failed && currentIndex == sharedIndex && sharedIndex < numWaypoints()) eff {
  doReachAvoid(waypoint(currentIndex), unsafe());
}
)";

const std::string kWaypoints = R"(// Visit the waypoints in order; stop on failure or when no path exists.
local int i = 0;

init start() eff {
  i = 0;
  doReachAvoid(waypoint(0), unsafe());
}

next() pre (done && !failed && i + 1 < numWaypoints()) eff {
  i = i + 1;
  doReachAvoid(waypoint(i), unsafe());
}
)";

std::shared_ptr<const dsl::Program> parsed(const std::string& src)
{
    return std::make_shared<const dsl::Program>(dsl::parse_program(src));
}

dsl::Decl decl(dsl::Storage s, dsl::TypeName t, std::string name, bool array = false)
{
    dsl::Decl d;
    d.storage = s;
    d.type = t;
    d.name = std::move(name);
    d.array = array;
    return d;
}

dsl::Expr int_lit(std::int64_t v)
{
    dsl::Expr e;
    e.kind = dsl::Expr::Kind::IntLit;
    e.int_value = v;
    return e;
}

std::int64_t get_int(const app::BlockContext& c, const std::string& name)
{
    return std::get<std::int64_t>(c.local(name));
}

} // namespace

Position3 bisector(const std::vector<Position3>& pos, RobotId i, int n, double len)
{
    if (n < 3 || n % 2 == 0 || static_cast<int>(pos.size()) != n || i < 0 || i >= n)
        throw std::invalid_argument("bisector needs an odd n >= 3 matching the position array");
    const int j = (i + (n - 1) / 2) % n;
    const Position3& a = pos[static_cast<std::size_t>(j)];
    const Position3& b = pos[static_cast<std::size_t>((j + 1) % n)];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double l = std::hypot(dx, dy);
    if (l == 0.0)
        throw DegenerateSegment("robots " + std::to_string(j) + " and " + std::to_string((j + 1) % n) +
                                " are at the same planar position");
    const Position3 m = (a + b) * 0.5;
    double ux = -dy / l, uy = dx / l;
    const Position3& me = pos[static_cast<std::size_t>(i)];
    if ((me.x - m.x) * ux + (me.y - m.y) * uy < 0.0) {
        ux = -ux;
        uy = -uy;
    }
    return {m.x + len * ux, m.y + len * uy, m.z};
}

double equilibrium_len(double circumradius, int n) { return circumradius * (1.0 + std::cos(kPi / n)); }

void FormationConfig::validate() const
{
    if (n < 3 || n % 2 == 0)
        throw std::invalid_argument("formation needs an odd number of robots, at least 3");
    if (!(len > 0.0))
        throw std::invalid_argument("formation len must be positive");
    if (waits < 1)
        throw std::invalid_argument("formation waits must be at least 1");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("formation tolerance must be positive");
}

void RaceConfig::validate() const
{
    if (waypoints.empty())
        throw std::invalid_argument("race needs at least one waypoint");
    for (const auto& w : waypoints)
        if (unsafe.contains(w))
            throw std::invalid_argument("race waypoint inside the unsafe region");
}

void SearchConfig::validate() const
{
    if (rooms.empty())
        throw std::invalid_argument("search needs at least one room");
    for (const auto& p : flattened())
        if (unsafe.contains(p))
            throw std::invalid_argument("search point inside the unsafe region");
    if (!(election_timeout > 0.0))
        throw std::invalid_argument("election timeout must be positive");
}

std::vector<Position3> SearchConfig::flattened() const
{
    std::vector<Position3> out;
    for (const auto& r : rooms) {
        out.push_back(r.entrance);
        out.insert(out.end(), r.interior.begin(), r.interior.end());
    }
    return out;
}

std::vector<std::size_t> SearchConfig::room_sizes() const
{
    std::vector<std::size_t> out;
    for (const auto& r : rooms)
        out.push_back(1 + r.interior.size());
    return out;
}

const std::string& formation_source() { return kFormation; }
const std::string& race_source() { return kRace; }
const std::string& waypoints_source() { return kWaypoints; }

std::shared_ptr<const dsl::Program> formation_program()
{
    static const auto p = parsed(kFormation);
    return p;
}

std::shared_ptr<const dsl::Program> race_program()
{
    static const auto p = parsed(kRace);
    return p;
}

std::shared_ptr<const dsl::Program> waypoints_program()
{
    static const auto p = parsed(kWaypoints);
    return p;
}

std::shared_ptr<const dsl::Program> search_program(const std::vector<std::size_t>& room_sizes,
                                                   double election_timeout)
{
    using dsl::Storage;
    using dsl::TypeName;
    using app::BlockContext;
    using app::element_name;

    enum Loc : std::int64_t { Electing = 1, Assigning = 2, Moving = 3, Finished = 4 };
    const auto rooms = static_cast<std::int64_t>(room_sizes.size());
    std::vector<std::size_t> offset{0};
    for (std::size_t s : room_sizes)
        offset.push_back(offset.back() + s);

    auto p = std::make_shared<dsl::Program>();
    p->decls.push_back(decl(Storage::SharedSW, TypeName::Int, "elect", true));
    for (const char* name : {"room_owner", "room_status"}) {
        auto d = decl(Storage::SharedMW, TypeName::Int, name, true);
        d.size = int_lit(rooms);
        p->decls.push_back(std::move(d));
    }
    for (const char* name : {"loc", "leader", "room", "step"})
        p->decls.push_back(decl(Storage::Local, TypeName::Int, name));
    p->decls.push_back(decl(Storage::Local, TypeName::Real, "elect_start"));

    auto point = [offset](const BlockContext& c, std::int64_t room, std::int64_t step) {
        return c.waypoints().at(offset[static_cast<std::size_t>(room)] + static_cast<std::size_t>(step));
    };
    auto size_of = [room_sizes](std::int64_t room) {
        return static_cast<std::int64_t>(room_sizes[static_cast<std::size_t>(room)]);
    };
    auto elect_slots_full = [](const BlockContext& c) {
        for (int i = 0; i < c.num_bots(); ++i)
            if (!c.shared_set(element_name("elect", i)))
                return false;
        return true;
    };

    auto add = [&](std::string name, bool init, std::function<bool(const BlockContext&)> pre,
                   std::function<void(BlockContext&)> eff) {
        dsl::Block b;
        b.name = std::move(name);
        b.init = init;
        b.native = std::make_shared<const dsl::NativeBody>(dsl::NativeBody{std::move(pre), std::move(eff)});
        p->blocks.push_back(std::move(b));
    };

    add("announce", true, nullptr, [](BlockContext& c) {
        c.write_shared(element_name("elect", c.id()), std::int64_t{c.id()});
        c.set_local("elect_start", c.now());
        c.set_local("room", std::int64_t{-1});
        c.set_local("loc", std::int64_t{Electing});
    });

    add(
        "elect",
        false,
        [=](const BlockContext& c) {
            return get_int(c, "loc") == Electing &&
                   (elect_slots_full(c) ||
                    c.now() - std::get<double>(c.local("elect_start")) >= election_timeout - 1e-9);
        },
        [=](BlockContext& c) {
            std::vector<RobotId> seen;
            for (int i = 0; i < c.num_bots(); ++i)
                if (c.shared_set(element_name("elect", i)))
                    seen.push_back(static_cast<RobotId>(std::get<std::int64_t>(c.shared(element_name("elect", i)))));
            if (seen.empty())
                throw app::ElectionTimeout("no participant observed");
            const RobotId leader = *std::max_element(seen.begin(), seen.end());
            c.set_local("leader", std::int64_t{leader});
            if (leader == c.id()) {
                std::sort(seen.begin(), seen.end());
                for (std::int64_t k = 0; k < rooms; ++k)
                    c.write_shared(element_name("room_owner", k),
                                   std::int64_t{seen[static_cast<std::size_t>(k) % seen.size()]});
            }
            c.set_local("loc", std::int64_t{Assigning});
        });

    add(
        "next_room",
        false,
        [=](const BlockContext& c) {
            if (get_int(c, "loc") != Assigning)
                return false;
            for (std::int64_t k = 0; k < rooms; ++k)
                if (!c.shared_set(element_name("room_owner", k)))
                    return false;
            return true;
        },
        [=](BlockContext& c) {
            for (std::int64_t k = get_int(c, "room") + 1; k < rooms; ++k) {
                if (std::get<std::int64_t>(c.shared(element_name("room_owner", k))) != c.id())
                    continue;
                c.set_local("room", k);
                c.set_local("step", std::int64_t{0});
                c.set_local("loc", std::int64_t{Moving});
                c.do_reach_avoid(point(c, k, 0), c.unsafe());
                return;
            }
            c.set_local("loc", std::int64_t{Finished});
        });

    add(
        "advance",
        false,
        [](const BlockContext& c) { return get_int(c, "loc") == Moving && c.done(); },
        [=](BlockContext& c) {
            const std::int64_t room = get_int(c, "room");
            const std::int64_t step = get_int(c, "step") + 1;
            if (step < size_of(room)) {
                c.set_local("step", step);
                c.do_reach_avoid(point(c, room, step), c.unsafe());
                return;
            }
            c.write_shared(element_name("room_status", room), std::int64_t{1});
            c.set_local("loc", std::int64_t{Assigning});
        });

    add(
        "retry",
        false,
        [](const BlockContext& c) { return get_int(c, "loc") == Moving && c.failed(); },
        [=](BlockContext& c) { c.do_reach_avoid(point(c, get_int(c, "room"), get_int(c, "step")), c.unsafe()); });

    dsl::check_program(*p);
    return p;
}

double polygon_spread(const std::vector<Position3>& pos)
{
    const int n = static_cast<int>(pos.size());
    std::map<int, std::vector<double>> groups;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            groups[std::min(j - i, n - (j - i))].push_back(dist_xy(pos[static_cast<std::size_t>(i)],
                                                                   pos[static_cast<std::size_t>(j)]));
    double worst = 0.0;
    for (const auto& [gap, d] : groups) {
        const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
        double mean = 0.0;
        for (double x : d)
            mean += x;
        mean /= static_cast<double>(d.size());
        if (mean > 0.0)
            worst = std::max(worst, (*hi - *lo) / mean);
    }
    return worst;
}

} // namespace portbot::apps

#include <gtest/gtest.h>

#include <random>

#include "portbot/planner.hpp"
#include "portbot/scenarios.hpp"

using namespace portbot;
using namespace portbot::planner;
using namespace portbot::platform;

namespace {

struct Rig {
    PlatformSpec spec;
    tracker::TrackerGains gains;
    PlanParams params;
};

Rig rig(Kind kind, const Box& bounds = Box{{-4, -4, 0}, {4, 3.5, 0}})
{
    Rig s;
    s.spec = kind == Kind::Quad ? PlatformSpec::quad_defaults() : PlatformSpec::diff_drive_defaults();
    s.gains = tracker::TrackerGains::defaults_for(s.spec);
    Box b = bounds;
    b.min.z = b.max.z = s.spec.operating_altitude();
    s.params = PlanParams::defaults_for(s.spec, b);
    return s;
}

Region box_region(const Box& b)
{
    Region r;
    r.boxes = {b};
    return r;
}

} // namespace

TEST(RrtTree, NearestIsBruteForceMinimum)
{
    RrtTree tree({0, 0, 0}, DiffDriveState{});
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 50; ++i)
        tree.nodes.push_back(RrtNode{{u(g), u(g), 0}, static_cast<std::size_t>(i), DiffDriveState{}, {}});
    EXPECT_TRUE(tree.well_formed());
    for (int k = 0; k < 100; ++k) {
        const Position3 p{u(g), u(g), 0};
        const double got = dist(tree.nodes[tree.nearest(p)].pos, p);
        for (const auto& n : tree.nodes)
            EXPECT_LE(got, dist(n.pos, p));
    }
    const auto path = tree.path_to(10);
    ASSERT_EQ(path.size(), 11u);
    EXPECT_EQ(path.front(), 0u);
    EXPECT_EQ(path.back(), 10u);
}

TEST(RrtTree, WellFormedRejectsForwardParent)
{
    RrtTree tree({0, 0, 0}, DiffDriveState{});
    tree.nodes.push_back(RrtNode{{1, 0, 0}, 2, DiffDriveState{}, {}});
    tree.nodes.push_back(RrtNode{{2, 0, 0}, 1, DiffDriveState{}, {}});
    EXPECT_FALSE(tree.well_formed());
}

// Sample inside the box; the extension halves toward the root until the
// simulated approach keeps the clearance margin.
TEST(Extend, HalvesTowardRootUntilSafe)
{
    const Rig s = rig(Kind::DiffDrive);
    const Box b{{1, -1, -1}, {3, 1, 1}};
    const Region u = box_region(b);
    RrtTree tree({0.8, 0, 0}, DiffDriveState{0.8, 0, 0});
    const auto out = extend(tree, {2, 0, 0}, u, s.spec, s.gains, s.params);
    ASSERT_TRUE(std::holds_alternative<Added>(out));

    // the approach along +x stops once within accept_radius of its goal
    // and never passes it, so a candidate x is safe iff the box stays
    // clear of x - accept_radius by the margin
    Position3 x{2, 0, 0};
    while (b.min.x - (x.x - s.gains.accept_radius) < s.params.clearance_margin)
        x = (Position3{0.8, 0, 0} + x) * 0.5;
    const auto& node = tree.nodes[std::get<Added>(out).index];
    EXPECT_NEAR(node.pos.x, x.x, 1e-12);
    EXPECT_NEAR(node.pos.x, 0.95, 1e-12);
    ASSERT_FALSE(node.edge.empty());
    EXPECT_LT(node.edge.back().x, x.x);
    EXPECT_GE(node.edge.back().x, x.x - s.gains.accept_radius);
    EXPECT_EQ(node.parent, std::optional<std::size_t>{0});
    for (const auto& p : node.edge)
        EXPECT_GE(dist_to_region(p, u).value(), s.params.clearance_margin);
}

TEST(Extend, RejectsSampleCloserThanMinimumStep)
{
    const Rig s = rig(Kind::DiffDrive);
    RrtTree tree({0.8, 0, 0}, DiffDriveState{0.8, 0, 0});
    const auto out = extend(tree, {0.82, 0, 0}, Region{}, s.spec, s.gains, s.params);
    EXPECT_TRUE(std::holds_alternative<Rejected>(out));
    EXPECT_EQ(tree.size(), 1u);
}

TEST(Plan, OpenSpaceConnectsStraightToTarget)
{
    const Rig s = rig(Kind::DiffDrive);
    RngStream rng(1);
    const auto r = plan({0, 0, 0}, DiffDriveState{}, {2, 1, 0}, Region{}, s.spec, s.gains, s.params, rng);
    ASSERT_TRUE(r.found);
    ASSERT_EQ(r.waypoints.size(), 1u);
    EXPECT_EQ(r.waypoints.back(), (Position3{2, 1, 0}));
    EXPECT_FALSE(r.predicted.empty());
}

TEST(Plan, TargetInsideUnsafeFailsImmediately)
{
    const Rig s = rig(Kind::DiffDrive);
    RngStream rng(1);
    const auto r = plan({-2, 0, 0}, DiffDriveState{-2, 0, 0}, {0, 0, 0}, scenarios::wall(), s.spec, s.gains, s.params,
                        rng);
    EXPECT_FALSE(r.found);
    EXPECT_EQ(r.tree_size, 1u);
}

TEST(Plan, EnclosedTargetExhaustsTree)
{
    Rig s = rig(Kind::DiffDrive, Box{{-5, -5, 0}, {5, 5, 0}});
    s.params.max_tree_size = 80;
    const sim::Scenario sc = scenarios::enclosed(Kind::DiffDrive, 1);
    RngStream rng(3);
    const auto r = plan({-2, -2, 0}, DiffDriveState{-2, -2, 0}, {3, 3, 0}, sc.unsafe, s.spec, s.gains, s.params, rng);
    EXPECT_FALSE(r.found);
    EXPECT_EQ(r.tree_size, 80u);
}

// Replaying the returned way-points through the tracker from the start
// state reproduces a safe run that ends on the target.
class PlanAroundWall : public ::testing::TestWithParam<std::tuple<Kind, int>> {};

TEST_P(PlanAroundWall, ReplayIsSafeAndReachesTarget)
{
    const auto [kind, seed] = GetParam();
    const Rig s = rig(kind);
    const Region wall = scenarios::wall();
    const double z = s.spec.operating_altitude();
    const Position3 start{-2, 0, z}, target{2, 0.3, z};
    PlatformState st = initial_state(s.spec, start, 0, kind == Kind::Quad);
    RngStream rng(static_cast<std::uint64_t>(seed));
    const auto r = plan(start, st, target, wall, s.spec, s.gains, s.params, rng);
    ASSERT_TRUE(r.found);
    EXPECT_EQ(r.waypoints.back(), target);
    EXPECT_LE(r.tree_size, s.params.max_tree_size);
    for (const auto& p : r.predicted)
        EXPECT_GE(dist_to_region(p, wall).value(), s.params.clearance_margin);

    for (const auto& wp : r.waypoints) {
        const auto sr = simulate_tracker(st, wp, wall, s.spec, s.gains, s.params.steer_horizon,
                                         s.params.clearance_margin);
        ASSERT_TRUE(sr.safe);
        ASSERT_TRUE(sr.reached);
        st = sr.end;
    }
    EXPECT_LE(dist(position_of(st), target), s.gains.accept_radius);
}

INSTANTIATE_TEST_SUITE_P(Seeds, PlanAroundWall,
                         ::testing::Combine(::testing::Values(Kind::DiffDrive, Kind::Quad), ::testing::Range(1, 6)));

TEST(Plan, SameSeedSamePlan)
{
    const Rig s = rig(Kind::DiffDrive);
    RngStream a(9), b(9);
    const auto ra = plan({-2, 0, 0}, DiffDriveState{-2, 0, 0}, {2, 0.3, 0}, scenarios::wall(), s.spec, s.gains,
                         s.params, a);
    const auto rb = plan({-2, 0, 0}, DiffDriveState{-2, 0, 0}, {2, 0.3, 0}, scenarios::wall(), s.spec, s.gains,
                         s.params, b);
    EXPECT_EQ(ra.waypoints, rb.waypoints);
    EXPECT_EQ(ra.tree_size, rb.tree_size);
}

TEST(Plan, ParamsValidation)
{
    const auto spec = PlatformSpec::diff_drive_defaults();
    auto p = PlanParams::defaults_for(spec, Box{});
    EXPECT_DOUBLE_EQ(p.clearance_margin, 0.1);
    EXPECT_DOUBLE_EQ(p.min_extend_dist, 0.05);
    EXPECT_NO_THROW(p.validate(spec));
    p.goal_radius = 0.05;
    EXPECT_THROW(p.validate(spec), std::invalid_argument);
}

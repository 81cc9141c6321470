#include <gtest/gtest.h>

#include <random>

#include "portbot/apps.hpp"

using namespace portbot;
using namespace portbot::apps;

namespace {

std::vector<Position3> regular(int n, double R, double phase = 0.3, Position3 c = {0.4, -0.2, 1})
{
    std::vector<Position3> p;
    for (int i = 0; i < n; ++i) {
        const double a = phase + 2 * kPi * i / n;
        p.push_back({c.x + R * std::cos(a), c.y + R * std::sin(a), c.z});
    }
    return p;
}

// Robots move to their bisector points one after another, each seeing the
// others' latest positions.
std::vector<Position3> sweep(std::vector<Position3> p, double len)
{
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i)
        p[i] = bisector(p, i, n, len);
    return p;
}

std::vector<Position3> perturbed(std::vector<Position3> p, double eps, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-eps, eps);
    for (auto& q : p) {
        q.x += u(g);
        q.y += u(g);
    }
    return p;
}

} // namespace

TEST(Bisector, GeometricCharacterisation)
{
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 3 + 2 * (trial % 3);
        std::vector<Position3> p;
        for (int k = 0; k < n; ++k)
            p.push_back({u(g), u(g), 0.5});
        const int i = trial % n;
        const double len = 1.0 + 0.01 * (trial % 50);
        const Position3 q = bisector(p, i, n, len);
        const int j = (i + (n - 1) / 2) % n;
        const Position3 a = p[j], b = p[(j + 1) % n];
        const Position3 m = (a + b) * 0.5;
        // on the perpendicular bisector, len from the midpoint
        EXPECT_NEAR(dist_xy(q, a), dist_xy(q, b), 1e-9);
        EXPECT_NEAR(dist_xy(q, m), len, 1e-9);
        // same side of the edge line as robot i (or on it)
        auto side = [&](const Position3& x) { return (b.x - a.x) * (x.y - a.y) - (b.y - a.y) * (x.x - a.x); };
        EXPECT_GE(side(q) * side(p[i]), -1e-12);
        EXPECT_DOUBLE_EQ(q.z, m.z);
    }
}

TEST(Bisector, OppositeEdgeIndexing)
{
    // n = 5: robot 0 faces edge (2, 3); robot 4 faces edge (1, 2)
    const auto p = regular(5, 1.0, 0.0, {0, 0, 0});
    const Position3 q0 = bisector(p, 0, 5, 1.0);
    EXPECT_NEAR(dist_xy(q0, p[2]), dist_xy(q0, p[3]), 1e-12);
    const Position3 q4 = bisector(p, 4, 5, 1.0);
    EXPECT_NEAR(dist_xy(q4, p[1]), dist_xy(q4, p[2]), 1e-12);
}

TEST(Bisector, RejectsBadInput)
{
    const auto p4 = regular(4, 1.0);
    EXPECT_THROW(bisector(p4, 0, 4, 1.0), std::invalid_argument);
    auto p3 = regular(3, 1.0);
    EXPECT_THROW(bisector(p3, 0, 5, 1.0), std::invalid_argument);
    p3[2] = p3[1];
    EXPECT_THROW(bisector(p3, 0, 3, 1.0), DegenerateSegment);
}

// Regular polygon of circumradius R is a fixed point of the bisector map
// exactly when len = R (1 + cos(pi / n)). Solve for R numerically with the
// library's map and compare with the closed form.
TEST(Bisector, FixedPointRadiusMatchesClosedForm)
{
    for (int n : {3, 5, 7, 9}) {
        const double len = 1.5;
        auto residual = [&](double R) {
            const auto p = regular(n, R, 0.0, {0, 0, 0});
            return dist_xy(bisector(p, 0, n, len), {0, 0, 0}) - R;
        };
        double lo = 0.1, hi = 1.5;
        ASSERT_LT(residual(lo) * residual(hi), 0.0);
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (residual(lo) * residual(mid) <= 0 ? hi : lo) = mid;
        }
        const double R = 0.5 * (lo + hi);
        EXPECT_NEAR(R, len / (1 + std::cos(kPi / n)), 1e-6) << n;
        EXPECT_NEAR(equilibrium_len(R, n), len, 1e-6);
        // and every robot is a fixed point there
        const auto p = regular(n, len / (1 + std::cos(kPi / n)), 0.7, {1, 1, 0});
        for (int i = 0; i < n; ++i)
            EXPECT_LT(dist_xy(bisector(p, i, n, len), p[i]), 1e-12);
    }
}

// Around the regular polygon the sequential map contracts for n = 3 and
// expands for n = 5.
TEST(Bisector, LocalStabilityOfTheSynchronousMap)
{
    const double len = 1.5;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto p3 = perturbed(regular(3, len / (1 + std::cos(kPi / 3))), 0.05, seed);
        for (int k = 0; k < 40; ++k)
            p3 = sweep(p3, len);
        EXPECT_LT(polygon_spread(p3), 1e-6);

        auto p5 = perturbed(regular(5, len / (1 + std::cos(kPi / 5))), 1e-4, seed);
        const double before = polygon_spread(p5);
        for (int k = 0; k < 10; ++k)
            p5 = sweep(p5, len);
        EXPECT_GT(polygon_spread(p5), 5 * before);
    }
}

TEST(PolygonSpread, ZeroForRegularAndInvariantUnderRigidMotion)
{
    for (int n : {3, 5, 7})
        EXPECT_LT(polygon_spread(regular(n, 1.3)), 1e-12);
    auto p = perturbed(regular(5, 1.0), 0.1, 3);
    const double s = polygon_spread(p);
    EXPECT_GT(s, 0.01);
    std::vector<Position3> moved;
    const double c = std::cos(0.9), sn = std::sin(0.9);
    for (const auto& q : p)
        moved.push_back({c * q.x - sn * q.y + 3, sn * q.x + c * q.y - 1, q.z + 2});
    EXPECT_NEAR(polygon_spread(moved), s, 1e-12);
}

TEST(PolygonSpread, OrderMatters)
{
    // a regular pentagon listed in star order: gap-1 pairs are the diagonals,
    // still constant, so the spread is zero
    const auto p = regular(5, 1.0);
    std::vector<Position3> star{p[0], p[2], p[4], p[1], p[3]};
    EXPECT_LT(polygon_spread(star), 1e-12);
    // swapping two neighbours breaks the grouping
    std::vector<Position3> swapped{p[0], p[2], p[1], p[3], p[4]};
    EXPECT_GT(polygon_spread(swapped), 0.1);
}

TEST(AppConfigs, Validation)
{
    FormationConfig f;
    EXPECT_NO_THROW(f.validate());
    f.n = 4;
    EXPECT_THROW(f.validate(), std::invalid_argument);

    RaceConfig r;
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r.waypoints = {{0, 0, 0}};
    r.unsafe.boxes = {Box{{-1, -1, -1}, {1, 1, 1}}};
    EXPECT_THROW(r.validate(), std::invalid_argument);

    SearchConfig s;
    s.rooms = {Room{{0, 0, 0}, {{1, 0, 0}, {2, 0, 0}}}, Room{{5, 0, 0}, {}}};
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.flattened().size(), 4u);
    EXPECT_EQ(s.room_sizes(), (std::vector<std::size_t>{3, 1}));
    EXPECT_EQ(s.flattened()[3], (Position3{5, 0, 0}));
}

TEST(BundledPrograms, Build)
{
    EXPECT_NE(formation_program(), nullptr);
    EXPECT_NE(race_program(), nullptr);
    EXPECT_NE(waypoints_program(), nullptr);
    const auto search = search_program({2, 3}, 3.0);
    ASSERT_NE(search, nullptr);
    EXPECT_NE(search->init_block(), nullptr);
    EXPECT_NO_THROW(dsl::check_program(*search));
}

#include "portbot/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace portbot {

std::ostream& operator<<(std::ostream& os, const Position3& p)
{
    return os << '(' << p.x << ", " << p.y << ", " << p.z << ')';
}

bool Box::contains(const Position3& p) const
{
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
}

bool Region::contains(const Position3& p) const
{
    return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains(p); });
}

void validate(const Region& r)
{
    for (const auto& b : r.boxes) {
        if (!b.min.finite() || !b.max.finite())
            throw std::invalid_argument("region '" + r.id + "': box corner not finite");
        if (b.min.x > b.max.x || b.min.y > b.max.y || b.min.z > b.max.z)
            throw std::invalid_argument("region '" + r.id + "': box min exceeds max");
    }
}

double dist(const Position3& a, const Position3& b)
{
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

double dist_xy(const Position3& a, const Position3& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

namespace {

double axis_gap(double v, double lo, double hi)
{
    if (v < lo)
        return lo - v;
    if (v > hi)
        return v - hi;
    return 0.0;
}

} // namespace

Distance dist_to_box(const Position3& p, const Box& b)
{
    return Distance(std::hypot(axis_gap(p.x, b.min.x, b.max.x), axis_gap(p.y, b.min.y, b.max.y),
                               axis_gap(p.z, b.min.z, b.max.z)));
}

Distance dist_to_region(const Position3& p, const Region& r)
{
    Distance best = Distance::infinite();
    for (const auto& b : r.boxes) {
        Distance d = dist_to_box(p, b);
        if (d < best)
            best = d;
    }
    return best;
}

double wrap_angle(double a)
{
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi)
        a += 2.0 * kPi;
    return a;
}

} // namespace portbot

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace portbot {

/// A point in the fixed global frame shared by all robots (meters).
struct Position3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Position3&, const Position3&) = default;

    Position3 operator+(const Position3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Position3 operator-(const Position3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Position3 operator*(double k) const { return {x * k, y * k, z * k}; }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

std::ostream& operator<<(std::ostream& os, const Position3& p);

/// Closed axis-aligned box, min <= max componentwise.
struct Box {
    Position3 min;
    Position3 max;

    friend bool operator==(const Box&, const Box&) = default;

    bool contains(const Position3& p) const;
    Position3 center() const { return (min + max) * 0.5; }
};

/// Union of closed boxes. An empty box list is the empty region.
struct Region {
    std::vector<Box> boxes;
    std::string id;

    friend bool operator==(const Region&, const Region&) = default;

    bool empty() const { return boxes.empty(); }
    bool contains(const Position3& p) const;
};

/// Throws std::invalid_argument unless every box has min <= max and finite corners.
void validate(const Region& r);

using RobotId = std::int32_t;

/// Simulated time in seconds.
using SimTime = double;

/// Distance that may be infinite (distance to the empty region).
class Distance {
public:
    constexpr Distance() = default;
    constexpr explicit Distance(double v) : value_(v), infinite_(false) {}

    static constexpr Distance infinite() {
        Distance d;
        d.infinite_ = true;
        return d;
    }

    constexpr bool is_infinite() const { return infinite_; }

    /// Finite value; infinity for the sentinel.
    constexpr double value() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    friend constexpr bool operator==(const Distance& a, const Distance& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }
    friend constexpr std::partial_ordering operator<=>(const Distance& a, const Distance& b) {
        if (a.infinite_ || b.infinite_) {
            return a.infinite_ == b.infinite_ ? std::partial_ordering::equivalent
                   : a.infinite_              ? std::partial_ordering::greater
                                              : std::partial_ordering::less;
        }
        return a.value_ <=> b.value_;
    }
    friend constexpr bool operator<=(const Distance& a, double b) { return !a.infinite_ && a.value_ <= b; }
    friend constexpr bool operator<(const Distance& a, double b) { return !a.infinite_ && a.value_ < b; }
    friend constexpr bool operator>=(const Distance& a, double b) { return a.infinite_ || a.value_ >= b; }
    friend constexpr bool operator>(const Distance& a, double b) { return a.infinite_ || a.value_ > b; }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

double dist(const Position3& a, const Position3& b);

/// Planar (x, y) distance.
double dist_xy(const Position3& a, const Position3& b);

Distance dist_to_box(const Position3& p, const Box& b);

/// Minimum distance to any box of r; zero inside; infinite for the empty region.
Distance dist_to_region(const Position3& p, const Region& r);

/// Angle wrapped to (-pi, pi].
double wrap_angle(double a);

inline constexpr double kPi = 3.14159265358979323846;

} // namespace portbot

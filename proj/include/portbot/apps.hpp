#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "portbot/dsl.hpp"
#include "portbot/geometry.hpp"

namespace portbot::apps {

class DegenerateSegment : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Point at distance len on the perpendicular bisector (z = 0 plane) of the
/// edge pos[j], pos[(j+1) mod n] opposite robot i, j = (i + (n-1)/2) mod n,
/// on pos[i]'s side of that edge. The result takes the edge midpoint's z.
/// Throws std::invalid_argument for even or too small n, DegenerateSegment
/// if the edge has zero length in the plane.
Position3 bisector(const std::vector<Position3>& pos, RobotId i, int n, double len);

/// Circumradius-to-len relation of the regular n-gon that is a fixed
/// point of the bisector map: len = R (1 + cos(pi / n)).
double equilibrium_len(double circumradius, int n);

struct FormationConfig {
    int n = 3;
    double len = 1.5;
    int waits = 5;
    double tolerance = 0.05; // relative spread of like distances
    void validate() const;
};

struct RaceConfig {
    std::vector<Position3> waypoints;
    Region unsafe;
    void validate() const;
};

struct Room {
    Position3 entrance;
    std::vector<Position3> interior;
};

struct SearchConfig {
    std::vector<Room> rooms;
    Region unsafe;
    double election_timeout = 3.0;
    void validate() const;

    /// Entrance then interior points of every room, in room order.
    std::vector<Position3> flattened() const;
    std::vector<std::size_t> room_sizes() const;
};

/// Source text of the bundled programs (also committed under programs/).
const std::string& formation_source();
const std::string& race_source();
const std::string& waypoints_source();

std::shared_ptr<const dsl::Program> formation_program();
std::shared_ptr<const dsl::Program> race_program();
std::shared_ptr<const dsl::Program> waypoints_program();

/// Search application as native blocks. The robot's waypoint list must be
/// SearchConfig::flattened(); room_sizes splits it back into rooms.
/// Shared state: elect[] (election slots), room_owner[k] written by the
/// leader, room_status[k] set to 1 by the owner once the room is searched.
std::shared_ptr<const dsl::Program> search_program(const std::vector<std::size_t>& room_sizes,
                                                   double election_timeout);

/// Pairwise distances grouped by cyclic index gap; for a regular polygon
/// in id order every group is constant. Returns the worst relative spread
/// (max - min) / mean over the groups.
double polygon_spread(const std::vector<Position3>& pos);

} // namespace portbot::apps

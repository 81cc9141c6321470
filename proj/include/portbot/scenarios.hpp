#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "portbot/sim.hpp"

/// Bundled scenarios used by the demos and the acceptance suite.
namespace portbot::scenarios {

/// Wall and the four targets A..D of the four-waypoint run, in the plane.
Region wall();
std::vector<Position3> four_waypoints();

/// One robot visits A, B, C, D in order around a wall.
sim::Scenario four_waypoint(platform::Kind kind, std::uint64_t seed);

/// Quad ordered to a point near the wall while wind pushes it toward it.
sim::Scenario wind_failure(std::uint64_t seed);

/// Target inside a closed cage; no path exists.
sim::Scenario enclosed(platform::Kind kind, std::uint64_t seed);

/// n robots on a perturbed regular polygon (at most 10% of the
/// circumradius per coordinate) running the formation program.
sim::Scenario formation(platform::Kind kind, int n, std::uint64_t seed);

/// Two robots cover six waypoints with the race program.
sim::Scenario race(platform::Kind kind, std::uint64_t seed);

/// Three robots search three rooms.
sim::Scenario search(platform::Kind kind, std::uint64_t seed);

/// Four stationary robots on a lossy channel; each writes a few shared
/// values during the first seconds and then stops.
sim::Scenario dsm_convergence(std::uint64_t seed);
/// Last time any robot in dsm_convergence writes.
inline constexpr double kDsmWritesEnd = 2.0;

/// Names accepted by demo(): reachavoid, failure, enclosed, formation,
/// formation5, race, search, dsm.
std::vector<std::string> names();
sim::Scenario demo(const std::string& name, platform::Kind kind, std::uint64_t seed);

} // namespace portbot::scenarios

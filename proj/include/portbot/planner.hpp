#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "portbot/geometry.hpp"
#include "portbot/platforms.hpp"
#include "portbot/rng.hpp"
#include "portbot/tracker.hpp"

namespace portbot::planner {

struct PlanParams {
    std::size_t max_tree_size = 500;
    double clearance_margin = 0.1; // m
    double min_extend_dist = 0.05; // m
    double goal_radius = 0.1;      // m, >= q_d
    double goal_bias = 0.1;        // probability of sampling the target
    double steer_horizon = 10.0;   // s of simulated tracking per extension
    Box sample_bounds{{-10, -10, 0}, {10, 10, 0}};

    /// clearance_margin = q_d, min_extend_dist = q_d / 2, goal_radius = q_d.
    static PlanParams defaults_for(const platform::PlatformSpec& spec, const Box& bounds);

    void validate(const platform::PlatformSpec& spec) const;
};

struct RrtNode {
    Position3 pos;
    std::optional<std::size_t> parent;
    platform::PlatformState sim_state;
    /// Simulated positions along the edge from the parent, one per tracker tick.
    std::vector<Position3> edge;
};

struct RrtTree {
    std::vector<RrtNode> nodes;

    explicit RrtTree(const Position3& root, const platform::PlatformState& root_state);

    std::size_t size() const { return nodes.size(); }
    std::size_t nearest(const Position3& p) const;
    /// Node 0 is the only root; parents precede children.
    bool well_formed() const;
    std::vector<std::size_t> path_to(std::size_t index) const;
};

struct Added {
    std::size_t index = 0;
};
struct Rejected {};
using ExtendOutcome = std::variant<Added, Rejected>;

struct SteerResult {
    bool reached = false;
    bool safe = true;
    platform::PlatformState end;
    std::vector<Position3> samples;
};

/// Runs the tracker in closed loop on the platform model from start toward wp.
/// Stops at arrival, at the first integration step closer than margin to
/// unsafe, or at the horizon.
SteerResult simulate_tracker(const platform::PlatformState& start, const Position3& wp, const Region& unsafe,
                             const platform::PlatformSpec& spec, const tracker::TrackerGains& gains, double horizon,
                             double margin);

ExtendOutcome extend(RrtTree& tree, const Position3& sample, const Region& unsafe, const platform::PlatformSpec& spec,
                     const tracker::TrackerGains& gains, const PlanParams& p);

struct PlanResult {
    bool found = false;
    std::vector<Position3> waypoints;
    /// Predicted positions when tracking the way-points, used to detect deviation.
    std::vector<Position3> predicted;
    std::size_t tree_size = 0;
};

PlanResult plan(const Position3& current_pos, const platform::PlatformState& current_state, const Position3& target,
                const Region& unsafe, const platform::PlatformSpec& spec, const tracker::TrackerGains& gains,
                const PlanParams& p, RngStream& rng);

} // namespace portbot::planner

#include "portbot/planner.hpp"

#include <cmath>
#include <stdexcept>

namespace portbot::planner {

using platform::PlatformSpec;
using platform::PlatformState;
using tracker::TrackerGains;

PlanParams PlanParams::defaults_for(const PlatformSpec& spec, const Box& bounds)
{
    PlanParams p;
    p.clearance_margin = spec.quant_dist;
    p.min_extend_dist = spec.quant_dist / 2.0;
    p.goal_radius = spec.quant_dist;
    p.sample_bounds = bounds;
    return p;
}

void PlanParams::validate(const PlatformSpec& spec) const
{
    if (max_tree_size == 0)
        throw std::invalid_argument("planner: max_tree_size must be positive");
    if (!(clearance_margin > 0.0) || !(min_extend_dist > 0.0) || !(steer_horizon > 0.0))
        throw std::invalid_argument("planner: margins and horizon must be positive");
    if (!(goal_radius >= spec.quant_dist))
        throw std::invalid_argument("planner: goal_radius must be at least q_d");
    if (!(goal_bias >= 0.0 && goal_bias <= 1.0))
        throw std::invalid_argument("planner: goal_bias outside [0, 1]");
    const Box& b = sample_bounds;
    if (b.min.x > b.max.x || b.min.y > b.max.y || b.min.z > b.max.z)
        throw std::invalid_argument("planner: sample_bounds min exceeds max");
}

RrtTree::RrtTree(const Position3& root, const PlatformState& root_state)
{
    nodes.push_back(RrtNode{root, std::nullopt, root_state, {}});
}

std::size_t RrtTree::nearest(const Position3& p) const
{
    std::size_t best = 0;
    double best_d = dist(nodes[0].pos, p);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double d = dist(nodes[i].pos, p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

bool RrtTree::well_formed() const
{
    if (nodes.empty() || nodes[0].parent)
        return false;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!nodes[i].parent || *nodes[i].parent >= i)
            return false;
    return true;
}

std::vector<std::size_t> RrtTree::path_to(std::size_t index) const
{
    std::vector<std::size_t> rev;
    for (std::optional<std::size_t> i = index; i; i = nodes[*i].parent)
        rev.push_back(*i);
    return {rev.rbegin(), rev.rend()};
}

SteerResult simulate_tracker(const PlatformState& start, const Position3& wp, const Region& unsafe,
                             const PlatformSpec& spec, const TrackerGains& gains, double horizon, double margin)
{
    SteerResult r;
    r.end = start;
    const auto substeps = static_cast<long>(std::llround(spec.sensor_period / spec.integration_step));
    const auto ticks = static_cast<long>(std::ceil(horizon / spec.sensor_period - 1e-9));

    PlatformState s = start;
    for (long k = 0; k <= ticks; ++k) {
        if (tracker::arrived(s, wp, gains)) {
            r.reached = true;
            break;
        }
        if (k == ticks)
            break;
        const auto cmd = tracker::track_step(s, wp, gains, spec.limits);
        for (long j = 0; j < substeps; ++j) {
            s = platform::step(s, cmd, spec.integration_step, spec);
            if (dist_to_region(platform::position_of(s), unsafe) < margin) {
                r.safe = false;
                r.end = s;
                return r;
            }
        }
        r.samples.push_back(platform::position_of(s));
    }
    r.end = s;
    return r;
}

ExtendOutcome extend(RrtTree& tree, const Position3& sample, const Region& unsafe, const PlatformSpec& spec,
                     const TrackerGains& gains, const PlanParams& p)
{
    const std::size_t near = tree.nearest(sample);
    const Position3 from = tree.nodes[near].pos;
    Position3 x = sample;
    while (dist(from, x) >= p.min_extend_dist) {
        SteerResult sr =
            simulate_tracker(tree.nodes[near].sim_state, x, unsafe, spec, gains, p.steer_horizon, p.clearance_margin);
        if (sr.reached && sr.safe) {
            tree.nodes.push_back(RrtNode{x, near, sr.end, std::move(sr.samples)});
            return Added{tree.nodes.size() - 1};
        }
        x = (from + x) * 0.5;
    }
    return Rejected{};
}

namespace {

Position3 draw_sample(const Box& b, RngStream& rng)
{
    return {rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y), rng.uniform(b.min.z, b.max.z)};
}

PlanResult extract(const RrtTree& tree, std::size_t goal)
{
    PlanResult res;
    res.found = true;
    res.tree_size = tree.size();
    for (std::size_t i : tree.path_to(goal)) {
        if (i == 0)
            continue;
        res.waypoints.push_back(tree.nodes[i].pos);
        const auto& e = tree.nodes[i].edge;
        res.predicted.insert(res.predicted.end(), e.begin(), e.end());
    }
    return res;
}

} // namespace

PlanResult plan(const Position3& current_pos, const PlatformState& current_state, const Position3& target,
                const Region& unsafe, const PlatformSpec& spec, const TrackerGains& gains, const PlanParams& p,
                RngStream& rng)
{
    PlanResult fail;
    if (unsafe.contains(current_pos) || unsafe.contains(target)) {
        fail.tree_size = 1;
        return fail;
    }

    RrtTree tree(current_pos, current_state);
    if (tracker::arrived(current_state, target, gains)) {
        // already there: a single way-point at the target keeps the tracker holding it
        tree.nodes.push_back(RrtNode{target, 0, current_state, {platform::position_of(current_state)}});
        return extract(tree, 1);
    }

    // sample budget bounds the loop when every extension is rejected
    const std::size_t max_samples = 20 * p.max_tree_size;
    for (std::size_t n = 0; n < max_samples && tree.size() < p.max_tree_size; ++n) {
        // the straight connection is always tried first
        const bool to_goal = rng.bernoulli(p.goal_bias) || n == 0;
        const Position3 sample = to_goal ? target : draw_sample(p.sample_bounds, rng);
        const auto out = extend(tree, sample, unsafe, spec, gains, p);
        const auto* added = std::get_if<Added>(&out);
        if (!added)
            continue;
        const RrtNode& node = tree.nodes[added->index];
        if (dist(node.pos, target) > p.goal_radius)
            continue;
        if (node.pos == target)
            return extract(tree, added->index);

        // close enough: connect the last stretch exactly so the tracker ends on the target
        SteerResult sr =
            simulate_tracker(node.sim_state, target, unsafe, spec, gains, p.steer_horizon, p.clearance_margin);
        if (sr.reached && sr.safe) {
            tree.nodes.push_back(RrtNode{target, added->index, sr.end, std::move(sr.samples)});
            return extract(tree, tree.size() - 1);
        }
    }
    fail.tree_size = tree.size();
    return fail;
}

} // namespace portbot::planner

#pragma once

#include <array>
#include <string>
#include <vector>

#include "portbot/monitor.hpp"
#include "portbot/trace.hpp"

// Brute-force evaluation of the reach-avoid conditions by direct
// quantification over the sampled grid. Deliberately naive and separate
// from the monitor implementation.
namespace oracle {

struct EpochResult {
    portbot::RobotId robot = 0;
    std::uint64_t epoch = 0;
    std::array<portbot::monitor::Status, 5> status{};
};

std::vector<EpochResult> evaluate(const portbot::trace::Trace& tr);

} // namespace oracle

namespace micro {

struct Case {
    std::string name;
    portbot::trace::Trace trace;
};

/// Hand-built traces, including minimal satisfying and violating cases of
/// every condition.
std::vector<Case> cases();

/// Random small trace for property comparisons.
portbot::trace::Trace random_trace(std::uint64_t seed);

} // namespace micro

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "portbot/dsl.hpp"
#include "portbot/dsm.hpp"
#include "portbot/geometry.hpp"
#include "portbot/rng.hpp"
#include "portbot/value.hpp"

namespace portbot::app {

/// Out-of-bounds index, type mismatch, read of an unset variable, or any
/// other error raised while evaluating a block. Halts the robot's app.
class RuntimeFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The control API as seen by an application.
class ControlPort {
public:
    virtual ~ControlPort() = default;
    virtual Position3 current_pos() const = 0;
    virtual bool active() const = 0;
    virtual bool done() const = 0;
    virtual bool failed() const = 0;
    virtual void do_reach_avoid(const Position3& x, const Region& u) = 0;
};

struct AppEnv {
    RobotId self = 0;
    int num_bots = 1;
    std::vector<Position3> waypoints;
    Region unsafe;
    std::map<std::string, Value> params; // overrides for param declarations
    int fairness_skips = 8;              // K: forced run after K skips while enabled
};

/// Name of the DSM variable backing element i of a shared array.
std::string element_name(const std::string& array, std::int64_t i);

/// Transactional view handed to a block. Reads see the block's own earlier
/// writes; nothing reaches the replica or the controller until the block
/// completes without a fault.
class BlockContext {
public:
    RobotId id() const { return env_.self; }
    int num_bots() const { return env_.num_bots; }
    Position3 pos() const;
    bool active() const;
    bool done() const;
    bool failed() const;
    const std::vector<Position3>& waypoints() const { return env_.waypoints; }
    const Region& unsafe() const { return env_.unsafe; }
    SimTime now() const { return now_; }

    /// Locals and params. Throws RuntimeFault on unknown names or unset reads.
    const Value& local(const std::string& name) const;
    void set_local(const std::string& name, Value v);

    /// Shared variables by DSM name (arrays: element_name).
    const Value& shared(const std::string& name) const;
    bool shared_set(const std::string& name) const;
    void write_shared(const std::string& name, Value v);
    /// Number of slots of a shared array.
    std::int64_t array_size(const std::string& array) const;

    void do_reach_avoid(const Position3& x, const Region& u);

private:
    friend class AppInstance;
    struct Effect {
        enum class Kind { Write, ReachAvoid } kind;
        std::string name;
        Value value;
        Position3 x;
        Region u;
    };

    BlockContext(const AppEnv& env, const ControlPort* port, const dsm::DsmReplica& replica,
                 std::map<std::string, Value> locals, const std::map<std::string, std::int64_t>& sizes,
                 const std::map<std::string, dsl::TypeName>& types, SimTime now)
        : env_(env), port_(port), replica_(replica), locals_(std::move(locals)), sizes_(sizes), types_(types), now_(now)
    {
    }

    Value coerce(const std::string& name, Value v) const;
    const ControlPort& port() const;

    const AppEnv& env_;
    const ControlPort* port_;
    const dsm::DsmReplica& replica_;
    std::map<std::string, Value> locals_;
    std::map<std::string, Value> pending_;
    const std::map<std::string, std::int64_t>& sizes_;
    const std::map<std::string, dsl::TypeName>& types_;
    std::vector<Effect> effects_;
    SimTime now_;
};

struct StepResult {
    std::optional<std::string> block; // executed block
    std::optional<std::string> fault; // set when this step halted the app
    std::vector<dsm::Outgoing> messages;
    std::vector<dsm::DsmUpdate> writes; // committed shared writes, in order
};

/// One robot's running application. Declares the program's shared
/// variables on the replica at construction.
class AppInstance {
public:
    AppInstance(std::shared_ptr<const dsl::Program> program, AppEnv env, dsm::DsmReplica& replica,
                RngStream tiebreak);

    /// Runs the init block on the first call, afterwards one enabled block
    /// chosen by priority, then seeded tie-break, with a round-robin
    /// override for blocks skipped K times in a row.
    StepResult step(ControlPort& port, SimTime now);

    bool halted() const { return halted_; }
    const std::optional<std::string>& fault() const { return fault_; }
    const std::map<std::string, Value>& locals() const { return locals_; }
    const dsl::Program& program() const { return *program_; }
    std::uint64_t block_runs(const std::string& name) const;

private:
    BlockContext context(const ControlPort* port, SimTime now) const;
    StepResult commit(BlockContext& ctx, ControlPort& port, const std::string& block, SimTime now);
    bool enabled(const dsl::Block& b, const BlockContext& ctx) const;
    void run_eff(const dsl::Block& b, BlockContext& ctx) const;
    StepResult halt(const std::string& why);

    std::shared_ptr<const dsl::Program> program_;
    AppEnv env_;
    dsm::DsmReplica& replica_;
    RngStream rng_;
    std::map<std::string, Value> locals_;
    std::map<std::string, std::int64_t> sizes_;
    std::map<std::string, dsl::TypeName> types_;
    std::vector<int> skips_;
    std::map<std::string, std::uint64_t> runs_;
    bool initialized_ = false;
    bool halted_ = false;
    std::optional<std::string> fault_;
};

class ElectionTimeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Max-id leader election over a sharedsw slot array. Every participant
/// writes its own id to slot[id]; the leader is the largest id observed
/// once all slots are populated, or once the timeout expires with at
/// least min_observed slots populated.
class LeaderElection {
public:
    LeaderElection(std::string slot, int participants, double timeout, int min_observed = 1);

    void declare(dsm::DsmReplica& replica) const;
    std::vector<dsm::Outgoing> announce(dsm::DsmReplica& replica, SimTime now);
    /// nullopt while still waiting. Throws ElectionTimeout.
    std::optional<RobotId> poll(const dsm::DsmReplica& replica, SimTime now) const;

    const std::string& slot() const { return slot_; }

private:
    std::string slot_;
    int participants_;
    double timeout_;
    int min_observed_;
    std::optional<SimTime> started_;
};

/// Largest id among populated slots, if all are populated or
/// timed_out is set and at least min_observed are. Throws ElectionTimeout
/// when timed out with too few observations.
std::optional<RobotId> elect_leader(const dsm::DsmReplica& replica, const std::string& slot, int participants,
                                    bool timed_out, int min_observed = 1);

} // namespace portbot::app

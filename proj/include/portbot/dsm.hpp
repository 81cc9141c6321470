#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "portbot/geometry.hpp"
#include "portbot/rng.hpp"
#include "portbot/value.hpp"

namespace portbot::dsm {

/// Writer id for variables any participant may write (last writer wins).
inline constexpr RobotId kMultiWriter = -1;

/// Lexicographic (time, seq, id). seq separates successive writes that
/// land on the same simulated instant.
struct Timestamp {
    SimTime time = -1.0;
    std::uint64_t seq = 0;
    RobotId id = -1;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
    friend bool operator==(const Timestamp&, const Timestamp&) = default;

    bool initial() const { return id < 0; }
};

struct SharedVarDecl {
    std::string name;
    RobotId writer = kMultiWriter;
    Value initial;

    bool multi() const { return writer == kMultiWriter; }
};

struct DsmUpdate {
    std::string name;
    Value value;
    Timestamp timestamp;
    RobotId origin = 0;

    friend bool operator==(const DsmUpdate&, const DsmUpdate&) = default;
};

struct Outgoing {
    RobotId to = 0;
    DsmUpdate update;
};

struct ChannelModel {
    double min_delay = 0.005;
    double max_delay = 0.02;
    double loss_prob = 0.0;
    double rebroadcast_period = 0.5;

    /// Throws std::invalid_argument on a violated range.
    void validate() const;
};

class WriteByNonWriter : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownVariable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One robot's copy of the shared variables.
class DsmReplica {
public:
    struct Entry {
        SharedVarDecl decl;
        Value value;
        Timestamp timestamp;
    };

    DsmReplica(RobotId self, int participants, double rebroadcast_period);

    void declare(const SharedVarDecl& decl);
    bool declared(const std::string& name) const { return vars_.count(name) != 0; }

    const Value& read(const std::string& name) const;
    const Timestamp& timestamp(const std::string& name) const;
    const std::map<std::string, Entry>& entries() const { return vars_; }

    /// Local write; returns one update per other participant.
    std::vector<Outgoing> write(const std::string& name, Value v, SimTime now);

    /// Last-writer-wins merge. Returns true iff the replica changed.
    bool deliver(const DsmUpdate& u);

    /// Re-emits owned (or last-authored, for multi-writer) variables once per period.
    std::vector<Outgoing> tick_rebroadcast(SimTime now);

    RobotId self() const { return self_; }
    int participants() const { return participants_; }

private:
    Entry& entry(const std::string& name);
    const Entry& entry(const std::string& name) const;
    std::vector<Outgoing> fan_out(const DsmUpdate& u) const;

    RobotId self_;
    int participants_;
    double rebroadcast_period_;
    std::optional<SimTime> last_rebroadcast_;
    std::map<std::string, Entry> vars_;
};

struct Delivery {
    SimTime time = 0.0;
    RobotId to = 0;
    DsmUpdate update;
};

/// Lossy delayed point-to-point channel. Delay is uniform in
/// [min_delay, max_delay] per message; ties deliver in send order.
class Channel {
public:
    Channel(ChannelModel model, RngStream rng);

    void send(const Outgoing& msg, SimTime now);
    void send(const std::vector<Outgoing>& msgs, SimTime now);

    /// Removes and returns every message scheduled at or before now.
    std::vector<Delivery> pop_due(SimTime now);

    std::size_t in_flight() const { return queue_.size(); }
    std::uint64_t sent() const { return sent_; }
    std::uint64_t dropped() const { return dropped_; }
    const ChannelModel& model() const { return model_; }

private:
    struct Pending {
        Delivery delivery;
        std::uint64_t order;
        bool operator>(const Pending& o) const
        {
            return delivery.time != o.delivery.time ? delivery.time > o.delivery.time : order > o.order;
        }
    };

    ChannelModel model_;
    RngStream rng_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
    std::uint64_t next_order_ = 0;
    std::uint64_t sent_ = 0;
    std::uint64_t dropped_ = 0;
};

} // namespace portbot::dsm

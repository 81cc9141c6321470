#include "portbot/dsm.hpp"

namespace portbot::dsm {

namespace {
constexpr double kTimeEps = 1e-9;
}

void ChannelModel::validate() const
{
    if (!(min_delay >= 0.0) || !(max_delay >= min_delay))
        throw std::invalid_argument("channel: require 0 <= min_delay <= max_delay");
    if (!(loss_prob >= 0.0) || !(loss_prob < 1.0))
        throw std::invalid_argument("channel: require 0 <= loss_prob < 1");
    if (!(rebroadcast_period > 0.0))
        throw std::invalid_argument("channel: rebroadcast_period must be positive");
}

DsmReplica::DsmReplica(RobotId self, int participants, double rebroadcast_period)
    : self_(self), participants_(participants), rebroadcast_period_(rebroadcast_period)
{
    if (participants <= 0 || self < 0 || self >= participants)
        throw std::invalid_argument("dsm: replica id outside participant range");
}

void DsmReplica::declare(const SharedVarDecl& decl)
{
    if (!decl.multi() && (decl.writer < 0 || decl.writer >= participants_))
        throw std::invalid_argument("dsm: writer of '" + decl.name + "' is not a participant");
    vars_[decl.name] = Entry{decl, decl.initial, Timestamp{}};
}

DsmReplica::Entry& DsmReplica::entry(const std::string& name)
{
    auto it = vars_.find(name);
    if (it == vars_.end())
        throw UnknownVariable("dsm: unknown shared variable '" + name + "'");
    return it->second;
}

const DsmReplica::Entry& DsmReplica::entry(const std::string& name) const
{
    auto it = vars_.find(name);
    if (it == vars_.end())
        throw UnknownVariable("dsm: unknown shared variable '" + name + "'");
    return it->second;
}

const Value& DsmReplica::read(const std::string& name) const { return entry(name).value; }

const Timestamp& DsmReplica::timestamp(const std::string& name) const { return entry(name).timestamp; }

std::vector<Outgoing> DsmReplica::fan_out(const DsmUpdate& u) const
{
    std::vector<Outgoing> out;
    out.reserve(static_cast<std::size_t>(participants_ > 0 ? participants_ - 1 : 0));
    for (RobotId r = 0; r < participants_; ++r)
        if (r != self_)
            out.push_back(Outgoing{r, u});
    return out;
}

std::vector<Outgoing> DsmReplica::write(const std::string& name, Value v, SimTime now)
{
    Entry& e = entry(name);
    if (!e.decl.multi() && e.decl.writer != self_)
        throw WriteByNonWriter("dsm: robot " + std::to_string(self_) + " wrote '" + name + "' owned by robot " +
                               std::to_string(e.decl.writer));

    Timestamp ts{now, 0, self_};
    if (!e.timestamp.initial() && e.timestamp.time >= now) {
        ts.time = e.timestamp.time;
        ts.seq = e.timestamp.seq + 1;
    }
    e.value = std::move(v);
    e.timestamp = ts;
    return fan_out(DsmUpdate{name, e.value, ts, self_});
}

bool DsmReplica::deliver(const DsmUpdate& u)
{
    Entry& e = entry(u.name);
    if (!(u.timestamp > e.timestamp))
        return false;
    e.value = u.value;
    e.timestamp = u.timestamp;
    return true;
}

std::vector<Outgoing> DsmReplica::tick_rebroadcast(SimTime now)
{
    if (last_rebroadcast_ && now - *last_rebroadcast_ < rebroadcast_period_ - kTimeEps)
        return {};
    last_rebroadcast_ = now;

    std::vector<Outgoing> out;
    for (const auto& [name, e] : vars_) {
        if (e.timestamp.initial())
            continue;
        const bool owner = e.decl.multi() ? e.timestamp.id == self_ : e.decl.writer == self_;
        if (!owner)
            continue;
        auto msgs = fan_out(DsmUpdate{name, e.value, e.timestamp, self_});
        out.insert(out.end(), msgs.begin(), msgs.end());
    }
    return out;
}

Channel::Channel(ChannelModel model, RngStream rng) : model_(model), rng_(std::move(rng))
{
    model_.validate();
}

void Channel::send(const Outgoing& msg, SimTime now)
{
    ++sent_;
    // both draws happen for every message so the stream position does not depend on loss outcomes
    const bool lost = rng_.bernoulli(model_.loss_prob);
    const double delay = rng_.uniform(model_.min_delay, model_.max_delay);
    if (lost) {
        ++dropped_;
        return;
    }
    queue_.push(Pending{Delivery{now + delay, msg.to, msg.update}, next_order_++});
}

void Channel::send(const std::vector<Outgoing>& msgs, SimTime now)
{
    for (const auto& m : msgs)
        send(m, now);
}

std::vector<Delivery> Channel::pop_due(SimTime now)
{
    std::vector<Delivery> due;
    while (!queue_.empty() && queue_.top().delivery.time <= now + kTimeEps) {
        due.push_back(queue_.top().delivery);
        queue_.pop();
    }
    return due;
}

} // namespace portbot::dsm

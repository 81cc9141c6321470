#include "portbot/app_runtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "portbot/apps.hpp"

namespace portbot::app {

using dsl::Decl;
using dsl::Expr;
using dsl::Stmt;
using dsl::Storage;
using dsl::TypeName;

namespace {

constexpr double kTimeEps = 1e-9;

std::string base_name(const std::string& name)
{
    const auto p = name.find('[');
    return p == std::string::npos ? name : name.substr(0, p);
}

bool matches(TypeName t, const Value& v)
{
    switch (t) {
    case TypeName::Int: return std::holds_alternative<std::int64_t>(v);
    case TypeName::Real: return std::holds_alternative<double>(v);
    case TypeName::Bool: return std::holds_alternative<bool>(v);
    case TypeName::Pos: return std::holds_alternative<Position3>(v);
    case TypeName::Region: return std::holds_alternative<Region>(v);
    }
    return false;
}

Value default_value(TypeName t)
{
    switch (t) {
    case TypeName::Int: return std::int64_t{0};
    case TypeName::Real: return 0.0;
    case TypeName::Bool: return false;
    case TypeName::Pos: return Position3{};
    case TypeName::Region: return Region{};
    }
    return {};
}

std::string where(const Expr& e) { return std::to_string(e.loc.line) + ":" + std::to_string(e.loc.col) + ": "; }

/// Tree-walking evaluator for one block execution.
class Interp {
public:
    Interp(const dsl::Program& p, BlockContext& ctx) : p_(p), ctx_(ctx) {}

    Value eval(const Expr& e) const
    {
        switch (e.kind) {
        case Expr::Kind::IntLit: return e.int_value;
        case Expr::Kind::RealLit: return e.real_value;
        case Expr::Kind::BoolLit: return e.bool_value;
        case Expr::Kind::Empty: return Region{};
        case Expr::Kind::Flag:
            return e.name == "active" ? ctx_.active() : e.name == "done" ? ctx_.done() : ctx_.failed();
        case Expr::Kind::Var: {
            const Decl& d = decl(e.name, e);
            if (d.storage == Storage::Local || d.storage == Storage::Param)
                return ctx_.local(e.name);
            return ctx_.shared(e.name);
        }
        case Expr::Kind::Index: return ctx_.shared(element(e.name, e.args[0]));
        case Expr::Kind::Member: {
            const Position3 p = as_pos(eval(e.args[0]), e);
            return e.name == "x" ? p.x : e.name == "y" ? p.y : p.z;
        }
        case Expr::Kind::Unary: return unary(e);
        case Expr::Kind::Binary: return binary(e);
        case Expr::Kind::Call: return call(e);
        }
        throw RuntimeFault(where(e) + "bad expression");
    }

    void exec(const std::vector<Stmt>& body)
    {
        for (const auto& s : body) {
            switch (s.kind) {
            case Stmt::Kind::Assign: {
                const Decl& d = decl(s.target.name, s.expr);
                Value v = eval(s.expr);
                if (d.storage == Storage::Local)
                    ctx_.set_local(d.name, std::move(v));
                else if (d.array)
                    ctx_.write_shared(element(d.name, *s.target.index), std::move(v));
                else
                    ctx_.write_shared(d.name, std::move(v));
                break;
            }
            case Stmt::Kind::If:
                if (as_bool(eval(s.expr), s.expr))
                    exec(s.then_body);
                else
                    exec(s.else_body);
                break;
            case Stmt::Kind::Call:
                if (s.expr.name == "doReachAvoid") {
                    const Position3 x = as_pos(eval(s.expr.args[0]), s.expr.args[0]);
                    const Value u = eval(s.expr.args[1]);
                    if (!std::holds_alternative<Region>(u))
                        throw RuntimeFault(where(s.expr) + "doReachAvoid expects a region, got " +
                                           type_name(type_of(u)));
                    ctx_.do_reach_avoid(x, std::get<Region>(u));
                } else {
                    eval(s.expr);
                }
                break;
            }
        }
    }

private:
    const Decl& decl(const std::string& name, const Expr& at) const
    {
        const Decl* d = p_.find_decl(name);
        if (!d)
            throw RuntimeFault(where(at) + "undeclared '" + name + "'");
        return *d;
    }

    std::string element(const std::string& array, const Expr& index) const
    {
        const std::int64_t i = as_int(eval(index), index);
        const std::int64_t n = ctx_.array_size(array);
        if (i < 0 || i >= n)
            throw RuntimeFault(where(index) + "index " + std::to_string(i) + " out of bounds for '" + array +
                               "' of size " + std::to_string(n));
        return element_name(array, i);
    }

    static bool as_bool(const Value& v, const Expr& at)
    {
        if (const auto* b = std::get_if<bool>(&v))
            return *b;
        throw RuntimeFault(where(at) + "expected bool, got " + type_name(type_of(v)));
    }

    static std::int64_t as_int(const Value& v, const Expr& at)
    {
        if (const auto* i = std::get_if<std::int64_t>(&v))
            return *i;
        throw RuntimeFault(where(at) + "expected int, got " + type_name(type_of(v)));
    }

    static double as_real(const Value& v, const Expr& at)
    {
        if (const auto* i = std::get_if<std::int64_t>(&v))
            return static_cast<double>(*i);
        if (const auto* d = std::get_if<double>(&v))
            return *d;
        throw RuntimeFault(where(at) + "expected a number, got " + type_name(type_of(v)));
    }

    static Position3 as_pos(const Value& v, const Expr& at)
    {
        if (const auto* p = std::get_if<Position3>(&v))
            return *p;
        throw RuntimeFault(where(at) + "expected position, got " + type_name(type_of(v)));
    }

    static bool is_num(const Value& v)
    {
        return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
    }

    static Value checked_real(double r, const Expr& at)
    {
        if (!std::isfinite(r))
            throw RuntimeFault(where(at) + "arithmetic produced a non-finite value");
        return r;
    }

    Value unary(const Expr& e) const
    {
        const Value v = eval(e.args[0]);
        if (e.name == "!")
            return !as_bool(v, e);
        if (const auto* i = std::get_if<std::int64_t>(&v)) {
            if (*i == std::numeric_limits<std::int64_t>::min())
                throw RuntimeFault(where(e) + "integer overflow");
            return -*i;
        }
        if (const auto* d = std::get_if<double>(&v))
            return -*d;
        if (const auto* p = std::get_if<Position3>(&v))
            return *p * -1.0;
        throw RuntimeFault(where(e) + "cannot negate " + type_name(type_of(v)));
    }

    Value binary(const Expr& e) const
    {
        const std::string& op = e.name;
        if (op == "&&" || op == "||") {
            const bool lhs = as_bool(eval(e.args[0]), e.args[0]);
            if (op == "&&" ? !lhs : lhs)
                return lhs;
            return as_bool(eval(e.args[1]), e.args[1]);
        }
        const Value a = eval(e.args[0]);
        const Value b = eval(e.args[1]);

        if (op == "==" || op == "!=") {
            bool eq;
            if (is_num(a) && is_num(b))
                eq = std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)
                         ? std::get<std::int64_t>(a) == std::get<std::int64_t>(b)
                         : as_real(a, e) == as_real(b, e);
            else if (a.index() == b.index())
                eq = a == b;
            else
                throw RuntimeFault(where(e) + "cannot compare " + type_name(type_of(a)) + " with " +
                                   type_name(type_of(b)));
            return op == "==" ? eq : !eq;
        }
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
            if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
                const auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
                return op == "<" ? x < y : op == "<=" ? x <= y : op == ">" ? x > y : x >= y;
            }
            const double x = as_real(a, e.args[0]), y = as_real(b, e.args[1]);
            return op == "<" ? x < y : op == "<=" ? x <= y : op == ">" ? x > y : x >= y;
        }

        const auto* pa = std::get_if<Position3>(&a);
        const auto* pb = std::get_if<Position3>(&b);
        if (pa || pb) {
            if (pa && pb && (op == "+" || op == "-"))
                return op == "+" ? *pa + *pb : *pa - *pb;
            if (op == "*" && pa && is_num(b))
                return *pa * as_real(b, e);
            if (op == "*" && pb && is_num(a))
                return *pb * as_real(a, e);
            if (op == "/" && pa && is_num(b)) {
                const double d = as_real(b, e);
                if (d == 0.0)
                    throw RuntimeFault(where(e) + "division by zero");
                return *pa * (1.0 / d);
            }
            throw RuntimeFault(where(e) + "operator " + op + " not defined for " + type_name(type_of(a)) + " and " +
                               type_name(type_of(b)));
        }

        if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
            const auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
            std::int64_t r = 0;
            bool overflow = false;
            if (op == "+")
                overflow = __builtin_add_overflow(x, y, &r);
            else if (op == "-")
                overflow = __builtin_sub_overflow(x, y, &r);
            else if (op == "*")
                overflow = __builtin_mul_overflow(x, y, &r);
            else {
                if (y == 0)
                    throw RuntimeFault(where(e) + "division by zero");
                if (x == std::numeric_limits<std::int64_t>::min() && y == -1)
                    overflow = true;
                else
                    r = op == "/" ? x / y : x % y;
            }
            if (overflow)
                throw RuntimeFault(where(e) + "integer overflow");
            return r;
        }
        const double x = as_real(a, e.args[0]), y = as_real(b, e.args[1]);
        if (op == "%")
            throw RuntimeFault(where(e) + "% needs integer operands");
        if (op == "/" && y == 0.0)
            throw RuntimeFault(where(e) + "division by zero");
        return checked_real(op == "+" ? x + y : op == "-" ? x - y : op == "*" ? x * y : x / y, e);
    }

    std::vector<Position3> gather(const std::string& array, const Expr& at) const
    {
        std::vector<Position3> out;
        const std::int64_t n = ctx_.array_size(array);
        for (std::int64_t i = 0; i < n; ++i) {
            const std::string el = element_name(array, i);
            if (!ctx_.shared_set(el))
                throw RuntimeFault(where(at) + "'" + el + "' has not been written yet");
            out.push_back(as_pos(ctx_.shared(el), at));
        }
        return out;
    }

    Value call(const Expr& e) const
    {
        const std::string& f = e.name;
        auto arg = [&](std::size_t i) { return eval(e.args[i]); };
        if (f == "getId")
            return std::int64_t{ctx_.id()};
        if (f == "numBots")
            return std::int64_t{ctx_.num_bots()};
        if (f == "getPos")
            return ctx_.pos();
        if (f == "point")
            return Position3{as_real(arg(0), e.args[0]), as_real(arg(1), e.args[1]), as_real(arg(2), e.args[2])};
        if (f == "dist")
            return dist(as_pos(arg(0), e.args[0]), as_pos(arg(1), e.args[1]));
        if (f == "max" || f == "min") {
            const Value a = arg(0), b = arg(1);
            if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
                return f == "max" ? std::max(std::get<std::int64_t>(a), std::get<std::int64_t>(b))
                                  : std::min(std::get<std::int64_t>(a), std::get<std::int64_t>(b));
            const double x = as_real(a, e.args[0]), y = as_real(b, e.args[1]);
            return f == "max" ? std::max(x, y) : std::min(x, y);
        }
        if (f == "abs") {
            const Value a = arg(0);
            if (const auto* i = std::get_if<std::int64_t>(&a)) {
                if (*i == std::numeric_limits<std::int64_t>::min())
                    throw RuntimeFault(where(e) + "integer overflow");
                return *i < 0 ? -*i : *i;
            }
            return std::fabs(as_real(a, e.args[0]));
        }
        if (f == "sqrt") {
            const double x = as_real(arg(0), e.args[0]);
            if (x < 0.0)
                throw RuntimeFault(where(e) + "sqrt of a negative number");
            return std::sqrt(x);
        }
        if (f == "waypoint") {
            const std::int64_t i = as_int(arg(0), e.args[0]);
            const auto& w = ctx_.waypoints();
            if (i < 0 || i >= static_cast<std::int64_t>(w.size()))
                throw RuntimeFault(where(e) + "waypoint index " + std::to_string(i) + " out of bounds");
            return w[static_cast<std::size_t>(i)];
        }
        if (f == "numWaypoints")
            return static_cast<std::int64_t>(ctx_.waypoints().size());
        if (f == "unsafe")
            return ctx_.unsafe();
        if (f == "isSet") {
            const Expr& a = e.args[0];
            const Decl& d = decl(a.name, a);
            if (d.storage == Storage::Local || d.storage == Storage::Param)
                return true;
            if (a.kind == Expr::Kind::Index)
                return ctx_.shared_set(element(a.name, a.args[0]));
            if (!d.array)
                return ctx_.shared_set(d.name);
            for (std::int64_t i = 0; i < ctx_.array_size(d.name); ++i)
                if (!ctx_.shared_set(element_name(d.name, i)))
                    return false;
            return true;
        }
        if (f == "bisector") {
            const std::vector<Position3> pos = gather(e.args[0].name, e);
            const std::int64_t i = as_int(arg(1), e.args[1]);
            const std::int64_t n = as_int(arg(2), e.args[2]);
            const double len = as_real(arg(3), e.args[3]);
            if (n != static_cast<std::int64_t>(pos.size()) || i < 0 || i >= n)
                throw RuntimeFault(where(e) + "bisector: index/count do not match the array");
            try {
                return apps::bisector(pos, static_cast<RobotId>(i), static_cast<int>(n), len);
            } catch (const apps::DegenerateSegment&) {
                return pos[static_cast<std::size_t>(i)];
            } catch (const std::invalid_argument& ex) {
                throw RuntimeFault(where(e) + ex.what());
            }
        }
        throw RuntimeFault(where(e) + "'" + f + "' cannot be evaluated here");
    }

    const dsl::Program& p_;
    BlockContext& ctx_;
};

} // namespace

std::string element_name(const std::string& array, std::int64_t i) { return array + "[" + std::to_string(i) + "]"; }

// ---------------------------------------------------------------- BlockContext

const ControlPort& BlockContext::port() const
{
    if (!port_)
        throw RuntimeFault("robot state is not available in declarations");
    return *port_;
}

Position3 BlockContext::pos() const { return port().current_pos(); }
bool BlockContext::active() const { return port().active(); }
bool BlockContext::done() const { return port().done(); }
bool BlockContext::failed() const { return port().failed(); }

const Value& BlockContext::local(const std::string& name) const
{
    const auto it = locals_.find(name);
    if (it == locals_.end())
        throw RuntimeFault("unknown local '" + name + "'");
    if (std::holds_alternative<std::monostate>(it->second))
        throw RuntimeFault("read of unset local '" + name + "'");
    return it->second;
}

Value BlockContext::coerce(const std::string& name, Value v) const
{
    const auto it = types_.find(base_name(name));
    if (it == types_.end())
        throw RuntimeFault("unknown variable '" + name + "'");
    if (it->second == TypeName::Real && std::holds_alternative<std::int64_t>(v))
        v = static_cast<double>(std::get<std::int64_t>(v));
    if (!matches(it->second, v))
        throw RuntimeFault("type mismatch: '" + name + "' is " + dsl::to_string(it->second) + ", assigned " +
                           type_name(type_of(v)));
    return v;
}

void BlockContext::set_local(const std::string& name, Value v)
{
    auto it = locals_.find(name);
    if (it == locals_.end())
        throw RuntimeFault("unknown local '" + name + "'");
    it->second = coerce(name, std::move(v));
}

const Value& BlockContext::shared(const std::string& name) const
{
    if (const auto it = pending_.find(name); it != pending_.end())
        return it->second;
    if (!replica_.declared(name))
        throw RuntimeFault("unknown shared variable '" + name + "'");
    const Value& v = replica_.read(name);
    if (std::holds_alternative<std::monostate>(v))
        throw RuntimeFault("read of unset shared variable '" + name + "'");
    return v;
}

bool BlockContext::shared_set(const std::string& name) const
{
    if (pending_.count(name))
        return true;
    if (!replica_.declared(name))
        throw RuntimeFault("unknown shared variable '" + name + "'");
    return !std::holds_alternative<std::monostate>(replica_.read(name));
}

void BlockContext::write_shared(const std::string& name, Value v)
{
    if (!replica_.declared(name))
        throw RuntimeFault("unknown shared variable '" + name + "'");
    const auto& decl = replica_.entries().at(name).decl;
    if (!decl.multi() && decl.writer != env_.self)
        throw RuntimeFault("robot " + std::to_string(env_.self) + " may not write '" + name + "'");
    v = coerce(name, std::move(v));
    pending_[name] = v;
    effects_.push_back(Effect{Effect::Kind::Write, name, std::move(v), {}, {}});
}

std::int64_t BlockContext::array_size(const std::string& array) const
{
    const auto it = sizes_.find(array);
    if (it == sizes_.end())
        throw RuntimeFault("'" + array + "' is not a shared array");
    return it->second;
}

void BlockContext::do_reach_avoid(const Position3& x, const Region& u)
{
    if (!x.finite())
        throw RuntimeFault("doReachAvoid target is not finite");
    effects_.push_back(Effect{Effect::Kind::ReachAvoid, {}, {}, x, u});
}

// ---------------------------------------------------------------- AppInstance

AppInstance::AppInstance(std::shared_ptr<const dsl::Program> program, AppEnv env, dsm::DsmReplica& replica,
                         RngStream tiebreak)
    : program_(std::move(program)), env_(std::move(env)), replica_(replica), rng_(std::move(tiebreak))
{
    dsl::check_program(*program_);
    for (const auto& d : program_->decls)
        types_[d.name] = d.type;
    for (const auto& [name, v] : env_.params) {
        const Decl* d = program_->find_decl(name);
        if (!d || d->storage != Storage::Param)
            throw std::invalid_argument("program has no parameter '" + name + "'");
    }

    auto eval_static = [&](const Expr& e) {
        BlockContext ctx = context(nullptr, 0.0);
        return Interp(*program_, ctx).eval(e);
    };

    for (const auto& d : program_->decls) {
        switch (d.storage) {
        case Storage::Param: {
            Value v = env_.params.count(d.name) ? env_.params.at(d.name) : eval_static(*d.init);
            locals_[d.name] = {};
            try {
                locals_[d.name] = context(nullptr, 0.0).coerce(d.name, std::move(v));
            } catch (const RuntimeFault& f) {
                throw std::invalid_argument(std::string("parameter ") + f.what());
            }
            break;
        }
        case Storage::Local:
            locals_[d.name] = default_value(d.type);
            break;
        case Storage::SharedSW:
        case Storage::SharedMW: {
            std::int64_t n = 1;
            if (d.array) {
                n = env_.num_bots;
                if (d.size) {
                    const Value s = eval_static(*d.size);
                    if (!std::holds_alternative<std::int64_t>(s) || std::get<std::int64_t>(s) < 0)
                        throw std::invalid_argument("size of '" + d.name + "' must be a non-negative int");
                    n = std::get<std::int64_t>(s);
                }
                sizes_[d.name] = n;
            }
            Value init;
            if (d.init)
                init = context(nullptr, 0.0).coerce(d.name, eval_static(*d.init));
            for (std::int64_t i = 0; i < n; ++i) {
                dsm::SharedVarDecl sd;
                sd.name = d.array ? element_name(d.name, i) : d.name;
                sd.writer = d.storage == Storage::SharedSW ? static_cast<RobotId>(i) : dsm::kMultiWriter;
                sd.initial = init;
                replica_.declare(sd);
            }
            break;
        }
        }
    }
    skips_.assign(program_->blocks.size(), 0);
}

BlockContext AppInstance::context(const ControlPort* port, SimTime now) const
{
    return BlockContext(env_, port, replica_, locals_, sizes_, types_, now);
}

std::uint64_t AppInstance::block_runs(const std::string& name) const
{
    const auto it = runs_.find(name);
    return it == runs_.end() ? 0 : it->second;
}

StepResult AppInstance::halt(const std::string& why)
{
    halted_ = true;
    fault_ = why;
    StepResult r;
    r.fault = why;
    return r;
}

bool AppInstance::enabled(const dsl::Block& b, const BlockContext& ctx) const
{
    if (b.native)
        return !b.native->pre || b.native->pre(ctx);
    const Value v = Interp(*program_, const_cast<BlockContext&>(ctx)).eval(*b.pre);
    if (const auto* x = std::get_if<bool>(&v))
        return *x;
    throw RuntimeFault("precondition of '" + b.name + "' is not a bool");
}

void AppInstance::run_eff(const dsl::Block& b, BlockContext& ctx) const
{
    if (b.native) {
        try {
            b.native->eff(ctx);
        } catch (const RuntimeFault&) {
            throw;
        } catch (const std::exception& e) {
            throw RuntimeFault(e.what());
        }
        return;
    }
    Interp(*program_, ctx).exec(b.eff);
}

StepResult AppInstance::commit(BlockContext& ctx, ControlPort& port, const std::string& block, SimTime now)
{
    StepResult r;
    r.block = block;
    locals_ = std::move(ctx.locals_);
    for (auto& fx : ctx.effects_) {
        if (fx.kind == BlockContext::Effect::Kind::Write) {
            auto msgs = replica_.write(fx.name, fx.value, now);
            r.messages.insert(r.messages.end(), msgs.begin(), msgs.end());
            r.writes.push_back(dsm::DsmUpdate{fx.name, std::move(fx.value), replica_.timestamp(fx.name), env_.self});
        } else {
            port.do_reach_avoid(fx.x, fx.u);
        }
    }
    ++runs_[block];
    return r;
}

StepResult AppInstance::step(ControlPort& port, SimTime now)
{
    if (halted_)
        return {};
    const auto& blocks = program_->blocks;

    if (!initialized_) {
        initialized_ = true;
        BlockContext ctx = context(&port, now);
        const dsl::Block* init = program_->init_block();
        try {
            for (const auto& d : program_->decls)
                if (d.storage == Storage::Local && d.init)
                    ctx.set_local(d.name, Interp(*program_, ctx).eval(*d.init));
            run_eff(*init, ctx);
        } catch (const RuntimeFault& f) {
            return halt(std::string("in ") + init->name + ": " + f.what());
        }
        return commit(ctx, port, init->name, now);
    }

    BlockContext snapshot = context(&port, now);
    std::vector<std::size_t> on;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].init)
            continue;
        try {
            if (enabled(blocks[i], snapshot))
                on.push_back(i);
        } catch (const RuntimeFault& f) {
            return halt(std::string("in precondition of ") + blocks[i].name + ": " + f.what());
        }
    }
    std::vector<bool> is_on(blocks.size(), false);
    for (std::size_t i : on)
        is_on[i] = true;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (!is_on[i])
            skips_[i] = 0;
    if (on.empty())
        return {};

    std::optional<std::size_t> chosen;
    int most = 0;
    for (std::size_t i : on)
        if (skips_[i] >= env_.fairness_skips && skips_[i] > most) {
            most = skips_[i];
            chosen = i;
        }
    if (!chosen) {
        auto rank = [&](std::size_t i) {
            return blocks[i].priority.value_or(std::numeric_limits<std::int64_t>::max());
        };
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        for (std::size_t i : on)
            best = std::min(best, rank(i));
        std::vector<std::size_t> ties;
        for (std::size_t i : on)
            if (rank(i) == best)
                ties.push_back(i);
        chosen = ties.size() == 1 ? ties[0] : ties[rng_.below(ties.size())];
    }
    for (std::size_t i : on)
        skips_[i] = i == *chosen ? 0 : skips_[i] + 1;

    const dsl::Block& b = blocks[*chosen];
    try {
        run_eff(b, snapshot);
    } catch (const RuntimeFault& f) {
        return halt(std::string("in ") + b.name + ": " + f.what());
    }
    return commit(snapshot, port, b.name, now);
}

// ---------------------------------------------------------------- leader election

LeaderElection::LeaderElection(std::string slot, int participants, double timeout, int min_observed)
    : slot_(std::move(slot)), participants_(participants), timeout_(timeout), min_observed_(min_observed)
{
    if (participants_ < 1 || !(timeout_ > 0.0) || min_observed_ < 1 || min_observed_ > participants_)
        throw std::invalid_argument("LeaderElection: bad participants/timeout/min_observed");
}

void LeaderElection::declare(dsm::DsmReplica& replica) const
{
    for (int i = 0; i < participants_; ++i)
        replica.declare(dsm::SharedVarDecl{element_name(slot_, i), i, {}});
}

std::vector<dsm::Outgoing> LeaderElection::announce(dsm::DsmReplica& replica, SimTime now)
{
    started_ = now;
    return replica.write(element_name(slot_, replica.self()), std::int64_t{replica.self()}, now);
}

std::optional<RobotId> LeaderElection::poll(const dsm::DsmReplica& replica, SimTime now) const
{
    const bool timed_out = started_ && now - *started_ >= timeout_ - kTimeEps;
    return elect_leader(replica, slot_, participants_, timed_out, min_observed_);
}

std::optional<RobotId> elect_leader(const dsm::DsmReplica& replica, const std::string& slot, int participants,
                                    bool timed_out, int min_observed)
{
    int observed = 0;
    RobotId best = -1;
    for (int i = 0; i < participants; ++i) {
        const Value& v = replica.read(element_name(slot, i));
        if (const auto* id = std::get_if<std::int64_t>(&v)) {
            ++observed;
            best = std::max(best, static_cast<RobotId>(*id));
        }
    }
    if (observed == participants)
        return best;
    if (!timed_out)
        return std::nullopt;
    if (observed < min_observed)
        throw ElectionTimeout("leader election timed out with " + std::to_string(observed) + " of " +
                              std::to_string(participants) + " participants observed");
    return best;
}

} // namespace portbot::app

#include "portbot/dsl.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace portbot::dsl {

namespace {

constexpr std::array<BuiltinInfo, 15> kBuiltins{{
    {"getId", 0, false, false},
    {"numBots", 0, false, false},
    {"getPos", 0, false, false},
    {"point", 3, false, false},
    {"dist", 2, false, false},
    {"max", 2, false, false},
    {"min", 2, false, false},
    {"abs", 1, false, false},
    {"sqrt", 1, false, false},
    {"waypoint", 1, false, false},
    {"numWaypoints", 0, false, false},
    {"unsafe", 0, false, false},
    {"bisector", 4, false, true},
    {"isSet", 1, false, false},
    {"doReachAvoid", 2, true, false},
}};

const std::set<std::string> kKeywords{"local", "sharedsw", "sharedmw", "param",  "int",    "real",   "bool",
                                      "position", "region", "init",   "priority", "pre",  "eff",    "if",
                                      "else",  "true",  "false",  "empty",  "active", "done",   "failed"};

// ---------------------------------------------------------------- lexer

enum class Tok { Ident, Int, Real, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.loc = {line_, col_};
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::Ident;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    t.text += advance();
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                t.kind = Tok::Int;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    t.text += advance();
                if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
                    std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                    t.kind = Tok::Real;
                    t.text += advance();
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                        t.text += advance();
                }
                if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                    t.kind = Tok::Real;
                    t.text += advance();
                    if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
                        t.text += advance();
                    if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
                        throw SyntaxError(t.loc, "malformed number '" + t.text + "'");
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                        t.text += advance();
                }
            } else {
                t.kind = Tok::Punct;
                static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
                for (const char* op : two)
                    if (src_.compare(pos_, 2, op) == 0) {
                        t.text = op;
                        advance();
                        advance();
                        break;
                    }
                if (t.text.empty()) {
                    if (std::string("(){}[];,.=<>+-*/%!").find(c) == std::string::npos)
                        throw SyntaxError(t.loc, std::string("unexpected character '") + c + "'");
                    t.text = std::string(1, advance());
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    char advance()
    {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space()
    {
        while (pos_ < src_.size()) {
            if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
                advance();
            } else if (src_.compare(pos_, 2, "//") == 0) {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
            } else if (src_.compare(pos_, 2, "/*") == 0) {
                const SourceLoc start{line_, col_};
                advance();
                advance();
                while (pos_ < src_.size() && src_.compare(pos_, 2, "*/") != 0)
                    advance();
                if (pos_ >= src_.size())
                    throw SyntaxError(start, "unterminated comment");
                advance();
                advance();
            } else {
                return;
            }
        }
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Program program()
    {
        Program p;
        while (is_decl_start())
            p.decls.push_back(decl());
        while (peek().kind != Tok::End)
            p.blocks.push_back(block());
        return p;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    bool at(const char* text) const { return peek().kind != Tok::End && peek().text == text && peek().kind != Tok::Int; }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    bool accept(const char* text)
    {
        if (!at(text))
            return false;
        next();
        return true;
    }

    Token expect(const char* text)
    {
        if (!at(text))
            fail(std::string("expected '") + text + "'");
        return next();
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        const Token& t = peek();
        throw SyntaxError(t.loc, what + (t.kind == Tok::End ? " at end of input" : " near '" + t.text + "'"));
    }

    std::string ident(const char* what)
    {
        if (peek().kind != Tok::Ident || kKeywords.count(peek().text))
            fail(std::string("expected ") + what);
        return next().text;
    }

    bool is_decl_start() const
    {
        return at("local") || at("sharedsw") || at("sharedmw") || at("param");
    }

    TypeName type_name()
    {
        if (accept("int"))
            return TypeName::Int;
        if (accept("real"))
            return TypeName::Real;
        if (accept("bool"))
            return TypeName::Bool;
        if (accept("position"))
            return TypeName::Pos;
        if (accept("region"))
            return TypeName::Region;
        fail("expected a type");
    }

    Decl decl()
    {
        Decl d;
        d.loc = peek().loc;
        const std::string kw = next().text;
        d.storage = kw == "local" ? Storage::Local
                    : kw == "sharedsw" ? Storage::SharedSW
                    : kw == "sharedmw" ? Storage::SharedMW
                                       : Storage::Param;
        d.type = type_name();
        d.name = ident("a variable name");
        if (accept("[")) {
            d.array = true;
            if (!at("]"))
                d.size = expr();
            expect("]");
        }
        if (accept("="))
            d.init = expr();
        expect(";");
        return d;
    }

    Block block()
    {
        Block b;
        b.loc = peek().loc;
        b.init = accept("init");
        b.name = ident("a block name");
        expect("(");
        expect(")");
        if (accept("priority")) {
            if (peek().kind != Tok::Int)
                fail("expected an integer priority");
            b.priority = parse_int(next());
        }
        if (accept("pre")) {
            expect("(");
            b.pre = expr();
            expect(")");
        }
        expect("eff");
        b.eff = body();
        return b;
    }

    std::vector<Stmt> body()
    {
        expect("{");
        std::vector<Stmt> out;
        while (!at("}")) {
            if (peek().kind == Tok::End)
                fail("expected '}'");
            out.push_back(stmt());
        }
        expect("}");
        return out;
    }

    Stmt stmt()
    {
        Stmt s;
        s.loc = peek().loc;
        if (accept("if")) {
            s.kind = Stmt::Kind::If;
            expect("(");
            s.expr = expr();
            expect(")");
            s.then_body = body();
            if (accept("else")) {
                if (at("if"))
                    s.else_body.push_back(stmt());
                else
                    s.else_body = body();
            }
            return s;
        }
        if (peek().kind == Tok::Ident && !kKeywords.count(peek().text) && peek(1).text == "(" &&
            peek(1).kind == Tok::Punct) {
            s.kind = Stmt::Kind::Call;
            s.expr = postfix();
            expect(";");
            return s;
        }
        s.kind = Stmt::Kind::Assign;
        s.target.loc = peek().loc;
        if (at("active") || at("done") || at("failed"))
            throw SyntaxError(peek().loc, "control flag '" + peek().text + "' is read-only");
        s.target.name = ident("a statement");
        if (accept("[")) {
            s.target.index = expr();
            expect("]");
        }
        expect("=");
        s.expr = expr();
        expect(";");
        return s;
    }

    Expr binary_node(std::string op, Expr lhs, Expr rhs, SourceLoc loc)
    {
        Expr e;
        e.kind = Expr::Kind::Binary;
        e.name = std::move(op);
        e.loc = loc;
        e.args.push_back(std::move(lhs));
        e.args.push_back(std::move(rhs));
        return e;
    }

    Expr expr() { return level(0); }

    Expr level(int lv)
    {
        static const std::vector<std::vector<std::string>> ops{
            {"||"}, {"&&"}, {"==", "!="}, {"<", "<=", ">", ">="}, {"+", "-"}, {"*", "/", "%"}};
        if (lv == static_cast<int>(ops.size()))
            return unary();
        Expr lhs = level(lv + 1);
        for (;;) {
            const Token& t = peek();
            if (t.kind != Tok::Punct)
                return lhs;
            bool match = false;
            for (const auto& op : ops[lv])
                match = match || t.text == op;
            if (!match)
                return lhs;
            const Token op = next();
            Expr rhs = level(lv + 1);
            lhs = binary_node(op.text, std::move(lhs), std::move(rhs), op.loc);
        }
    }

    Expr unary()
    {
        if (peek().kind == Tok::Punct && (peek().text == "!" || peek().text == "-")) {
            Expr e;
            e.kind = Expr::Kind::Unary;
            e.loc = peek().loc;
            e.name = next().text;
            e.args.push_back(unary());
            return e;
        }
        return postfix();
    }

    Expr postfix()
    {
        Expr e = primary();
        while (peek().kind == Tok::Punct && peek().text == ".") {
            const SourceLoc loc = next().loc;
            Expr m;
            m.kind = Expr::Kind::Member;
            m.loc = loc;
            m.name = ident("a coordinate name");
            if (m.name != "x" && m.name != "y" && m.name != "z")
                throw SyntaxError(loc, "unknown member '" + m.name + "'; expected x, y or z");
            m.args.push_back(std::move(e));
            e = std::move(m);
        }
        return e;
    }

    static std::int64_t parse_int(const Token& t)
    {
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw SyntaxError(t.loc, "integer literal out of range: " + t.text);
        return v;
    }

    Expr primary()
    {
        Expr e;
        e.loc = peek().loc;
        const Token& t = peek();
        if (t.kind == Tok::Int) {
            e.kind = Expr::Kind::IntLit;
            e.int_value = parse_int(next());
            return e;
        }
        if (t.kind == Tok::Real) {
            e.kind = Expr::Kind::RealLit;
            e.real_value = std::stod(next().text);
            if (!std::isfinite(e.real_value))
                throw SyntaxError(e.loc, "real literal out of range");
            return e;
        }
        if (accept("(")) {
            e = expr();
            expect(")");
            return e;
        }
        if (at("true") || at("false")) {
            e.kind = Expr::Kind::BoolLit;
            e.bool_value = next().text == "true";
            return e;
        }
        if (accept("empty")) {
            e.kind = Expr::Kind::Empty;
            return e;
        }
        if (at("active") || at("done") || at("failed")) {
            e.kind = Expr::Kind::Flag;
            e.name = next().text;
            return e;
        }
        e.name = ident("an expression");
        if (accept("(")) {
            e.kind = Expr::Kind::Call;
            if (!at(")")) {
                e.args.push_back(expr());
                while (accept(","))
                    e.args.push_back(expr());
            }
            expect(")");
            return e;
        }
        if (accept("[")) {
            e.kind = Expr::Kind::Index;
            e.args.push_back(expr());
            expect("]");
            return e;
        }
        e.kind = Expr::Kind::Var;
        return e;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- checker

class Checker {
public:
    explicit Checker(const Program& p) : p_(p) {}

    void run()
    {
        std::set<std::string> names;
        for (const auto& d : p_.decls) {
            if (find_builtin(d.name))
                throw SyntaxError(d.loc, "'" + d.name + "' is a built-in function");
            if (!names.insert(d.name).second)
                throw SyntaxError(d.loc, "duplicate declaration of '" + d.name + "'");
            if (d.storage == Storage::SharedSW && !d.array)
                throw SyntaxError(d.loc, "sharedsw variable '" + d.name + "' must be an array indexed by robot id");
            if (d.array && d.storage != Storage::SharedSW && d.storage != Storage::SharedMW)
                throw SyntaxError(d.loc, "only shared variables may be arrays");
            if (d.size && d.storage != Storage::SharedMW)
                throw SyntaxError(d.loc, "sharedsw arrays have one slot per robot; size not allowed");
            if (d.storage == Storage::Param && !d.init)
                throw SyntaxError(d.loc, "parameter '" + d.name + "' needs a default value");
            if (d.size)
                expr(*d.size);
            if (d.init)
                expr(*d.init);
            declared_.insert(d.name);
        }

        self_ids_.clear();
        for (const auto& d : p_.decls)
            if (d.storage == Storage::Local && d.type == TypeName::Int && d.init &&
                d.init->kind == Expr::Kind::Call && d.init->name == "getId")
                self_ids_.insert(d.name);
        for (const auto& b : p_.blocks)
            if (!b.native)
                strip_reassigned(b.eff);

        int inits = 0;
        std::set<std::string> blocks;
        for (const auto& b : p_.blocks) {
            if (!blocks.insert(b.name).second)
                throw SyntaxError(b.loc, "duplicate block '" + b.name + "'");
            if (b.init) {
                ++inits;
                if (b.pre)
                    throw SyntaxError(b.loc, "init block '" + b.name + "' takes no precondition");
            } else if (!b.pre && !b.native) {
                throw SyntaxError(b.loc, "block '" + b.name + "' needs a precondition");
            }
            if (b.native)
                continue;
            if (b.pre)
                expr(*b.pre);
            stmts(b.eff);
        }
        if (inits != 1)
            throw SyntaxError(p_.blocks.empty() ? SourceLoc{1, 1} : p_.blocks.front().loc,
                              inits == 0 ? "program has no init block" : "program has more than one init block");
    }

private:
    void strip_reassigned(const std::vector<Stmt>& body)
    {
        for (const auto& s : body) {
            if (s.kind == Stmt::Kind::Assign)
                self_ids_.erase(s.target.name);
            strip_reassigned(s.then_body);
            strip_reassigned(s.else_body);
        }
    }

    const Decl& lookup(const std::string& name, SourceLoc loc) const
    {
        const Decl* d = p_.find_decl(name);
        if (!d || !declared_.count(name))
            throw UndeclaredVariable(loc, "undeclared variable '" + name + "'");
        return *d;
    }

    bool is_self_index(const Expr& e) const
    {
        if (e.kind == Expr::Kind::Call && e.name == "getId" && e.args.empty())
            return true;
        return e.kind == Expr::Kind::Var && self_ids_.count(e.name);
    }

    void stmts(const std::vector<Stmt>& body)
    {
        for (const auto& s : body) {
            switch (s.kind) {
            case Stmt::Kind::Assign: {
                const Decl& d = lookup(s.target.name, s.target.loc);
                if (d.storage == Storage::Param)
                    throw SyntaxError(s.target.loc, "parameter '" + d.name + "' is read-only");
                if (d.array != s.target.index.has_value())
                    throw SyntaxError(s.target.loc, d.array ? "array '" + d.name + "' must be indexed"
                                                            : "'" + d.name + "' is not an array");
                if (d.storage == Storage::SharedSW && !is_self_index(*s.target.index))
                    throw WriteToForeignSharedVar(s.target.loc, "sharedsw '" + d.name +
                                                                    "' may only be written at index getId()");
                if (s.target.index)
                    expr(*s.target.index);
                expr(s.expr);
                break;
            }
            case Stmt::Kind::If:
                expr(s.expr);
                stmts(s.then_body);
                stmts(s.else_body);
                break;
            case Stmt::Kind::Call:
                if (s.expr.kind != Expr::Kind::Call)
                    throw SyntaxError(s.loc, "expected a call statement");
                call(s.expr, true);
                break;
            }
        }
    }

    void call(const Expr& e, bool as_statement)
    {
        const BuiltinInfo* b = find_builtin(e.name);
        if (!b)
            throw UndeclaredVariable(e.loc, "unknown function '" + e.name + "'");
        if (static_cast<int>(e.args.size()) != b->arity)
            throw SyntaxError(e.loc, "'" + e.name + "' takes " + std::to_string(b->arity) + " argument(s)");
        if (b->statement_only && !as_statement)
            throw SyntaxError(e.loc, "'" + e.name + "' may only be called as a statement");
        std::size_t first = 0;
        if (b->array_arg) {
            const Expr& a = e.args[0];
            if (a.kind != Expr::Kind::Var || !lookup(a.name, a.loc).array)
                throw SyntaxError(a.loc, "first argument of '" + e.name + "' must name an array");
            first = 1;
        } else if (e.name == "isSet") {
            const Expr& a = e.args[0];
            if (a.kind != Expr::Kind::Var && a.kind != Expr::Kind::Index)
                throw SyntaxError(a.loc, "isSet expects a variable or array element");
            const Decl& d = lookup(a.name, a.loc);
            if (a.kind == Expr::Kind::Index && !d.array)
                throw SyntaxError(a.loc, "'" + d.name + "' is not an array");
            if (a.kind == Expr::Kind::Index)
                expr(a.args[0]);
            first = 1;
        }
        for (std::size_t i = first; i < e.args.size(); ++i)
            expr(e.args[i]);
    }

    void expr(const Expr& e)
    {
        switch (e.kind) {
        case Expr::Kind::Var: {
            const Decl& d = lookup(e.name, e.loc);
            if (d.array)
                throw SyntaxError(e.loc, "array '" + d.name + "' used without an index");
            break;
        }
        case Expr::Kind::Index: {
            const Decl& d = lookup(e.name, e.loc);
            if (!d.array)
                throw SyntaxError(e.loc, "'" + d.name + "' is not an array");
            expr(e.args[0]);
            break;
        }
        case Expr::Kind::Call:
            call(e, false);
            break;
        default:
            for (const auto& a : e.args)
                expr(a);
        }
    }

    const Program& p_;
    std::set<std::string> declared_;
    std::set<std::string> self_ids_;
};

// ---------------------------------------------------------------- printer

std::string real_literal(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

void print_stmts(std::ostringstream& os, const std::vector<Stmt>& body, int indent);

void print_stmt(std::ostringstream& os, const Stmt& s, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    switch (s.kind) {
    case Stmt::Kind::Assign:
        os << pad << s.target.name;
        if (s.target.index)
            os << '[' << print_expr(*s.target.index) << ']';
        os << " = " << print_expr(s.expr) << ";\n";
        break;
    case Stmt::Kind::Call:
        os << pad << print_expr(s.expr) << ";\n";
        break;
    case Stmt::Kind::If:
        os << pad << "if (" << print_expr(s.expr) << ") {\n";
        print_stmts(os, s.then_body, indent + 1);
        os << pad << "}";
        if (!s.else_body.empty()) {
            os << " else {\n";
            print_stmts(os, s.else_body, indent + 1);
            os << pad << "}";
        }
        os << '\n';
        break;
    }
}

void print_stmts(std::ostringstream& os, const std::vector<Stmt>& body, int indent)
{
    for (const auto& s : body)
        print_stmt(os, s, indent);
}

} // namespace

std::string to_string(TypeName t)
{
    switch (t) {
    case TypeName::Int: return "int";
    case TypeName::Real: return "real";
    case TypeName::Bool: return "bool";
    case TypeName::Pos: return "position";
    case TypeName::Region: return "region";
    }
    return "?";
}

std::string to_string(Storage s)
{
    switch (s) {
    case Storage::Local: return "local";
    case Storage::SharedSW: return "sharedsw";
    case Storage::SharedMW: return "sharedmw";
    case Storage::Param: return "param";
    }
    return "?";
}

bool operator==(const Expr& a, const Expr& b)
{
    if (a.kind != b.kind || a.name != b.name || a.args != b.args)
        return false;
    switch (a.kind) {
    case Expr::Kind::IntLit: return a.int_value == b.int_value;
    case Expr::Kind::RealLit: return a.real_value == b.real_value;
    case Expr::Kind::BoolLit: return a.bool_value == b.bool_value;
    default: return true;
    }
}

bool operator==(const Stmt& a, const Stmt& b)
{
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case Stmt::Kind::Assign: return a.target == b.target && a.expr == b.expr;
    case Stmt::Kind::Call: return a.expr == b.expr;
    case Stmt::Kind::If: return a.expr == b.expr && a.then_body == b.then_body && a.else_body == b.else_body;
    }
    return false;
}

bool operator==(const Decl& a, const Decl& b)
{
    return a.storage == b.storage && a.type == b.type && a.name == b.name && a.array == b.array && a.size == b.size &&
           a.init == b.init;
}

bool operator==(const Block& a, const Block& b)
{
    return a.name == b.name && a.init == b.init && a.priority == b.priority && a.pre == b.pre && a.eff == b.eff &&
           a.native == b.native;
}

const Decl* Program::find_decl(const std::string& name) const
{
    for (const auto& d : decls)
        if (d.name == name)
            return &d;
    return nullptr;
}

const Block* Program::init_block() const
{
    for (const auto& b : blocks)
        if (b.init)
            return &b;
    return nullptr;
}

ProgramError::ProgramError(Kind kind, SourceLoc loc, const std::string& message)
    : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + message),
      kind_(kind),
      loc_(loc)
{
}

const BuiltinInfo* find_builtin(const std::string& name)
{
    for (const auto& b : kBuiltins)
        if (name == b.name)
            return &b;
    return nullptr;
}

Program parse_program(const std::string& text)
{
    Parser parser(Lexer(text).run());
    Program p = parser.program();
    check_program(p);
    return p;
}

void check_program(const Program& p) { Checker(p).run(); }

std::string print_expr(const Expr& e)
{
    switch (e.kind) {
    case Expr::Kind::IntLit: return std::to_string(e.int_value);
    case Expr::Kind::RealLit: return real_literal(e.real_value);
    case Expr::Kind::BoolLit: return e.bool_value ? "true" : "false";
    case Expr::Kind::Empty: return "empty";
    case Expr::Kind::Var:
    case Expr::Kind::Flag: return e.name;
    case Expr::Kind::Index: return e.name + "[" + print_expr(e.args[0]) + "]";
    case Expr::Kind::Member: return print_expr(e.args[0]) + "." + e.name;
    case Expr::Kind::Unary: return "(" + e.name + print_expr(e.args[0]) + ")";
    case Expr::Kind::Binary:
        return "(" + print_expr(e.args[0]) + " " + e.name + " " + print_expr(e.args[1]) + ")";
    case Expr::Kind::Call: {
        std::string s = e.name + "(";
        for (std::size_t i = 0; i < e.args.size(); ++i)
            s += (i ? ", " : "") + print_expr(e.args[i]);
        return s + ")";
    }
    }
    return "?";
}

std::string print_program(const Program& p)
{
    std::ostringstream os;
    for (const auto& d : p.decls) {
        os << to_string(d.storage) << ' ' << to_string(d.type) << ' ' << d.name;
        if (d.array)
            os << '[' << (d.size ? print_expr(*d.size) : "") << ']';
        if (d.init)
            os << " = " << print_expr(*d.init);
        os << ";\n";
    }
    for (const auto& b : p.blocks) {
        os << '\n';
        if (b.native) {
            os << "// native block " << b.name << '\n';
            continue;
        }
        os << (b.init ? "init " : "") << b.name << "()";
        if (b.priority)
            os << " priority " << *b.priority;
        if (b.pre)
            os << " pre (" << print_expr(*b.pre) << ")";
        os << " eff {\n";
        print_stmts(os, b.eff, 1);
        os << "}\n";
    }
    return os.str();
}

} // namespace portbot::dsl

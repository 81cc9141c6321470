#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace portbot::app {
class BlockContext;
}

/// Abstract syntax and front-end for the guarded-command application
/// language. Grammar: docs/language.md.
namespace portbot::dsl {

struct SourceLoc {
    int line = 0;
    int col = 0;
};

enum class TypeName { Int, Real, Bool, Pos, Region };

std::string to_string(TypeName t);

struct Expr {
    enum class Kind {
        IntLit,
        RealLit,
        BoolLit,
        Empty,  // the empty region
        Var,    // name
        Flag,   // name is active, done or failed
        Index,  // name[args[0]]
        Member, // args[0].name, name is x, y or z
        Unary,  // name is the operator
        Binary, // name is the operator
        Call,   // name(args...)
    };

    Kind kind = Kind::IntLit;
    std::int64_t int_value = 0;
    double real_value = 0.0;
    bool bool_value = false;
    std::string name;
    std::vector<Expr> args;
    SourceLoc loc;

    friend bool operator==(const Expr& a, const Expr& b);
};

struct LValue {
    std::string name;
    std::optional<Expr> index;
    SourceLoc loc;

    friend bool operator==(const LValue& a, const LValue& b) { return a.name == b.name && a.index == b.index; }
};

struct Stmt {
    enum class Kind { Assign, If, Call };

    Kind kind = Kind::Assign;
    LValue target;          // Assign
    Expr expr;              // Assign value, If condition, Call expression
    std::vector<Stmt> then_body;
    std::vector<Stmt> else_body;
    SourceLoc loc;

    friend bool operator==(const Stmt& a, const Stmt& b);
};

enum class Storage { Local, SharedSW, SharedMW, Param };

std::string to_string(Storage s);

struct Decl {
    Storage storage = Storage::Local;
    TypeName type = TypeName::Int;
    std::string name;
    bool array = false;
    std::optional<Expr> size; // sharedmw arrays; absent means one slot per robot
    std::optional<Expr> init;
    SourceLoc loc;

    friend bool operator==(const Decl& a, const Decl& b);
};

/// Block implemented in C++ instead of the language; shares scheduling,
/// atomicity and fault handling with interpreted blocks.
struct NativeBody {
    std::function<bool(const app::BlockContext&)> pre;
    std::function<void(app::BlockContext&)> eff;
};

struct Block {
    std::string name;
    bool init = false;
    std::optional<std::int64_t> priority; // smaller runs first; absent ranks last
    std::optional<Expr> pre;
    std::vector<Stmt> eff;
    std::shared_ptr<const NativeBody> native;
    SourceLoc loc;

    friend bool operator==(const Block& a, const Block& b);
};

struct Program {
    std::vector<Decl> decls;
    std::vector<Block> blocks;

    const Decl* find_decl(const std::string& name) const;
    const Block* init_block() const;

    friend bool operator==(const Program& a, const Program& b) = default;
};

class ProgramError : public std::runtime_error {
public:
    enum class Kind { Syntax, Undeclared, ForeignWrite };

    ProgramError(Kind kind, SourceLoc loc, const std::string& message);

    Kind kind() const { return kind_; }
    SourceLoc loc() const { return loc_; }

private:
    Kind kind_;
    SourceLoc loc_;
};

struct SyntaxError : ProgramError {
    SyntaxError(SourceLoc loc, const std::string& m) : ProgramError(Kind::Syntax, loc, m) {}
};
struct UndeclaredVariable : ProgramError {
    UndeclaredVariable(SourceLoc loc, const std::string& m) : ProgramError(Kind::Undeclared, loc, m) {}
};
struct WriteToForeignSharedVar : ProgramError {
    WriteToForeignSharedVar(SourceLoc loc, const std::string& m) : ProgramError(Kind::ForeignWrite, loc, m) {}
};

/// Parses and statically checks a program.
Program parse_program(const std::string& text);

/// Static checks alone (used for programs assembled in C++).
void check_program(const Program& p);

/// Canonical source text; fully parenthesized expressions.
std::string print_program(const Program& p);
std::string print_expr(const Expr& e);

struct BuiltinInfo {
    const char* name;
    int arity;
    bool statement_only; // may only appear as a call statement
    bool array_arg;      // first argument names an array
};

const BuiltinInfo* find_builtin(const std::string& name);

} // namespace portbot::dsl

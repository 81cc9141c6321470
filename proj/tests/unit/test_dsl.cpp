#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "portbot/apps.hpp"
#include "portbot/dsl.hpp"

using namespace portbot;
using namespace portbot::dsl;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class E>
SourceLoc error_loc(const std::string& src)
{
    try {
        parse_program(src);
    } catch (const E& e) {
        return e.loc();
    } catch (const std::exception& e) {
        ADD_FAILURE() << "wrong exception: " << e.what();
        return {};
    }
    ADD_FAILURE() << "no error for:\n" << src;
    return {};
}

const char* kHeader = "local int a = 0;\nlocal int b = 1;\nlocal bool f = false;\n";

// Random integer/boolean expression over a, b, f.
std::string random_expr(std::mt19937_64& g, int depth, bool boolean)
{
    std::uniform_int_distribution<int> pick(0, 5);
    if (depth == 0 || pick(g) == 0) {
        if (boolean)
            return std::bernoulli_distribution(0.5)(g) ? "f" : (std::bernoulli_distribution(0.5)(g) ? "true" : "!f");
        switch (pick(g)) {
        case 0: return "a";
        case 1: return "b";
        case 2: return "-a";
        default: return std::to_string(pick(g) * 7);
        }
    }
    if (boolean) {
        static const char* rel[] = {"<", "<=", ">", ">=", "==", "!="};
        static const char* lg[] = {"&&", "||"};
        if (std::bernoulli_distribution(0.5)(g))
            return random_expr(g, depth - 1, false) + " " + rel[pick(g)] + " " + random_expr(g, depth - 1, false);
        return "(" + random_expr(g, depth - 1, true) + ") " + lg[pick(g) % 2] + " " + random_expr(g, depth - 1, true);
    }
    static const char* ar[] = {"+", "-", "*", "/", "%", "+"};
    if (pick(g) == 0)
        return "max(" + random_expr(g, depth - 1, false) + ", " + random_expr(g, depth - 1, false) + ")";
    return "(" + random_expr(g, depth - 1, false) + ") " + ar[pick(g)] + " " + random_expr(g, depth - 1, false);
}

} // namespace

TEST(Dsl, BundledProgramsMatchCommittedFiles)
{
    const std::string dir = std::string(PORTBOT_SOURCE_DIR) + "/programs/";
    EXPECT_EQ(slurp(dir + "formation.bot"), apps::formation_source());
    EXPECT_EQ(slurp(dir + "race.bot"), apps::race_source());
    EXPECT_EQ(slurp(dir + "waypoints.bot"), apps::waypoints_source());
}

TEST(Dsl, BundledProgramsParseAndRoundTrip)
{
    for (const std::string* src : {&apps::formation_source(), &apps::race_source(), &apps::waypoints_source()}) {
        const Program p = parse_program(*src);
        const std::string printed = print_program(p);
        const Program q = parse_program(printed);
        EXPECT_EQ(p, q);
        EXPECT_EQ(print_program(q), printed);
    }
}

TEST(Dsl, FormationProgramShape)
{
    const Program p = parse_program(apps::formation_source());
    ASSERT_NE(p.find_decl("pos"), nullptr);
    EXPECT_EQ(p.find_decl("pos")->storage, Storage::SharedSW);
    EXPECT_EQ(p.find_decl("pos")->type, TypeName::Pos);
    EXPECT_TRUE(p.find_decl("pos")->array);
    EXPECT_EQ(p.find_decl("len")->storage, Storage::Param);
    ASSERT_NE(p.init_block(), nullptr);
    EXPECT_EQ(p.init_block()->name, "initialize");
    EXPECT_EQ(p.blocks.size(), 3u);
}

TEST(Dsl, OperatorPrecedence)
{
    const Program p = parse_program(std::string(kHeader) + "init s() eff { a = 1 + 2 * 3 - 4; f = a < 2 || b == 1 && !f; }");
    const Stmt& s0 = p.blocks[0].eff[0];
    EXPECT_EQ(print_expr(s0.expr), "((1 + (2 * 3)) - 4)");
    EXPECT_EQ(print_expr(p.blocks[0].eff[1].expr), "((a < 2) || ((b == 1) && (!f)))");
}

TEST(DslProperty, PrintParseRoundTrip)
{
    std::mt19937_64 g(99);
    for (int i = 0; i < 300; ++i) {
        std::string src = kHeader;
        src += "init s() eff { a = " + random_expr(g, 4, false) + "; }\n";
        src += "blk() pre (" + random_expr(g, 3, true) + ") eff {\n";
        src += "  if (" + random_expr(g, 2, true) + ") { b = " + random_expr(g, 3, false) + "; } else { f = " +
               random_expr(g, 2, true) + "; }\n}\n";
        Program p;
        ASSERT_NO_THROW(p = parse_program(src)) << src;
        const std::string printed = print_program(p);
        Program q;
        ASSERT_NO_THROW(q = parse_program(printed)) << printed;
        EXPECT_EQ(p, q) << src << "\n---\n" << printed;
        EXPECT_EQ(print_program(q), printed);
    }
}

TEST(Dsl, SyntaxErrorsCarryLocation)
{
    auto loc = error_loc<SyntaxError>("local int a = 0;\ninit s() eff {\n  a = ;\n}\n");
    EXPECT_EQ(loc.line, 3);
    EXPECT_EQ(loc.col, 7);
    loc = error_loc<SyntaxError>("local int a = 0\ninit s() eff { }\n");
    EXPECT_EQ(loc.line, 2);
    error_loc<SyntaxError>("local int a = 0;\nblk() pre (a > 0) eff { a = 1; }\n");        // no init
    error_loc<SyntaxError>("init s() eff { }\ninit t() eff { }\n");                        // two inits
    error_loc<SyntaxError>("init s() eff { }\nb() eff { }\n");                              // missing pre
    error_loc<SyntaxError>("init s() eff { done = true; }\n");                             // flags are read-only
    error_loc<SyntaxError>("param int k = 1;\ninit s() eff { k = 2; }\n");                 // params are read-only
    error_loc<SyntaxError>("local int a = 0;\ninit s() eff { a = max(1); }\n");            // arity
    error_loc<SyntaxError>("local int a = 0;\ninit s() eff { a = doReachAvoid(getPos(), empty); }\n");
    error_loc<SyntaxError>("init s() eff { }\ninit s() eff { }\n");
}

TEST(Dsl, UndeclaredNames)
{
    auto loc = error_loc<UndeclaredVariable>("init s() eff {\n  x = 1;\n}\n");
    EXPECT_EQ(loc.line, 2);
    EXPECT_EQ(loc.col, 3);
    error_loc<UndeclaredVariable>("local int a = 0;\ninit s() eff { a = frobnicate(); }\n");
    error_loc<UndeclaredVariable>("local int a = b;\nlocal int b = 0;\ninit s() eff { }\n");
}

TEST(Dsl, ForeignSharedWritesRejected)
{
    // constant index
    auto loc = error_loc<WriteToForeignSharedVar>("sharedsw int v[];\ninit s() eff {\n  v[0] = 1;\n}\n");
    EXPECT_EQ(loc.line, 3);
    // an id-valued local that is reassigned somewhere no longer counts as the own index
    error_loc<WriteToForeignSharedVar>(
        "sharedsw int v[];\nlocal int me = getId();\ninit s() eff { me = 2; v[me] = 1; }\n");
    EXPECT_NO_THROW(parse_program("sharedsw int v[];\nlocal int me = getId();\ninit s() eff { v[me] = 1; v[getId()] = 2; }\n"));
    // multi-writer variables may be written anywhere
    EXPECT_NO_THROW(parse_program("sharedmw int m[4];\ninit s() eff { m[3] = 1; }\n"));
}

TEST(Dsl, BuiltinTable)
{
    ASSERT_NE(find_builtin("bisector"), nullptr);
    EXPECT_EQ(find_builtin("bisector")->arity, 4);
    EXPECT_TRUE(find_builtin("bisector")->array_arg);
    EXPECT_TRUE(find_builtin("doReachAvoid")->statement_only);
    EXPECT_EQ(find_builtin("teleport"), nullptr);
}

// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0
//
// IR structure: opcode tables, instruction queries, printing, parsing,
// the parse/print round trip, and the wellformedness checker.

#include <string>
#include <variant>
#include <vector>

#include "doctest.h"
#include "rtlv/ir.hpp"
#include "rtlv/parser.hpp"
#include "testutil.hpp"

using namespace rtlv;

namespace {

const Opcode kAllOpcodes[] = {
    Opcode::Const,    Opcode::Move,      Opcode::Add,       Opcode::Sub,
    Opcode::Mul,      Opcode::DivStrict, Opcode::DivTotal,  Opcode::AddPtr,
    Opcode::CmpEq,    Opcode::CmpLt,     Opcode::GetCanary, Opcode::GetRa,
    Opcode::GetSp,    Opcode::CodeAddr,  Opcode::PacEncode, Opcode::PacDecode,
};

ParseError expect_error(const std::string& text, const ParseOptions& opts = {}) {
  ParseResult r = parse_program(text, opts);
  REQUIRE(std::holds_alternative<ParseError>(r));
  return std::get<ParseError>(r);
}

// A minimal well-formed shell to host hand-built functions under test.
Program shell() {
  Program p;
  Function m;
  m.name = "main";
  m.entry = 1;
  m.code[1] = Ireturn{};
  p.functions["main"] = std::move(m);
  return p;
}

bool has_rule(const std::vector<Diagnostic>& ds, WfRule rule) {
  for (const auto& d : ds) {
    if (d.rule == rule) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("opcode tables agree with each other") {
  for (Opcode op : kAllOpcodes) {
    std::string name = opcode_name(op);
    auto back = opcode_from_name(name);
    REQUIRE(back.has_value());
    CHECK(*back == op);
    CHECK(opcode_arity(op) >= 0);
    CHECK(opcode_arity(op) <= 2);
  }
  CHECK(!opcode_from_name("bogus").has_value());
  CHECK(opcode_arity(Opcode::Const) == 0);
  CHECK(opcode_arity(Opcode::Move) == 1);
  CHECK(opcode_arity(Opcode::Add) == 2);
  CHECK(opcode_arity(Opcode::PacDecode) == 2);
}

TEST_CASE("instructions print in canonical form") {
  CHECK(print_instr(Iop{Operation::konst(-42), {}, "x", 2}) == "x = const -42 goto 2");
  CHECK(print_instr(Iop{Operation::simple(Opcode::Add), {"a", "b"}, "c", 7}) ==
        "c = add a b goto 7");
  CHECK(print_instr(Iop{Operation::codeaddr("f", 3), {}, "c", 4}) ==
        "c = codeaddr f.3 goto 4");
  CHECK(print_instr(Iload{"p", 8, "v", 5}) == "v = load [p + 8] goto 5");
  CHECK(print_instr(Iload{"p", -16, "v", 5}) == "v = load [p - 16] goto 5");
  CHECK(print_instr(Istore{"p", 0, "v", 6}) == "store [p + 0] = v goto 6");
  CHECK(print_instr(Icall{"f", {"a", "b"}, "r", 9}) == "r = call f(a, b) goto 9");
  CHECK(print_instr(Itailcall{"f", {"a"}}) == "tailcall f(a)");
  CHECK(print_instr(Icond{Cond::Ge, "a", "b", 3, 4}) == "if a ge b then 3 else 4");
  CHECK(print_instr(Ijumptable{"i", {2, 4, 6}}) == "jumptable i [2, 4, 6]");
  CHECK(print_instr(Ireturn{Reg("r")}) == "return r");
  CHECK(print_instr(Ireturn{}) == "return");
  CHECK(print_instr(Iretvia{"c"}) == "retvia c");
  CHECK(print_instr(Iretaa{"c"}) == "retaa c");
  CHECK(print_instr(Iextcall{"print_int", {"a"}, "u", 2}) ==
        "u = extcall print_int(a) goto 2");
}

TEST_CASE("parse then print round-trips a kitchen-sink program") {
  const char* text =
      "function alpha(p, q) stacksize 16 entry 1 {\n"
      "  1: a = const -42 goto 2\n"
      "  2: b = move a goto 3\n"
      "  3: c = add a b goto 4\n"
      "  4: d = sub c b goto 5\n"
      "  5: e = mul d d goto 6\n"
      "  6: f = div_strict e d goto 7\n"
      "  7: g = div_total f e goto 8\n"
      "  8: s = getsp goto 9\n"
      "  9: h = addptr s g goto 10\n"
      "  10: i = cmp_eq a b goto 11\n"
      "  11: j = cmp_lt a b goto 12\n"
      "  12: k = getcanary goto 13\n"
      "  13: l = getra goto 14\n"
      "  14: m = codeaddr beta.1 goto 15\n"
      "  15: n = pac_encode m s goto 16\n"
      "  16: o = pac_decode n s goto 17\n"
      "  17: v = load [s + 8] goto 18\n"
      "  18: store [s - 8] = v goto 19\n"
      "  19: r = call beta(v) goto 20\n"
      "  20: u = extcall print_int(r) goto 21\n"
      "  21: w = extcall stack_chk_fail() goto 22\n"
      "  22: if r eq u then 23 else 24\n"
      "  23: if r lt u then 25 else 26\n"
      "  24: if r ge u then 25 else 26\n"
      "  25: if r ne u then 27 else 28\n"
      "  26: jumptable r [27, 28, 29]\n"
      "  27: return r\n"
      "  28: return\n"
      "  29: retvia m\n"
      "  30: retaa m\n"
      "  31: tailcall beta(r)\n"
      "}\n"
      "function beta(x) stacksize 0 {\n"
      "  1: return x\n"
      "}\n"
      "function main() stacksize 8 {\n"
      "  1: z = const 0 goto 2\n"
      "  2: r = call alpha(z, z) goto 3\n"
      "  3: return r\n"
      "}\n";
  Program p = testutil::parse_ok(text);
  std::string once = print_program(p);
  ParseResult again = parse_program(once);
  REQUIRE(std::holds_alternative<Program>(again));
  CHECK(std::get<Program>(again) == p);
  CHECK(print_program(std::get<Program>(again)) == once);  // printing is a fixpoint
}

TEST_CASE("entry defaults to the first listed node") {
  Program p = testutil::parse_ok(
      "function main() stacksize 0 {\n  7: a = const 1 goto 9\n  9: return a\n}\n");
  CHECK(p.functions.at("main").entry == 7);

  Program q = testutil::parse_ok(
      "function main() stacksize 0 entry 9 {\n  7: a = const 1 goto 9\n  9: return a\n}\n");
  CHECK(q.functions.at("main").entry == 9);
}

TEST_CASE("comments and semicolons are tolerated") {
  Program p = testutil::parse_ok(
      "# leading comment\n"
      "function main() stacksize 0 { # trailing\n"
      "  1: a = const 3 goto 2;\n"
      "  # interior comment\n"
      "  2: return a;\n"
      "}\n");
  CHECK(p.functions.at("main").code.size() == 2);
}

TEST_CASE("reserved register names need explicit permission") {
  const char* text =
      "function main() stacksize 0 {\n  1: $t = const 1 goto 2\n  2: return $t\n}\n";
  ParseError e = expect_error(text);
  CHECK(e.line == 2);
  CHECK(e.message.find("reserved") != std::string::npos);

  ParseOptions opts;
  opts.allow_reserved_regs = true;
  Program p = testutil::parse_ok(text, true);
  CHECK(p.functions.at("main").code.size() == 2);
  // Reserved names survive the round trip under the same option.
  ParseResult again = parse_program(print_program(p), opts);
  REQUIRE(std::holds_alternative<Program>(again));
  CHECK(std::get<Program>(again) == p);
}

TEST_CASE("parse errors carry positions and causes") {
  // Keyword misuse reported at the offending token.
  ParseError e = expect_error("functio main() stacksize 0 {\n}\n");
  CHECK(e.line == 1);
  CHECK(e.col == 1);

  // A reserved word cannot name a register.
  e = expect_error(
      "function main() stacksize 0 {\n  1: goto = const 1 goto 2\n  2: return\n}\n");
  CHECK(e.line == 2);
  CHECK(e.message.find("reserved word") != std::string::npos);

  // Node ids are positive.
  e = expect_error("function main() stacksize 0 {\n  0: return\n}\n");
  CHECK(e.message.find("positive") != std::string::npos);

  // One node, one instruction.
  e = expect_error(
      "function main() stacksize 0 {\n  1: a = const 1 goto 2\n  1: return a\n}\n");
  CHECK(e.message.find("defined twice") != std::string::npos);

  // One name, one function.
  e = expect_error(
      "function main() stacksize 0 {\n  1: return\n}\n"
      "function main() stacksize 0 {\n  1: return\n}\n");
  CHECK(e.message.find("defined twice") != std::string::npos);

  // Integer literals must fit a signed 64-bit value.
  e = expect_error(
      "function main() stacksize 0 {\n  1: a = const 99999999999999999999 goto 2\n"
      "  2: return a\n}\n");
  CHECK(e.line == 2);

  // Unknown characters are rejected, not skipped.
  e = expect_error("function main() stacksize 0 {\n  1: a = const 1 @ goto 2\n}\n");
  CHECK(e.line == 2);
}

TEST_CASE("successor, use, and def queries") {
  CHECK(successors(Iop{Operation::konst(1), {}, "x", 5}) == std::vector<Node>{5});
  CHECK(successors(Icond{Cond::Eq, "a", "b", 3, 4}) == std::vector<Node>({3, 4}));
  CHECK(successors(Ijumptable{"i", {7, 8}}) == std::vector<Node>({7, 8}));
  CHECK(successors(Ireturn{Reg("r")}).empty());
  CHECK(successors(Itailcall{"f", {}}).empty());
  CHECK(successors(Iretvia{"c"}).empty());

  CHECK(uses(Iop{Operation::simple(Opcode::Add), {"a", "b"}, "c", 1}) ==
        std::vector<Reg>({"a", "b"}));
  CHECK(uses(Istore{"p", 0, "v", 1}) == std::vector<Reg>({"p", "v"}));
  CHECK(uses(Iload{"p", 0, "v", 1}) == std::vector<Reg>{"p"});
  CHECK(uses(Ireturn{}).empty());
  CHECK(uses(Ireturn{Reg("r")}) == std::vector<Reg>{"r"});
  CHECK(uses(Iretaa{"c"}) == std::vector<Reg>{"c"});
  CHECK(uses(Ijumptable{"i", {1}}) == std::vector<Reg>{"i"});

  CHECK(*def(Iop{Operation::konst(1), {}, "x", 1}) == "x");
  CHECK(*def(Iload{"p", 0, "v", 1}) == "v");
  CHECK(*def(Icall{"f", {}, "r", 1}) == "r");
  CHECK(*def(Iextcall{"print_int", {"a"}, "u", 1}) == "u");
  CHECK(!def(Istore{"p", 0, "v", 1}).has_value());
  CHECK(!def(Icond{Cond::Eq, "a", "b", 1, 2}).has_value());
  CHECK(!def(Ireturn{Reg("r")}).has_value());
}

TEST_CASE("wellformedness accepts the good and names the bad") {
  // The kitchen-sink program above is well-formed; so is the empty-bodied
  // shell used below.
  CHECK(check_wellformed(shell()).empty());

  // Missing main.
  Program p = shell();
  p.functions.erase("main");
  CHECK(has_rule(check_wellformed(p), WfRule::MissingMain));

  // Duplicate parameter.
  p = shell();
  p.functions["main"].params = {"a", "a"};
  CHECK(has_rule(check_wellformed(p), WfRule::DuplicateParam));

  // Entry node absent.
  p = shell();
  p.functions["main"].entry = 5;
  CHECK(has_rule(check_wellformed(p), WfRule::MissingEntry));

  // Successor absent.
  p = shell();
  p.functions["main"].code[2] = Iop{Operation::konst(1), {}, "x", 99};
  CHECK(has_rule(check_wellformed(p), WfRule::DanglingSuccessor));

  // Stack size must be a nonnegative multiple of 8.
  p = shell();
  p.functions["main"].stacksize = 12;
  CHECK(has_rule(check_wellformed(p), WfRule::StacksizeAlignment));
  p.functions["main"].stacksize = -8;
  CHECK(has_rule(check_wellformed(p), WfRule::StacksizeAlignment));

  // Load/store offsets must be 8-aligned.
  p = shell();
  p.functions["main"].code[2] = Iload{"p", 4, "v", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::OffsetAlignment));
  p = shell();
  p.functions["main"].code[2] = Istore{"p", -4, "v", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::OffsetAlignment));

  // Calls must resolve to a function or builtin.
  p = shell();
  p.functions["main"].code[2] = Icall{"nosuch", {}, "r", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::UnresolvedCallee));
  p = shell();
  p.functions["main"].code[2] = Itailcall{"nosuch", {}};
  CHECK(has_rule(check_wellformed(p), WfRule::UnresolvedCallee));

  // Extcalls must name a known builtin with the right arity.
  p = shell();
  p.functions["main"].code[2] = Iextcall{"frobnicate", {}, "u", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::UnknownBuiltin));
  p = shell();
  p.functions["main"].code[2] = Iextcall{"print_int", {"a", "b"}, "u", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::BuiltinArity));
  p = shell();
  p.functions["main"].code[2] = Iextcall{"stack_chk_fail", {"a"}, "u", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::BuiltinArity));

  // Jumptables need at least one target.
  p = shell();
  p.functions["main"].code[2] = Ijumptable{"i", {}};
  CHECK(has_rule(check_wellformed(p), WfRule::EmptyJumptable));

  // Names must be identifiers.
  p = shell();
  p.functions["main"].code[2] = Iop{Operation::konst(1), {}, "bad name", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::BadName));
  p = shell();
  Function f;
  f.name = "9lives";
  f.entry = 1;
  f.code[1] = Ireturn{};
  p.functions["9lives"] = std::move(f);
  CHECK(has_rule(check_wellformed(p), WfRule::BadName));

  // Operand counts must match the opcode.
  p = shell();
  p.functions["main"].code[2] = Iop{Operation::simple(Opcode::Add), {"a"}, "c", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::BadArity));
  p = shell();
  p.functions["main"].code[2] = Iop{Operation::konst(1), {"a"}, "c", 1};
  CHECK(has_rule(check_wellformed(p), WfRule::BadArity));

  // Node ids are positive.
  p = shell();
  p.functions["main"].code[0] = Ireturn{};
  CHECK(has_rule(check_wellformed(p), WfRule::BadNode));

  // Calling a builtin through the plain call form is allowed.
  p = shell();
  p.functions["main"].code[2] = Icall{"print_int", {"x"}, "r", 1};
  CHECK(check_wellformed(p).empty());
}

TEST_CASE("program lookup") {
  Program p = shell();
  CHECK(p.find("main") != nullptr);
  CHECK(p.find("main")->name == "main");
  CHECK(p.find("ghost") == nullptr);
}

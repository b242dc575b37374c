// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rtlv {

// Register names. Source files may use [A-Za-z_][A-Za-z0-9_]*; names starting
// with '$' are reserved for compiler-generated temporaries and rejected by the
// parser unless explicitly allowed.
using Reg = std::string;

// CFG node id, positive. Passes insert nodes with fresh ids and never renumber
// existing ones.
using Node = std::int64_t;

enum class Opcode {
  Const,
  Move,
  Add,
  Sub,
  Mul,
  DivStrict,
  DivTotal,
  AddPtr,
  CmpEq,
  CmpLt,
  GetCanary,
  GetRa,
  GetSp,
  CodeAddr,
  PacEncode,
  PacDecode,
};

// Number of register operands the opcode consumes.
int opcode_arity(Opcode op);
const char* opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(const std::string& name);

// A pure operation. Only Const uses imm; only CodeAddr uses fn/node.
struct Operation {
  Opcode op = Opcode::Const;
  std::int64_t imm = 0;
  std::string fn;
  Node node = 0;

  static Operation konst(std::int64_t k);
  static Operation simple(Opcode op);
  static Operation codeaddr(std::string fn, Node node);

  bool operator==(const Operation&) const = default;
};

enum class Cond { Eq, Lt, Ge, Ne };

const char* cond_name(Cond c);

// dst := op(args); goto succ
struct Iop {
  Operation op;
  std::vector<Reg> args;
  Reg dst;
  Node succ = 0;
  bool operator==(const Iop&) const = default;
};

// dst := load64(addr + off); goto succ. off is a byte offset, multiple of 8.
struct Iload {
  Reg addr;
  std::int64_t off = 0;
  Reg dst;
  Node succ = 0;
  bool operator==(const Iload&) const = default;
};

// store64(addr + off) := src; goto succ
struct Istore {
  Reg addr;
  std::int64_t off = 0;
  Reg src;
  Node succ = 0;
  bool operator==(const Istore&) const = default;
};

// dst := callee(args); goto succ
struct Icall {
  std::string callee;
  std::vector<Reg> args;
  Reg dst;
  Node succ = 0;
  bool operator==(const Icall&) const = default;
};

// Free the current frame, then transfer to callee(args); the callee returns
// directly to this function's caller.
struct Itailcall {
  std::string callee;
  std::vector<Reg> args;
  bool operator==(const Itailcall&) const = default;
};

// if a <cond> b then if_true else if_false
struct Icond {
  Cond cond = Cond::Eq;
  Reg a;
  Reg b;
  Node if_true = 0;
  Node if_false = 0;
  bool operator==(const Icond&) const = default;
};

// Multi-way branch on a small integer index.
struct Ijumptable {
  Reg index;
  std::vector<Node> targets;
  bool operator==(const Ijumptable&) const = default;
};

// Return to the caller through the abstract call stack.
struct Ireturn {
  std::optional<Reg> src;
  bool operator==(const Ireturn&) const = default;
};

// Return through a code value held in a register; the target node inside the
// caller comes from that value, not from the abstract stack.
struct Iretvia {
  Reg src;
  bool operator==(const Iretvia&) const = default;
};

// Authenticate-and-return: pac_decode of src against the current stack
// pointer, then the Iretvia behavior, as a single step.
struct Iretaa {
  Reg src;
  bool operator==(const Iretaa&) const = default;
};

// dst := builtin(args); goto succ. Builtins: print_int/1, stack_chk_fail/0.
struct Iextcall {
  std::string name;
  std::vector<Reg> args;
  Reg dst;
  Node succ = 0;
  bool operator==(const Iextcall&) const = default;
};

using Instr = std::variant<Iop, Iload, Istore, Icall, Itailcall, Icond,
                           Ijumptable, Ireturn, Iretvia, Iretaa, Iextcall>;

struct Function {
  std::string name;
  std::vector<Reg> params;
  std::int64_t stacksize = 0;  // bytes, multiple of 8
  Node entry = 0;
  std::map<Node, Instr> code;

  bool operator==(const Function&) const = default;
};

struct Program {
  std::map<std::string, Function> functions;
  std::string main = "main";

  const Function* find(const std::string& name) const;
  bool operator==(const Program&) const = default;
};

// Successor node ids of one instruction (empty for the return class).
std::vector<Node> successors(const Instr& ins);

// Registers read / the register written, if any.
std::vector<Reg> uses(const Instr& ins);
std::optional<Reg> def(const Instr& ins);

extern const char* const kBuiltinPrintInt;
extern const char* const kBuiltinStackChkFail;
bool is_builtin(const std::string& name);

enum class WfRule {
  DuplicateParam,
  MissingEntry,
  DanglingSuccessor,
  StacksizeAlignment,
  OffsetAlignment,
  UnresolvedCallee,
  UnknownBuiltin,
  BuiltinArity,
  EmptyJumptable,
  BadName,
  BadArity,
  MissingMain,
  BadNode,
};

struct Diagnostic {
  WfRule rule;
  std::string function;  // empty for program-level findings
  Node node = 0;         // 0 when not tied to a node
  std::string message;
};

// Structural checks: distinct params, entry and all successors present,
// aligned stack sizes and load/store offsets, resolvable callees, known
// builtins with the right arity, at least one jumptable target, a main
// function. Returns an empty list iff the program is well-formed.
std::vector<Diagnostic> check_wellformed(const Program& p);

std::string to_string(const Diagnostic& d);

// Canonical text. parse_program(print_program(p)) == p for well-formed p.
std::string print_program(const Program& p);
std::string print_function(const Function& f);
std::string print_instr(const Instr& ins);

}  // namespace rtlv

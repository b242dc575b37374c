// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rtlv/ir.hpp"

namespace rtlv {

// Symbolic execution of straight-line instruction sequences, used to justify
// the retaa fusion peephole. Terms are finite trees over initial register
// symbols; getsp/getra/getcanary evaluate to distinguished nullary terms
// (the frame does not change inside a straight-line sequence).

class SymTerm;
using SymTermPtr = std::shared_ptr<const SymTerm>;

struct SymInit {   // initial value of a register
  Reg reg;
};
struct SymUndef {};  // the distinguished undefined symbol
struct SymSp {};
struct SymRa {};
struct SymCanary {};
struct SymApp {  // op(args)
  Operation op;
  std::vector<SymTermPtr> args;
};
struct SymLoad {  // load64 at addr+off, after `version` stores
  SymTermPtr addr;
  std::int64_t off = 0;
  std::size_t version = 0;
};

class SymTerm {
 public:
  using Rep = std::variant<SymInit, SymUndef, SymSp, SymRa, SymCanary, SymApp, SymLoad>;
  explicit SymTerm(Rep rep) : rep_(std::move(rep)) {}
  const Rep& rep() const { return rep_; }

 private:
  Rep rep_;
};

bool sym_equal(const SymTermPtr& a, const SymTermPtr& b);
std::string to_string(const SymTermPtr& t);

struct SymStore {
  SymTermPtr addr;
  std::int64_t off = 0;
  SymTermPtr value;
};

enum class SymExitKind { None, Return, ReturnVia };

// Final symbolic machine state of a sequence: written registers, the store
// log, and how the sequence leaves the function. Iretvia and Iretaa both
// leave the Undef symbol in their consumed register and exit ReturnVia with
// the (decoded) target term and the current term of the return-value channel
// register; a plain Ireturn exits Return with the value term. A return-class
// exit ends the activation and discards its register bank, so comparisons
// ignore the register map in that case; identity entries (a register holding
// its own initial symbol) are always dropped.
struct SymState {
  std::map<Reg, SymTermPtr> regs;
  std::vector<SymStore> stores;
  SymExitKind exit = SymExitKind::None;
  SymTermPtr exit_target;  // ReturnVia
  SymTermPtr exit_value;   // Return (absent operand: Undef symbol)
};

// Run a straight-line sequence symbolically. The register named "$sp" starts
// as the stack-pointer symbol, matching what getsp produces. Sequences must
// consist of Iop/Iload/Istore steps and may end with one return-class
// instruction; anything else fails.
struct SymExecResult {
  bool ok = false;
  std::string error;
  SymState state;
};

SymExecResult symexec(const std::vector<Instr>& seq);

// True iff both sequences execute symbolically and produce structurally
// identical final states (register maps, store logs, exit kind and terms).
bool symexec_equiv(const std::vector<Instr>& a, const std::vector<Instr>& b);

}  // namespace rtlv

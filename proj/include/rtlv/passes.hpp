// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rtlv/ir.hpp"
#include "rtlv/relations.hpp"

namespace rtlv {

struct PassConfig {
  bool ftailcalls = true;
  bool ftailrec = false;
  bool fstack_protector = false;
  bool fstack_protector_all = false;
  bool fretaddr_pac = false;
  bool fretaa = false;
};

// Deliberately broken pass variants for validator sensitivity tests. The
// default None is the correct pass; everything else must be rejected by
// co-execution on at least one corpus input.
enum class PassBug {
  None,
  CanaryWrongOffset,    // store the canary at offset 0 instead of the slot
  CanarySkipEpilogue,   // install the canary but never check it
  TailrecSwapCopies,    // emit param copies before the temp copies
  PacBadModifier,       // authenticate against a junk modifier
  PeepholeNoDecode,     // drop the decode instead of fusing it
};

struct PassError {
  std::string message;
};

// div_strict -> div_total everywhere: trades a trap for an undefined result,
// which is the allowed refinement direction.
Program pass_refine_div(Program p);

// In frameless functions, rewrite `n: d := call g(..); n': return d` into
// `n: tailcall g(..)` when d has no other use.
Program pass_tailcall(Program p);

// Turn self tail calls into parameter copies through fresh temporaries and a
// branch to the entry. Inserted nodes use fresh ids; nothing else moves.
Program pass_tailrec(Program p, PassBug bug = PassBug::None);

struct CanaryResult {
  Program prog;
  // Canary slot offset per protected function (the pass does not know the
  // runtime canary value; pair these with it to build a CanarySpec).
  std::map<std::string, std::int64_t> offsets;
};

// Grow each protected frame by one slot, store the canary there on entry and
// recheck it before every Ireturn/Itailcall/Iretvia, diverting mismatches to
// stack_chk_fail. Protects stacksize > 0, or everything with protect_all.
CanaryResult pass_canary(Program p, bool protect_all, PassBug bug = PassBug::None);

// Where the lowered return address lives inside one function's frame.
struct RaSlot {
  std::int64_t offset = 0;
  Node prologue_getra = 0;
  Node prologue_getsp = 0;
  Node prologue_store = 0;
  struct ReturnSite {
    Node getsp = 0;
    Node load = 0;
    Node retvia = 0;
    bool operator==(const ReturnSite&) const = default;
  };
  std::vector<ReturnSite> returns;
};

struct RaSpec {
  std::map<std::string, RaSlot> slots;
  bool lowered(const std::string& fn) const { return slots.count(fn) != 0; }
};

struct LowerResult {
  Program prog;
  RaSpec ra;
};

// Make the return address a first-class frame value: save it at entry, load
// it back and return through it. Leaf functions (no calls, no tail calls)
// keep their Ireturn, and so does main, whose return address belongs to the
// runtime rather than to any frame.
LowerResult pass_lower_ra(Program p);

// Sign the saved return address with the frame pointer as modifier and
// authenticate it on the way out. Requires the slot metadata produced by
// pass_lower_ra.
std::variant<Program, PassError> pass_pac(Program p, const RaSpec& ra,
                                          PassBug bug = PassBug::None);

struct PeepholeResult {
  Program prog;
  int fused = 0;
};

// Fuse `dd := pac_decode(rr, sp); retvia dd` into `retaa rr` wherever the
// symbolic equivalence check proves the pair and the fusion leave the same
// final state. dd must have no other use.
PeepholeResult peephole_retaa(Program p, PassBug bug = PassBug::None);

struct PipelineResult {
  Program prog;
  std::vector<std::string> applied;
  std::map<std::string, int> rewrites;
  std::map<std::string, std::int64_t> canary_offsets;
  RaSpec ra;
};

// Fixed order: refine_div, tailcall, tailrec, canary, lower_ra + pac,
// peephole, each gated by its flag (refine_div always runs).
PipelineResult apply_pipeline(const Program& p, const PassConfig& cfg);

}  // namespace rtlv

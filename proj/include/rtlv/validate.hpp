// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtlv/passes.hpp"
#include "rtlv/relations.hpp"
#include "rtlv/semantics.hpp"

namespace rtlv {

enum class MatchKind {
  PlainLessdef,  // registers and memory pointwise lessdef
  Extension,     // transformed frames may be larger; canary obligations
  Injection,     // block-level injection, evolving with the frame stack
  SlotEncode,    // equal except return-address slots signed on the right
};

enum class SyncPolicy { Lockstep, Plus, Star };

struct MatchSpec {
  MatchKind kind = MatchKind::PlainLessdef;
  SyncPolicy policy = SyncPolicy::Lockstep;
  int max_k = 16;
  CanarySpec canaries;  // Extension only
  RaSpec ra;            // SlotEncode only
};

enum class RejectReason {
  None,
  TraceMismatch,
  RelationViolation,
  NoMatchingStep,
  FuelExhausted,
};

const char* to_string(RejectReason r);

struct Counterexample {
  std::uint64_t orig_step = 0;
  std::string original;
  std::string transformed;
  std::string detail;
};

struct SyncSummary {
  std::uint64_t syncs = 0;
  std::uint64_t stutters = 0;
  std::uint64_t relation_checks = 0;
  std::uint64_t max_window = 0;
};

struct Verdict {
  bool accepted = false;
  RejectReason reason = RejectReason::None;
  std::string note;
  std::optional<Counterexample> counterexample;
  SyncSummary summary;
};

std::string render(const Verdict& v);

// Differential co-execution: drive the original one step at a time and make
// the transformed keep up within the policy's step window, checking the match
// relation at every synchronization point and the traces against each other.
// A stuck original ends the comparison early: the transformed trace only has
// to extend what was observed.
Verdict cosim_run(const Program& original, const Program& transformed,
                  const MatchSpec& spec, const std::vector<Value>& args,
                  std::uint64_t fuel = 1'000'000, std::uint64_t canary_seed = 0);

// Reconstruct the injection-map evolution from two allocation logs.
// loop_reallocs lists indices into the original log whose allocations have no
// transformed counterpart (frames re-entered through an eliminated tail
// call); these map onto the transformed side's current frame instead.
struct InjectionTrace {
  bool ok = false;
  std::string error;
  std::vector<InjectionMap> evolution;
};

InjectionTrace track_injection(const std::vector<AllocEvent>& original_log,
                               const std::vector<AllocEvent>& transformed_log,
                               const std::vector<std::size_t>& loop_reallocs);

// Every frame block on the stack stays within its declared size: no
// accessible offset at or past Function::stacksize.
bool check_weakly_allocated(const Program& p, const State& s);

// Build the (original, transformed, MatchSpec) triple that validates one
// named pass: refine_div, tailcall, tailrec, canary, lower_ra, pac, peephole.
// Passes later in the pipeline validate against their immediate predecessor.
struct PassCheck {
  Program original;
  Program transformed;
  MatchSpec spec;
};

std::optional<PassCheck> prepare_pass_validation(const Program& p,
                                                 const std::string& pass,
                                                 std::uint64_t canary_seed,
                                                 PassBug bug = PassBug::None,
                                                 std::string* error = nullptr);

const std::vector<std::string>& validated_pass_names();

}  // namespace rtlv

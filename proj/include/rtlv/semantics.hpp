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
#include "rtlv/memory.hpp"

namespace rtlv {

// Register bank. Registers not present hold Vundef.
using RegMap = std::map<Reg, Value>;

Value reg_get(const RegMap& regs, const Reg& r);

// One suspended activation. caller_sp is the caller's frame pointer; ret_node
// is the node the caller resumes at, and ret_dst the register receiving the
// returned value there.
struct Frame {
  Reg ret_dst;
  std::string caller;
  RegMap caller_regs;
  Node ret_node = 0;
  Value caller_sp;
};

enum class StuckReason {
  DivideError,
  UndefCondition,
  MemFault,
  BadReturnAddress,
  UndefObservable,
  ArityMismatch,
  JumptableRange,
};

const char* to_string(StuckReason r);

struct RegularState {
  std::vector<Frame> stack;
  std::string fn;
  Value sp;  // Vptr(frame block, 0)
  Node pc = 0;
  RegMap regs;
  Memory mem;
};

struct CallState {
  std::vector<Frame> stack;
  std::string callee;
  std::vector<Value> args;
  Memory mem;
};

// resume overrides the frame's ret_node when set (returns through a code
// value can land anywhere in the caller); the returned value is only written
// to the frame's destination when the resume target is the legitimate one.
struct ReturnState {
  std::vector<Frame> stack;
  Value value;
  Memory mem;
  std::optional<Node> resume;
};

struct FinalState {
  Value value;
  Memory mem;
};

struct AbortedState {
  std::string msg;
};

struct StuckState {
  StuckReason reason = StuckReason::MemFault;
  std::string fn;
  Node node = 0;
  std::string detail;
};

using State = std::variant<RegularState, CallState, ReturnState, FinalState,
                           AbortedState, StuckState>;

bool state_done(const State& s);
std::string state_kind_name(const State& s);

struct Event {
  enum class Kind { ExtCall, Abort };
  Kind kind = Kind::ExtCall;
  std::string name;                 // builtin name, or the abort message
  std::vector<std::int64_t> args;   // defined integers only

  bool operator==(const Event&) const = default;
};

std::string render(const Event& e);

struct AllocEvent {
  enum class Kind { Alloc, Free };
  Kind kind = Kind::Alloc;
  BlockId block = 0;
  std::int64_t size = 0;

  bool operator==(const AllocEvent&) const = default;
};

struct ExecStats {
  std::uint64_t steps = 0;
  std::uint64_t allocs = 0;
  std::uint64_t frees = 0;
  std::uint64_t max_live_frames = 0;
};

// The abort message the canary failure builtin emits.
extern const char* const kStackSmashMsg;

// Everything a step may read besides the state: the per-run canary value.
struct StepCtx {
  Value canary;
};

// Per-run pseudo-random canary derivation; never zero and stable per seed.
Value canary_value(std::uint64_t seed);

// Context for evaluating a pure operation.
struct EvalCtx {
  Value canary;
  Value sp;
  Value ra;
  const Memory* mem = nullptr;  // for pointer comparisons
};

// Total evaluation of one operation. Strict in Vundef except Move, which
// copies any value. DivStrict by zero evaluates to Vundef here; the step
// relation turns it into a stuck state instead.
Value eval_op(const Operation& op, const std::vector<Value>& args, const EvalCtx& ctx);

struct StepResult {
  State next;
  std::vector<Event> events;
  std::vector<AllocEvent> allocs;
};

// One small-step transition. Final/Aborted/Stuck states step to themselves.
StepResult step(const Program& p, State s, const StepCtx& ctx);

// A stepped execution with its accumulated trace, allocation log and stats.
class Execution {
 public:
  Execution(const Program& p, std::vector<Value> args, std::uint64_t canary_seed,
            bool concrete_int_bytes = false);

  const State& state() const { return state_; }
  const Program& program() const { return *program_; }
  bool done() const { return state_done(state_); }
  void step();

  const std::vector<Event>& trace() const { return trace_; }
  const std::vector<AllocEvent>& alloc_log() const { return alloc_log_; }
  const ExecStats& stats() const { return stats_; }
  const Value& canary() const { return ctx_.canary; }

 private:
  const Program* program_;
  State state_;
  StepCtx ctx_;
  std::vector<Event> trace_;
  std::vector<AllocEvent> alloc_log_;
  ExecStats stats_;
  std::uint64_t live_frames_ = 0;
};

struct RunOptions {
  std::uint64_t fuel = 10'000'000;
  std::uint64_t canary_seed = 0;
  bool concrete_int_bytes = false;
};

struct RunResult {
  enum class Kind { Final, Aborted, Stuck, OutOfFuel };
  Kind kind = Kind::Final;
  Value value;            // Final only
  std::string abort_msg;  // Aborted only
  StuckState stuck;       // Stuck only
  std::vector<Event> trace;
  std::vector<AllocEvent> alloc_log;
  ExecStats stats;
};

RunResult run(const Program& p, std::vector<Value> args, const RunOptions& opt = {});

const char* to_string(RunResult::Kind k);

// Process exit code convention: Final 0, Stuck 2, Aborted 3, OutOfFuel 4.
int exit_code(RunResult::Kind k);

}  // namespace rtlv

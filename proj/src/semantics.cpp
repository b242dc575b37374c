// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/semantics.hpp"

#include <cassert>
#include <limits>
#include <sstream>
#include <utility>

namespace rtlv {

const char* const kStackSmashMsg = "*** stack smashing detected ***: terminated";

Value reg_get(const RegMap& regs, const Reg& r) {
  auto it = regs.find(r);
  return it == regs.end() ? Value::undef() : it->second;
}

const char* to_string(StuckReason r) {
  switch (r) {
    case StuckReason::DivideError: return "DivideError";
    case StuckReason::UndefCondition: return "UndefCondition";
    case StuckReason::MemFault: return "MemFault";
    case StuckReason::BadReturnAddress: return "BadReturnAddress";
    case StuckReason::UndefObservable: return "UndefObservable";
    case StuckReason::ArityMismatch: return "ArityMismatch";
    case StuckReason::JumptableRange: return "JumptableRange";
  }
  return "?";
}

bool state_done(const State& s) {
  return std::holds_alternative<FinalState>(s) ||
         std::holds_alternative<AbortedState>(s) ||
         std::holds_alternative<StuckState>(s);
}

std::string state_kind_name(const State& s) {
  if (std::holds_alternative<RegularState>(s)) return "regular";
  if (std::holds_alternative<CallState>(s)) return "call";
  if (std::holds_alternative<ReturnState>(s)) return "return";
  if (std::holds_alternative<FinalState>(s)) return "final";
  if (std::holds_alternative<AbortedState>(s)) return "aborted";
  return "stuck";
}

std::string render(const Event& e) {
  std::ostringstream os;
  if (e.kind == Event::Kind::Abort) {
    os << "abort: " << e.name;
    return os.str();
  }
  os << "extcall " << e.name << "(";
  for (std::size_t i = 0; i < e.args.size(); ++i) {
    if (i) os << ", ";
    os << e.args[i];
  }
  os << ")";
  return os.str();
}

Value canary_value(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  if (z == 0) z = 0x9E3779B97F4A7C15ull;
  return Value::integer(static_cast<std::int64_t>(z));
}

namespace {

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) +
                                   static_cast<std::uint64_t>(b));
}

std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) -
                                   static_cast<std::uint64_t>(b));
}

std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) *
                                   static_cast<std::uint64_t>(b));
}

std::int64_t quotient(std::int64_t a, std::int64_t b) {
  // b != 0. The one overflowing case wraps.
  if (a == std::numeric_limits<std::int64_t>::min() && b == -1) return a;
  return a / b;
}

Value cmp_eq_value(const Value& a, const Value& b, const Memory* m) {
  if (a.is_int() && b.is_int()) {
    return Value::integer(a.as_int() == b.as_int() ? 1 : 0);
  }
  if (a.is_ptr() && b.is_ptr()) {
    const Vptr& pa = a.as_ptr();
    const Vptr& pb = b.as_ptr();
    if (pa.block == pb.block) {
      return Value::integer(pa.off == pb.off ? 1 : 0);
    }
    if (m && m->is_live(pa.block) && m->is_live(pb.block)) {
      return Value::integer(0);
    }
  }
  return Value::undef();
}

bool weakly_valid(const Memory& m, BlockId b, std::int64_t off) {
  return m.is_live(b) && off >= 0 && off <= m.size_of(b);
}

Value cmp_lt_value(const Value& a, const Value& b, const Memory* m) {
  if (a.is_int() && b.is_int()) {
    return Value::integer(a.as_int() < b.as_int() ? 1 : 0);
  }
  if (a.is_ptr() && b.is_ptr() && m) {
    const Vptr& pa = a.as_ptr();
    const Vptr& pb = b.as_ptr();
    if (pa.block == pb.block && weakly_valid(*m, pa.block, pa.off) &&
        weakly_valid(*m, pb.block, pb.off)) {
      return Value::integer(pa.off < pb.off ? 1 : 0);
    }
  }
  return Value::undef();
}

Value pac_encode_value(const Value& v, const Value& mod) {
  if (v.is_undef() || mod.is_undef()) return Value::undef();
  if (!v.is_ptr() && !v.is_code()) return Value::undef();
  return Value::enc(v, mod);
}

Value pac_decode_value(const Value& v, const Value& mod) {
  if (!v.is_enc()) return Value::undef();
  const Venc& e = v.as_enc();
  if (e.key != PacKey::A) return Value::undef();
  if (!(*e.modifier == mod)) return Value::undef();
  return *e.inner;
}

}  // namespace

Value eval_op(const Operation& op, const std::vector<Value>& args, const EvalCtx& ctx) {
  switch (op.op) {
    case Opcode::Const:
      return Value::integer(op.imm);
    case Opcode::Move:
      return args[0];
    case Opcode::GetCanary:
      return ctx.canary;
    case Opcode::GetSp:
      return ctx.sp;
    case Opcode::GetRa:
      return ctx.ra;
    case Opcode::CodeAddr:
      return Value::code(op.fn, op.node);
    case Opcode::Add:
      if (args[0].is_int() && args[1].is_int())
        return Value::integer(wrap_add(args[0].as_int(), args[1].as_int()));
      return Value::undef();
    case Opcode::Sub:
      if (args[0].is_int() && args[1].is_int())
        return Value::integer(wrap_sub(args[0].as_int(), args[1].as_int()));
      return Value::undef();
    case Opcode::Mul:
      if (args[0].is_int() && args[1].is_int())
        return Value::integer(wrap_mul(args[0].as_int(), args[1].as_int()));
      return Value::undef();
    case Opcode::DivStrict:
    case Opcode::DivTotal:
      if (args[0].is_int() && args[1].is_int() && args[1].as_int() != 0)
        return Value::integer(quotient(args[0].as_int(), args[1].as_int()));
      return Value::undef();
    case Opcode::AddPtr:
      if (args[0].is_ptr() && args[1].is_int()) {
        const Vptr& p = args[0].as_ptr();
        return Value::pointer(p.block, wrap_add(p.off, args[1].as_int()));
      }
      return Value::undef();
    case Opcode::CmpEq:
      return cmp_eq_value(args[0], args[1], ctx.mem);
    case Opcode::CmpLt:
      return cmp_lt_value(args[0], args[1], ctx.mem);
    case Opcode::PacEncode:
      return pac_encode_value(args[0], args[1]);
    case Opcode::PacDecode:
      return pac_decode_value(args[0], args[1]);
  }
  return Value::undef();
}

namespace {

Value ra_of(const std::vector<Frame>& stack) {
  if (stack.empty()) return Value::undef();
  const Frame& f = stack.back();
  return Value::code(f.caller, f.ret_node);
}

StepResult stuck(StuckReason reason, std::string fn, Node node, std::string detail = {}) {
  StepResult r;
  r.next = StuckState{reason, std::move(fn), node, std::move(detail)};
  return r;
}

// The reserved register a lowered epilogue moves the return value into; an
// Iretvia reads it back as the value handed to the caller.
const char* const kRetValueReg = "$tret";

// Shared tail of Iretvia and Iretaa: `target` is the prospective return
// location (for Iretaa, already authenticated). It must name a node of the
// immediate caller; anything else is an irrecoverable control transfer.
StepResult step_retvia(const Program& p, RegularState st, Value target) {
  if (st.stack.empty()) {
    return stuck(StuckReason::BadReturnAddress, st.fn, st.pc, "return with empty stack");
  }
  if (!target.is_code()) {
    return stuck(StuckReason::BadReturnAddress, st.fn, st.pc,
                 "return target is " + to_string(target));
  }
  const Vcode& c = target.as_code();
  const Frame& top = st.stack.back();
  if (c.fn != top.caller) {
    return stuck(StuckReason::BadReturnAddress, st.fn, st.pc,
                 "return into foreign function " + c.fn);
  }
  const Function* cf = p.find(c.fn);
  if (!cf || cf->code.find(c.node) == cf->code.end()) {
    return stuck(StuckReason::BadReturnAddress, st.fn, st.pc,
                 "return to nonexistent node " + std::to_string(c.node));
  }
  Value v = reg_get(st.regs, kRetValueReg);
  StepResult r;
  const Vptr& sp = st.sp.as_ptr();
  std::int64_t size = st.mem.size_of(sp.block);
  if (st.mem.free_block(sp.block)) {
    return stuck(StuckReason::MemFault, st.fn, st.pc, "frame already freed");
  }
  r.allocs.push_back({AllocEvent::Kind::Free, sp.block, size});
  r.next = ReturnState{std::move(st.stack), std::move(v), std::move(st.mem), c.node};
  return r;
}

StepResult step_regular(const Program& p, RegularState st, const StepCtx& ctx) {
  const Function* f = p.find(st.fn);
  if (!f) return stuck(StuckReason::MemFault, st.fn, st.pc, "unknown function");
  auto it = f->code.find(st.pc);
  if (it == f->code.end()) {
    return stuck(StuckReason::MemFault, st.fn, st.pc, "no instruction at node");
  }
  const Instr& ins = it->second;
  StepResult r;

  auto free_frame = [&](Memory& mem) -> bool {
    const Vptr& sp = st.sp.as_ptr();
    std::int64_t size = mem.size_of(sp.block);
    if (mem.free_block(sp.block)) return false;
    r.allocs.push_back({AllocEvent::Kind::Free, sp.block, size});
    return true;
  };

  if (const auto* op = std::get_if<Iop>(&ins)) {
    std::vector<Value> args;
    args.reserve(op->args.size());
    for (const Reg& a : op->args) args.push_back(reg_get(st.regs, a));
    if (op->op.op == Opcode::DivStrict) {
      if (!args[0].is_int() || !args[1].is_int()) {
        return stuck(StuckReason::DivideError, st.fn, st.pc, "undefined operand");
      }
      if (args[1].as_int() == 0) {
        return stuck(StuckReason::DivideError, st.fn, st.pc, "division by zero");
      }
    }
    EvalCtx ectx{ctx.canary, st.sp, ra_of(st.stack), &st.mem};
    Value v = eval_op(op->op, args, ectx);
    st.regs[op->dst] = std::move(v);
    st.pc = op->succ;
    r.next = std::move(st);
    return r;
  }

  if (const auto* ld = std::get_if<Iload>(&ins)) {
    Value addr = reg_get(st.regs, ld->addr);
    if (!addr.is_ptr()) {
      return stuck(StuckReason::MemFault, st.fn, st.pc, "load address is not a pointer");
    }
    const Vptr& ptr = addr.as_ptr();
    auto res = st.mem.load64(ptr.block, ptr.off + ld->off);
    if (!load_ok(res)) {
      return stuck(StuckReason::MemFault, st.fn, st.pc, to_string(load_err(res)));
    }
    st.regs[ld->dst] = loaded(res);
    st.pc = ld->succ;
    r.next = std::move(st);
    return r;
  }

  if (const auto* sto = std::get_if<Istore>(&ins)) {
    Value addr = reg_get(st.regs, sto->addr);
    if (!addr.is_ptr()) {
      return stuck(StuckReason::MemFault, st.fn, st.pc, "store address is not a pointer");
    }
    const Vptr& ptr = addr.as_ptr();
    if (auto e = st.mem.store64(ptr.block, ptr.off + sto->off, reg_get(st.regs, sto->src))) {
      return stuck(StuckReason::MemFault, st.fn, st.pc, to_string(*e));
    }
    st.pc = sto->succ;
    r.next = std::move(st);
    return r;
  }

  if (const auto* call = std::get_if<Icall>(&ins)) {
    std::vector<Value> args;
    args.reserve(call->args.size());
    for (const Reg& a : call->args) args.push_back(reg_get(st.regs, a));
    Frame frame;
    frame.ret_dst = call->dst;
    frame.caller = st.fn;
    frame.caller_regs = st.regs;
    frame.ret_node = call->succ;
    frame.caller_sp = st.sp;
    std::vector<Frame> stack = std::move(st.stack);
    stack.push_back(std::move(frame));
    r.next = CallState{std::move(stack), call->callee, std::move(args), std::move(st.mem)};
    return r;
  }

  if (const auto* tc = std::get_if<Itailcall>(&ins)) {
    std::vector<Value> args;
    args.reserve(tc->args.size());
    for (const Reg& a : tc->args) args.push_back(reg_get(st.regs, a));
    if (!free_frame(st.mem)) {
      return stuck(StuckReason::MemFault, st.fn, st.pc, "frame already freed");
    }
    r.next = CallState{std::move(st.stack), tc->callee, std::move(args), std::move(st.mem)};
    return r;
  }

  if (const auto* c = std::get_if<Icond>(&ins)) {
    Value a = reg_get(st.regs, c->a);
    Value b = reg_get(st.regs, c->b);
    Value base;
    bool negate = false;
    switch (c->cond) {
      case Cond::Eq: base = cmp_eq_value(a, b, &st.mem); break;
      case Cond::Ne: base = cmp_eq_value(a, b, &st.mem); negate = true; break;
      case Cond::Lt: base = cmp_lt_value(a, b, &st.mem); break;
      case Cond::Ge: base = cmp_lt_value(a, b, &st.mem); negate = true; break;
    }
    if (!base.is_int()) {
      return stuck(StuckReason::UndefCondition, st.fn, st.pc,
                   std::string(cond_name(c->cond)) + " on undefined operands");
    }
    bool taken = base.as_int() != 0;
    if (negate) taken = !taken;
    st.pc = taken ? c->if_true : c->if_false;
    r.next = std::move(st);
    return r;
  }

  if (const auto* jt = std::get_if<Ijumptable>(&ins)) {
    Value idx = reg_get(st.regs, jt->index);
    if (!idx.is_int()) {
      return stuck(StuckReason::JumptableRange, st.fn, st.pc, "index is not a defined integer");
    }
    std::int64_t i = idx.as_int();
    if (i < 0 || i >= static_cast<std::int64_t>(jt->targets.size())) {
      return stuck(StuckReason::JumptableRange, st.fn, st.pc,
                   "index " + std::to_string(i) + " out of range");
    }
    st.pc = jt->targets[static_cast<std::size_t>(i)];
    r.next = std::move(st);
    return r;
  }

  if (const auto* ret = std::get_if<Ireturn>(&ins)) {
    Value v = ret->src ? reg_get(st.regs, *ret->src) : Value::undef();
    if (!free_frame(st.mem)) {
      return stuck(StuckReason::MemFault, st.fn, st.pc, "frame already freed");
    }
    r.next = ReturnState{std::move(st.stack), std::move(v), std::move(st.mem), std::nullopt};
    return r;
  }

  if (const auto* rv = std::get_if<Iretvia>(&ins)) {
    Value target = reg_get(st.regs, rv->src);
    return step_retvia(p, std::move(st), std::move(target));
  }

  if (const auto* ra = std::get_if<Iretaa>(&ins)) {
    Value target = pac_decode_value(reg_get(st.regs, ra->src), st.sp);
    return step_retvia(p, std::move(st), std::move(target));
  }

  const auto& ext = std::get<Iextcall>(ins);
  if (ext.name == kBuiltinStackChkFail) {
    r.events.push_back(Event{Event::Kind::Abort, kStackSmashMsg, {}});
    r.next = AbortedState{kStackSmashMsg};
    return r;
  }
  if (ext.name == kBuiltinPrintInt) {
    if (ext.args.size() != 1) {
      return stuck(StuckReason::ArityMismatch, st.fn, st.pc, "print_int takes one argument");
    }
    Value v = reg_get(st.regs, ext.args[0]);
    if (!v.is_int()) {
      return stuck(StuckReason::UndefObservable, st.fn, st.pc,
                   "print_int of " + to_string(v));
    }
    r.events.push_back(Event{Event::Kind::ExtCall, ext.name, {v.as_int()}});
    st.regs[ext.dst] = Value::undef();
    st.pc = ext.succ;
    r.next = std::move(st);
    return r;
  }
  return stuck(StuckReason::UndefObservable, st.fn, st.pc, "unknown builtin " + ext.name);
}

}  // namespace

StepResult step(const Program& p, State s, const StepCtx& ctx) {
  if (state_done(s)) {
    StepResult r;
    r.next = std::move(s);
    return r;
  }

  if (auto* st = std::get_if<RegularState>(&s)) {
    return step_regular(p, std::move(*st), ctx);
  }

  if (auto* cs = std::get_if<CallState>(&s)) {
    StepResult r;
    if (is_builtin(cs->callee)) {
      // A direct Icall to a builtin behaves like the extcall plus a return.
      if (cs->callee == kBuiltinStackChkFail) {
        r.events.push_back(Event{Event::Kind::Abort, kStackSmashMsg, {}});
        r.next = AbortedState{kStackSmashMsg};
        return r;
      }
      if (cs->args.size() != 1) {
        return stuck(StuckReason::ArityMismatch, cs->callee, 0, "print_int takes one argument");
      }
      if (!cs->args[0].is_int()) {
        return stuck(StuckReason::UndefObservable, cs->callee, 0,
                     "print_int of " + to_string(cs->args[0]));
      }
      r.events.push_back(Event{Event::Kind::ExtCall, cs->callee, {cs->args[0].as_int()}});
      r.next = ReturnState{std::move(cs->stack), Value::undef(), std::move(cs->mem), std::nullopt};
      return r;
    }
    const Function* f = p.find(cs->callee);
    if (!f) {
      return stuck(StuckReason::MemFault, cs->callee, 0, "call to unknown function");
    }
    if (cs->args.size() != f->params.size()) {
      return stuck(StuckReason::ArityMismatch, cs->callee, f->entry,
                   "expected " + std::to_string(f->params.size()) + " arguments, got " +
                       std::to_string(cs->args.size()));
    }
    BlockId b = cs->mem.alloc(f->stacksize);
    r.allocs.push_back({AllocEvent::Kind::Alloc, b, f->stacksize});
    RegMap regs;
    for (std::size_t i = 0; i < f->params.size(); ++i) {
      regs[f->params[i]] = cs->args[i];
    }
    r.next = RegularState{std::move(cs->stack), cs->callee, Value::pointer(b, 0),
                          f->entry, std::move(regs), std::move(cs->mem)};
    return r;
  }

  auto& rs = std::get<ReturnState>(s);
  StepResult r;
  if (rs.stack.empty()) {
    r.next = FinalState{std::move(rs.value), std::move(rs.mem)};
    return r;
  }
  Frame frame = std::move(rs.stack.back());
  rs.stack.pop_back();
  Node target = rs.resume.value_or(frame.ret_node);
  RegMap regs = std::move(frame.caller_regs);
  if (!rs.resume || *rs.resume == frame.ret_node) {
    regs[frame.ret_dst] = rs.value;
  }
  r.next = RegularState{std::move(rs.stack), frame.caller, frame.caller_sp,
                        target, std::move(regs), std::move(rs.mem)};
  return r;
}

Execution::Execution(const Program& p, std::vector<Value> args, std::uint64_t canary_seed,
                     bool concrete_int_bytes)
    : program_(&p),
      state_(CallState{{}, p.main, std::move(args), Memory(concrete_int_bytes)}),
      ctx_{canary_value(canary_seed)} {}

void Execution::step() {
  if (done()) return;
  StepResult r = rtlv::step(*program_, std::move(state_), ctx_);
  state_ = std::move(r.next);
  ++stats_.steps;
  for (const Event& e : r.events) trace_.push_back(e);
  for (const AllocEvent& a : r.allocs) {
    alloc_log_.push_back(a);
    if (a.kind == AllocEvent::Kind::Alloc) {
      ++stats_.allocs;
      ++live_frames_;
      if (live_frames_ > stats_.max_live_frames) stats_.max_live_frames = live_frames_;
    } else {
      ++stats_.frees;
      --live_frames_;
    }
  }
}

RunResult run(const Program& p, std::vector<Value> args, const RunOptions& opt) {
  Execution e(p, std::move(args), opt.canary_seed, opt.concrete_int_bytes);
  while (!e.done() && e.stats().steps < opt.fuel) {
    e.step();
  }
  RunResult res;
  res.trace = e.trace();
  res.alloc_log = e.alloc_log();
  res.stats = e.stats();
  if (!e.done()) {
    res.kind = RunResult::Kind::OutOfFuel;
  } else if (const auto* f = std::get_if<FinalState>(&e.state())) {
    res.kind = RunResult::Kind::Final;
    res.value = f->value;
  } else if (const auto* a = std::get_if<AbortedState>(&e.state())) {
    res.kind = RunResult::Kind::Aborted;
    res.abort_msg = a->msg;
  } else {
    res.kind = RunResult::Kind::Stuck;
    res.stuck = std::get<StuckState>(e.state());
  }
  return res;
}

const char* to_string(RunResult::Kind k) {
  switch (k) {
    case RunResult::Kind::Final: return "final";
    case RunResult::Kind::Aborted: return "aborted";
    case RunResult::Kind::Stuck: return "stuck";
    case RunResult::Kind::OutOfFuel: return "out-of-fuel";
  }
  return "?";
}

int exit_code(RunResult::Kind k) {
  switch (k) {
    case RunResult::Kind::Final: return 0;
    case RunResult::Kind::Stuck: return 2;
    case RunResult::Kind::Aborted: return 3;
    case RunResult::Kind::OutOfFuel: return 4;
  }
  return 1;
}

}  // namespace rtlv

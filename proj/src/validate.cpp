// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/validate.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace rtlv {

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::TraceMismatch: return "trace-mismatch";
    case RejectReason::RelationViolation: return "relation-violation";
    case RejectReason::NoMatchingStep: return "no-matching-step";
    case RejectReason::FuelExhausted: return "fuel-exhausted";
  }
  return "?";
}

namespace {

struct Activation {
  std::string fn;
  BlockId block = 0;
};

std::vector<Activation> activations(const State& s) {
  std::vector<Activation> out;
  const std::vector<Frame>* stack = nullptr;
  if (const auto* r = std::get_if<RegularState>(&s)) {
    stack = &r->stack;
  } else if (const auto* c = std::get_if<CallState>(&s)) {
    stack = &c->stack;
  } else if (const auto* ret = std::get_if<ReturnState>(&s)) {
    stack = &ret->stack;
  }
  if (!stack) return out;
  for (const Frame& f : *stack) {
    if (f.caller_sp.is_ptr()) out.push_back({f.caller, f.caller_sp.as_ptr().block});
  }
  if (const auto* r = std::get_if<RegularState>(&s)) {
    if (r->sp.is_ptr()) out.push_back({r->fn, r->sp.as_ptr().block});
  }
  return out;
}

std::string state_brief(const State& s) {
  std::ostringstream os;
  if (const auto* r = std::get_if<RegularState>(&s)) {
    os << "regular " << r->fn << "@" << r->pc << " depth=" << r->stack.size() + 1;
  } else if (const auto* c = std::get_if<CallState>(&s)) {
    os << "call " << c->callee << " depth=" << c->stack.size();
  } else if (const auto* ret = std::get_if<ReturnState>(&s)) {
    os << "return " << to_string(ret->value) << " depth=" << ret->stack.size();
    if (ret->resume) os << " resume=" << *ret->resume;
  } else if (const auto* f = std::get_if<FinalState>(&s)) {
    os << "final " << to_string(f->value);
  } else if (const auto* a = std::get_if<AbortedState>(&s)) {
    os << "aborted \"" << a->msg << "\"";
  } else {
    const auto& st = std::get<StuckState>(s);
    os << "stuck " << to_string(st.reason) << " at " << st.fn << "@" << st.node;
    if (!st.detail.empty()) os << " (" << st.detail << ")";
  }
  return os.str();
}

// What the transformed side did while covering one original step.
struct Window {
  std::vector<Event> events;
  std::vector<AllocEvent> allocs;
  bool saw_getcanary = false;
  bool saw_cond = false;
};

// Replay one matched window onto the injection map: paired allocations map
// with delta 0, original allocations with no transformed counterpart map onto
// the transformed side's current frame (a reused tail-recursion frame), frees
// drop mappings on whichever side they happen.
std::optional<InjectionMap> evolve_injection(const InjectionMap& base,
                                             const std::vector<AllocEvent>& orig_events,
                                             const std::vector<AllocEvent>& window_events,
                                             const State& trans_state, std::string* why) {
  InjectionMap j = base;
  std::size_t cursor = 0;
  for (const AllocEvent& e : orig_events) {
    if (e.kind == AllocEvent::Kind::Free) {
      j.unmap(e.block);
      continue;
    }
    bool paired = false;
    while (cursor < window_events.size()) {
      const AllocEvent& t = window_events[cursor];
      ++cursor;
      if (t.kind == AllocEvent::Kind::Free) {
        j.unmap_targets(t.block);
        continue;
      }
      j.map(e.block, t.block, 0);
      paired = true;
      break;
    }
    if (!paired) {
      const auto* r = std::get_if<RegularState>(&trans_state);
      if (!r || !r->sp.is_ptr()) {
        if (why) *why = "allocation without counterpart and no current transformed frame";
        return std::nullopt;
      }
      j.map(e.block, r->sp.as_ptr().block, 0);
    }
  }
  for (; cursor < window_events.size(); ++cursor) {
    if (window_events[cursor].kind == AllocEvent::Kind::Free) {
      j.unmap_targets(window_events[cursor].block);
    }
  }
  return j;
}

class Matcher {
 public:
  explicit Matcher(const MatchSpec& spec) : spec_(spec) {}

  // Control compatibility: same state kind at the same program point. A
  // relation failure past this point blames the relation, not the schedule.
  bool control_matches(const State& so, const State& st) const {
    if (so.index() != st.index()) return false;
    if (const auto* ro = std::get_if<RegularState>(&so)) {
      const auto& rt = std::get<RegularState>(st);
      return ro->fn == rt.fn && ro->pc == rt.pc;
    }
    if (const auto* co = std::get_if<CallState>(&so)) {
      return co->callee == std::get<CallState>(st).callee;
    }
    return true;
  }

  bool full_match(const State& so, const State& st, const InjectionMap* inj,
                  std::string* why) const {
    if (so.index() != st.index()) {
      if (why) *why = "state kinds differ";
      return false;
    }
    if (const auto* ro = std::get_if<RegularState>(&so)) {
      const auto& rt = std::get<RegularState>(st);
      if (!depth_ok(ro->stack.size(), rt.stack.size(), why)) return false;
      const Value* mod = spec_.kind == MatchKind::SlotEncode ? &rt.sp : nullptr;
      if (!value_rel(ro->sp, rt.sp, inj, nullptr)) {
        if (why) *why = "stack pointers unrelated";
        return false;
      }
      for (const auto& [name, vo] : ro->regs) {
        if (!value_rel(vo, reg_get(rt.regs, name), inj, mod)) {
          if (why) {
            *why = "register " + name + ": " + to_string(vo) + " !~ " +
                   to_string(reg_get(rt.regs, name));
          }
          return false;
        }
      }
      for (const auto& [name, vt] : rt.regs) {
        if (ro->regs.count(name)) continue;
        if (!value_rel(Value::undef(), vt, inj, mod)) {
          if (why) *why = "register " + name + " unrelated";
          return false;
        }
      }
      return mem_rel(ro->mem, rt.mem, so, st, inj, why);
    }
    if (const auto* co = std::get_if<CallState>(&so)) {
      const auto& ct = std::get<CallState>(st);
      if (!depth_ok(co->stack.size(), ct.stack.size(), why)) return false;
      if (co->args.size() != ct.args.size()) {
        if (why) *why = "argument count differs";
        return false;
      }
      for (std::size_t i = 0; i < co->args.size(); ++i) {
        if (!value_rel(co->args[i], ct.args[i], inj, nullptr)) {
          if (why) {
            *why = "argument " + std::to_string(i) + ": " + to_string(co->args[i]) +
                   " !~ " + to_string(ct.args[i]);
          }
          return false;
        }
      }
      return mem_rel(co->mem, ct.mem, so, st, inj, why);
    }
    if (const auto* uo = std::get_if<ReturnState>(&so)) {
      const auto& ut = std::get<ReturnState>(st);
      if (!depth_ok(uo->stack.size(), ut.stack.size(), why)) return false;
      if (!value_rel(uo->value, ut.value, inj, nullptr)) {
        if (why) {
          *why = "return value " + to_string(uo->value) + " !~ " + to_string(ut.value);
        }
        return false;
      }
      if (spec_.kind != MatchKind::Injection && !uo->stack.empty() && !ut.stack.empty()) {
        Node eo = uo->resume.value_or(uo->stack.back().ret_node);
        Node et = ut.resume.value_or(ut.stack.back().ret_node);
        bool lo = !uo->resume || *uo->resume == uo->stack.back().ret_node;
        bool lt = !ut.resume || *ut.resume == ut.stack.back().ret_node;
        if (eo != et || lo != lt) {
          if (why) *why = "return resumes at different nodes";
          return false;
        }
      }
      return mem_rel(uo->mem, ut.mem, so, st, inj, why);
    }
    if (const auto* fo = std::get_if<FinalState>(&so)) {
      const auto& ft = std::get<FinalState>(st);
      if (!value_rel(fo->value, ft.value, inj, nullptr)) {
        if (why) {
          *why = "final value " + to_string(fo->value) + " !~ " + to_string(ft.value);
        }
        return false;
      }
      return mem_rel(fo->mem, ft.mem, so, st, inj, why);
    }
    if (const auto* ao = std::get_if<AbortedState>(&so)) {
      if (ao->msg != std::get<AbortedState>(st).msg) {
        if (why) *why = "abort messages differ";
        return false;
      }
      return true;
    }
    if (why) *why = "state kinds differ";
    return false;
  }

 private:
  bool depth_ok(std::size_t d_o, std::size_t d_t, std::string* why) const {
    if (spec_.kind == MatchKind::Injection) return true;
    if (d_o == d_t) return true;
    if (why) *why = "stack depths differ";
    return false;
  }

  bool value_rel(const Value& vo, const Value& vt, const InjectionMap* inj,
                 const Value* enc_modifier) const {
    switch (spec_.kind) {
      case MatchKind::PlainLessdef:
      case MatchKind::Extension:
        return lessdef(vo, vt);
      case MatchKind::Injection:
        return inject_match(*inj, vo, vt);
      case MatchKind::SlotEncode: {
        if (lessdef(vo, vt)) return true;
        if (enc_modifier && vt.is_enc()) {
          const Venc& e = vt.as_enc();
          return e.key == PacKey::A && *e.inner == vo && *e.modifier == *enc_modifier;
        }
        return false;
      }
    }
    return false;
  }

  bool mem_rel(const Memory& mo, const Memory& mt, const State& so, const State& st,
               const InjectionMap* inj, std::string* why) const {
    switch (spec_.kind) {
      case MatchKind::PlainLessdef:
        if (!extends(mo, mt)) {
          if (why) *why = "memories not pointwise related";
          return false;
        }
        return true;
      case MatchKind::Extension:
        if (!extends(mo, mt)) {
          if (why) *why = "transformed memory does not extend the original";
          return false;
        }
        return canary_obligation(mt, st, why);
      case MatchKind::Injection:
        if (!injection_wellformed(*inj, mo, mt)) {
          if (why) *why = "injection map ill-formed";
          return false;
        }
        if (!mem_inject(*inj, mo, mt)) {
          if (why) *why = "memories unrelated under the injection";
          return false;
        }
        return true;
      case MatchKind::SlotEncode:
        return slot_encode_mem(mo, mt, so, why);
    }
    return false;
  }

  // Every live protected frame of the transformed state must hold the runtime
  // canary at its slot.
  bool canary_obligation(const Memory& mt, const State& st, std::string* why) const {
    if (spec_.canaries.offsets.empty()) return true;
    for (const Activation& a : activations(st)) {
      if (!spec_.canaries.protects(a.fn)) continue;
      std::int64_t off = spec_.canaries.offsets.at(a.fn);
      auto res = mt.load64(a.block, off);
      if (!load_ok(res) || loaded(res) != spec_.canaries.value) {
        if (why) {
          *why = "frame of " + a.fn + " does not hold the canary at offset " +
                 std::to_string(off);
        }
        return false;
      }
    }
    return true;
  }

  // Like extends, but a return-address slot of a lowered function may hold
  // the signed form of the original's value, keyed by that frame's pointer.
  bool slot_encode_mem(const Memory& mo, const Memory& mt, const State& so,
                       std::string* why) const {
    std::map<BlockId, std::string> owner;
    for (const Activation& a : activations(so)) owner[a.block] = a.fn;
    for (const auto& [b, blk] : mo.blocks()) {
      if (!blk.live || blk.size == 0) continue;
      if (!mt.is_live(b) || mt.size_of(b) < blk.size) {
        if (why) *why = "block " + std::to_string(b) + " missing or too small";
        return false;
      }
      std::optional<std::int64_t> slot;
      auto oit = owner.find(b);
      if (oit != owner.end() && spec_.ra.lowered(oit->second)) {
        slot = spec_.ra.slots.at(oit->second).offset;
      }
      for (std::int64_t off = 0; off < blk.size; off += 8) {
        Value vo = loaded(mo.load64(b, off));
        Value vt = loaded(mt.load64(b, off));
        if (lessdef(vo, vt)) continue;
        if (slot && *slot == off && vt.is_enc()) {
          const Venc& e = vt.as_enc();
          if (e.key == PacKey::A && *e.inner == vo &&
              *e.modifier == Value::pointer(b, 0)) {
            continue;
          }
        }
        if (why) {
          *why = "block " + std::to_string(b) + " offset " + std::to_string(off) + ": " +
                 to_string(vo) + " !~ " + to_string(vt);
        }
        return false;
      }
    }
    return true;
  }

  const MatchSpec& spec_;
};

bool is_return_class(const Instr& ins) {
  return std::holds_alternative<Ireturn>(ins) || std::holds_alternative<Itailcall>(ins) ||
         std::holds_alternative<Iretvia>(ins) || std::holds_alternative<Iretaa>(ins);
}

}  // namespace

std::string render(const Verdict& v) {
  std::ostringstream os;
  if (v.accepted) {
    os << "accepted (syncs=" << v.summary.syncs << " stutters=" << v.summary.stutters
       << " max_window=" << v.summary.max_window << ")";
    if (!v.note.empty()) os << " note: " << v.note;
  } else {
    os << "rejected " << to_string(v.reason);
    if (v.counterexample) {
      os << " at original step " << v.counterexample->orig_step << ": original {"
         << v.counterexample->original << "} transformed {" << v.counterexample->transformed
         << "}";
      if (!v.counterexample->detail.empty()) os << " -- " << v.counterexample->detail;
    }
    if (!v.note.empty()) os << " note: " << v.note;
  }
  return os.str();
}

Verdict cosim_run(const Program& original, const Program& transformed,
                  const MatchSpec& spec, const std::vector<Value>& args,
                  std::uint64_t fuel, std::uint64_t canary_seed) {
  Verdict v;
  Execution orig(original, args, canary_seed);
  Execution trans(transformed, args, canary_seed);
  InjectionMap inj;
  Matcher matcher(spec);

  const int lo = spec.policy == SyncPolicy::Star ? 0 : 1;
  const int hi = spec.policy == SyncPolicy::Lockstep ? 1 : spec.max_k;

  auto reject = [&](RejectReason reason, const State& so, const State& st,
                    std::string detail) {
    v.accepted = false;
    v.reason = reason;
    Counterexample cx;
    cx.orig_step = orig.stats().steps;
    cx.original = state_brief(so);
    cx.transformed = state_brief(st);
    cx.detail = std::move(detail);
    v.counterexample = cx;
  };

  // The runs start in matching call states; check once before stepping.
  {
    std::string why;
    ++v.summary.relation_checks;
    if (!matcher.full_match(orig.state(), trans.state(), &inj, &why)) {
      reject(RejectReason::RelationViolation, orig.state(), trans.state(), why);
      return v;
    }
    ++v.summary.syncs;
  }

  int consecutive_stutters = 0;
  std::vector<AllocEvent> pending_orig_allocs;

  while (!state_done(orig.state())) {
    if (orig.stats().steps >= fuel) {
      reject(RejectReason::FuelExhausted, orig.state(), trans.state(),
             "original did not finish within " + std::to_string(fuel) + " steps");
      return v;
    }

    // Obligations attached to the original step about to run.
    bool want_canary_window = false;
    if (spec.kind == MatchKind::Extension && !spec.canaries.offsets.empty()) {
      if (const auto* r = std::get_if<RegularState>(&orig.state())) {
        if (spec.canaries.protects(r->fn)) {
          if (const Function* f = original.find(r->fn)) {
            auto it = f->code.find(r->pc);
            if (it != f->code.end() && is_return_class(it->second)) {
              want_canary_window = true;
            }
          }
        }
      }
    }

    std::size_t trace_before = orig.trace().size();
    std::size_t allocs_before = orig.alloc_log().size();
    orig.step();
    std::vector<Event> orig_events(orig.trace().begin() + trace_before, orig.trace().end());
    std::vector<AllocEvent> orig_allocs(orig.alloc_log().begin() + allocs_before,
                                        orig.alloc_log().end());

    if (std::holds_alternative<StuckState>(orig.state())) {
      // The original run ends in a stuck state: every behavior of the
      // transformed run extends the trace observed so far, which is all a
      // refinement has to preserve.
      v.accepted = true;
      v.note = "original stuck (" + state_brief(orig.state()) +
               "); transformed only needs to extend the observed trace";
      return v;
    }

    std::vector<AllocEvent> step_allocs = pending_orig_allocs;
    step_allocs.insert(step_allocs.end(), orig_allocs.begin(), orig_allocs.end());

    Execution saved = trans;
    Window window;
    bool matched = false;
    bool saw_trace_divergence = false;
    std::optional<std::pair<std::string, State>> relation_fail;

    for (int s = 0;; ++s) {
      if (s >= lo) {
        bool trace_ok = window.events == orig_events;
        if (!trace_ok && !window.events.empty()) {
          bool prefix = window.events.size() <= orig_events.size() &&
                        std::equal(window.events.begin(), window.events.end(),
                                   orig_events.begin());
          if (!prefix) saw_trace_divergence = true;
        }
        if (trace_ok) {
          std::string why;
          InjectionMap candidate = inj;
          bool evolved = true;
          if (spec.kind == MatchKind::Injection) {
            auto e = evolve_injection(inj, step_allocs, window.allocs, trans.state(), &why);
            if (e) {
              candidate = std::move(*e);
            } else {
              evolved = false;
            }
          }
          if (evolved) {
            ++v.summary.relation_checks;
            if (matcher.full_match(orig.state(), trans.state(), &candidate, &why)) {
              if (want_canary_window && !(window.saw_getcanary && window.saw_cond)) {
                relation_fail = {"transformed window has no canary recheck before "
                                 "giving up the frame",
                                 trans.state()};
              } else {
                inj = std::move(candidate);
                matched = true;
                ++v.summary.syncs;
                v.summary.max_window =
                    std::max<std::uint64_t>(v.summary.max_window, static_cast<std::uint64_t>(s));
                break;
              }
            } else if (matcher.control_matches(orig.state(), trans.state())) {
              relation_fail = {why, trans.state()};
            }
          } else if (matcher.control_matches(orig.state(), trans.state())) {
            relation_fail = {why, trans.state()};
          }
        }
      }
      if (s == hi || trans.done()) break;
      if (const auto* r = std::get_if<RegularState>(&trans.state())) {
        const Function* f = transformed.find(r->fn);
        if (f) {
          auto it = f->code.find(r->pc);
          if (it != f->code.end()) {
            if (const auto* op = std::get_if<Iop>(&it->second)) {
              if (op->op.op == Opcode::GetCanary) window.saw_getcanary = true;
            }
            if (std::holds_alternative<Icond>(it->second)) window.saw_cond = true;
          }
        }
      }
      std::size_t tb = trans.trace().size();
      std::size_t ab = trans.alloc_log().size();
      trans.step();
      window.events.insert(window.events.end(), trans.trace().begin() + tb, trans.trace().end());
      window.allocs.insert(window.allocs.end(), trans.alloc_log().begin() + ab,
                           trans.alloc_log().end());
    }

    if (!matched) {
      if (spec.policy == SyncPolicy::Star && orig_events.empty() &&
          consecutive_stutters < spec.max_k && !relation_fail) {
        trans = std::move(saved);
        ++consecutive_stutters;
        ++v.summary.stutters;
        pending_orig_allocs = std::move(step_allocs);
        continue;
      }
      if (relation_fail) {
        reject(RejectReason::RelationViolation, orig.state(), relation_fail->second,
               relation_fail->first);
      } else if (saw_trace_divergence) {
        reject(RejectReason::TraceMismatch, orig.state(), trans.state(),
               "transformed emitted events the original did not");
      } else {
        std::string detail = "no transformed schedule within " + std::to_string(hi) +
                             " steps matches";
        if (consecutive_stutters >= spec.max_k) detail += " (stutter budget exhausted)";
        reject(RejectReason::NoMatchingStep, orig.state(), trans.state(), detail);
      }
      return v;
    }

    consecutive_stutters = 0;
    pending_orig_allocs.clear();
  }

  v.accepted = true;
  return v;
}

InjectionTrace track_injection(const std::vector<AllocEvent>& original_log,
                               const std::vector<AllocEvent>& transformed_log,
                               const std::vector<std::size_t>& loop_reallocs) {
  InjectionTrace out;
  InjectionMap j;
  std::vector<BlockId> trans_live;
  std::size_t cursor = 0;

  auto is_loop_realloc = [&](std::size_t i) {
    return std::find(loop_reallocs.begin(), loop_reallocs.end(), i) != loop_reallocs.end();
  };
  auto consume_free = [&](BlockId b) {
    j.unmap_targets(b);
    trans_live.erase(std::remove(trans_live.begin(), trans_live.end(), b), trans_live.end());
  };

  for (std::size_t i = 0; i < original_log.size(); ++i) {
    const AllocEvent& e = original_log[i];
    if (e.kind == AllocEvent::Kind::Free) {
      j.unmap(e.block);
      out.evolution.push_back(j);
      continue;
    }
    if (is_loop_realloc(i)) {
      if (trans_live.empty()) {
        out.error = "loop re-allocation at index " + std::to_string(i) +
                    " with no live transformed frame";
        return out;
      }
      j.map(e.block, trans_live.back(), 0);
      out.evolution.push_back(j);
      continue;
    }
    bool paired = false;
    while (cursor < transformed_log.size()) {
      const AllocEvent& t = transformed_log[cursor];
      ++cursor;
      if (t.kind == AllocEvent::Kind::Free) {
        consume_free(t.block);
        continue;
      }
      trans_live.push_back(t.block);
      j.map(e.block, t.block, 0);
      paired = true;
      break;
    }
    if (!paired) {
      out.error = "allocation at index " + std::to_string(i) +
                  " has no transformed counterpart (is it a loop re-allocation?)";
      return out;
    }
    out.evolution.push_back(j);
  }
  for (; cursor < transformed_log.size(); ++cursor) {
    if (transformed_log[cursor].kind == AllocEvent::Kind::Free) {
      consume_free(transformed_log[cursor].block);
    } else {
      trans_live.push_back(transformed_log[cursor].block);
    }
  }
  out.ok = true;
  return out;
}

bool check_weakly_allocated(const Program& p, const State& s) {
  const Memory* mem = nullptr;
  if (const auto* r = std::get_if<RegularState>(&s)) {
    mem = &r->mem;
  } else if (const auto* c = std::get_if<CallState>(&s)) {
    mem = &c->mem;
  } else if (const auto* ret = std::get_if<ReturnState>(&s)) {
    mem = &ret->mem;
  } else {
    return true;
  }
  for (const Activation& a : activations(s)) {
    const Function* f = p.find(a.fn);
    if (!f) return false;
    if (!mem->is_live(a.block)) return false;
    if (mem->size_of(a.block) != f->stacksize) return false;
  }
  return true;
}

const std::vector<std::string>& validated_pass_names() {
  static const std::vector<std::string> names = {
      "refine_div", "tailcall", "tailrec", "canary", "lower_ra", "pac", "peephole"};
  return names;
}

std::optional<PassCheck> prepare_pass_validation(const Program& p, const std::string& pass,
                                                 std::uint64_t canary_seed, PassBug bug,
                                                 std::string* error) {
  PassCheck out;
  if (pass == "refine_div") {
    out.original = p;
    out.transformed = pass_refine_div(p);
    out.spec.kind = MatchKind::PlainLessdef;
    out.spec.policy = SyncPolicy::Lockstep;
    return out;
  }
  if (pass == "tailcall") {
    out.original = pass_refine_div(p);
    out.transformed = pass_tailcall(out.original);
    out.spec.kind = MatchKind::Injection;
    out.spec.policy = SyncPolicy::Star;
    return out;
  }
  if (pass == "tailrec") {
    out.original = pass_tailcall(pass_refine_div(p));
    out.transformed = pass_tailrec(out.original, bug);
    out.spec.kind = MatchKind::Injection;
    out.spec.policy = SyncPolicy::Star;
    return out;
  }
  if (pass == "canary") {
    out.original = pass_refine_div(p);
    CanaryResult cr = pass_canary(out.original, /*protect_all=*/false, bug);
    out.transformed = std::move(cr.prog);
    out.spec.kind = MatchKind::Extension;
    out.spec.policy = SyncPolicy::Plus;
    out.spec.canaries.value = canary_value(canary_seed);
    out.spec.canaries.offsets = std::move(cr.offsets);
    return out;
  }
  if (pass == "lower_ra") {
    out.original = pass_refine_div(p);
    LowerResult lr = pass_lower_ra(out.original);
    out.transformed = std::move(lr.prog);
    out.spec.kind = MatchKind::Extension;
    out.spec.policy = SyncPolicy::Plus;
    return out;
  }
  if (pass == "pac") {
    LowerResult lr = pass_lower_ra(pass_refine_div(p));
    out.original = lr.prog;
    auto signed_prog = pass_pac(std::move(lr.prog), lr.ra, bug);
    if (const auto* err = std::get_if<PassError>(&signed_prog)) {
      if (error) *error = err->message;
      return std::nullopt;
    }
    out.transformed = std::move(std::get<Program>(signed_prog));
    out.spec.kind = MatchKind::SlotEncode;
    out.spec.policy = SyncPolicy::Plus;
    out.spec.ra = std::move(lr.ra);
    return out;
  }
  if (pass == "peephole") {
    LowerResult lr = pass_lower_ra(pass_refine_div(p));
    auto signed_prog = pass_pac(std::move(lr.prog), lr.ra);
    if (const auto* err = std::get_if<PassError>(&signed_prog)) {
      if (error) *error = err->message;
      return std::nullopt;
    }
    out.original = std::move(std::get<Program>(signed_prog));
    PeepholeResult pr = peephole_retaa(out.original, bug);
    out.transformed = std::move(pr.prog);
    out.spec.kind = MatchKind::SlotEncode;
    out.spec.policy = SyncPolicy::Star;
    out.spec.ra = std::move(lr.ra);
    return out;
  }
  if (error) *error = "unknown pass " + pass + " (validated passes: refine_div, tailcall, tailrec, canary, lower_ra, pac, peephole)";
  return std::nullopt;
}

}  // namespace rtlv

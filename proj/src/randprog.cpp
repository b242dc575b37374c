// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/randprog.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace rtlv {

namespace {

struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed) : g(seed) {}

  // Inclusive range.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(int pct) { return range(1, 100) <= pct; }
  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(xs.size()) - 1))];
  }
};

// Emits one function as a chain of nodes with explicit branch patching.
struct Emit {
  Function f;
  Node cur = 1;
  Rng& rng;
  // Registers guaranteed to hold defined integers.
  std::vector<Reg> ints;
  // Frame offsets already written (with defined integers).
  std::vector<std::int64_t> written;
  Reg sp;  // set once the frame pointer was materialized

  explicit Emit(Rng& r) : rng(r) {}

  Node put(Instr ins) {
    f.code[cur] = std::move(ins);
    return cur++;
  }

  Reg fresh(const char* base) {
    return std::string(base) + std::to_string(cur);
  }

  Reg konst(std::int64_t k) {
    Iop i;
    i.op = Operation::konst(k);
    i.dst = fresh("v");
    i.succ = cur + 1;
    Reg dst = i.dst;
    put(i);
    ints.push_back(dst);
    return dst;
  }

  Reg binop(Opcode op, const Reg& a, const Reg& b) {
    Iop i;
    i.op = Operation::simple(op);
    i.args = {a, b};
    i.dst = fresh("v");
    i.succ = cur + 1;
    Reg dst = i.dst;
    put(i);
    ints.push_back(dst);
    return dst;
  }

  void binop_into(const Reg& dst, Opcode op, const Reg& a, const Reg& b) {
    Iop i;
    i.op = Operation::simple(op);
    i.args = {a, b};
    i.dst = dst;
    i.succ = cur + 1;
    put(i);
  }

  void move_into(const Reg& dst, const Reg& src) {
    Iop i;
    i.op = Operation::simple(Opcode::Move);
    i.args = {src};
    i.dst = dst;
    i.succ = cur + 1;
    put(i);
  }

  Reg getsp() {
    Iop i;
    i.op = Operation::simple(Opcode::GetSp);
    i.dst = "p" + std::to_string(cur);
    i.succ = cur + 1;
    Reg dst = i.dst;
    put(i);
    return dst;
  }

  void store_slot(std::int64_t off, const Reg& src) {
    Istore s;
    s.addr = sp;
    s.off = off;
    s.src = src;
    s.succ = cur + 1;
    put(s);
    written.push_back(off);
  }

  Reg load_slot(std::int64_t off) {
    Iload l;
    l.addr = sp;
    l.off = off;
    l.dst = fresh("v");
    l.succ = cur + 1;
    Reg dst = l.dst;
    put(l);
    ints.push_back(dst);
    return dst;
  }

  Reg call(const std::string& callee, const std::vector<Reg>& args) {
    Icall c;
    c.callee = callee;
    c.args = args;
    c.dst = fresh("r");
    c.succ = cur + 1;
    Reg dst = c.dst;
    put(c);
    ints.push_back(dst);
    return dst;
  }

  void print(const Reg& r) {
    Iextcall e;
    e.name = kBuiltinPrintInt;
    e.args = {r};
    e.dst = fresh("u");
    e.succ = cur + 1;
    put(e);
  }

  void ret(const Reg& r) {
    Ireturn i;
    i.src = r;
    put(i);
  }

  Reg any_int() { return rng.pick(ints); }

  // A short burst of arithmetic on defined integers.
  Reg arith_burst(int n) {
    Reg last = any_int();
    for (int i = 0; i < n; ++i) {
      int roll = static_cast<int>(rng.range(1, 100));
      if (roll <= 55) {
        Opcode op = rng.chance(50) ? Opcode::Add : (rng.chance(50) ? Opcode::Sub : Opcode::Mul);
        last = binop(op, any_int(), any_int());
      } else if (roll <= 70) {
        Reg d = konst(rng.chance(50) ? rng.range(2, 7) : -3);
        Opcode op = rng.chance(50) ? Opcode::DivStrict : Opcode::DivTotal;
        last = binop(op, any_int(), d);
      } else if (roll <= 85) {
        last = konst(rng.range(-9, 99));
      } else {
        Opcode op = rng.chance(50) ? Opcode::CmpEq : Opcode::CmpLt;
        last = binop(op, any_int(), any_int());
      }
    }
    return last;
  }

  // An occasionally useful degenerate jumptable: defined index, one shared
  // target (the next node).
  void maybe_jumptable() {
    if (!rng.chance(10)) return;
    std::int64_t k = rng.range(0, 2);
    Reg idx = konst(k);
    Ijumptable jt;
    jt.index = idx;
    jt.targets = {cur + 1, cur + 1, cur + 1};
    put(jt);
  }

  // Counted loop running the body `count` times. body_fn emits instructions
  // that keep chaining to cur + 1.
  template <typename Body>
  void counted_loop(std::int64_t count, Body body_fn) {
    Reg one = konst(1);
    Reg i = konst(count);
    Node head = cur;
    Icond c;
    c.cond = Cond::Ge;
    c.a = i;
    c.b = one;
    c.if_true = cur + 1;
    c.if_false = 0;  // patched below
    Node cond_node = put(c);
    body_fn();
    // decrement and jump back
    Iop dec;
    dec.op = Operation::simple(Opcode::Sub);
    dec.args = {i, one};
    dec.dst = i;
    dec.succ = head;
    put(dec);
    std::get<Icond>(f.code[cond_node]).if_false = cur;
  }
};

struct Plan {
  std::vector<std::string> names;       // helpers in tier order
  std::vector<int> archetype;           // per helper
  std::vector<int> arity;               // per helper
  std::vector<bool> called_from_main;   // helpers main must call itself
};

constexpr int kArith = 0;      // leaf arithmetic
constexpr int kFrame = 1;      // leaf with a frame and a loop
constexpr int kSelfRec = 2;    // self tail call
constexpr int kCaller = 3;     // calls the next tier, uses the result
constexpr int kTailShape = 4;  // frameless call-then-return, tailcall fodder

Function gen_helper(Rng& rng, const Plan& plan, std::size_t idx, int budget) {
  Emit e(rng);
  e.f.name = plan.names[idx];
  int arch = plan.archetype[idx];
  int arity = plan.arity[idx];
  const bool has_next = idx + 1 < plan.names.size();
  const std::string next = has_next ? plan.names[idx + 1] : "";

  for (int i = 0; i < arity; ++i) {
    Reg p = arch == kSelfRec && i == 0 ? "n" : std::string(1, static_cast<char>('x' + i));
    e.f.params.push_back(p);
    e.ints.push_back(p);
  }
  e.f.entry = 1;

  switch (arch) {
    case kArith: {
      e.f.stacksize = 0;
      e.maybe_jumptable();
      Reg v = e.arith_burst(static_cast<int>(rng.range(2, 3 + budget / 24)));
      if (rng.chance(30)) e.print(v);
      e.ret(v);
      break;
    }
    case kFrame: {
      std::int64_t slots = rng.range(1, 4);
      e.f.stacksize = 8 * slots;
      e.sp = e.getsp();
      for (std::int64_t s = 0; s < slots; ++s) {
        e.store_slot(8 * s, e.any_int());
      }
      Reg acc = e.konst(0);
      std::int64_t off = 8 * rng.range(0, slots - 1);
      e.counted_loop(rng.range(2, 8), [&] {
        Reg x = e.load_slot(off);
        e.binop_into(acc, Opcode::Add, acc, x);
        if (rng.chance(25)) e.store_slot(off, acc);
      });
      if (rng.chance(40)) e.print(acc);
      e.ret(acc);
      break;
    }
    case kSelfRec: {
      e.f.stacksize = rng.chance(25) ? 8 : 0;
      if (e.f.stacksize > 0) {
        e.sp = e.getsp();
        e.store_slot(0, e.any_int());
      }
      Reg one = e.konst(1);
      Icond c;
      c.cond = Cond::Ge;
      c.a = "n";
      c.b = one;
      c.if_true = e.cur + 1;
      c.if_false = 0;
      Node cond_node = e.put(c);
      // recursive arm
      Reg step = e.binop(rng.chance(50) ? Opcode::Add : Opcode::Mul, e.f.params.back(), "n");
      if (rng.chance(30)) e.print(step);
      Reg n2 = e.binop(Opcode::Sub, "n", one);
      std::vector<Reg> args{n2};
      for (int i = 1; i < arity; ++i) args.push_back(e.f.params[static_cast<std::size_t>(i)]);
      args.back() = step;
      if (arity == 3 && rng.chance(30)) std::swap(args[1], args[2]);
      Itailcall tc;
      tc.callee = e.f.name;
      tc.args = args;
      e.put(tc);
      // base arm
      std::get<Icond>(e.f.code[cond_node]).if_false = e.cur;
      e.ret(e.f.params.back());
      break;
    }
    case kCaller: {
      std::int64_t slots = rng.range(0, 2);
      e.f.stacksize = 8 * slots;
      if (slots > 0) {
        e.sp = e.getsp();
        for (std::int64_t s = 0; s < slots; ++s) e.store_slot(8 * s, e.any_int());
      }
      Reg v = e.arith_burst(static_cast<int>(rng.range(1, 3)));
      std::vector<Reg> args;
      for (int i = 0; i < plan.arity[idx + 1]; ++i) args.push_back(e.any_int());
      Reg r = e.call(next, args);
      Reg out = e.binop(Opcode::Add, r, v);
      if (slots > 0 && rng.chance(50)) {
        e.store_slot(0, out);
        out = e.load_slot(0);
      }
      if (rng.chance(40)) e.print(out);
      e.ret(out);
      break;
    }
    case kTailShape: {
      e.f.stacksize = 0;
      e.arith_burst(static_cast<int>(rng.range(1, 2)));
      std::vector<Reg> args;
      for (int i = 0; i < plan.arity[idx + 1]; ++i) args.push_back(e.any_int());
      Reg r = e.call(next, args);
      e.ret(r);
      break;
    }
  }
  return e.f;
}

}  // namespace

Program gen_random_program(std::uint64_t seed, int budget) {
  Rng rng(seed);
  Program p;

  Plan plan;
  int helpers;
  {
    int roll = static_cast<int>(rng.range(1, 100));
    helpers = roll <= 10 ? 0 : roll <= 40 ? 1 : roll <= 80 ? 2 : 3;
  }
  const char* names[] = {"f", "g", "h"};
  for (int i = 0; i < helpers; ++i) plan.names.push_back(names[i]);

  for (int i = 0; i < helpers; ++i) {
    bool has_next = i + 1 < helpers;
    int arch;
    int roll = static_cast<int>(rng.range(1, 100));
    if (has_next) {
      arch = roll <= 30 ? kCaller
             : roll <= 55 ? kTailShape
             : roll <= 80 ? kSelfRec
             : roll <= 90 ? kFrame
                          : kArith;
    } else {
      arch = roll <= 35 ? kSelfRec : roll <= 65 ? kFrame : kArith;
    }
    plan.archetype.push_back(arch);
    plan.arity.push_back(arch == kSelfRec ? static_cast<int>(rng.range(2, 3))
                                          : static_cast<int>(rng.range(1, 2)));
  }
  // Helpers not reached through the tier above get called straight from main.
  plan.called_from_main.assign(static_cast<std::size_t>(helpers), false);
  for (int i = 0; i < helpers; ++i) {
    bool reached_from_prev =
        i > 0 && (plan.archetype[static_cast<std::size_t>(i) - 1] == kCaller ||
                  plan.archetype[static_cast<std::size_t>(i) - 1] == kTailShape);
    plan.called_from_main[static_cast<std::size_t>(i)] = i == 0 || !reached_from_prev;
  }

  for (std::size_t i = 0; i < plan.names.size(); ++i) {
    Function h = gen_helper(rng, plan, i, budget);
    p.functions[h.name] = std::move(h);
  }

  // main: no parameters, seeds constants, drives every helper tier that is
  // not reached through another helper, prints something observable.
  {
    Emit e(rng);
    e.f.name = "main";
    e.f.entry = 1;
    std::int64_t slots = rng.chance(50) ? rng.range(1, 2) : 0;
    e.f.stacksize = 8 * slots;
    e.konst(rng.range(1, 9));
    e.konst(rng.range(-5, 40));
    if (rng.chance(50)) e.arith_burst(2);
    if (slots > 0) {
      e.sp = e.getsp();
      for (std::int64_t s = 0; s < slots; ++s) e.store_slot(8 * s, e.any_int());
    }
    Reg last = e.any_int();
    for (std::size_t i = 0; i < plan.names.size(); ++i) {
      if (!plan.called_from_main[i]) continue;
      std::vector<Reg> args;
      for (int a = 0; a < plan.arity[i]; ++a) {
        // Small first argument keeps self recursion shallow.
        args.push_back(a == 0 && plan.archetype[i] == kSelfRec ? e.konst(rng.range(2, 9))
                                                               : e.any_int());
      }
      last = e.call(plan.names[i], args);
      if (rng.chance(60)) e.print(last);
    }
    if (slots > 0 && rng.chance(50)) last = e.load_slot(0);
    e.print(last);
    e.ret(last);
    p.functions["main"] = std::move(e.f);
  }

  p.main = "main";
  return p;
}

}  // namespace rtlv

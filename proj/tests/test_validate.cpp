// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0
//
// The co-execution validator: accepts every pass on benign and adversarial
// programs, rejects the seeded broken pass variants, reconstructs injection
// maps from allocation logs, and enforces the frame-size invariant.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "doctest.h"
#include "rtlv/randprog.hpp"
#include "rtlv/validate.hpp"
#include "testutil.hpp"

using namespace rtlv;

namespace {

const char* kFacText =
    "function main(x) stacksize 0 {\n"
    "  1: one = const 1 goto 2\n"
    "  2: r = call fac_rec(x, one) goto 3\n"
    "  3: u = extcall print_int(r) goto 4\n"
    "  4: return r\n"
    "}\n"
    "function fac_rec(n, acc) stacksize 0 {\n"
    "  1: one = const 1 goto 2\n"
    "  2: if n ge one then 3 else 7\n"
    "  3: am = mul acc n goto 4\n"
    "  4: nm = sub n one goto 5\n"
    "  5: r = call fac_rec(nm, am) goto 6\n"
    "  6: return r\n"
    "  7: return acc\n"
    "}\n";

const char* kChainText =
    "function main(x) stacksize 8 {\n"
    "  1: s = getsp goto 2\n"
    "  2: store [s + 0] = x goto 3\n"
    "  3: r = call f(x) goto 4\n"
    "  4: u = extcall print_int(r) goto 5\n"
    "  5: v = load [s + 0] goto 6\n"
    "  6: w = add r v goto 7\n"
    "  7: return w\n"
    "}\n"
    "function f(x) stacksize 16 {\n"
    "  1: t = getsp goto 2\n"
    "  2: store [t + 8] = x goto 3\n"
    "  3: one = const 1 goto 4\n"
    "  4: y = add x one goto 5\n"
    "  5: r = call g(y) goto 6\n"
    "  6: z = load [t + 8] goto 7\n"
    "  7: zz = add r z goto 8\n"
    "  8: return zz\n"
    "}\n"
    "function g(x) stacksize 0 {\n"
    "  1: two = const 2 goto 2\n"
    "  2: y = mul x two goto 3\n"
    "  3: return y\n"
    "}\n";

Verdict check_pass(const char* text, const std::string& pass,
                   std::vector<std::int64_t> args, PassBug bug = PassBug::None,
                   std::uint64_t seed = 11) {
  Program p = testutil::parse_ok(text);
  std::string error;
  auto pc = prepare_pass_validation(p, pass, seed, bug, &error);
  REQUIRE_MESSAGE(pc.has_value(), error);
  std::vector<Value> vargs;
  for (auto a : args) vargs.push_back(Value::integer(a));
  return cosim_run(pc->original, pc->transformed, pc->spec, vargs, 1'000'000, seed);
}

}  // namespace

TEST_CASE("the validated pass list matches the pipeline") {
  CHECK(validated_pass_names() ==
        std::vector<std::string>({"refine_div", "tailcall", "tailrec", "canary",
                                  "lower_ra", "pac", "peephole"}));
  std::string error;
  Program p = testutil::parse_ok(kFacText);
  CHECK(!prepare_pass_validation(p, "nosuch", 0, PassBug::None, &error).has_value());
  CHECK(!error.empty());
}

TEST_CASE("every pass is accepted on hand-written programs") {
  for (const std::string& pass : validated_pass_names()) {
    CAPTURE(pass);
    Verdict v = check_pass(kFacText, pass, {6});
    CHECK_MESSAGE(v.accepted, pass << ": " << render(v));
    Verdict w = check_pass(kChainText, pass, {5});
    CHECK_MESSAGE(w.accepted, pass << ": " << render(w));
    CHECK(v.summary.syncs > 0);
    CHECK(v.summary.relation_checks > 0);
    CHECK(v.summary.max_window <= 16);
  }
}

TEST_CASE("lockstep validation of an identity transformation never stutters") {
  Program p = testutil::parse_ok(kChainText);
  std::string error;
  auto pc = prepare_pass_validation(p, "refine_div", 0, PassBug::None, &error);
  REQUIRE(pc.has_value());
  CHECK(pc->spec.policy == SyncPolicy::Lockstep);
  Verdict v = cosim_run(pc->original, pc->transformed, pc->spec, {Value::integer(4)});
  REQUIRE(v.accepted);
  CHECK(v.summary.stutters == 0);
  CHECK(v.summary.max_window <= 1);
}

TEST_CASE("loop-forming passes need wider windows and get them") {
  // One original call step corresponds to a burst of copy steps after the
  // self tail call becomes a loop.
  Verdict v = check_pass(kFacText, "tailrec", {6});
  REQUIRE(v.accepted);
  CHECK(v.summary.max_window >= 2);
  CHECK(v.summary.max_window <= 16);
}

TEST_CASE("each seeded bug is rejected on a suitable input") {
  Verdict v = check_pass(kChainText, "canary", {5}, PassBug::CanaryWrongOffset);
  CHECK(!v.accepted);
  CHECK(v.reason == RejectReason::RelationViolation);

  v = check_pass(kChainText, "canary", {5}, PassBug::CanarySkipEpilogue);
  CHECK(!v.accepted);

  v = check_pass(kFacText, "tailrec", {6}, PassBug::TailrecSwapCopies);
  CHECK(!v.accepted);
  CHECK(v.reason == RejectReason::RelationViolation);

  v = check_pass(kChainText, "pac", {5}, PassBug::PacBadModifier);
  CHECK(!v.accepted);

  v = check_pass(kChainText, "peephole", {5}, PassBug::PeepholeNoDecode);
  CHECK(!v.accepted);

  // The unbroken variants of the same validations all pass.
  CHECK(check_pass(kChainText, "canary", {5}).accepted);
  CHECK(check_pass(kFacText, "tailrec", {6}).accepted);
  CHECK(check_pass(kChainText, "pac", {5}).accepted);
  CHECK(check_pass(kChainText, "peephole", {5}).accepted);
}

TEST_CASE("rejections come with a counterexample") {
  Verdict v = check_pass(kFacText, "tailrec", {6}, PassBug::TailrecSwapCopies);
  REQUIRE(!v.accepted);
  REQUIRE(v.counterexample.has_value());
  CHECK(!v.counterexample->detail.empty());
  CHECK(!render(v).empty());
}

TEST_CASE("observably different programs are rejected") {
  // Diverging register contents are caught at the first synchronization,
  // before any event fires.
  Program one = testutil::parse_ok(
      "function main() stacksize 0 {\n"
      "  1: a = const 1 goto 2\n  2: u = extcall print_int(a) goto 3\n  3: return a\n}\n");
  Program two = testutil::parse_ok(
      "function main() stacksize 0 {\n"
      "  1: a = const 2 goto 2\n  2: u = extcall print_int(a) goto 3\n  3: return a\n}\n");
  MatchSpec spec;  // plain lessdef, lockstep
  Verdict v = cosim_run(one, two, spec, {});
  CHECK(!v.accepted);
  CHECK(v.reason == RejectReason::RelationViolation);

  // Identical register banks but a different choice of what to print: only
  // the traces disagree.
  Program prints_a = testutil::parse_ok(
      "function main() stacksize 0 {\n"
      "  1: a = const 1 goto 2\n  2: b = const 2 goto 3\n"
      "  3: u = extcall print_int(a) goto 4\n  4: return a\n}\n");
  Program prints_b = testutil::parse_ok(
      "function main() stacksize 0 {\n"
      "  1: a = const 1 goto 2\n  2: b = const 2 goto 3\n"
      "  3: u = extcall print_int(b) goto 4\n  4: return a\n}\n");
  v = cosim_run(prints_a, prints_b, spec, {});
  CHECK(!v.accepted);
  CHECK(v.reason == RejectReason::TraceMismatch);
}

TEST_CASE("running out of co-execution fuel is a rejection, not a pass") {
  Program p = testutil::parse_ok(kFacText);
  std::string error;
  auto pc = prepare_pass_validation(p, "tailcall", 0, PassBug::None, &error);
  REQUIRE(pc.has_value());
  Verdict v = cosim_run(pc->original, pc->transformed, pc->spec,
                        {Value::integer(100)}, /*fuel=*/20);
  CHECK(!v.accepted);
  CHECK(v.reason == RejectReason::FuelExhausted);
}

TEST_CASE("a stuck original only constrains the observed prefix") {
  // The original traps on division by zero after one print; the refined
  // program carries on. That is the allowed direction.
  const char* text =
      "function main(x) stacksize 0 {\n"
      "  1: u = extcall print_int(x) goto 2\n"
      "  2: z = const 0 goto 3\n"
      "  3: q = div_strict x z goto 4\n"
      "  4: w = extcall print_int(q) goto 5\n"
      "  5: return q\n"
      "}\n";
  Verdict v = check_pass(text, "refine_div", {7});
  CHECK(v.accepted);
}

TEST_CASE("every pass is accepted across a generated mini-corpus") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Program p = gen_random_program(seed);
    for (const std::string& pass : validated_pass_names()) {
      std::string error;
      auto pc = prepare_pass_validation(p, pass, seed, PassBug::None, &error);
      REQUIRE_MESSAGE(pc.has_value(), error);
      Verdict v = cosim_run(pc->original, pc->transformed, pc->spec, {}, 1'000'000, seed);
      CAPTURE(seed);
      CAPTURE(pass);
      CHECK_MESSAGE(v.accepted, render(v));
    }
  }
}

TEST_CASE("injection tracking pairs allocations and loops") {
  using K = AllocEvent::Kind;
  // Original: main allocates, then a self tail call re-enters three times
  // (alloc/free churn); transformed keeps one frame for the whole loop.
  std::vector<AllocEvent> orig = {
      {K::Alloc, 1, 8},  {K::Alloc, 2, 16}, {K::Free, 2, 16}, {K::Alloc, 3, 16},
      {K::Free, 3, 16},  {K::Alloc, 4, 16}, {K::Free, 4, 16}, {K::Free, 1, 8},
  };
  std::vector<AllocEvent> trans = {
      {K::Alloc, 1, 8}, {K::Alloc, 2, 16}, {K::Free, 2, 16}, {K::Free, 1, 8},
  };
  // Indices 3 and 5 are the re-entries with no transformed counterpart.
  InjectionTrace t = track_injection(orig, trans, {3, 5});
  REQUIRE_MESSAGE(t.ok, t.error);
  REQUIRE(t.evolution.size() == orig.size());
  // After the first two allocations both frames are mapped one-to-one.
  CHECK(t.evolution[1].lookup(1) == std::make_pair(BlockId{1}, std::int64_t{0}));
  CHECK(t.evolution[1].lookup(2) == std::make_pair(BlockId{2}, std::int64_t{0}));
  // The re-entered frames map onto the transformed side's live loop frame.
  CHECK(t.evolution[3].lookup(3) == std::make_pair(BlockId{2}, std::int64_t{0}));
  CHECK(t.evolution[5].lookup(4) == std::make_pair(BlockId{2}, std::int64_t{0}));
  // Frees drop the mapping again.
  CHECK(!t.evolution[2].lookup(2).has_value());
  CHECK(t.evolution.back().entries().empty());

  // A loop re-entry with no live transformed frame cannot be mapped.
  InjectionTrace bad = track_injection({{K::Alloc, 1, 8}}, {}, {0});
  CHECK(!bad.ok);
  CHECK(!bad.error.empty());

  // An unpaired genuine allocation is an error, not a silent skip.
  InjectionTrace unpaired = track_injection({{K::Alloc, 1, 8}}, {}, {});
  CHECK(!unpaired.ok);
}

TEST_CASE("the frame-size invariant checker") {
  Program p = testutil::parse_ok(
      "function main(x) stacksize 8 {\n"
      "  1: r = call f(x) goto 2\n  2: return r\n}\n"
      "function f(x) stacksize 16 {\n  1: return x\n}\n");

  // A frame of exactly the declared size passes.
  RegularState good;
  good.fn = "main";
  good.pc = 1;
  BlockId b = good.mem.alloc(8);
  good.sp = Value::pointer(b, 0);
  CHECK(check_weakly_allocated(p, State{good}));

  // An oversized frame violates the invariant.
  RegularState big;
  big.fn = "main";
  big.pc = 1;
  BlockId bb = big.mem.alloc(16);
  big.sp = Value::pointer(bb, 0);
  CHECK(!check_weakly_allocated(p, State{big}));

  // A dead frame violates it too.
  RegularState dead = good;
  REQUIRE(!dead.mem.free_block(b));
  CHECK(!check_weakly_allocated(p, State{dead}));

  // Suspended activations are checked along with the current one.
  RegularState stacked;
  stacked.fn = "f";
  stacked.pc = 1;
  BlockId mainb = stacked.mem.alloc(8);
  BlockId fb = stacked.mem.alloc(16);
  stacked.sp = Value::pointer(fb, 0);
  Frame fr;
  fr.ret_dst = "r";
  fr.caller = "main";
  fr.ret_node = 2;
  fr.caller_sp = Value::pointer(mainb, 0);
  stacked.stack.push_back(fr);
  CHECK(check_weakly_allocated(p, State{stacked}));
  stacked.stack[0].caller_sp = Value::pointer(fb, 0);  // wrong caller frame
  CHECK(!check_weakly_allocated(p, State{stacked}));

  // Completed executions carry no frames.
  CHECK(check_weakly_allocated(p, State{FinalState{Value::integer(0), Memory{}}}));
}

TEST_CASE("the invariant holds throughout real executions") {
  Program p = testutil::parse_ok(kChainText);
  Execution e(p, {Value::integer(5)}, 0);
  int steps = 0;
  while (!e.done() && steps < 1000) {
    CHECK(check_weakly_allocated(p, e.state()));
    e.step();
    ++steps;
  }
  REQUIRE(e.done());
}

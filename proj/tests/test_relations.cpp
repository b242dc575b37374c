// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Property suite for the value and memory relations: definedness-order laws,
// extension laws, injection commutation, and operator monotonicity. Each law
// runs over at least 10^4 randomized cases.

#include <optional>
#include <vector>

#include "doctest.h"
#include "rtlv/memory.hpp"
#include "rtlv/relations.hpp"
#include "rtlv/semantics.hpp"
#include "testutil.hpp"

using namespace rtlv;
using testutil::Rng;

namespace {

constexpr int kCases = 10000;

// Random memory: a handful of blocks, some populated, some freed.
Memory random_memory(Rng& rng, std::vector<BlockId>* live_out = nullptr) {
  Memory m;
  int nblocks = static_cast<int>(rng.range(1, 5));
  for (int i = 0; i < nblocks; ++i) {
    std::int64_t size = 8 * rng.range(0, 6);
    BlockId b = m.alloc(size);
    for (std::int64_t off = 0; off + 8 <= size; off += 8) {
      if (rng.chance(60)) {
        REQUIRE(!m.store64(b, off, testutil::any_value(rng)));
      }
    }
    if (rng.chance(15)) {
      REQUIRE(!m.free_block(b));
    } else if (live_out) {
      live_out->push_back(b);
    }
  }
  return m;
}

// A memory that extends m: same block ids, each live block at least as large,
// undef cells optionally filled in.
Memory grown_copy(Rng& rng, const Memory& m) {
  Memory g;
  for (const auto& [id, blk] : m.blocks()) {
    std::int64_t extra = 8 * rng.range(0, 3);
    BlockId nb = g.alloc(blk.size + extra);
    REQUIRE(nb == id);  // alloc order preserves ids
    for (std::int64_t off = 0; off + 8 <= blk.size; off += 8) {
      if (!blk.live) break;
      auto v = m.load64(id, off);
      REQUIRE(load_ok(v));
      if (loaded(v).is_undef()) {
        if (rng.chance(40)) {
          REQUIRE(!g.store64(id, off, testutil::defined_value(rng)));
        }
      } else {
        REQUIRE(!g.store64(id, off, loaded(v)));
      }
    }
    if (!blk.live && rng.chance(50)) {
      REQUIRE(!g.free_block(id));
    }
  }
  return g;
}

}  // namespace

TEST_CASE("lessdef is reflexive") {
  Rng rng(101);
  for (int i = 0; i < kCases; ++i) {
    Value v = testutil::any_value(rng);
    CHECK(lessdef(v, v));
  }
}

TEST_CASE("lessdef is antisymmetric") {
  Rng rng(102);
  int premise_hits = 0;
  for (int i = 0; i < kCases; ++i) {
    Value a = testutil::any_value(rng);
    // Bias towards comparable pairs so the premise actually fires.
    Value b = rng.chance(50) ? a : testutil::any_value(rng);
    if (lessdef(a, b) && lessdef(b, a)) {
      ++premise_hits;
      CHECK(a == b);
    }
  }
  CHECK(premise_hits > kCases / 4);
}

TEST_CASE("lessdef is transitive") {
  Rng rng(103);
  int premise_hits = 0;
  for (int i = 0; i < kCases; ++i) {
    Value c = testutil::any_value(rng);
    Value b = rng.chance(40) ? Value::undef() : c;
    Value a = rng.chance(40) ? Value::undef() : b;
    // Shuffle in fully random triples as well.
    if (rng.chance(30)) {
      a = testutil::any_value(rng);
      b = testutil::any_value(rng);
      c = testutil::any_value(rng);
    }
    if (lessdef(a, b) && lessdef(b, c)) {
      ++premise_hits;
      CHECK(lessdef(a, c));
    }
  }
  CHECK(premise_hits > kCases / 2);
}

TEST_CASE("lessdef bottom and incomparability") {
  Rng rng(104);
  for (int i = 0; i < 2000; ++i) {
    Value v = testutil::any_value(rng);
    CHECK(lessdef(Value::undef(), v));
    if (!v.is_undef()) CHECK(!lessdef(v, Value::undef()));
  }
  // Distinct defined values are incomparable both ways.
  CHECK(!lessdef(Value::integer(1), Value::integer(2)));
  CHECK(!lessdef(Value::integer(2), Value::integer(1)));
  CHECK(!lessdef(Value::pointer(1, 0), Value::pointer(1, 8)));
  CHECK(!lessdef(Value::integer(0), Value::pointer(1, 0)));
}

TEST_CASE("extends is reflexive") {
  Rng rng(201);
  for (int i = 0; i < kCases; ++i) {
    Memory m = random_memory(rng);
    CHECK(extends(m, m));
  }
}

TEST_CASE("extends is transitive through grown copies") {
  Rng rng(202);
  for (int i = 0; i < kCases; ++i) {
    Memory m1 = random_memory(rng);
    Memory m2 = grown_copy(rng, m1);
    Memory m3 = grown_copy(rng, m2);
    REQUIRE(extends(m1, m2));
    REQUIRE(extends(m2, m3));
    CHECK(extends(m1, m3));
  }
}

TEST_CASE("extends rejects shrinking, killing, and redefining") {
  Memory m1;
  BlockId b = m1.alloc(16);
  REQUIRE(!m1.store64(b, 0, Value::integer(7)));

  {
    Memory m2;
    m2.alloc(8);  // same id, smaller
    CHECK(!extends(m1, m2));
  }
  {
    Memory m2;
    BlockId c = m2.alloc(16);
    REQUIRE(!m2.store64(c, 0, Value::integer(8)));  // different defined value
    CHECK(!extends(m1, m2));
  }
  {
    Memory m2;
    BlockId c = m2.alloc(16);
    REQUIRE(!m2.store64(c, 0, Value::integer(7)));
    REQUIRE(!m2.free_block(c));  // dead on the right
    CHECK(!extends(m1, m2));
  }
  {
    // Dead or zero-size on the left is unconstrained.
    Memory src;
    BlockId d = src.alloc(16);
    REQUIRE(!src.free_block(d));
    src.alloc(0);
    Memory m2;
    CHECK(extends(src, m2));
  }
}

namespace {

// Paired memories related by a fresh injection: every source block maps into
// its own target block at a small delta. Returns the map; target ids are
// source block count offsets apart, all in one Memory for the target side.
struct InjectedPair {
  Memory src;
  Memory dst;
  InjectionMap map;
  std::vector<BlockId> src_blocks;
};

InjectedPair make_injected_pair(Rng& rng) {
  InjectedPair p;
  int nblocks = static_cast<int>(rng.range(1, 4));
  std::vector<std::int64_t> sizes, deltas;
  std::vector<bool> mapped;
  for (int i = 0; i < nblocks; ++i) {
    sizes.push_back(8 * rng.range(1, 5));
    deltas.push_back(8 * rng.range(0, 3));
    mapped.push_back(rng.chance(80));
  }
  for (int i = 0; i < nblocks; ++i) {
    BlockId sb = p.src.alloc(sizes[i]);
    p.src_blocks.push_back(sb);
    BlockId tb = p.dst.alloc(sizes[i] + deltas[i] + 8 * rng.range(0, 2));
    if (mapped[i]) p.map.map(sb, tb, deltas[i]);
  }
  // Populate source cells with values whose translation exists, then mirror
  // them through the map so the relation holds by construction.
  for (int i = 0; i < nblocks; ++i) {
    BlockId sb = p.src_blocks[i];
    auto entry = p.map.lookup(sb);
    for (std::int64_t off = 0; off + 8 <= sizes[i]; off += 8) {
      if (!rng.chance(70)) continue;
      Value v;
      for (;;) {
        v = testutil::any_value(rng);
        if (v.is_ptr()) {
          // Restrict embedded pointers to mapped source blocks.
          BlockId tgt = p.src_blocks[rng.range(0, nblocks - 1)];
          if (!p.map.lookup(tgt)) continue;
          v = Value::pointer(tgt, 8 * rng.range(0, 3));
        }
        if (v.is_enc()) continue;  // signed values do not commute with moves
        if (v.is_code() || v.is_int() || v.is_undef() || v.is_ptr()) break;
      }
      REQUIRE(!p.src.store64(sb, off, v));
      if (entry && !v.is_undef()) {
        auto tv = inject_value(p.map, v);
        REQUIRE(tv.has_value());
        REQUIRE(!p.dst.store64(entry->first, off + entry->second, *tv));
      }
    }
  }
  return p;
}

}  // namespace

TEST_CASE("injection: related stores commute with loads") {
  Rng rng(301);
  for (int i = 0; i < kCases; ++i) {
    InjectedPair p = make_injected_pair(rng);
    REQUIRE(injection_wellformed(p.map, p.src, p.dst));
    REQUIRE(mem_inject(p.map, p.src, p.dst));

    // One related store on both sides.
    BlockId sb = p.src_blocks[rng.range(0, static_cast<std::int64_t>(p.src_blocks.size()) - 1)];
    auto entry = p.map.lookup(sb);
    if (!entry) continue;  // unmapped blocks carry no store obligation
    std::int64_t size = p.src.size_of(sb);
    if (size == 0) continue;
    std::int64_t off = 8 * rng.range(0, size / 8 - 1);

    Value v;
    std::optional<Value> tv;
    for (;;) {
      v = testutil::any_value(rng);
      if (v.is_enc()) continue;
      if (v.is_ptr()) {
        BlockId tgt = p.src_blocks[rng.range(0, static_cast<std::int64_t>(p.src_blocks.size()) - 1)];
        if (!p.map.lookup(tgt)) continue;
        v = Value::pointer(tgt, 8 * rng.range(0, 3));
      }
      tv = inject_value(p.map, v);
      if (tv) break;
    }
    REQUIRE(!p.src.store64(sb, off, v));
    REQUIRE(!p.dst.store64(entry->first, off + entry->second, *tv));

    // The relation survives the store...
    CHECK(mem_inject(p.map, p.src, p.dst));
    // ...and the stored slot loads back related values.
    auto lv = p.src.load64(sb, off);
    auto lt = p.dst.load64(entry->first, off + entry->second);
    REQUIRE(load_ok(lv));
    REQUIRE(load_ok(lt));
    CHECK(inject_match(p.map, loaded(lv), loaded(lt)));
  }
}

TEST_CASE("injection: unmapped blocks place no constraints") {
  Memory src, dst;
  BlockId a = src.alloc(16);
  REQUIRE(!src.store64(a, 0, Value::integer(42)));
  InjectionMap j;  // empty: a maps to nothing
  CHECK(injection_wellformed(j, src, dst));
  CHECK(mem_inject(j, src, dst));
  // A pointer into an unmapped block translates to nothing.
  CHECK(!inject_value(j, Value::pointer(a, 0)).has_value());
  // Vundef on the left matches anything.
  CHECK(inject_match(j, Value::undef(), Value::integer(9)));
  CHECK(!inject_match(j, Value::integer(9), Value::undef()));
}

TEST_CASE("injection wellformedness rejects overlap and misalignment") {
  Memory src, dst;
  BlockId a = src.alloc(16);
  BlockId b = src.alloc(16);
  BlockId t = dst.alloc(48);
  {
    InjectionMap j;
    j.map(a, t, 0);
    j.map(b, t, 8);  // [8,24) overlaps [0,16)
    CHECK(!injection_wellformed(j, src, dst));
  }
  {
    InjectionMap j;
    j.map(a, t, 4);  // misaligned delta
    CHECK(!injection_wellformed(j, src, dst));
  }
  {
    InjectionMap j;
    j.map(a, t, 0);
    j.map(b, t, 24);  // disjoint ranges in the same target are fine
    CHECK(injection_wellformed(j, src, dst));
    CHECK(mem_inject(j, src, dst));
  }
}

namespace {

Operation random_operation(Rng& rng) {
  static const Opcode all[] = {
      Opcode::Const,   Opcode::Move,      Opcode::Add,      Opcode::Sub,
      Opcode::Mul,     Opcode::DivStrict, Opcode::DivTotal, Opcode::AddPtr,
      Opcode::CmpEq,   Opcode::CmpLt,     Opcode::GetCanary, Opcode::GetRa,
      Opcode::GetSp,   Opcode::CodeAddr,  Opcode::PacEncode, Opcode::PacDecode,
  };
  Opcode op = all[rng.range(0, 15)];
  if (op == Opcode::Const) return Operation::konst(rng.range(-50, 50));
  if (op == Opcode::CodeAddr) return Operation::codeaddr("f", rng.range(1, 5));
  return Operation::simple(op);
}

}  // namespace

TEST_CASE("eval_op is monotone in the definedness order") {
  Rng rng(401);
  Memory mem;
  BlockId blk = mem.alloc(32);
  EvalCtx ctx;
  ctx.canary = Value::integer(0x5eed);
  ctx.sp = Value::pointer(blk, 0);
  ctx.ra = Value::code("main", 2);
  ctx.mem = &mem;

  for (int i = 0; i < kCases; ++i) {
    Operation op = random_operation(rng);
    int arity = opcode_arity(op.op);
    std::vector<Value> hi(arity), lo(arity);
    for (int k = 0; k < arity; ++k) {
      hi[k] = testutil::any_value(rng);
      lo[k] = rng.chance(35) ? Value::undef() : hi[k];
    }
    Value rlo = eval_op(op, lo, ctx);
    Value rhi = eval_op(op, hi, ctx);
    CHECK(lessdef(rlo, rhi));
  }
}

TEST_CASE("eval_op strictness: an undefined argument poisons the result") {
  Rng rng(402);
  for (int i = 0; i < 2000; ++i) {
    Operation op = random_operation(rng);
    int arity = opcode_arity(op.op);
    if (arity == 0) continue;
    if (op.op == Opcode::Move) continue;  // move copies, including Vundef
    std::vector<Value> args(arity);
    for (int k = 0; k < arity; ++k) args[k] = testutil::any_value(rng);
    args[rng.range(0, arity - 1)] = Value::undef();
    EvalCtx ctx;
    ctx.canary = Value::integer(1);
    ctx.sp = Value::pointer(1, 0);
    ctx.ra = Value::code("main", 1);
    CHECK(eval_op(op, args, ctx).is_undef());
  }
}

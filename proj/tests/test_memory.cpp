// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "rtlv/memory.hpp"
#include "testutil.hpp"

using namespace rtlv;

TEST_CASE("alloc gives fresh ids and undef contents") {
  Memory m;
  BlockId a = m.alloc(16);
  BlockId b = m.alloc(8);
  CHECK(a != b);
  CHECK(m.is_live(a));
  CHECK(m.size_of(a) == 16);
  CHECK(m.size_of(b) == 8);
  auto r = m.load64(a, 0);
  REQUIRE(load_ok(r));
  CHECK(loaded(r).is_undef());
  auto r2 = m.load64(a, 8);
  REQUIRE(load_ok(r2));
  CHECK(loaded(r2).is_undef());
}

TEST_CASE("store then load round-trips every value kind") {
  testutil::Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    Memory m;
    BlockId b = m.alloc(32);
    Value v = testutil::any_value(rng);
    REQUIRE(!m.store64(b, 16, v));
    auto r = m.load64(b, 16);
    REQUIRE(load_ok(r));
    CHECK(loaded(r) == v);
  }
}

TEST_CASE("stores do not bleed into neighbouring slots") {
  Memory m;
  BlockId b = m.alloc(24);
  CHECK(!m.store64(b, 8, Value::integer(5)));
  auto lo = m.load64(b, 0);
  auto hi = m.load64(b, 16);
  REQUIRE(load_ok(lo));
  REQUIRE(load_ok(hi));
  CHECK(loaded(lo).is_undef());
  CHECK(loaded(hi).is_undef());
}

TEST_CASE("bounds and alignment errors") {
  Memory m;
  BlockId b = m.alloc(16);
  CHECK(m.store64(b, 16, Value::integer(1)) == MemErr::OutOfBounds);
  CHECK(m.store64(b, -8, Value::integer(1)) == MemErr::OutOfBounds);
  CHECK(m.store64(b, 4, Value::integer(1)) == MemErr::Misaligned);
  CHECK(load_err(m.load64(b, 16)) == MemErr::OutOfBounds);
  CHECK(load_err(m.load64(b, 12)) == MemErr::Misaligned);
  CHECK(load_err(m.load64(999, 0)) == MemErr::UnknownBlock);
  CHECK(m.store64(999, 0, Value::integer(1)) == MemErr::UnknownBlock);
}

TEST_CASE("free kills the block but keeps its identity") {
  Memory m;
  BlockId b = m.alloc(16);
  BlockId before = m.next_block();
  CHECK(!m.free_block(b));
  CHECK(!m.is_live(b));
  CHECK(m.size_of(b) == 16);  // identity and size survive for diagnostics
  CHECK(load_err(m.load64(b, 0)) == MemErr::DeadBlock);
  CHECK(m.store64(b, 0, Value::integer(1)) == MemErr::DeadBlock);
  CHECK(m.free_block(b) == MemErr::DoubleFree);
  // the id is never reused
  CHECK(m.alloc(8) >= before);
}

TEST_CASE("zero-size blocks exist but accept no access") {
  Memory m;
  BlockId b = m.alloc(0);
  CHECK(m.is_live(b));
  CHECK(m.size_of(b) == 0);
  CHECK(load_err(m.load64(b, 0)) == MemErr::OutOfBounds);
  CHECK(!m.free_block(b));
}

TEST_CASE("concrete byte mode round-trips integers") {
  testutil::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Memory m(true);
    BlockId b = m.alloc(8);
    std::int64_t x = static_cast<std::int64_t>(rng.u64());
    REQUIRE(!m.store64(b, 0, Value::integer(x)));
    auto r = m.load64(b, 0);
    REQUIRE(load_ok(r));
    REQUIRE(loaded(r).is_int());
    CHECK(loaded(r).as_int() == x);
  }
}

TEST_CASE("memory copies are independent snapshots") {
  Memory m;
  BlockId b = m.alloc(8);
  REQUIRE(!m.store64(b, 0, Value::integer(1)));
  Memory snap = m;
  REQUIRE(!m.store64(b, 0, Value::integer(2)));
  CHECK(loaded(snap.load64(b, 0)).as_int() == 1);
  CHECK(loaded(m.load64(b, 0)).as_int() == 2);
}

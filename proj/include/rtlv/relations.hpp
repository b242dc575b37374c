// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "rtlv/memory.hpp"

namespace rtlv {

// v1 is at most as defined as v2: Vundef <= anything, otherwise equality.
bool lessdef(const Value& v1, const Value& v2);

// Memory extension: every live block of m1 with positive size is live in m2
// with at least the same size, and every aligned in-range load of m1 yields a
// value lessdef the corresponding load of m2. Zero-size blocks are exempt and
// dead blocks of m1 are ignored. Loads are the only observation, so checking
// loads is enough.
bool extends(const Memory& m1, const Memory& m2);

// Partial map from source blocks to (target block, byte delta). Unmapped
// blocks map to nothing: their contents are unconstrained and must be
// unreachable from anything the relation constrains.
class InjectionMap {
 public:
  void map(BlockId from, BlockId to, std::int64_t delta);
  void unmap(BlockId from);
  // Drop every entry whose target is b (used when the target side frees it).
  void unmap_targets(BlockId b);
  std::optional<std::pair<BlockId, std::int64_t>> lookup(BlockId from) const;
  const std::map<BlockId, std::pair<BlockId, std::int64_t>>& entries() const {
    return entries_;
  }

 private:
  std::map<BlockId, std::pair<BlockId, std::int64_t>> entries_;
};

// Translate one value through j. Vint and Vcode pass through unchanged; a
// pointer to a mapped block shifts by the delta; a pointer to an unmapped
// block yields nothing. Venc translates to itself iff both its payload and
// its digest translate to themselves (signing does not commute with moving
// blocks). Vundef translates to itself, but see inject_match.
std::optional<Value> inject_value(const InjectionMap& j, const Value& v);

// Value match modulo injection: Vundef on the left matches anything.
bool inject_match(const InjectionMap& j, const Value& v1, const Value& v2);

// Deltas must be multiples of 8 and mapped source ranges must not overlap in
// the target. Violations make mem_inject meaningless, so check this first.
bool injection_wellformed(const InjectionMap& j, const Memory& m1, const Memory& m2);

// For every live mapped source block: the target block is live, the shifted
// range fits, and every aligned in-range load matches modulo the injection.
bool mem_inject(const InjectionMap& j, const Memory& m1, const Memory& m2);

// Where a protection pass put the canary: the runtime canary value plus the
// slot offset for each protected function.
struct CanarySpec {
  Value value;
  std::map<std::string, std::int64_t> offsets;

  bool protects(const std::string& fn) const { return offsets.count(fn) != 0; }
};

}  // namespace rtlv

// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/relations.hpp"

namespace rtlv {

bool lessdef(const Value& v1, const Value& v2) {
  return v1.is_undef() || v1 == v2;
}

bool extends(const Memory& m1, const Memory& m2) {
  for (const auto& [id, blk] : m1.blocks()) {
    if (!blk.live || blk.size == 0) continue;
    if (!m2.is_live(id)) return false;
    if (m2.size_of(id) < blk.size) return false;
    for (std::int64_t off = 0; off + 8 <= blk.size; off += 8) {
      auto v1 = m1.load64(id, off);
      auto v2 = m2.load64(id, off);
      if (!load_ok(v1) || !load_ok(v2)) return false;  // in range, cannot happen
      if (!lessdef(loaded(v1), loaded(v2))) return false;
    }
  }
  return true;
}

void InjectionMap::map(BlockId from, BlockId to, std::int64_t delta) {
  entries_[from] = {to, delta};
}

void InjectionMap::unmap(BlockId from) { entries_.erase(from); }

void InjectionMap::unmap_targets(BlockId b) {
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.first == b) {
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
}

std::optional<std::pair<BlockId, std::int64_t>> InjectionMap::lookup(BlockId from) const {
  auto it = entries_.find(from);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<Value> inject_value(const InjectionMap& j, const Value& v) {
  if (v.is_undef() || v.is_int() || v.is_code()) return v;
  if (v.is_ptr()) {
    const Vptr& p = v.as_ptr();
    auto m = j.lookup(p.block);
    if (!m) return std::nullopt;
    return Value::pointer(m->first, p.off + m->second);
  }
  // Venc: only stable under the injection if both components are.
  const Venc& e = v.as_enc();
  auto inner = inject_value(j, *e.inner);
  auto mod = inject_value(j, *e.modifier);
  if (inner && *inner == *e.inner && mod && *mod == *e.modifier) return v;
  return std::nullopt;
}

bool inject_match(const InjectionMap& j, const Value& v1, const Value& v2) {
  if (v1.is_undef()) return true;
  auto iv = inject_value(j, v1);
  return iv && *iv == v2;
}

bool injection_wellformed(const InjectionMap& j, const Memory& m1, const Memory& m2) {
  std::vector<std::tuple<BlockId, std::int64_t, std::int64_t>> ranges;
  for (const auto& [from, to] : j.entries()) {
    auto [tb, delta] = to;
    if (delta % 8 != 0) return false;
    std::int64_t sz = m1.size_of(from);
    if (sz < 0) continue;
    if (!m1.is_live(from) || sz == 0) continue;
    ranges.emplace_back(tb, delta, delta + sz);
  }
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    for (std::size_t k = i + 1; k < ranges.size(); ++k) {
      auto& [b1, lo1, hi1] = ranges[i];
      auto& [b2, lo2, hi2] = ranges[k];
      if (b1 == b2 && lo1 < hi2 && lo2 < hi1) return false;
    }
  }
  (void)m2;
  return true;
}

bool mem_inject(const InjectionMap& j, const Memory& m1, const Memory& m2) {
  for (const auto& [id, blk] : m1.blocks()) {
    if (!blk.live) continue;
    auto m = j.lookup(id);
    if (!m) continue;  // unmapped: unconstrained
    auto [tb, delta] = *m;
    if (!m2.is_live(tb)) return false;
    if (delta < 0 || delta + blk.size > m2.size_of(tb)) return false;
    for (std::int64_t off = 0; off + 8 <= blk.size; off += 8) {
      auto v1 = m1.load64(id, off);
      auto v2 = m2.load64(tb, off + delta);
      if (!load_ok(v1) || !load_ok(v2)) return false;
      if (!inject_match(j, loaded(v1), loaded(v2))) return false;
    }
  }
  return true;
}

}  // namespace rtlv

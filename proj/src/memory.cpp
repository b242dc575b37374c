// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/memory.hpp"

#include <cassert>
#include <sstream>

namespace rtlv {

Value Value::enc(const Value& inner, const Value& modifier) {
  assert(!inner.is_undef() && !inner.is_enc());
  Venc e;
  e.inner = std::make_shared<const Value>(inner);
  e.modifier = std::make_shared<const Value>(modifier);
  return Value{std::move(e)};
}

bool Value::operator==(const Value& other) const {
  if (rep_.index() != other.rep_.index()) return false;
  if (const auto* e = std::get_if<Venc>(&rep_)) {
    const auto& o = std::get<Venc>(other.rep_);
    return e->key == o.key && *e->inner == *o.inner && *e->modifier == *o.modifier;
  }
  return std::visit(
      [&other](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Venc>) {
          return false;  // handled above
        } else {
          return v == std::get<T>(other.rep_);
        }
      },
      rep_);
}

std::string to_string(const Value& v) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Vundef>) {
          os << "undef";
        } else if constexpr (std::is_same_v<T, Vint>) {
          os << x.v;
        } else if constexpr (std::is_same_v<T, Vptr>) {
          os << "ptr(" << x.block << "," << x.off << ")";
        } else if constexpr (std::is_same_v<T, Vcode>) {
          os << "code(" << x.fn << "." << x.node << ")";
        } else {
          os << "enc(" << to_string(*x.inner) << ", " << to_string(*x.modifier) << ")";
        }
      },
      v.rep());
  return os.str();
}

const char* to_string(MemErr e) {
  switch (e) {
    case MemErr::UnknownBlock: return "unknown-block";
    case MemErr::DeadBlock: return "dead-block";
    case MemErr::DoubleFree: return "double-free";
    case MemErr::OutOfBounds: return "out-of-bounds";
    case MemErr::Misaligned: return "misaligned";
  }
  return "?";
}

BlockId Memory::alloc(std::int64_t size) {
  assert(size >= 0 && size % 8 == 0);
  BlockId id = next_++;
  MemBlock b;
  b.size = size;
  b.live = true;
  b.cells.assign(static_cast<std::size_t>(size), MemCell{UndefByte{}});
  blocks_.emplace(id, std::move(b));
  return id;
}

std::optional<MemErr> Memory::free_block(BlockId b) {
  auto it = blocks_.find(b);
  if (it == blocks_.end()) return MemErr::UnknownBlock;
  if (!it->second.live) return MemErr::DoubleFree;
  it->second.live = false;
  it->second.cells.clear();
  return std::nullopt;
}

namespace {

std::optional<MemErr> check_access(const std::map<BlockId, MemBlock>& blocks, BlockId b,
                                   std::int64_t off, const MemBlock** out) {
  auto it = blocks.find(b);
  if (it == blocks.end()) return MemErr::UnknownBlock;
  if (!it->second.live) return MemErr::DeadBlock;
  if (off % 8 != 0) return MemErr::Misaligned;
  if (off < 0 || off + 8 > it->second.size) return MemErr::OutOfBounds;
  *out = &it->second;
  return std::nullopt;
}

}  // namespace

std::optional<MemErr> Memory::store64(BlockId b, std::int64_t off, const Value& v) {
  const MemBlock* probe = nullptr;
  if (auto e = check_access(blocks_, b, off, &probe)) return e;
  MemBlock& blk = blocks_.at(b);
  if (concrete_int_bytes_ && v.is_int()) {
    std::uint64_t u = static_cast<std::uint64_t>(v.as_int());
    for (int i = 0; i < 8; ++i) {
      blk.cells[static_cast<std::size_t>(off) + i] =
          ConcreteByte{static_cast<std::uint8_t>((u >> (8 * i)) & 0xff)};
    }
    return std::nullopt;
  }
  for (int i = 0; i < 8; ++i) {
    blk.cells[static_cast<std::size_t>(off) + i] =
        Fragment{v, static_cast<std::uint8_t>(i)};
  }
  return std::nullopt;
}

std::variant<Value, MemErr> Memory::load64(BlockId b, std::int64_t off) const {
  const MemBlock* blk = nullptr;
  if (auto e = check_access(blocks_, b, off, &blk)) return *e;
  const std::size_t base = static_cast<std::size_t>(off);

  // All eight bytes fragments of one store, in order: the stored value.
  if (const auto* f0 = std::get_if<Fragment>(&blk->cells[base])) {
    if (f0->index == 0) {
      bool whole = true;
      for (int i = 1; i < 8 && whole; ++i) {
        const auto* fi = std::get_if<Fragment>(&blk->cells[base + i]);
        whole = fi && fi->index == i && fi->v == f0->v;
      }
      if (whole) return f0->v;
    }
  }

  // All eight bytes concrete: reassemble a Vint little-endian.
  bool concrete = true;
  for (int i = 0; i < 8 && concrete; ++i) {
    concrete = std::holds_alternative<ConcreteByte>(blk->cells[base + i]);
  }
  if (concrete) {
    std::uint64_t u = 0;
    for (int i = 7; i >= 0; --i) {
      u = (u << 8) | std::get<ConcreteByte>(blk->cells[base + i]).byte;
    }
    return Value::integer(static_cast<std::int64_t>(u));
  }

  // Mixed, torn or undef content reads back as Vundef.
  return Value::undef();
}

bool Memory::is_live(BlockId b) const {
  auto it = blocks_.find(b);
  return it != blocks_.end() && it->second.live;
}

std::int64_t Memory::size_of(BlockId b) const {
  auto it = blocks_.find(b);
  return it == blocks_.end() ? -1 : it->second.size;
}

}  // namespace rtlv

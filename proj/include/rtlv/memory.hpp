// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rtlv/ir.hpp"

namespace rtlv {

// Abstract block id. Positive, allocated monotonically, never reused.
using BlockId = std::uint64_t;

// There is exactly one signing key in the model.
enum class PacKey : std::uint8_t { A };

class Value;

// An authenticated value: the signed payload plus a structural digest of the
// modifier it was signed against. inner is never Vundef and never Venc.
struct Venc {
  std::shared_ptr<const Value> inner;
  std::shared_ptr<const Value> modifier;
  PacKey key = PacKey::A;
};

struct Vundef {
  bool operator==(const Vundef&) const = default;
};

struct Vint {
  std::int64_t v = 0;
  bool operator==(const Vint&) const = default;
};

// Pointer into block `block` at byte offset `off`. Offsets may be transiently
// out of range; only loads and stores check bounds.
struct Vptr {
  BlockId block = 0;
  std::int64_t off = 0;
  bool operator==(const Vptr&) const = default;
};

// Code location: a node of a named function.
struct Vcode {
  std::string fn;
  Node node = 0;
  bool operator==(const Vcode&) const = default;
};

class Value {
 public:
  using Rep = std::variant<Vundef, Vint, Vptr, Vcode, Venc>;

  Value() : rep_(Vundef{}) {}
  Value(Vundef v) : rep_(v) {}
  Value(Vint v) : rep_(v) {}
  Value(Vptr v) : rep_(v) {}
  Value(Vcode v) : rep_(v) {}
  Value(Venc v) : rep_(std::move(v)) {}

  static Value undef() { return Value{}; }
  static Value integer(std::int64_t v) { return Value{Vint{v}}; }
  static Value pointer(BlockId b, std::int64_t off) { return Value{Vptr{b, off}}; }
  static Value code(std::string fn, Node n) { return Value{Vcode{std::move(fn), n}}; }
  static Value enc(const Value& inner, const Value& modifier);

  bool is_undef() const { return std::holds_alternative<Vundef>(rep_); }
  bool is_int() const { return std::holds_alternative<Vint>(rep_); }
  bool is_ptr() const { return std::holds_alternative<Vptr>(rep_); }
  bool is_code() const { return std::holds_alternative<Vcode>(rep_); }
  bool is_enc() const { return std::holds_alternative<Venc>(rep_); }

  std::int64_t as_int() const { return std::get<Vint>(rep_).v; }
  const Vptr& as_ptr() const { return std::get<Vptr>(rep_); }
  const Vcode& as_code() const { return std::get<Vcode>(rep_); }
  const Venc& as_enc() const { return std::get<Venc>(rep_); }

  const Rep& rep() const { return rep_; }

  bool operator==(const Value& other) const;
  bool operator!=(const Value& other) const { return !(*this == other); }

 private:
  Rep rep_;
};

std::string to_string(const Value& v);

// One byte of a block. A 64-bit store of value v writes Fragment(v, 0..7);
// in concrete-bytes mode a Vint is written as ConcreteByte little-endian.
struct UndefByte {
  bool operator==(const UndefByte&) const = default;
};

struct ConcreteByte {
  std::uint8_t byte = 0;
  bool operator==(const ConcreteByte&) const = default;
};

struct Fragment {
  Value v;
  std::uint8_t index = 0;  // 0..7
  bool operator==(const Fragment&) const = default;
};

using MemCell = std::variant<UndefByte, ConcreteByte, Fragment>;

enum class MemErr {
  UnknownBlock,
  DeadBlock,
  DoubleFree,
  OutOfBounds,
  Misaligned,
};

const char* to_string(MemErr e);

struct MemBlock {
  std::int64_t size = 0;
  bool live = true;
  std::vector<MemCell> cells;  // size bytes
  bool operator==(const MemBlock&) const = default;
};

// Block/offset memory. A value type: copy it to keep a snapshot. Freed blocks
// stay in the map with live=false so their ids are never reinterpreted.
class Memory {
 public:
  Memory() = default;
  explicit Memory(bool concrete_int_bytes) : concrete_int_bytes_(concrete_int_bytes) {}

  // size must be >= 0 and a multiple of 8. Fresh id, all bytes undef.
  BlockId alloc(std::int64_t size);

  std::optional<MemErr> free_block(BlockId b);

  // 8-byte aligned, in-bounds access only.
  std::optional<MemErr> store64(BlockId b, std::int64_t off, const Value& v);
  std::variant<Value, MemErr> load64(BlockId b, std::int64_t off) const;

  bool is_live(BlockId b) const;
  // -1 when the block was never allocated.
  std::int64_t size_of(BlockId b) const;

  const std::map<BlockId, MemBlock>& blocks() const { return blocks_; }
  BlockId next_block() const { return next_; }
  bool concrete_int_bytes() const { return concrete_int_bytes_; }

 private:
  std::map<BlockId, MemBlock> blocks_;
  BlockId next_ = 1;
  bool concrete_int_bytes_ = false;
};

inline bool load_ok(const std::variant<Value, MemErr>& r) {
  return std::holds_alternative<Value>(r);
}
inline const Value& loaded(const std::variant<Value, MemErr>& r) {
  return std::get<Value>(r);
}
inline MemErr load_err(const std::variant<Value, MemErr>& r) {
  return std::get<MemErr>(r);
}

}  // namespace rtlv

// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "rtlv/ir.hpp"

namespace rtlv {

// Seeded random program generator. Output is deterministic per (seed,
// budget), well-formed, and terminates by construction: loops count down
// bounded constants and the call graph is acyclic except for self tail
// calls. A good share of samples exercises self tail calls so the tailrec
// pass has something to chew on.
Program gen_random_program(std::uint64_t seed, int budget = 48);

}  // namespace rtlv

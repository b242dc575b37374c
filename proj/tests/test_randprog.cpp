// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0
//
// The seeded program generator: determinism, wellformedness, termination of
// the generated programs, and enough structural variety to exercise the
// passes.

#include <cstdint>
#include <set>
#include <string>
#include <variant>

#include "doctest.h"
#include "rtlv/parser.hpp"
#include "rtlv/randprog.hpp"
#include "rtlv/semantics.hpp"

using namespace rtlv;

namespace {

bool has_self_tailcall(const Program& p) {
  for (const auto& [name, f] : p.functions) {
    for (const auto& [node, ins] : f.code) {
      const auto* tc = std::get_if<Itailcall>(&ins);
      if (tc && tc->callee == name) return true;
    }
  }
  return false;
}

int instr_count(const Program& p) {
  int n = 0;
  for (const auto& [name, f] : p.functions) n += static_cast<int>(f.code.size());
  return n;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  for (std::uint64_t seed : {0ull, 1ull, 7ull, 500ull, 123456789ull}) {
    Program a = gen_random_program(seed);
    Program b = gen_random_program(seed);
    CHECK(a == b);
    CHECK(print_program(a) == print_program(b));
  }
  // Different seeds overwhelmingly give different programs.
  std::set<std::string> texts;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    texts.insert(print_program(gen_random_program(seed)));
  }
  CHECK(texts.size() > 90);
}

TEST_CASE("every generated program is well-formed and round-trips") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Program p = gen_random_program(seed);
    REQUIRE(check_wellformed(p).empty());
    CAPTURE(seed);
    ParseResult r = parse_program(print_program(p));
    REQUIRE(std::holds_alternative<Program>(r));
    CHECK(std::get<Program>(r) == p);
  }
}

TEST_CASE("generated programs terminate on their own") {
  std::uint64_t total_events = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Program p = gen_random_program(seed);
    CHECK(p.find("main")->params.empty());
    RunOptions opt;
    opt.fuel = 1'000'000;
    RunResult r = run(p, {}, opt);
    CAPTURE(seed);
    REQUIRE(r.kind == RunResult::Kind::Final);
    total_events += r.trace.size();
  }
  // main always prints its result, so the runs are observable.
  CHECK(total_events >= 200);
}

TEST_CASE("a healthy share of samples exercises self tail calls") {
  int with_selfrec = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    if (has_self_tailcall(gen_random_program(seed))) ++with_selfrec;
  }
  CHECK(with_selfrec >= 200);
}

TEST_CASE("the budget scales program size") {
  int small = 0;
  int large = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    small += instr_count(gen_random_program(seed, 24));
    large += instr_count(gen_random_program(seed, 96));
  }
  CHECK(small > 0);
  CHECK(large > small);
}

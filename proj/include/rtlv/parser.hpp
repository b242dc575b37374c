// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <variant>

#include "rtlv/ir.hpp"

namespace rtlv {

struct ParseError {
  int line = 0;
  int col = 0;
  std::string message;
};

struct ParseOptions {
  // Accept '$'-prefixed register names. Off for source files; printing a
  // transformed program and parsing it back needs this.
  bool allow_reserved_regs = false;
};

using ParseResult = std::variant<Program, ParseError>;

// Parse the textual form. Syntactic errors only; use check_wellformed for
// structural validation of the result.
ParseResult parse_program(const std::string& text, const ParseOptions& opts = {});

std::string to_string(const ParseError& e);

}  // namespace rtlv

// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>

namespace rtlv {

namespace {

enum class Tok {
  Ident,
  Int,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Colon,
  Semi,
  Comma,
  Assign,
  Plus,
  Minus,
  Dot,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int col = 1;
};

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = {
      "function", "stacksize", "entry", "goto",  "store",   "tailcall",
      "if",       "then",      "else",  "jumptable", "return", "retvia",
      "retaa",    "load",      "call",  "extcall",   "eq",     "lt",
      "ge",       "ne",        "const", "move",      "add",    "sub",
      "mul",      "div_strict", "div_total", "addptr", "cmp_eq", "cmp_lt",
      "getcanary", "getra",    "getsp", "codeaddr",  "pac_encode", "pac_decode",
  };
  return words;
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '$')) {
        advance();
      }
      t.kind = Tok::Ident;
      t.text = text_.substr(start, pos_ - start);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      }
      t.kind = Tok::Int;
      t.text = text_.substr(start, pos_ - start);
      errno = 0;
      char* end = nullptr;
      unsigned long long u = std::strtoull(t.text.c_str(), &end, 10);
      if (errno != 0 || u > 9223372036854775807ull) {
        t.kind = Tok::End;
        t.text = "<overflow>";
        return t;
      }
      t.value = static_cast<std::int64_t>(u);
      return t;
    }
    advance();
    switch (c) {
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case '{': t.kind = Tok::LBrace; return t;
      case '}': t.kind = Tok::RBrace; return t;
      case '[': t.kind = Tok::LBracket; return t;
      case ']': t.kind = Tok::RBracket; return t;
      case ':': t.kind = Tok::Colon; return t;
      case ';': t.kind = Tok::Semi; return t;
      case ',': t.kind = Tok::Comma; return t;
      case '=': t.kind = Tok::Assign; return t;
      case '+': t.kind = Tok::Plus; return t;
      case '-': t.kind = Tok::Minus; return t;
      case '.': t.kind = Tok::Dot; return t;
      default:
        t.kind = Tok::End;
        t.text = std::string("<bad character '") + c + "'>";
        return t;
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(const std::string& text, const ParseOptions& opts)
      : lexer_(text), opts_(opts) {
    cur_ = lexer_.next();
  }

  ParseResult parse() {
    Program p;
    for (;;) {
      if (cur_.kind == Tok::End) {
        if (!cur_.text.empty()) return fail("unexpected input: " + cur_.text);
        break;
      }
      Function f;
      if (!parse_function(f)) return *error_;
      if (p.functions.count(f.name)) {
        return fail("function '" + f.name + "' defined twice");
      }
      p.functions.emplace(f.name, std::move(f));
    }
    p.main = "main";
    return p;
  }

 private:
  ParseResult fail(const std::string& msg) {
    if (!error_) error_ = ParseError{cur_.line, cur_.col, msg};
    return *error_;
  }

  bool err(const std::string& msg) {
    if (!error_) error_ = ParseError{cur_.line, cur_.col, msg};
    return false;
  }

  void bump() { cur_ = lexer_.next(); }

  bool expect(Tok k, const char* what) {
    if (cur_.kind != k) return err(std::string("expected ") + what);
    bump();
    return true;
  }

  bool keyword(const char* kw) {
    if (cur_.kind != Tok::Ident || cur_.text != kw) {
      return err(std::string("expected '") + kw + "'");
    }
    bump();
    return true;
  }

  bool at_keyword(const char* kw) const {
    return cur_.kind == Tok::Ident && cur_.text == kw;
  }

  bool parse_name(std::string& out, const char* what) {
    if (cur_.kind != Tok::Ident) return err(std::string("expected ") + what);
    if (reserved_words().count(cur_.text)) {
      return err("reserved word '" + cur_.text + "' cannot be used as " + what);
    }
    if (cur_.text[0] == '$' && !opts_.allow_reserved_regs) {
      return err("'" + cur_.text + "': names starting with '$' are reserved");
    }
    out = cur_.text;
    bump();
    return true;
  }

  bool parse_node(Node& out) {
    if (cur_.kind != Tok::Int) return err("expected node id");
    if (cur_.value <= 0) return err("node ids must be positive");
    out = cur_.value;
    bump();
    return true;
  }

  bool parse_signed(std::int64_t& out) {
    bool neg = false;
    if (cur_.kind == Tok::Minus) {
      neg = true;
      bump();
    }
    if (cur_.kind != Tok::Int) return err("expected integer");
    out = neg ? -cur_.value : cur_.value;
    bump();
    return true;
  }

  bool parse_goto(Node& out) {
    return keyword("goto") && parse_node(out);
  }

  // "[" reg ("+"|"-") int "]"
  bool parse_addr(Reg& addr, std::int64_t& off) {
    if (!expect(Tok::LBracket, "'['")) return false;
    if (!parse_name(addr, "register")) return false;
    bool neg;
    if (cur_.kind == Tok::Plus) {
      neg = false;
    } else if (cur_.kind == Tok::Minus) {
      neg = true;
    } else {
      return err("expected '+' or '-'");
    }
    bump();
    if (cur_.kind != Tok::Int) return err("expected offset");
    off = neg ? -cur_.value : cur_.value;
    bump();
    return expect(Tok::RBracket, "']'");
  }

  bool parse_reg_list(std::vector<Reg>& out) {
    if (!expect(Tok::LParen, "'('")) return false;
    if (cur_.kind == Tok::RParen) {
      bump();
      return true;
    }
    for (;;) {
      Reg r;
      if (!parse_name(r, "register")) return false;
      out.push_back(std::move(r));
      if (cur_.kind == Tok::Comma) {
        bump();
        continue;
      }
      break;
    }
    return expect(Tok::RParen, "')'");
  }

  bool parse_cond(Cond& out) {
    if (cur_.kind != Tok::Ident) return err("expected condition (eq, lt, ge, ne)");
    if (cur_.text == "eq") out = Cond::Eq;
    else if (cur_.text == "lt") out = Cond::Lt;
    else if (cur_.text == "ge") out = Cond::Ge;
    else if (cur_.text == "ne") out = Cond::Ne;
    else return err("unknown condition '" + cur_.text + "'");
    bump();
    return true;
  }

  bool parse_function(Function& f) {
    if (!keyword("function")) return false;
    if (!parse_name(f.name, "function name")) return false;
    std::vector<Reg> params;
    if (!parse_reg_list(params)) return false;
    f.params = std::move(params);
    if (!keyword("stacksize")) return false;
    if (cur_.kind != Tok::Int) return err("expected stack size");
    f.stacksize = cur_.value;
    bump();
    bool have_entry = false;
    if (at_keyword("entry")) {
      bump();
      if (!parse_node(f.entry)) return false;
      have_entry = true;
    }
    if (!expect(Tok::LBrace, "'{'")) return false;
    bool first = true;
    while (cur_.kind != Tok::RBrace) {
      if (cur_.kind == Tok::End) return err("unexpected end of input in function body");
      Node id;
      if (!parse_node(id)) return false;
      if (!expect(Tok::Colon, "':'")) return false;
      Instr ins;
      if (!parse_instr(ins)) return false;
      if (f.code.count(id)) {
        return err("node " + std::to_string(id) + " defined twice");
      }
      f.code.emplace(id, std::move(ins));
      if (first && !have_entry) f.entry = id;
      first = false;
      if (cur_.kind == Tok::Semi) bump();
    }
    bump();  // '}'
    if (f.code.empty()) return err("function body is empty");
    return true;
  }

  bool parse_instr(Instr& out) {
    if (at_keyword("store")) {
      bump();
      Istore st;
      if (!parse_addr(st.addr, st.off)) return false;
      if (!expect(Tok::Assign, "'='")) return false;
      if (!parse_name(st.src, "register")) return false;
      if (!parse_goto(st.succ)) return false;
      out = std::move(st);
      return true;
    }
    if (at_keyword("tailcall")) {
      bump();
      Itailcall tc;
      if (!parse_name(tc.callee, "function name")) return false;
      if (!parse_reg_list(tc.args)) return false;
      out = std::move(tc);
      return true;
    }
    if (at_keyword("if")) {
      bump();
      Icond c;
      if (!parse_name(c.a, "register")) return false;
      if (!parse_cond(c.cond)) return false;
      if (!parse_name(c.b, "register")) return false;
      if (!keyword("then")) return false;
      if (!parse_node(c.if_true)) return false;
      if (!keyword("else")) return false;
      if (!parse_node(c.if_false)) return false;
      out = std::move(c);
      return true;
    }
    if (at_keyword("jumptable")) {
      bump();
      Ijumptable jt;
      if (!parse_name(jt.index, "register")) return false;
      if (!expect(Tok::LBracket, "'['")) return false;
      for (;;) {
        Node n;
        if (!parse_node(n)) return false;
        jt.targets.push_back(n);
        if (cur_.kind == Tok::Comma) {
          bump();
          continue;
        }
        break;
      }
      if (!expect(Tok::RBracket, "']'")) return false;
      out = std::move(jt);
      return true;
    }
    if (at_keyword("return")) {
      bump();
      Ireturn r;
      if (cur_.kind == Tok::Ident && !reserved_words().count(cur_.text)) {
        Reg src;
        if (!parse_name(src, "register")) return false;
        r.src = std::move(src);
      }
      out = std::move(r);
      return true;
    }
    if (at_keyword("retvia")) {
      bump();
      Iretvia r;
      if (!parse_name(r.src, "register")) return false;
      out = std::move(r);
      return true;
    }
    if (at_keyword("retaa")) {
      bump();
      Iretaa r;
      if (!parse_name(r.src, "register")) return false;
      out = std::move(r);
      return true;
    }

    // Everything else starts with "dst =".
    Reg dst;
    if (!parse_name(dst, "register")) return false;
    if (!expect(Tok::Assign, "'='")) return false;

    if (at_keyword("load")) {
      bump();
      Iload ld;
      ld.dst = std::move(dst);
      if (!parse_addr(ld.addr, ld.off)) return false;
      if (!parse_goto(ld.succ)) return false;
      out = std::move(ld);
      return true;
    }
    if (at_keyword("call")) {
      bump();
      Icall c;
      c.dst = std::move(dst);
      if (!parse_name(c.callee, "function name")) return false;
      if (!parse_reg_list(c.args)) return false;
      if (!parse_goto(c.succ)) return false;
      out = std::move(c);
      return true;
    }
    if (at_keyword("extcall")) {
      bump();
      Iextcall e;
      e.dst = std::move(dst);
      if (cur_.kind != Tok::Ident) return err("expected builtin name");
      e.name = cur_.text;
      bump();
      if (!parse_reg_list(e.args)) return false;
      if (!parse_goto(e.succ)) return false;
      out = std::move(e);
      return true;
    }

    if (cur_.kind != Tok::Ident) return err("expected opcode");
    auto op = opcode_from_name(cur_.text);
    if (!op) return err("unknown opcode '" + cur_.text + "'");
    bump();
    Iop iop;
    iop.dst = std::move(dst);
    if (*op == Opcode::Const) {
      std::int64_t k;
      if (!parse_signed(k)) return false;
      iop.op = Operation::konst(k);
    } else if (*op == Opcode::CodeAddr) {
      std::string fn;
      if (!parse_name(fn, "function name")) return false;
      if (!expect(Tok::Dot, "'.'")) return false;
      Node n;
      if (!parse_node(n)) return false;
      iop.op = Operation::codeaddr(std::move(fn), n);
    } else {
      iop.op = Operation::simple(*op);
      for (int i = 0; i < opcode_arity(*op); ++i) {
        Reg r;
        if (!parse_name(r, "register")) return false;
        iop.args.push_back(std::move(r));
      }
    }
    if (!parse_goto(iop.succ)) return false;
    out = std::move(iop);
    return true;
  }

  Lexer lexer_;
  ParseOptions opts_;
  Token cur_;
  std::optional<ParseError> error_;
};

}  // namespace

ParseResult parse_program(const std::string& text, const ParseOptions& opts) {
  return Parser(text, opts).parse();
}

std::string to_string(const ParseError& e) {
  std::ostringstream os;
  os << "parse error at " << e.line << ":" << e.col << ": " << e.message;
  return os.str();
}

}  // namespace rtlv

// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/ir.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace rtlv {

int opcode_arity(Opcode op) {
  switch (op) {
    case Opcode::Const:
    case Opcode::GetCanary:
    case Opcode::GetRa:
    case Opcode::GetSp:
    case Opcode::CodeAddr:
      return 0;
    case Opcode::Move:
      return 1;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::DivStrict:
    case Opcode::DivTotal:
    case Opcode::AddPtr:
    case Opcode::CmpEq:
    case Opcode::CmpLt:
    case Opcode::PacEncode:
    case Opcode::PacDecode:
      return 2;
  }
  return 0;
}

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Const: return "const";
    case Opcode::Move: return "move";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::DivStrict: return "div_strict";
    case Opcode::DivTotal: return "div_total";
    case Opcode::AddPtr: return "addptr";
    case Opcode::CmpEq: return "cmp_eq";
    case Opcode::CmpLt: return "cmp_lt";
    case Opcode::GetCanary: return "getcanary";
    case Opcode::GetRa: return "getra";
    case Opcode::GetSp: return "getsp";
    case Opcode::CodeAddr: return "codeaddr";
    case Opcode::PacEncode: return "pac_encode";
    case Opcode::PacDecode: return "pac_decode";
  }
  return "?";
}

std::optional<Opcode> opcode_from_name(const std::string& name) {
  static const std::pair<const char*, Opcode> table[] = {
      {"const", Opcode::Const},         {"move", Opcode::Move},
      {"add", Opcode::Add},             {"sub", Opcode::Sub},
      {"mul", Opcode::Mul},             {"div_strict", Opcode::DivStrict},
      {"div_total", Opcode::DivTotal},  {"addptr", Opcode::AddPtr},
      {"cmp_eq", Opcode::CmpEq},        {"cmp_lt", Opcode::CmpLt},
      {"getcanary", Opcode::GetCanary}, {"getra", Opcode::GetRa},
      {"getsp", Opcode::GetSp},         {"codeaddr", Opcode::CodeAddr},
      {"pac_encode", Opcode::PacEncode}, {"pac_decode", Opcode::PacDecode},
  };
  for (const auto& [n, op] : table) {
    if (name == n) return op;
  }
  return std::nullopt;
}

Operation Operation::konst(std::int64_t k) {
  Operation o;
  o.op = Opcode::Const;
  o.imm = k;
  return o;
}

Operation Operation::simple(Opcode op) {
  Operation o;
  o.op = op;
  return o;
}

Operation Operation::codeaddr(std::string fn, Node node) {
  Operation o;
  o.op = Opcode::CodeAddr;
  o.fn = std::move(fn);
  o.node = node;
  return o;
}

const char* cond_name(Cond c) {
  switch (c) {
    case Cond::Eq: return "eq";
    case Cond::Lt: return "lt";
    case Cond::Ge: return "ge";
    case Cond::Ne: return "ne";
  }
  return "?";
}

const Function* Program::find(const std::string& name) const {
  auto it = functions.find(name);
  return it == functions.end() ? nullptr : &it->second;
}

std::vector<Node> successors(const Instr& ins) {
  return std::visit(
      [](const auto& i) -> std::vector<Node> {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, Iop> || std::is_same_v<T, Iload> ||
                      std::is_same_v<T, Istore> || std::is_same_v<T, Icall> ||
                      std::is_same_v<T, Iextcall>) {
          return {i.succ};
        } else if constexpr (std::is_same_v<T, Icond>) {
          return {i.if_true, i.if_false};
        } else if constexpr (std::is_same_v<T, Ijumptable>) {
          return i.targets;
        } else {
          return {};
        }
      },
      ins);
}

std::vector<Reg> uses(const Instr& ins) {
  return std::visit(
      [](const auto& i) -> std::vector<Reg> {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, Iop>) {
          return i.args;
        } else if constexpr (std::is_same_v<T, Iload>) {
          return {i.addr};
        } else if constexpr (std::is_same_v<T, Istore>) {
          return {i.addr, i.src};
        } else if constexpr (std::is_same_v<T, Icall> ||
                             std::is_same_v<T, Itailcall> ||
                             std::is_same_v<T, Iextcall>) {
          return i.args;
        } else if constexpr (std::is_same_v<T, Icond>) {
          return {i.a, i.b};
        } else if constexpr (std::is_same_v<T, Ijumptable>) {
          return {i.index};
        } else if constexpr (std::is_same_v<T, Ireturn>) {
          return i.src ? std::vector<Reg>{*i.src} : std::vector<Reg>{};
        } else if constexpr (std::is_same_v<T, Iretvia> ||
                             std::is_same_v<T, Iretaa>) {
          return {i.src};
        } else {
          return {};
        }
      },
      ins);
}

std::optional<Reg> def(const Instr& ins) {
  return std::visit(
      [](const auto& i) -> std::optional<Reg> {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, Iop> || std::is_same_v<T, Iload> ||
                      std::is_same_v<T, Icall> || std::is_same_v<T, Iextcall>) {
          return i.dst;
        } else {
          return std::nullopt;
        }
      },
      ins);
}

const char* const kBuiltinPrintInt = "print_int";
const char* const kBuiltinStackChkFail = "stack_chk_fail";

bool is_builtin(const std::string& name) {
  return name == kBuiltinPrintInt || name == kBuiltinStackChkFail;
}

namespace {

int builtin_arity(const std::string& name) {
  return name == kBuiltinPrintInt ? 1 : 0;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  char c0 = s[0];
  if (!(std::isalpha(static_cast<unsigned char>(c0)) || c0 == '_' || c0 == '$'))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
  });
}

const char* rule_name(WfRule r) {
  switch (r) {
    case WfRule::DuplicateParam: return "duplicate-param";
    case WfRule::MissingEntry: return "missing-entry";
    case WfRule::DanglingSuccessor: return "dangling-successor";
    case WfRule::StacksizeAlignment: return "stacksize-alignment";
    case WfRule::OffsetAlignment: return "offset-alignment";
    case WfRule::UnresolvedCallee: return "unresolved-callee";
    case WfRule::UnknownBuiltin: return "unknown-builtin";
    case WfRule::BuiltinArity: return "builtin-arity";
    case WfRule::EmptyJumptable: return "empty-jumptable";
    case WfRule::BadName: return "bad-name";
    case WfRule::BadArity: return "bad-arity";
    case WfRule::MissingMain: return "missing-main";
    case WfRule::BadNode: return "bad-node";
  }
  return "?";
}

}  // namespace

std::string to_string(const Diagnostic& d) {
  std::ostringstream os;
  os << rule_name(d.rule);
  if (!d.function.empty()) {
    os << " in " << d.function;
    if (d.node != 0) os << " at node " << d.node;
  }
  os << ": " << d.message;
  return os.str();
}

std::vector<Diagnostic> check_wellformed(const Program& p) {
  std::vector<Diagnostic> out;
  auto report = [&out](WfRule rule, std::string fn, Node node, std::string msg) {
    out.push_back(Diagnostic{rule, std::move(fn), node, std::move(msg)});
  };

  if (p.functions.find(p.main) == p.functions.end()) {
    report(WfRule::MissingMain, "", 0, "program has no function named '" + p.main + "'");
  }

  for (const auto& [fname, f] : p.functions) {
    if (!valid_name(fname)) {
      report(WfRule::BadName, fname, 0, "invalid function name");
    }
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (!valid_name(f.params[i])) {
        report(WfRule::BadName, fname, 0, "invalid parameter name '" + f.params[i] + "'");
      }
      for (std::size_t k = i + 1; k < f.params.size(); ++k) {
        if (f.params[i] == f.params[k]) {
          report(WfRule::DuplicateParam, fname, 0,
                 "parameter '" + f.params[i] + "' declared twice");
        }
      }
    }
    if (f.stacksize < 0 || f.stacksize % 8 != 0) {
      report(WfRule::StacksizeAlignment, fname, 0,
             "stacksize " + std::to_string(f.stacksize) + " is not a nonnegative multiple of 8");
    }
    if (f.code.find(f.entry) == f.code.end()) {
      report(WfRule::MissingEntry, fname, 0,
             "entry node " + std::to_string(f.entry) + " has no instruction");
    }
    for (const auto& [node, ins] : f.code) {
      if (node <= 0) {
        report(WfRule::BadNode, fname, node, "node ids must be positive");
      }
      for (Node s : successors(ins)) {
        if (f.code.find(s) == f.code.end()) {
          report(WfRule::DanglingSuccessor, fname, node,
                 "successor " + std::to_string(s) + " has no instruction");
        }
      }
      for (const Reg& r : uses(ins)) {
        if (!valid_name(r)) {
          report(WfRule::BadName, fname, node, "invalid register name '" + r + "'");
        }
      }
      if (auto d = def(ins); d && !valid_name(*d)) {
        report(WfRule::BadName, fname, node, "invalid register name '" + *d + "'");
      }
      if (const auto* op = std::get_if<Iop>(&ins)) {
        int want = opcode_arity(op->op.op);
        if (static_cast<int>(op->args.size()) != want) {
          report(WfRule::BadArity, fname, node,
                 std::string(opcode_name(op->op.op)) + " takes " + std::to_string(want) +
                     " operands, got " + std::to_string(op->args.size()));
        }
      } else if (const auto* ld = std::get_if<Iload>(&ins)) {
        if (ld->off % 8 != 0) {
          report(WfRule::OffsetAlignment, fname, node,
                 "load offset " + std::to_string(ld->off) + " is not a multiple of 8");
        }
      } else if (const auto* st = std::get_if<Istore>(&ins)) {
        if (st->off % 8 != 0) {
          report(WfRule::OffsetAlignment, fname, node,
                 "store offset " + std::to_string(st->off) + " is not a multiple of 8");
        }
      } else if (const auto* call = std::get_if<Icall>(&ins)) {
        if (!p.functions.count(call->callee) && !is_builtin(call->callee)) {
          report(WfRule::UnresolvedCallee, fname, node,
                 "call target '" + call->callee + "' is neither a function nor a builtin");
        }
      } else if (const auto* tc = std::get_if<Itailcall>(&ins)) {
        if (!p.functions.count(tc->callee) && !is_builtin(tc->callee)) {
          report(WfRule::UnresolvedCallee, fname, node,
                 "tailcall target '" + tc->callee + "' is neither a function nor a builtin");
        }
      } else if (const auto* jt = std::get_if<Ijumptable>(&ins)) {
        if (jt->targets.empty()) {
          report(WfRule::EmptyJumptable, fname, node, "jumptable needs at least one target");
        }
      } else if (const auto* ext = std::get_if<Iextcall>(&ins)) {
        if (!is_builtin(ext->name)) {
          report(WfRule::UnknownBuiltin, fname, node, "unknown builtin '" + ext->name + "'");
        } else if (static_cast<int>(ext->args.size()) != builtin_arity(ext->name)) {
          report(WfRule::BuiltinArity, fname, node,
                 ext->name + " takes " + std::to_string(builtin_arity(ext->name)) +
                     " arguments, got " + std::to_string(ext->args.size()));
        }
      }
    }
  }
  return out;
}

namespace {

void print_offset(std::ostream& os, const Reg& addr, std::int64_t off) {
  os << "[" << addr;
  if (off >= 0) {
    os << " + " << off;
  } else {
    os << " - " << -off;
  }
  os << "]";
}

void print_args(std::ostream& os, const std::vector<Reg>& args) {
  os << "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) os << ", ";
    os << args[i];
  }
  os << ")";
}

}  // namespace

std::string print_instr(const Instr& ins) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, Iop>) {
          os << i.dst << " = " << opcode_name(i.op.op);
          if (i.op.op == Opcode::Const) {
            os << " " << i.op.imm;
          } else if (i.op.op == Opcode::CodeAddr) {
            os << " " << i.op.fn << "." << i.op.node;
          }
          for (const Reg& a : i.args) os << " " << a;
          os << " goto " << i.succ;
        } else if constexpr (std::is_same_v<T, Iload>) {
          os << i.dst << " = load ";
          print_offset(os, i.addr, i.off);
          os << " goto " << i.succ;
        } else if constexpr (std::is_same_v<T, Istore>) {
          os << "store ";
          print_offset(os, i.addr, i.off);
          os << " = " << i.src << " goto " << i.succ;
        } else if constexpr (std::is_same_v<T, Icall>) {
          os << i.dst << " = call " << i.callee;
          print_args(os, i.args);
          os << " goto " << i.succ;
        } else if constexpr (std::is_same_v<T, Itailcall>) {
          os << "tailcall " << i.callee;
          print_args(os, i.args);
        } else if constexpr (std::is_same_v<T, Icond>) {
          os << "if " << i.a << " " << cond_name(i.cond) << " " << i.b << " then "
             << i.if_true << " else " << i.if_false;
        } else if constexpr (std::is_same_v<T, Ijumptable>) {
          os << "jumptable " << i.index << " [";
          for (std::size_t k = 0; k < i.targets.size(); ++k) {
            if (k) os << ", ";
            os << i.targets[k];
          }
          os << "]";
        } else if constexpr (std::is_same_v<T, Ireturn>) {
          os << "return";
          if (i.src) os << " " << *i.src;
        } else if constexpr (std::is_same_v<T, Iretvia>) {
          os << "retvia " << i.src;
        } else if constexpr (std::is_same_v<T, Iretaa>) {
          os << "retaa " << i.src;
        } else if constexpr (std::is_same_v<T, Iextcall>) {
          os << i.dst << " = extcall " << i.name;
          print_args(os, i.args);
          os << " goto " << i.succ;
        }
      },
      ins);
  return os.str();
}

std::string print_function(const Function& f) {
  std::ostringstream os;
  os << "function " << f.name << "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) os << ", ";
    os << f.params[i];
  }
  os << ") stacksize " << f.stacksize << " entry " << f.entry << " {\n";
  for (const auto& [node, ins] : f.code) {
    os << "  " << node << ": " << print_instr(ins) << "\n";
  }
  os << "}\n";
  return os.str();
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, f] : p.functions) {
    if (!first) os << "\n";
    first = false;
    os << print_function(f);
  }
  return os.str();
}

}  // namespace rtlv

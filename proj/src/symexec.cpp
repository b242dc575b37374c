// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/symexec.hpp"

#include <sstream>
#include <utility>

namespace rtlv {

namespace {

SymTermPtr make(SymTerm::Rep rep) {
  return std::make_shared<const SymTerm>(std::move(rep));
}

// The register an Iretvia reads the returned value from.
const char* const kRetValueReg = "$tret";
// The register pre-seeded with the stack-pointer symbol.
const char* const kSpReg = "$sp";

struct Machine {
  std::map<Reg, SymTermPtr> regs;
  std::vector<SymStore> stores;

  SymTermPtr get(const Reg& r) const {
    auto it = regs.find(r);
    if (it != regs.end()) return it->second;
    if (r == kSpReg) return make(SymSp{});
    return make(SymInit{r});
  }
};

std::string op_key(const Operation& op) {
  std::ostringstream os;
  os << opcode_name(op.op);
  if (op.op == Opcode::Const) os << " " << op.imm;
  if (op.op == Opcode::CodeAddr) os << " " << op.fn << "." << op.node;
  return os.str();
}

}  // namespace

bool sym_equal(const SymTermPtr& a, const SymTermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->rep().index() != b->rep().index()) return false;
  if (const auto* ia = std::get_if<SymInit>(&a->rep())) {
    return ia->reg == std::get<SymInit>(b->rep()).reg;
  }
  if (std::holds_alternative<SymUndef>(a->rep()) ||
      std::holds_alternative<SymSp>(a->rep()) ||
      std::holds_alternative<SymRa>(a->rep()) ||
      std::holds_alternative<SymCanary>(a->rep())) {
    return true;
  }
  if (const auto* pa = std::get_if<SymApp>(&a->rep())) {
    const auto& pb = std::get<SymApp>(b->rep());
    if (!(pa->op == pb.op)) return false;
    if (pa->args.size() != pb.args.size()) return false;
    for (std::size_t i = 0; i < pa->args.size(); ++i) {
      if (!sym_equal(pa->args[i], pb.args[i])) return false;
    }
    return true;
  }
  const auto& la = std::get<SymLoad>(a->rep());
  const auto& lb = std::get<SymLoad>(b->rep());
  return la.off == lb.off && la.version == lb.version && sym_equal(la.addr, lb.addr);
}

std::string to_string(const SymTermPtr& t) {
  if (!t) return "<null>";
  std::ostringstream os;
  if (const auto* i = std::get_if<SymInit>(&t->rep())) {
    os << "init(" << i->reg << ")";
  } else if (std::holds_alternative<SymUndef>(t->rep())) {
    os << "undef";
  } else if (std::holds_alternative<SymSp>(t->rep())) {
    os << "sp";
  } else if (std::holds_alternative<SymRa>(t->rep())) {
    os << "ra";
  } else if (std::holds_alternative<SymCanary>(t->rep())) {
    os << "canary";
  } else if (const auto* a = std::get_if<SymApp>(&t->rep())) {
    os << op_key(a->op) << "(";
    for (std::size_t i = 0; i < a->args.size(); ++i) {
      if (i) os << ", ";
      os << to_string(a->args[i]);
    }
    os << ")";
  } else {
    const auto& l = std::get<SymLoad>(t->rep());
    os << "load[" << to_string(l.addr) << " + " << l.off << "]@" << l.version;
  }
  return os.str();
}

SymExecResult symexec(const std::vector<Instr>& seq) {
  SymExecResult res;
  Machine m;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Instr& ins = seq[i];
    const bool last = i + 1 == seq.size();

    if (const auto* op = std::get_if<Iop>(&ins)) {
      SymTermPtr v;
      switch (op->op.op) {
        case Opcode::Move:
          v = m.get(op->args[0]);
          break;
        case Opcode::GetSp:
          v = make(SymSp{});
          break;
        case Opcode::GetRa:
          v = make(SymRa{});
          break;
        case Opcode::GetCanary:
          v = make(SymCanary{});
          break;
        default: {
          SymApp app;
          app.op = op->op;
          for (const Reg& a : op->args) app.args.push_back(m.get(a));
          v = make(std::move(app));
          break;
        }
      }
      m.regs[op->dst] = std::move(v);
      continue;
    }

    if (const auto* ld = std::get_if<Iload>(&ins)) {
      m.regs[ld->dst] = make(SymLoad{m.get(ld->addr), ld->off, m.stores.size()});
      continue;
    }

    if (const auto* sto = std::get_if<Istore>(&ins)) {
      m.stores.push_back(SymStore{m.get(sto->addr), sto->off, m.get(sto->src)});
      continue;
    }

    if (const auto* ret = std::get_if<Ireturn>(&ins)) {
      if (!last) {
        res.error = "return before end of sequence";
        return res;
      }
      res.state.exit = SymExitKind::Return;
      res.state.exit_value = ret->src ? m.get(*ret->src) : make(SymUndef{});
      break;
    }

    const Reg* consumed = nullptr;
    SymTermPtr target;
    if (const auto* rv = std::get_if<Iretvia>(&ins)) {
      consumed = &rv->src;
      target = m.get(rv->src);
    } else if (const auto* ra = std::get_if<Iretaa>(&ins)) {
      consumed = &ra->src;
      target = make(SymApp{Operation::simple(Opcode::PacDecode),
                           {m.get(ra->src), make(SymSp{})}});
    } else {
      res.error = "not a straight-line instruction";
      return res;
    }
    if (!last) {
      res.error = "return before end of sequence";
      return res;
    }
    m.regs[*consumed] = make(SymUndef{});
    res.state.exit = SymExitKind::ReturnVia;
    res.state.exit_target = std::move(target);
    res.state.exit_value = m.get(kRetValueReg);
    break;
  }

  // Identity entries carry no information; a register holding its own
  // initial symbol is indistinguishable from one never written.
  for (auto it = m.regs.begin(); it != m.regs.end();) {
    const auto* init = std::get_if<SymInit>(&it->second->rep());
    if (init && init->reg == it->first) {
      it = m.regs.erase(it);
    } else {
      ++it;
    }
  }
  res.state.regs = std::move(m.regs);
  res.state.stores = std::move(m.stores);
  res.ok = true;
  return res;
}

bool symexec_equiv(const std::vector<Instr>& a, const std::vector<Instr>& b) {
  SymExecResult ra = symexec(a);
  SymExecResult rb = symexec(b);
  if (!ra.ok || !rb.ok) return false;
  const SymState& sa = ra.state;
  const SymState& sb = rb.state;
  if (sa.exit != sb.exit) return false;
  if (sa.stores.size() != sb.stores.size()) return false;
  for (std::size_t i = 0; i < sa.stores.size(); ++i) {
    if (sa.stores[i].off != sb.stores[i].off) return false;
    if (!sym_equal(sa.stores[i].addr, sb.stores[i].addr)) return false;
    if (!sym_equal(sa.stores[i].value, sb.stores[i].value)) return false;
  }
  if (sa.exit == SymExitKind::ReturnVia) {
    if (!sym_equal(sa.exit_target, sb.exit_target)) return false;
  }
  if (sa.exit != SymExitKind::None) {
    if (!sym_equal(sa.exit_value, sb.exit_value)) return false;
    // The activation ends; its register bank is discarded.
    return true;
  }
  if (sa.regs.size() != sb.regs.size()) return false;
  for (const auto& [r, t] : sa.regs) {
    auto it = sb.regs.find(r);
    if (it == sb.regs.end() || !sym_equal(t, it->second)) return false;
  }
  return true;
}

}  // namespace rtlv

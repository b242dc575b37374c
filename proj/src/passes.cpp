// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rtlv/passes.hpp"

#include <stdexcept>
#include <utility>

#include "rtlv/symexec.hpp"

namespace rtlv {

namespace {

std::int64_t align8(std::int64_t n) { return (n + 7) & ~std::int64_t{7}; }

// Fresh node ids above everything present in the function.
struct NodeAlloc {
  Node next = 1;
  explicit NodeAlloc(const Function& f) {
    if (!f.code.empty()) next = f.code.rbegin()->first + 1;
  }
  Node get() { return next++; }
};

Iop make_op(Operation op, std::vector<Reg> args, Reg dst, Node succ) {
  Iop i;
  i.op = std::move(op);
  i.args = std::move(args);
  i.dst = std::move(dst);
  i.succ = succ;
  return i;
}

bool is_self_tailcall(const std::string& fn, const Instr& ins) {
  const auto* tc = std::get_if<Itailcall>(&ins);
  return tc && tc->callee == fn;
}

int count_matching(const Program& p, bool (*pred)(const Instr&)) {
  int n = 0;
  for (const auto& [name, f] : p.functions) {
    for (const auto& [node, ins] : f.code) {
      if (pred(ins)) ++n;
    }
  }
  return n;
}

}  // namespace

Program pass_refine_div(Program p) {
  for (auto& [name, f] : p.functions) {
    for (auto& [node, ins] : f.code) {
      auto* op = std::get_if<Iop>(&ins);
      if (op && op->op.op == Opcode::DivStrict) op->op.op = Opcode::DivTotal;
    }
  }
  return p;
}

Program pass_tailcall(Program p) {
  for (auto& [name, f] : p.functions) {
    if (f.stacksize != 0) continue;
    std::vector<Node> call_nodes;
    for (const auto& [node, ins] : f.code) {
      if (std::holds_alternative<Icall>(ins)) call_nodes.push_back(node);
    }
    for (Node n : call_nodes) {
      const auto& call = std::get<Icall>(f.code.at(n));
      auto rit = f.code.find(call.succ);
      if (rit == f.code.end()) continue;
      const auto* ret = std::get_if<Ireturn>(&rit->second);
      if (!ret || !ret->src || *ret->src != call.dst) continue;
      // The returned register must feed that return and nothing else.
      bool other_use = false;
      for (const auto& [m, ins2] : f.code) {
        if (m == n || m == rit->first) continue;
        for (const Reg& u : uses(ins2)) {
          if (u == call.dst) {
            other_use = true;
            break;
          }
        }
        if (other_use) break;
      }
      if (other_use) continue;
      Itailcall tc;
      tc.callee = call.callee;
      tc.args = call.args;
      f.code[n] = std::move(tc);
    }
  }
  return p;
}

Program pass_tailrec(Program p, PassBug bug) {
  for (auto& [name, f] : p.functions) {
    NodeAlloc fresh(f);
    std::vector<std::pair<Node, Itailcall>> sites;
    for (const auto& [node, ins] : f.code) {
      if (is_self_tailcall(name, ins)) sites.push_back({node, std::get<Itailcall>(ins)});
    }
    for (const auto& [site, tc] : sites) {
      const std::size_t k = tc.args.size();
      if (k == 0) {
        f.code[site] = make_op(Operation::konst(0), {},
                               "$tzn" + std::to_string(site), f.entry);
        continue;
      }
      std::vector<Reg> temps;
      temps.reserve(k);
      for (std::size_t i = 0; i < k; ++i) {
        temps.push_back("$t" + std::to_string(i) + "n" + std::to_string(site));
      }
      // Copy arguments into temporaries first so self-referencing parameter
      // permutations read pre-assignment values; the bug variant clobbers the
      // parameters before the temporaries are filled.
      std::vector<Iop> copies;
      copies.reserve(2 * k);
      auto temp_copies = [&] {
        for (std::size_t i = 0; i < k; ++i) {
          copies.push_back(make_op(Operation::simple(Opcode::Move), {tc.args[i]}, temps[i], 0));
        }
      };
      auto param_copies = [&] {
        for (std::size_t i = 0; i < k; ++i) {
          copies.push_back(make_op(Operation::simple(Opcode::Move), {temps[i]}, f.params[i], 0));
        }
      };
      if (bug == PassBug::TailrecSwapCopies) {
        param_copies();
        temp_copies();
      } else {
        temp_copies();
        param_copies();
      }
      Node at = site;
      for (std::size_t i = 0; i < copies.size(); ++i) {
        Node succ = (i + 1 == copies.size()) ? f.entry : fresh.get();
        copies[i].succ = succ;
        f.code[at] = copies[i];
        at = succ;
      }
    }
  }
  return p;
}

CanaryResult pass_canary(Program p, bool protect_all, PassBug bug) {
  CanaryResult out;
  for (auto& [name, f] : p.functions) {
    if (!(protect_all || f.stacksize > 0)) continue;
    const std::int64_t off = align8(f.stacksize);
    const std::int64_t store_off = bug == PassBug::CanaryWrongOffset ? 0 : off;
    f.stacksize = off + 8;
    out.offsets[name] = off;
    NodeAlloc fresh(f);

    // Prologue: compute the slot address and park the canary there.
    Node n1 = fresh.get(), n2 = fresh.get(), n3 = fresh.get(), n4 = fresh.get(),
         n5 = fresh.get();
    f.code[n1] = make_op(Operation::simple(Opcode::GetCanary), {}, "$tcv_p", n2);
    f.code[n2] = make_op(Operation::simple(Opcode::GetSp), {}, "$tcs_p", n3);
    f.code[n3] = make_op(Operation::konst(store_off), {}, "$tck_p", n4);
    f.code[n4] = make_op(Operation::simple(Opcode::AddPtr), {"$tcs_p", "$tck_p"}, "$tca_p", n5);
    Istore sto;
    sto.addr = "$tca_p";
    sto.off = 0;
    sto.src = "$tcv_p";
    sto.succ = f.entry;
    f.code[n5] = sto;
    f.entry = n1;

    if (bug == PassBug::CanarySkipEpilogue) continue;

    // Recheck before anything that gives the frame up.
    std::vector<Node> sites;
    for (const auto& [node, ins] : f.code) {
      if (std::holds_alternative<Ireturn>(ins) || std::holds_alternative<Itailcall>(ins) ||
          std::holds_alternative<Iretvia>(ins)) {
        sites.push_back(node);
      }
    }
    for (Node site : sites) {
      const std::string sfx = std::to_string(site);
      const Reg cv = "$tcv_" + sfx, cs = "$tcs_" + sfx, ck = "$tck_" + sfx,
                ca = "$tca_" + sfx, cl = "$tcl_" + sfx, cz = "$tcz_" + sfx;
      Instr original = f.code.at(site);
      Node m1 = fresh.get(), m2 = fresh.get(), m3 = fresh.get(), m4 = fresh.get(),
           m5 = fresh.get(), ok = fresh.get(), fail = fresh.get();
      f.code[site] = make_op(Operation::simple(Opcode::GetCanary), {}, cv, m1);
      f.code[m1] = make_op(Operation::simple(Opcode::GetSp), {}, cs, m2);
      f.code[m2] = make_op(Operation::konst(off), {}, ck, m3);
      f.code[m3] = make_op(Operation::simple(Opcode::AddPtr), {cs, ck}, ca, m4);
      Iload ld;
      ld.addr = ca;
      ld.off = 0;
      ld.dst = cl;
      ld.succ = m5;
      f.code[m4] = ld;
      Icond cnd;
      cnd.cond = Cond::Eq;
      cnd.a = cv;
      cnd.b = cl;
      cnd.if_true = ok;
      cnd.if_false = fail;
      f.code[m5] = cnd;
      f.code[ok] = std::move(original);
      Iextcall ec;
      ec.name = kBuiltinStackChkFail;
      ec.args = {};
      ec.dst = cz;
      ec.succ = ok;
      f.code[fail] = ec;
    }
  }
  out.prog = std::move(p);
  return out;
}

LowerResult pass_lower_ra(Program p) {
  LowerResult out;
  for (auto& [name, f] : p.functions) {
    if (name == p.main) continue;  // main's return address is the runtime's
    bool leaf = true;
    for (const auto& [node, ins] : f.code) {
      if (std::holds_alternative<Icall>(ins) || std::holds_alternative<Itailcall>(ins)) {
        leaf = false;
        break;
      }
    }
    if (leaf) continue;

    RaSlot slot;
    slot.offset = align8(f.stacksize);
    f.stacksize = slot.offset + 8;
    NodeAlloc fresh(f);

    Node n1 = fresh.get(), n2 = fresh.get(), n3 = fresh.get();
    f.code[n1] = make_op(Operation::simple(Opcode::GetRa), {}, "$tra", n2);
    f.code[n2] = make_op(Operation::simple(Opcode::GetSp), {}, "$tsp", n3);
    Istore sto;
    sto.addr = "$tsp";
    sto.off = slot.offset;
    sto.src = "$tra";
    sto.succ = f.entry;
    f.code[n3] = sto;
    slot.prologue_getra = n1;
    slot.prologue_getsp = n2;
    slot.prologue_store = n3;
    f.entry = n1;

    std::vector<Node> sites;
    for (const auto& [node, ins] : f.code) {
      if (std::holds_alternative<Ireturn>(ins)) sites.push_back(node);
    }
    for (Node site : sites) {
      const Ireturn ret = std::get<Ireturn>(f.code.at(site));
      const std::string sfx = std::to_string(site);
      const Reg esp = "$tesp_" + sfx, rr = "$trr_" + sfx;
      RaSlot::ReturnSite rs;
      Node at = site;
      if (ret.src) {
        Node m1 = fresh.get();
        f.code[at] = make_op(Operation::simple(Opcode::Move), {*ret.src}, "$tret", m1);
        at = m1;
      }
      Node mload = fresh.get(), mret = fresh.get();
      f.code[at] = make_op(Operation::simple(Opcode::GetSp), {}, esp, mload);
      rs.getsp = at;
      Iload ld;
      ld.addr = esp;
      ld.off = slot.offset;
      ld.dst = rr;
      ld.succ = mret;
      f.code[mload] = ld;
      rs.load = mload;
      Iretvia rv;
      rv.src = rr;
      f.code[mret] = rv;
      rs.retvia = mret;
      slot.returns.push_back(rs);
    }
    out.ra.slots[name] = std::move(slot);
  }
  out.prog = std::move(p);
  return out;
}

std::variant<Program, PassError> pass_pac(Program p, const RaSpec& ra, PassBug bug) {
  for (const auto& [name, slot] : ra.slots) {
    auto fit = p.functions.find(name);
    if (fit == p.functions.end()) return PassError{"no function named " + name};
    Function& f = fit->second;
    NodeAlloc fresh(f);

    auto expect = [&](Node n) -> Instr* {
      auto it = f.code.find(n);
      return it == f.code.end() ? nullptr : &it->second;
    };

    Instr* i_getra = expect(slot.prologue_getra);
    Instr* i_getsp = expect(slot.prologue_getsp);
    Instr* i_store = expect(slot.prologue_store);
    if (!i_getra || !i_getsp || !i_store) return PassError{name + ": prologue nodes missing"};
    auto* getra = std::get_if<Iop>(i_getra);
    auto* getsp = std::get_if<Iop>(i_getsp);
    auto* sto = std::get_if<Istore>(i_store);
    if (!getra || getra->op.op != Opcode::GetRa || !getsp || getsp->op.op != Opcode::GetSp ||
        !sto || sto->src != getra->dst || sto->addr != getsp->dst || sto->off != slot.offset) {
      return PassError{name + ": prologue does not match its slot record"};
    }

    Node enc = fresh.get();
    const Reg pe = "$tpe";
    f.code[enc] = make_op(Operation::simple(Opcode::PacEncode), {getra->dst, getsp->dst},
                          pe, slot.prologue_store);
    getsp->succ = enc;
    sto->src = pe;

    for (const RaSlot::ReturnSite& rs : slot.returns) {
      Instr* i_load = expect(rs.load);
      Instr* i_ret = expect(rs.retvia);
      if (!i_load || !i_ret) return PassError{name + ": return site nodes missing"};
      auto* ld = std::get_if<Iload>(i_load);
      auto* rv = std::get_if<Iretvia>(i_ret);
      if (!ld || ld->off != slot.offset || !rv || rv->src != ld->dst) {
        return PassError{name + ": return site does not match its slot record"};
      }
      Node dec = fresh.get();
      const Reg pd = "$tpd_" + std::to_string(rs.retvia);
      const Reg modifier =
          bug == PassBug::PacBadModifier ? "$tjunk_" + std::to_string(rs.retvia) : ld->addr;
      f.code[dec] = make_op(Operation::simple(Opcode::PacDecode), {ld->dst, modifier},
                            pd, rs.retvia);
      ld->succ = dec;
      rv->src = pd;
    }
  }
  return p;
}

PeepholeResult peephole_retaa(Program p, PassBug bug) {
  PeepholeResult out;
  for (auto& [name, f] : p.functions) {
    std::vector<Node> candidates;
    for (const auto& [node, ins] : f.code) {
      const auto* op = std::get_if<Iop>(&ins);
      if (!op || op->op.op != Opcode::PacDecode) continue;
      auto rit = f.code.find(op->succ);
      if (rit == f.code.end()) continue;
      const auto* rv = std::get_if<Iretvia>(&rit->second);
      if (!rv || rv->src != op->dst) continue;
      bool other_use = false;
      for (const auto& [m, ins2] : f.code) {
        if (m == rit->first) continue;
        for (const Reg& u : uses(ins2)) {
          if (u == op->dst) {
            other_use = true;
            break;
          }
        }
        if (other_use) break;
      }
      if (other_use) continue;
      candidates.push_back(node);
    }

    for (Node n : candidates) {
      const Iop decode = std::get<Iop>(f.code.at(n));
      const Node retvia_node = decode.succ;
      const Reg rr = decode.args[0];

      auto erase_if_unreferenced = [&](Node victim) {
        if (victim == f.entry) return;
        for (const auto& [m, ins2] : f.code) {
          for (Node s : successors(ins2)) {
            if (s == victim) return;
          }
        }
        f.code.erase(victim);
      };

      if (bug == PassBug::PeepholeNoDecode) {
        Iretvia rv;
        rv.src = rr;
        f.code[n] = rv;
        erase_if_unreferenced(retvia_node);
        ++out.fused;
        continue;
      }

      // Build the straight-line window feeding the decode: walk unique
      // Iop/Iload/Istore predecessors so the modifier can resolve to the
      // stack-pointer symbol.
      std::map<Node, std::vector<Node>> preds;
      for (const auto& [m, ins2] : f.code) {
        for (Node s : successors(ins2)) preds[s].push_back(m);
      }
      std::vector<Node> chain{n};
      Node cur = n;
      while (chain.size() < 8) {
        auto pit = preds.find(cur);
        if (pit == preds.end() || pit->second.size() != 1) break;
        Node pr = pit->second[0];
        if (pr == cur) break;
        const Instr& pi = f.code.at(pr);
        if (!std::holds_alternative<Iop>(pi) && !std::holds_alternative<Iload>(pi) &&
            !std::holds_alternative<Istore>(pi)) {
          break;
        }
        chain.insert(chain.begin(), pr);
        cur = pr;
      }

      std::vector<Instr> with_decode, fused;
      for (Node m : chain) {
        with_decode.push_back(f.code.at(m));
        if (m != n) fused.push_back(f.code.at(m));
      }
      Iretvia tail_rv;
      tail_rv.src = decode.dst;
      with_decode.push_back(tail_rv);
      Iretaa tail_ra;
      tail_ra.src = rr;
      fused.push_back(tail_ra);

      if (!symexec_equiv(with_decode, fused)) continue;
      Iretaa ra;
      ra.src = rr;
      f.code[n] = ra;
      erase_if_unreferenced(retvia_node);
      ++out.fused;
    }
  }
  out.prog = std::move(p);
  return out;
}

PipelineResult apply_pipeline(const Program& p, const PassConfig& cfg) {
  PipelineResult r;

  auto count_div_strict = [](const Instr& ins) {
    const auto* op = std::get_if<Iop>(&ins);
    return op != nullptr && op->op.op == Opcode::DivStrict;
  };
  auto count_tailcall = [](const Instr& ins) {
    return std::holds_alternative<Itailcall>(ins);
  };

  r.rewrites["refine_div"] = count_matching(p, count_div_strict);
  r.prog = pass_refine_div(p);
  r.applied.push_back("refine_div");

  if (cfg.ftailcalls) {
    int before = count_matching(r.prog, count_tailcall);
    r.prog = pass_tailcall(std::move(r.prog));
    r.rewrites["tailcall"] = count_matching(r.prog, count_tailcall) - before;
    r.applied.push_back("tailcall");
  }
  if (cfg.ftailrec) {
    int before = 0;
    for (const auto& [name, f] : r.prog.functions) {
      for (const auto& [node, ins] : f.code) {
        if (is_self_tailcall(name, ins)) ++before;
      }
    }
    r.prog = pass_tailrec(std::move(r.prog));
    r.rewrites["tailrec"] = before;
    r.applied.push_back("tailrec");
  }
  if (cfg.fstack_protector || cfg.fstack_protector_all) {
    CanaryResult cr = pass_canary(std::move(r.prog), cfg.fstack_protector_all);
    r.prog = std::move(cr.prog);
    r.canary_offsets = std::move(cr.offsets);
    r.rewrites["canary"] = static_cast<int>(r.canary_offsets.size());
    r.applied.push_back("canary");
  }
  if (cfg.fretaddr_pac) {
    LowerResult lr = pass_lower_ra(std::move(r.prog));
    r.ra = std::move(lr.ra);
    r.rewrites["lower_ra"] = static_cast<int>(r.ra.slots.size());
    r.applied.push_back("lower_ra");
    auto signed_prog = pass_pac(std::move(lr.prog), r.ra);
    if (const auto* err = std::get_if<PassError>(&signed_prog)) {
      throw std::logic_error("pac after lower_ra cannot fail: " + err->message);
    }
    r.prog = std::move(std::get<Program>(signed_prog));
    r.rewrites["pac"] = static_cast<int>(r.ra.slots.size());
    r.applied.push_back("pac");
  }
  if (cfg.fretaa) {
    PeepholeResult pr = peephole_retaa(std::move(r.prog));
    r.prog = std::move(pr.prog);
    r.rewrites["retaa"] = pr.fused;
    r.applied.push_back("retaa");
  }
  return r;
}

}  // namespace rtlv

// Copyright 2026 The rtlv Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: run, transform, validate, demo, corpus.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "rtlv/ir.hpp"
#include "rtlv/parser.hpp"
#include "rtlv/passes.hpp"
#include "rtlv/randprog.hpp"
#include "rtlv/semantics.hpp"
#include "rtlv/validate.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;

struct Cli {
  std::string subcommand;
  std::vector<std::string> inputs;
  rtlv::PassConfig cfg;
  std::vector<std::int64_t> args;
  std::uint64_t seed = 0;
  std::uint64_t fuel = 10'000'000;
  std::string format = "text";
  std::string pass;
  std::string bug;
  std::string demos_dir = "demos";
  int count = 500;
  int budget = 48;
};

int usage(const std::string& msg) {
  if (!msg.empty()) std::cerr << "error: " << msg << "\n\n";
  std::cerr <<
      "usage: rtlv <command> [options]\n"
      "\n"
      "commands:\n"
      "  run <file.rtl>        parse, apply the flagged pipeline, execute\n"
      "  transform <file.rtl>  parse, apply the flagged pipeline, print the result\n"
      "  validate <file.rtl>   co-execute one pass against its input (--pass NAME)\n"
      "  demo <scenario>       bundled scenario in every protection mode\n"
      "                        (canary-attack, hijack, pac-attack, fac, last, quicksort)\n"
      "  corpus                generate programs and validate the enabled passes\n"
      "\n"
      "pass flags (later flags win, -fno-X negates -fX):\n"
      "  -ftailcalls (default on)  -ftailrec  -fstack-protector  -fstack-protector-all\n"
      "  -fretaddr-pac  -fretaa\n"
      "\n"
      "options:\n"
      "  --args N[,N...]   integers handed to main\n"
      "  --seed N          canary / generator seed (default 0)\n"
      "  --fuel N          step budget (default 10000000)\n"
      "  --format text|kv  output style\n"
      "  --pass NAME       validate: refine_div tailcall tailrec canary lower_ra pac peephole\n"
      "  --bug NAME        validate: seed a known-broken pass variant\n"
      "  --count N         corpus: number of programs (default 500)\n"
      "  --budget N        corpus: generator size budget (default 48)\n"
      "  --demos DIR       demo: directory with the bundled .rtl files (default demos)\n";
  return kExitUsage;
}

bool parse_i64(const std::string& s, std::int64_t* out) {
  try {
    std::size_t pos = 0;
    std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) return false;
    *out = v;
    return true;
  } catch (...) {
    return false;
  }
}

bool parse_u64(const std::string& s, std::uint64_t* out) {
  try {
    std::size_t pos = 0;
    std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) return false;
    *out = v;
    return true;
  } catch (...) {
    return false;
  }
}

std::optional<rtlv::PassBug> bug_from_name(const std::string& name) {
  if (name.empty() || name == "none") return rtlv::PassBug::None;
  if (name == "canary-wrong-offset") return rtlv::PassBug::CanaryWrongOffset;
  if (name == "canary-skip-epilogue") return rtlv::PassBug::CanarySkipEpilogue;
  if (name == "tailrec-swap-copies") return rtlv::PassBug::TailrecSwapCopies;
  if (name == "pac-bad-modifier") return rtlv::PassBug::PacBadModifier;
  if (name == "peephole-no-decode") return rtlv::PassBug::PeepholeNoDecode;
  return std::nullopt;
}

int parse_cli(int argc, char** argv, Cli* cli) {
  if (argc < 2) return usage("missing command");
  cli->subcommand = argv[1];
  bool need_value = false;
  std::string pending;
  auto flag_error = [&](const std::string& f) { return usage("unknown or malformed flag " + f); };

  for (int i = 2; i < argc; ++i) {
    std::string a = argv[i];
    if (need_value) {
      need_value = false;
      if (pending == "--args") {
        std::stringstream ss(a);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          std::int64_t v;
          if (!parse_i64(tok, &v)) return usage("--args expects integers, got " + tok);
          cli->args.push_back(v);
        }
      } else if (pending == "--seed") {
        if (!parse_u64(a, &cli->seed)) return usage("--seed expects an integer");
      } else if (pending == "--fuel") {
        if (!parse_u64(a, &cli->fuel)) return usage("--fuel expects an integer");
      } else if (pending == "--format") {
        if (a != "text" && a != "kv") return usage("--format expects text or kv");
        cli->format = a;
      } else if (pending == "--pass") {
        cli->pass = a;
      } else if (pending == "--bug") {
        cli->bug = a;
      } else if (pending == "--demos") {
        cli->demos_dir = a;
      } else if (pending == "--count") {
        std::int64_t v;
        if (!parse_i64(a, &v) || v < 1) return usage("--count expects a positive integer");
        cli->count = static_cast<int>(v);
      } else if (pending == "--budget") {
        std::int64_t v;
        if (!parse_i64(a, &v) || v < 1) return usage("--budget expects a positive integer");
        cli->budget = static_cast<int>(v);
      }
      continue;
    }
    if (a == "--args" || a == "--seed" || a == "--fuel" || a == "--format" ||
        a == "--pass" || a == "--bug" || a == "--demos" || a == "--count" ||
        a == "--budget") {
      pending = a;
      need_value = true;
      continue;
    }
    if (a.rfind("-f", 0) == 0) {
      bool value = true;
      std::string name = a.substr(2);
      if (name.rfind("no-", 0) == 0) {
        value = false;
        name = name.substr(3);
      }
      if (name == "tailcalls") {
        cli->cfg.ftailcalls = value;
      } else if (name == "tailrec") {
        cli->cfg.ftailrec = value;
      } else if (name == "stack-protector") {
        cli->cfg.fstack_protector = value;
      } else if (name == "stack-protector-all") {
        cli->cfg.fstack_protector_all = value;
      } else if (name == "retaddr-pac") {
        cli->cfg.fretaddr_pac = value;
      } else if (name == "retaa") {
        cli->cfg.fretaa = value;
      } else {
        return flag_error(a);
      }
      continue;
    }
    if (!a.empty() && a[0] == '-') return flag_error(a);
    cli->inputs.push_back(a);
  }
  if (need_value) return usage(pending + " expects a value");
  return -1;  // parsed fine
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parse + well-formedness gate shared by every file-taking command.
std::optional<rtlv::Program> load_program(const std::string& path, int* exit_code) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "error: cannot read " << path << "\n";
    *exit_code = kExitUsage;
    return std::nullopt;
  }
  auto parsed = rtlv::parse_program(*text);
  if (const auto* err = std::get_if<rtlv::ParseError>(&parsed)) {
    std::cerr << path << ":" << err->line << ":" << err->col << ": error: " << err->message
              << "\n";
    *exit_code = kExitParse;
    return std::nullopt;
  }
  rtlv::Program p = std::move(std::get<rtlv::Program>(parsed));
  auto diags = rtlv::check_wellformed(p);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << path << ": error: " << to_string(d) << "\n";
    *exit_code = kExitParse;
    return std::nullopt;
  }
  return p;
}

std::vector<rtlv::Value> to_values(const std::vector<std::int64_t>& xs) {
  std::vector<rtlv::Value> out;
  out.reserve(xs.size());
  for (auto x : xs) out.push_back(rtlv::Value::integer(x));
  return out;
}

void print_run_result(const rtlv::RunResult& r, const std::string& format, std::ostream& os) {
  if (format == "kv") {
    os << "result=" << to_string(r.kind) << "\n";
    if (r.kind == rtlv::RunResult::Kind::Final) os << "value=" << to_string(r.value) << "\n";
    if (r.kind == rtlv::RunResult::Kind::Aborted) os << "abort_msg=" << r.abort_msg << "\n";
    if (r.kind == rtlv::RunResult::Kind::Stuck) {
      os << "stuck_reason=" << to_string(r.stuck.reason) << "\n";
      os << "stuck_fn=" << r.stuck.fn << "\n";
      os << "stuck_node=" << r.stuck.node << "\n";
    }
    os << "trace_n=" << r.trace.size() << "\n";
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      os << "trace_" << i << "=" << render(r.trace[i]) << "\n";
    }
    os << "steps=" << r.stats.steps << "\n";
    os << "allocs=" << r.stats.allocs << "\n";
    os << "frees=" << r.stats.frees << "\n";
    os << "max_live_frames=" << r.stats.max_live_frames << "\n";
    os << "exit=" << exit_code(r.kind) << "\n";
    return;
  }
  for (const auto& e : r.trace) os << render(e) << "\n";
  switch (r.kind) {
    case rtlv::RunResult::Kind::Final:
      os << "final: " << to_string(r.value) << "\n";
      break;
    case rtlv::RunResult::Kind::Aborted:
      os << "aborted\n";
      break;
    case rtlv::RunResult::Kind::Stuck:
      os << "stuck: " << to_string(r.stuck.reason) << " at " << r.stuck.fn << "@"
         << r.stuck.node;
      if (!r.stuck.detail.empty()) os << " (" << r.stuck.detail << ")";
      os << "\n";
      break;
    case rtlv::RunResult::Kind::OutOfFuel:
      os << "out of fuel\n";
      break;
  }
  os << "steps=" << r.stats.steps << " allocs=" << r.stats.allocs << " frees=" << r.stats.frees
     << " max_live_frames=" << r.stats.max_live_frames << "\n";
}

int cmd_run(const Cli& cli) {
  if (cli.inputs.size() != 1) return usage("run expects exactly one input file");
  int ec = 0;
  auto p = load_program(cli.inputs[0], &ec);
  if (!p) return ec;
  rtlv::PipelineResult pipe = rtlv::apply_pipeline(*p, cli.cfg);
  rtlv::RunOptions opt;
  opt.fuel = cli.fuel;
  opt.canary_seed = cli.seed;
  rtlv::RunResult r = rtlv::run(pipe.prog, to_values(cli.args), opt);
  print_run_result(r, cli.format, std::cout);
  return exit_code(r.kind);
}

int cmd_transform(const Cli& cli) {
  if (cli.inputs.size() != 1) return usage("transform expects exactly one input file");
  int ec = 0;
  auto p = load_program(cli.inputs[0], &ec);
  if (!p) return ec;
  rtlv::PipelineResult pipe = rtlv::apply_pipeline(*p, cli.cfg);
  if (cli.format == "kv") {
    std::cout << "passes=";
    for (std::size_t i = 0; i < pipe.applied.size(); ++i) {
      std::cout << (i ? "," : "") << pipe.applied[i];
    }
    std::cout << "\n";
    for (const auto& [k, n] : pipe.rewrites) std::cout << "rewrites_" << k << "=" << n << "\n";
    for (const auto& [fn, off] : pipe.canary_offsets) {
      std::cout << "canary_offset_" << fn << "=" << off << "\n";
    }
    for (const auto& [fn, slot] : pipe.ra.slots) {
      std::cout << "ra_slot_" << fn << "=" << slot.offset << "\n";
    }
    return 0;
  }
  std::cout << print_program(pipe.prog);
  std::cout << "# passes:";
  for (const auto& name : pipe.applied) std::cout << " " << name;
  std::cout << "\n";
  for (const auto& [k, n] : pipe.rewrites) {
    std::cout << "# rewrites " << k << ": " << n << "\n";
  }
  for (const auto& [fn, off] : pipe.canary_offsets) {
    std::cout << "# canary slot " << fn << ": " << off << "\n";
  }
  for (const auto& [fn, slot] : pipe.ra.slots) {
    std::cout << "# return-address slot " << fn << ": " << slot.offset << "\n";
  }
  return 0;
}

int cmd_validate(const Cli& cli) {
  if (cli.inputs.size() != 1) return usage("validate expects exactly one input file");
  if (cli.pass.empty()) return usage("validate needs --pass");
  auto bug = bug_from_name(cli.bug);
  if (!bug) return usage("unknown --bug " + cli.bug);
  int ec = 0;
  auto p = load_program(cli.inputs[0], &ec);
  if (!p) return ec;
  std::string err;
  auto check = rtlv::prepare_pass_validation(*p, cli.pass, cli.seed, *bug, &err);
  if (!check) return usage(err);
  rtlv::Verdict v = rtlv::cosim_run(check->original, check->transformed, check->spec,
                                    to_values(cli.args), cli.fuel, cli.seed);
  if (cli.format == "kv") {
    std::cout << "pass=" << cli.pass << "\n";
    std::cout << "accepted=" << (v.accepted ? 1 : 0) << "\n";
    std::cout << "reason=" << to_string(v.reason) << "\n";
    std::cout << "syncs=" << v.summary.syncs << "\n";
    std::cout << "stutters=" << v.summary.stutters << "\n";
    std::cout << "relation_checks=" << v.summary.relation_checks << "\n";
    std::cout << "max_window=" << v.summary.max_window << "\n";
  } else {
    std::cout << cli.pass << ": " << render(v) << "\n";
  }
  return v.accepted ? 0 : 1;
}

struct DemoMode {
  std::string name;
  rtlv::Program prog;
  std::vector<std::int64_t> args;
};

void print_demo_modes(const std::vector<DemoMode>& modes, const Cli& cli) {
  for (const auto& m : modes) {
    rtlv::RunOptions opt;
    opt.fuel = cli.fuel;
    opt.canary_seed = cli.seed;
    rtlv::RunResult r = rtlv::run(m.prog, to_values(m.args), opt);
    if (cli.format == "kv") {
      std::cout << m.name << ".result=" << to_string(r.kind) << "\n";
      if (r.kind == rtlv::RunResult::Kind::Final) {
        std::cout << m.name << ".value=" << to_string(r.value) << "\n";
      }
      if (r.kind == rtlv::RunResult::Kind::Stuck) {
        std::cout << m.name << ".stuck_reason=" << to_string(r.stuck.reason) << "\n";
      }
      std::cout << m.name << ".trace=";
      for (std::size_t i = 0; i < r.trace.size(); ++i) {
        std::cout << (i ? "; " : "") << render(r.trace[i]);
      }
      std::cout << "\n";
      std::cout << m.name << ".allocs=" << r.stats.allocs << "\n";
      std::cout << m.name << ".max_live_frames=" << r.stats.max_live_frames << "\n";
      std::cout << m.name << ".exit=" << exit_code(r.kind) << "\n";
      continue;
    }
    std::cout << "--- " << m.name << " ---\n";
    print_run_result(r, "text", std::cout);
    std::cout << "\n";
  }
}

int cmd_demo(const Cli& cli) {
  if (cli.inputs.size() != 1) return usage("demo expects one scenario name");
  const std::string& scenario = cli.inputs[0];
  auto load = [&](const char* file, int* ec) {
    return load_program(cli.demos_dir + "/" + file, ec);
  };
  int ec = 0;
  std::vector<DemoMode> modes;

  auto with = [&](const rtlv::Program& p, rtlv::PassConfig cfg) {
    return rtlv::apply_pipeline(p, cfg).prog;
  };

  if (scenario == "canary-attack") {
    auto p = load("canary.rtl", &ec);
    if (!p) return ec;
    rtlv::PassConfig plain, prot;
    prot.fstack_protector = true;
    modes.push_back({"benign-unprotected", with(*p, plain), {11}});
    modes.push_back({"overflow-unprotected", with(*p, plain), {12}});
    modes.push_back({"overflow-protected", with(*p, prot), {12}});
  } else if (scenario == "hijack" || scenario == "pac-attack") {
    auto p = load("hijack.rtl", &ec);
    if (!p) return ec;
    // Lowering without signing is not reachable through the flag pipeline;
    // build it directly to show what the attack does to a bare slot.
    rtlv::Program lowered = rtlv::pass_lower_ra(rtlv::pass_refine_div(*p)).prog;
    rtlv::PassConfig pac;
    pac.fretaddr_pac = true;
    rtlv::PassConfig pac_fused = pac;
    pac_fused.fretaa = true;
    modes.push_back({"benign-lowered", lowered, {7}});
    modes.push_back({"overflow-lowered", lowered, {8}});
    modes.push_back({"benign-pac", with(*p, pac), {7}});
    modes.push_back({"overflow-pac", with(*p, pac), {8}});
    modes.push_back({"overflow-pac-retaa", with(*p, pac_fused), {8}});
  } else if (scenario == "fac") {
    auto p = load("fac.rtl", &ec);
    if (!p) return ec;
    rtlv::PassConfig tc, tr;
    tr.ftailrec = true;
    modes.push_back({"tailcalls", with(*p, tc), {10}});
    modes.push_back({"tailcalls-tailrec", with(*p, tr), {10}});
  } else if (scenario == "last") {
    auto p = load("last.rtl", &ec);
    if (!p) return ec;
    rtlv::PassConfig none, tc, tr;
    none.ftailcalls = false;
    tr.ftailrec = true;
    modes.push_back({"plain-calls", with(*p, none), {}});
    modes.push_back({"tailcalls", with(*p, tc), {}});
    modes.push_back({"tailcalls-tailrec", with(*p, tr), {}});
  } else if (scenario == "quicksort") {
    auto p = load("qsort.rtl", &ec);
    if (!p) return ec;
    rtlv::PassConfig none, tr;
    none.ftailcalls = false;
    tr.ftailrec = true;
    modes.push_back({"plain-calls", with(*p, none), {}});
    modes.push_back({"tailcalls-tailrec", with(*p, tr), {}});
  } else {
    return usage("unknown scenario " + scenario);
  }
  print_demo_modes(modes, cli);
  return 0;
}

int cmd_corpus(const Cli& cli) {
  std::vector<std::string> passes;
  passes.push_back("refine_div");
  if (cli.cfg.ftailcalls) passes.push_back("tailcall");
  if (cli.cfg.ftailrec) passes.push_back("tailrec");
  if (cli.cfg.fstack_protector || cli.cfg.fstack_protector_all) passes.push_back("canary");
  if (cli.cfg.fretaddr_pac) {
    passes.push_back("lower_ra");
    passes.push_back("pac");
  }
  if (cli.cfg.fretaa) passes.push_back("peephole");

  auto bug = bug_from_name(cli.bug);
  if (!bug) return usage("unknown --bug " + cli.bug);

  std::map<std::string, int> accepted, rejected;
  int programs = 0;
  for (int i = 0; i < cli.count; ++i) {
    std::uint64_t seed = cli.seed + static_cast<std::uint64_t>(i);
    rtlv::Program p = rtlv::gen_random_program(seed, cli.budget);
    ++programs;
    for (const auto& pass : passes) {
      std::string err;
      auto check = rtlv::prepare_pass_validation(p, pass, cli.seed, *bug, &err);
      if (!check) {
        std::cerr << "seed " << seed << " " << pass << ": " << err << "\n";
        ++rejected[pass];
        continue;
      }
      rtlv::Verdict v =
          rtlv::cosim_run(check->original, check->transformed, check->spec, {}, cli.fuel,
                          cli.seed);
      if (v.accepted) {
        ++accepted[pass];
      } else {
        ++rejected[pass];
        if (cli.format == "text") {
          std::cout << "seed " << seed << " " << pass << ": " << render(v) << "\n";
        }
      }
    }
  }
  bool all_ok = true;
  if (cli.format == "kv") {
    std::cout << "programs=" << programs << "\n";
    for (const auto& pass : passes) {
      std::cout << "accepted_" << pass << "=" << accepted[pass] << "\n";
      std::cout << "rejected_" << pass << "=" << rejected[pass] << "\n";
      if (rejected[pass] > 0) all_ok = false;
    }
  } else {
    std::cout << "programs: " << programs << "\n";
    for (const auto& pass : passes) {
      std::cout << pass << ": accepted " << accepted[pass] << ", rejected " << rejected[pass]
                << "\n";
      if (rejected[pass] > 0) all_ok = false;
    }
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  int rc = parse_cli(argc, argv, &cli);
  if (rc >= 0) return rc;
  if (cli.fuel == 0) cli.fuel = 1;
  if (cli.subcommand == "run") return cmd_run(cli);
  if (cli.subcommand == "transform") return cmd_transform(cli);
  if (cli.subcommand == "validate") return cmd_validate(cli);
  if (cli.subcommand == "demo") return cmd_demo(cli);
  if (cli.subcommand == "corpus") return cmd_corpus(cli);
  return usage("unknown command " + cli.subcommand);
}

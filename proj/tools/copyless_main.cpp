#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "copyless/copyless.hpp"

using json = nlohmann::json;
namespace cl = copyless;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Options {
  bool json_output = false;
};

int emit(const Options& opt, cl::Outcome outcome, const std::string& text, json payload = {}) {
  if (opt.json_output) {
    json out;
    out["schema"] = cl::kSchema;
    out["outcome"] = cl::outcome_name(outcome);
    out["exitCode"] = static_cast<int>(outcome);
    out["summary"] = text;
    if (!payload.is_null() && !payload.empty()) out["payload"] = payload;
    std::cout << out.dump() << "\n";
  } else {
    std::cout << text << "\n";
  }
  return static_cast<int>(outcome);
}

json error_json(const cl::TypeError& e) {
  return json{{"kind", cl::err_kind_name(e.kind)}, {"path", e.path}, {"message", e.message}};
}

json verdict_json(const cl::MonitorVerdict& v) {
  json locs = json::array();
  for (auto s : v.locs) locs.push_back(cl::sym_name(s));
  const char* kind = "?";
  switch (v.kind) {
    case cl::MonitorVerdict::OK: kind = "OK"; break;
    case cl::MonitorVerdict::StuckOK: kind = "StuckOK"; break;
    case cl::MonitorVerdict::Leak: kind = "Leak"; break;
    case cl::MonitorVerdict::IsolationViolation: kind = "IsolationViolation"; break;
    case cl::MonitorVerdict::Fault: kind = "Fault"; break;
    case cl::MonitorVerdict::CommError: kind = "CommError"; break;
  }
  return json{{"kind", kind}, {"locs", locs}, {"detail", v.detail}};
}

// Typechecks every definition against its declared parameter types, then
// main under the empty environment.
struct ProgramCheck {
  bool ok = true;
  std::string subject;
  cl::CheckResult result;
  std::vector<std::pair<std::string, std::vector<cl::TypeError>>> warnings;
};

ProgramCheck check_program(const cl::SourceProgram& prog) {
  ProgramCheck out;
  for (const auto& def : prog.procdefs) {
    cl::PP body = cl::resolve_def(prog, def);
    cl::TypeVarSet delta;
    for (auto s : def.typarams) delta.insert(cl::TypeVar{s});
    cl::TypeEnv env;
    for (const auto& [sym, type] : def.params) env.emplace(cl::variable(sym), type);
    cl::CheckResult res = cl::typecheck({}, delta, env, body);
    if (!res.warnings.empty()) out.warnings.emplace_back(def.name, res.warnings);
    if (!res.ok()) {
      out.ok = false;
      out.subject = def.name;
      out.result = std::move(res);
      return out;
    }
  }
  if (prog.main) {
    cl::CheckResult res = cl::typecheck({}, {}, {}, *prog.main);
    if (!res.warnings.empty()) out.warnings.emplace_back("main", res.warnings);
    if (!res.ok()) {
      out.ok = false;
      out.subject = "main";
      out.result = std::move(res);
    }
  }
  return out;
}

int cmd_check(const Options& opt, const std::string& file) {
  cl::SourceProgram prog;
  try {
    prog = cl::parse_program(read_file(file));
  } catch (const std::exception& e) {
    return emit(opt, cl::Outcome::ParseFailure, e.what());
  }
  ProgramCheck res = check_program(prog);
  for (const auto& [subject, warns] : res.warnings)
    for (const auto& w : warns)
      std::cerr << "warning (" << subject << "): " << w.str() << "\n";
  if (!res.ok) {
    return emit(opt, cl::Outcome::TypeErrorFound, res.subject + ": " + res.result.error->str(),
                error_json(*res.result.error));
  }
  return emit(opt, cl::Outcome::Accepted, "accepted");
}

int run_like(const Options& opt, const std::string& file, bool unsafe, bool do_explore,
             std::uint64_t seed, std::size_t max_steps, std::size_t depth,
             const std::string& trace_path) {
  cl::SourceProgram prog;
  try {
    prog = cl::parse_program(read_file(file));
  } catch (const std::exception& e) {
    return emit(opt, cl::Outcome::ParseFailure, e.what());
  }
  if (!prog.main) return emit(opt, cl::Outcome::ParseFailure, "no 'main' process in '" + file + "'");
  if (!unsafe) {
    ProgramCheck res = check_program(prog);
    if (!res.ok)
      return emit(opt, cl::Outcome::TypeErrorFound,
                  "refusing to run ill-typed program (" + res.subject + ": " +
                      res.result.error->str() + "); use --unsafe to override",
                  error_json(*res.result.error));
  }
  cl::Configuration c0 = cl::make_config(*prog.main);
  if (do_explore) {
    cl::ExploreSummary sum = cl::explore(c0, depth);
    json payload;
    payload["configurations"] = sum.configurations;
    payload["transitions"] = sum.transitions;
    payload["truncated"] = sum.truncated;
    payload["violations"] = json::array();
    std::ostringstream text;
    text << "explored " << sum.configurations << " configuration(s), " << sum.violations.size()
         << " violation(s)";
    if (sum.truncated) text << " [truncated]";
    for (const auto& v : sum.violations) {
      json jv;
      jv["verdict"] = verdict_json(v.verdict);
      jv["choices"] = v.choices;
      payload["violations"].push_back(jv);
      text << "\n  " << v.verdict.str() << " via";
      for (auto cchoice : v.choices) text << " " << cchoice;
    }
    return emit(opt, sum.violations.empty() ? cl::Outcome::Accepted : cl::Outcome::MonitorViolation,
                text.str(), payload);
  }
  cl::RunResult rr = cl::run(c0, seed, max_steps);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    for (const auto& ev : rr.trace) {
      json rec;
      rec["schema"] = cl::kSchema;
      rec["step"] = ev.step;
      rec["rule"] = ev.rule;
      rec["redex"] = ev.redex;
      rec["heapDomain"] = ev.heap_dom;
      out << rec.dump() << "\n";
    }
  }
  json payload;
  payload["verdict"] = verdict_json(rr.verdict);
  payload["steps"] = rr.steps;
  payload["heapDomain"] = json::array();
  for (auto s : rr.final_config.heap.dom()) payload["heapDomain"].push_back(cl::sym_name(s));
  std::ostringstream text;
  text << rr.verdict.str() << " after " << rr.steps << " step(s); heap "
       << cl::render(rr.final_config.heap);
  return emit(opt,
              rr.verdict.is_violation() ? cl::Outcome::MonitorViolation : cl::Outcome::Accepted,
              text.str(), payload);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"copyless: session-typed copyless message passing checker and simulator"};
  app.require_subcommand(1);
  Options opt;
  app.add_flag("--json", opt.json_output, "structured output records");

  std::string file, trace_path;
  std::uint64_t seed = 0;
  std::size_t max_steps = 200, depth = 8;
  bool unsafe = false;

  auto* check = app.add_subcommand("check", "typecheck definitions and main");
  check->add_option("file", file, "source file")->required();

  auto* runc = app.add_subcommand("run", "simulate main with a seeded scheduler");
  runc->add_option("file", file, "source file")->required();
  runc->add_option("--seed", seed, "scheduler seed");
  runc->add_option("--max-steps", max_steps, "step budget");
  runc->add_option("--trace", trace_path, "write a JSONL trace to this path");
  runc->add_flag("--unsafe", unsafe, "skip the typechecker");

  auto* explorec = app.add_subcommand("explore", "bounded exhaustive exploration of main");
  explorec->add_option("file", file, "source file")->required();
  explorec->add_option("--depth", depth, "exploration depth");
  explorec->add_flag("--unsafe", unsafe, "skip the typechecker");

  std::string expr1, expr2, ctx;
  bool expr_mode = false;
  auto* subtypec = app.add_subcommand("subtype", "decide subtyping between two endpoint types");
  subtypec->add_flag("-e", expr_mode, "expression mode");
  subtypec->add_option("lhs", expr1, "subtype candidate")->required();
  subtypec->add_option("rhs", expr2, "supertype candidate")->required();

  auto* weightc = app.add_subcommand("weight", "compute the weight of an endpoint type");
  weightc->add_flag("-e", expr_mode, "expression mode");
  weightc->add_option("type", expr1, "endpoint type")->required();
  weightc->add_option("--ctx", ctx, "comma-separated free type variables");

  auto* dualc = app.add_subcommand("dual", "compute the dual of an endpoint type");
  dualc->add_flag("-e", expr_mode, "expression mode");
  dualc->add_option("type", expr1, "endpoint type")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (check->parsed()) return cmd_check(opt, file);
    if (runc->parsed()) return run_like(opt, file, unsafe, false, seed, max_steps, depth, trace_path);
    if (explorec->parsed()) return run_like(opt, file, unsafe, true, seed, max_steps, depth, trace_path);
    if (subtypec->parsed()) {
      cl::ET lhs = cl::parse_etype(expr1);
      cl::ET rhs = cl::parse_etype(expr2);
      bool verdict = cl::subtype(lhs, rhs);
      return emit(opt, cl::Outcome::Accepted, verdict ? "true" : "false",
                  json{{"subtype", verdict}});
    }
    if (weightc->parsed()) {
      cl::TypeVarSet delta;
      std::stringstream ss(ctx);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) delta.insert(cl::tv(item));
      cl::Weight w = cl::weight(delta, cl::parse_etype(expr1));
      return emit(opt, cl::Outcome::Accepted, w.str(), json{{"weight", w.str()}});
    }
    if (dualc->parsed()) {
      cl::ET t = cl::parse_etype(expr1);
      std::string rendered = cl::render(cl::dual(t));
      return emit(opt, cl::Outcome::Accepted, rendered, json{{"dual", rendered}});
    }
  } catch (const cl::ParseError& e) {
    return emit(opt, cl::Outcome::ParseFailure, e.what());
  } catch (const cl::TypeSyntaxError& e) {
    return emit(opt, cl::Outcome::ParseFailure, e.what());
  } catch (const std::exception& e) {
    return emit(opt, cl::Outcome::ParseFailure, e.what());
  }
  return 3;
}

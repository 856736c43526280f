// Acceptance suite: one test case per criterion, each printing a pass/fail
// line. Criteria exercise the library end to end and, where the contract is
// a command-line behavior, the installed binary itself.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "copyless/copyless.hpp"
#include "support/fixture_util.hpp"
#include "support/gen.hpp"

using namespace copyless;
using testutil::load_fixture;

namespace {

struct CommandResult {
  int exit_code;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  std::string cmd = std::string(COPYLESS_BIN) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int status = pclose(pipe);
  int code = (status >= 256) ? status / 256 : status;  // WEXITSTATUS without <sys/wait.h> noise
  return {code, out};
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int criterion, bool pass, const std::string& what, double seconds) {
  std::printf("%s criterion %d: %s (%.2fs)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              seconds);
  std::fflush(stdout);
  CHECK(pass);
}

std::string fixture_path(const char* name) { return std::string(FIXTURES_DIR) + "/" + name; }

}  // namespace

TEST_CASE("criterion 1: the self-delegation counterexample") {
  Stopwatch sw;
  bool pass = true;

  auto f = load_fixture(FIXTURES_DIR, "micidiale.proc");
  auto verdict = testutil::check_program(f.program);
  pass = pass && !verdict.ok && verdict.error->kind == ErrKind::WeightInfinite;

  RunResult rr = run(make_config(*f.program.main), 1, 200);
  pass = pass && rr.steps == 2;
  pass = pass && rr.verdict.kind == MonitorVerdict::Leak;
  pass = pass && rr.verdict.locs.size() == 1 && sym_name(rr.verdict.locs[0]).rfind("b", 0) == 0;
  auto dom = rr.final_config.heap.dom();
  pass = pass && dom.size() == 2 && sym_name(dom[0]).rfind("a", 0) == 0 &&
         sym_name(dom[1]).rfind("b", 0) == 0;

  CommandResult check_cli = run_cli("check " + fixture_path("micidiale.proc"));
  pass = pass && check_cli.exit_code == 1 && check_cli.output.find("WeightInfinite") != std::string::npos;
  CommandResult run_cli_res = run_cli("run " + fixture_path("micidiale.proc") + " --unsafe --seed 1");
  pass = pass && run_cli_res.exit_code == 2 && run_cli_res.output.find("Leak") != std::string::npos;

  pass = pass && sw.seconds() < 1.0;
  report(1, pass, "counterexample P rejected; runs to Leak({b}) in exactly 2 steps", sw.seconds());
}

TEST_CASE("criterion 2: the polymorphic counterexample") {
  Stopwatch sw;
  bool pass = true;
  auto f = load_fixture(FIXTURES_DIR, "micidiale2.proc");
  auto verdict = testutil::check_program(f.program);
  pass = pass && !verdict.ok && verdict.error->kind == ErrKind::WeightInfinite;
  pass = pass && verdict.error->message.find("type argument") != std::string::npos;
  pass = pass && sw.seconds() < 1.0;
  report(2, pass, "counterexample Q rejected: infinite-weight instantiation", sw.seconds());
}

TEST_CASE("criterion 3: weight unit values") {
  Stopwatch sw;
  bool pass = true;
  pass = pass && weight(parse_etype("?m<a>(lin end).end")) == Weight::of(1);
  pass = pass && weight(parse_etype("?m<a>(lin a).end")) == Weight::infinite();
  pass = pass && weight(parse_etype("rec a. ?m(lin a). end")) == Weight::infinite();
  pass = pass && weight(parse_etype("rec a. ?m(lin end). a")) == Weight::of(1);
  pass = pass && weight(t_end()) == Weight::of(0);
  pass = pass && weight(parse_etype("?m(lin ?m(lin end).end).end")) == Weight::of(2);
  pass = pass && weight(TypeVarSet{tv("a")}, parse_etype("a")) == Weight::of(0);
  pass = pass && weight(parse_etype("a")) == Weight::infinite();
  CommandResult w = run_cli("weight -e \"?m(lin end).end\"");
  pass = pass && w.exit_code == 0 && w.output.find("1") != std::string::npos;
  pass = pass && sw.seconds() < 1.0;
  report(3, pass, "weights match the worked examples exactly", sw.seconds());
}

TEST_CASE("criterion 4: subtyping laws") {
  Stopwatch sw;
  bool pass = true;

  // worked pair, with the memo trace confined to the instances universe
  ET t0 = parse_etype("rec a. !TA<a1>(lin !TB<a2>(lin a2). a1). a");
  ET s0 = parse_etype("rec b. !TA<b1>(lin !{TB<b2>(lin b2). b1, TC<b3>(lin b3). end}). b");
  auto [t, s] = make_independent(t0, s0);
  FreshVarMap fv;
  SubtypeTrace trace;
  pass = pass && subtype_independent(t, s, fv, &trace);
  auto inst = instances(fv, t, s);
  std::set<std::string> keys;
  for (const auto& e : inst) keys.insert(canon_key(e));
  for (const auto& [lhs, rhs] : trace.visited)
    pass = pass && keys.count(canon_key(lhs)) && keys.count(canon_key(rhs));

  // object-type law over a grid
  gen::Rng rng(211);
  int grid = 0;
  auto tags = gen::tag_pool();
  for (int i = 0; i < 60; ++i) {
    size_t n_i = 1 + rng.below(3), n_j = 1 + rng.below(3);
    auto mk = [&](size_t n) {
      std::vector<TBranch> bs;
      for (size_t k = 0; k < n; ++k)
        bs.push_back(TBranch{tag(tags[k]), {}, {Type{Qual::Lin, t_end()}}, t_var(tv("self"))});
      return t_rec(tv("self"), t_internal(std::move(bs)));
    };
    ET more = mk(std::max(n_i, n_j)), fewer = mk(std::min(n_i, n_j));
    bool expect = true;  // J subseteq I by construction
    pass = pass && subtype(more, fewer) == expect;
    if (n_i != n_j) pass = pass && !subtype(fewer, more);
    ++grid;
  }

  // function-type law over a grid of >= 50 combinations
  auto enc = [](const Type& s1, const Type& t1) {
    ET inner = t_external({TBranch{tag("Arg"), {}, {s1},
                                   t_internal({TBranch{tag("Res"), {}, {t1}, t_end()}})}});
    return Type{Qual::Un, t_rec(tv("a"), t_internal({TBranch{tag("Invoke"), {},
                                                             {Type{Qual::Lin, inner}},
                                                             t_var(tv("a"))}}))};
  };
  std::vector<Type> pool;
  pool.push_back(parse_type("lin end"));
  pool.push_back(parse_type("lin !m1(lin end).end"));
  pool.push_back(parse_type("lin !{m1(lin end).end, m2(lin end).end}"));
  for (int i = 0; i < 3; ++i) pool.push_back(Type{Qual::Lin, gen::closed_etype(rng, 5)});
  int combos = 0;
  for (const auto& s1 : pool)
    for (const auto& t1 : pool)
      for (const auto& s2 : pool)
        for (const auto& t2 : pool) {
          if (combos >= 120) break;
          ++combos;
          bool lhs = subtype_qualified(enc(s1, t1), enc(s2, t2));
          bool rhs = subtype_qualified(s2, s1) && subtype_qualified(t1, t2);
          pass = pass && lhs == rhs;
        }
  pass = pass && combos >= 50 && grid >= 50;
  pass = pass && sw.seconds() < 5.0;
  report(4, pass, "worked pair within instances; object and function laws on grids", sw.seconds());
}

TEST_CASE("criterion 5: positive fixtures type check") {
  Stopwatch sw;
  bool pass = true;
  for (const char* name : {"fwd.proc", "cons.proc", "mapper.proc"}) {
    Stopwatch each;
    auto f = load_fixture(FIXTURES_DIR, name);
    auto verdict = testutil::check_program(f.program);
    if (!verdict.ok)
      std::printf("  %s rejected: %s\n", name, verdict.error->str().c_str());
    pass = pass && verdict.ok;
    pass = pass && each.seconds() < 1.0;
    CommandResult cli = run_cli("check " + fixture_path(name));
    pass = pass && cli.exit_code == 0;
  }
  report(5, pass, "FWD, CONS and MAP accepted under their stated environments", sw.seconds());
}

TEST_CASE("criterion 6: the property suite at full size") {
  Stopwatch sw;
  bool pass = true;
  gen::Rng rng(1009);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    ET t = gen::closed_etype(rng, 12);
    ++checked;
    if (!alpha_equal(dual(dual(t)), t)) { pass = false; std::printf("  involution: %s\n", render(t).c_str()); }
    if (!is_dual_pair(t, dual(t))) { pass = false; std::printf("  dual pair: %s\n", render(t).c_str()); }
    if (!check_wf({}, {}, dual(t))) { pass = false; std::printf("  wf dual: %s\n", render(t).c_str()); }
    if (!subtype(t, t)) { pass = false; std::printf("  refl: %s\n", render(t).c_str()); }

    ET s = (i % 3 == 0) ? gen::closed_etype(rng, 12) : gen::mutate_super(rng, t);
    bool fwd = subtype(t, s);
    if (fwd != subtype(dual(s), dual(t))) {
      pass = false;
      std::printf("  contravariance: %s vs %s\n", render(t).c_str(), render(s).c_str());
    }
    if (fwd && !(weight(t) <= weight(s))) {
      pass = false;
      std::printf("  weight monotonicity: %s vs %s\n", render(t).c_str(), render(s).c_str());
    }
    if (t->kind == TKind::Rec && !(weight(t) == weight(unfold(t)))) {
      pass = false;
      std::printf("  unfold weight: %s\n", render(t).c_str());
    }
    unsigned fuel = static_cast<unsigned>(2 * (node_count(t) + node_count(s)) + 16);
    if (fwd != subtype_oracle(t, s, fuel)) {
      pass = false;
      std::printf("  oracle disagreement: %s vs %s\n", render(t).c_str(), render(s).c_str());
    }
    unsigned cap = static_cast<unsigned>(prefix_count(t) + 2);
    if (!(weight(t) == weight_oracle({}, t, cap))) {
      pass = false;
      std::printf("  weight oracle: %s\n", render(t).c_str());
    }
  }
  pass = pass && checked == 500;
  pass = pass && sw.seconds() < 60.0;
  report(6, pass, "500 random types: duality, subtyping and weight properties", sw.seconds());
}

TEST_CASE("criterion 7: safety fuzz over accepted fixtures") {
  Stopwatch sw;
  bool pass = true;
  for (const auto& name : testutil::fixture_names()) {
    auto f = load_fixture(FIXTURES_DIR, name);
    auto verdict = testutil::check_program(f.program);
    if (!verdict.ok || !f.program.main) continue;  // only accepted, runnable fixtures
    Configuration c0 = make_config(*f.program.main);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      RunResult rr = run(c0, seed, 200);
      if (rr.verdict.is_violation()) {
        pass = false;
        std::printf("  %s seed %llu: %s\n", name.c_str(),
                    static_cast<unsigned long long>(seed), rr.verdict.str().c_str());
        break;
      }
    }
  }
  for (const char* name : {"two_party_close.proc", "pingpong.proc", "delegation.proc"}) {
    auto f = load_fixture(FIXTURES_DIR, name);
    ExploreSummary sum = explore(make_config(*f.program.main), 8);
    if (!sum.violations.empty() || sum.truncated) {
      pass = false;
      std::printf("  explore %s: %zu violation(s)\n", name, sum.violations.size());
    }
  }
  pass = pass && sw.seconds() < 300.0;
  report(7, pass, "1000 seeds x 200 steps per accepted fixture; depth-8 exploration clean",
         sw.seconds());
}

TEST_CASE("criterion 8: the four ill-behaved one-liners") {
  Stopwatch sw;
  bool pass = true;
  struct Case {
    const char* file;
    MonitorVerdict::Kind verdict;
    ErrKind reject;
  };
  const Case cases[] = {
      {"ill_leak.proc", MonitorVerdict::Leak, ErrKind::LinearUnused},
      {"ill_double_close.proc", MonitorVerdict::IsolationViolation, ErrKind::SplitFail},
      {"ill_tag_mismatch.proc", MonitorVerdict::CommError, ErrKind::NoSuchTag},
      {"ill_shared_send.proc", MonitorVerdict::CommError, ErrKind::UnknownName},
  };
  for (const auto& c : cases) {
    Stopwatch each;
    auto f = load_fixture(FIXTURES_DIR, c.file);
    auto verdict = testutil::check_program(f.program);
    bool this_ok = !verdict.ok && verdict.error->kind == c.reject;
    RunResult rr = run(make_config(*f.program.main), 1, 200);
    this_ok = this_ok && rr.verdict.kind == c.verdict;
    CommandResult cli = run_cli(std::string("run ") + fixture_path(c.file) + " --unsafe --seed 1");
    this_ok = this_ok && cli.exit_code == 2;
    CommandResult chk = run_cli(std::string("check ") + fixture_path(c.file));
    this_ok = this_ok && chk.exit_code == 1;
    this_ok = this_ok && each.seconds() < 1.0;
    if (!this_ok)
      std::printf("  %s: check=%s run=%s\n", c.file,
                  verdict.ok ? "accepted" : err_kind_name(verdict.error->kind),
                  rr.verdict.str().c_str());
    pass = pass && this_ok;
  }
  report(8, pass, "each one-liner rejected statically and flagged at runtime", sw.seconds());
}

TEST_CASE("criterion 9: round trips and determinism") {
  Stopwatch sw;
  bool pass = true;
  gen::Rng rng(3001);
  for (int i = 0; i < 300; ++i) {
    ET t = gen::closed_etype(rng, 12);
    if (!alpha_equal(parse_etype(render(t)), t)) {
      pass = false;
      std::printf("  type round trip: %s\n", render(t).c_str());
    }
  }
  for (int i = 0; i < 300; ++i) {
    PP p = gen::random_process(rng);
    if (!alpha_equal(parse_process(render(p)), p)) {
      pass = false;
      std::printf("  process round trip: %s\n", render(p).c_str());
    }
  }
  auto f = load_fixture(FIXTURES_DIR, "stream.proc");
  for (std::uint64_t seed : {1ull, 7ull, 23ull}) {
    RunResult r1 = run(make_config(*f.program.main), seed, 150);
    RunResult r2 = run(make_config(*f.program.main), seed, 150);
    bool same = r1.steps == r2.steps && r1.trace.size() == r2.trace.size() &&
                render(r1.final_config.heap) == render(r2.final_config.heap);
    for (size_t i = 0; same && i < r1.trace.size(); ++i)
      same = r1.trace[i].rule == r2.trace[i].rule && r1.trace[i].redex == r2.trace[i].redex &&
             r1.trace[i].heap_dom == r2.trace[i].heap_dom;
    pass = pass && same;
    Configuration replayed = replay(make_config(*f.program.main), r1.trace);
    pass = pass && canonical_config_key(replayed) == canonical_config_key(r1.final_config);
  }
  pass = pass && sw.seconds() < 30.0;
  report(9, pass, "300 round trips per sort; seeded runs reproduce byte for byte", sw.seconds());
}

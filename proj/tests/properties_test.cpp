#include <catch2/catch_amalgamated.hpp>

#include "copyless/copyless.hpp"
#include "support/fixture_util.hpp"
#include "support/gen.hpp"

using namespace copyless;

TEST_CASE("duality properties on random closed types") {
  gen::Rng rng(101);
  for (int i = 0; i < 150; ++i) {
    ET t = gen::closed_etype(rng, 12);
    INFO("sample " << i << ": " << render(t));
    CHECK(alpha_equal(dual(dual(t)), t));
    CHECK(is_dual_pair(t, dual(t)));
    CHECK(check_wf({}, {}, dual(t)));
  }
}

TEST_CASE("duality commutes with substitution on inner variables") {
  gen::Rng rng(103);
  TypeVar a = tv("zsub");
  for (int i = 0; i < 120; ++i) {
    ET t = gen::open_etype(rng, {}, {a}, 10);
    ET s = gen::closed_etype(rng, 8);
    INFO("T = " << render(t) << "   S = " << render(s));
    REQUIRE(check_wf({}, {a}, t));
    CHECK(alpha_equal(dual(subst_type(t, s, a)), subst_type(dual(t), s, a)));
  }
}

TEST_CASE("well-formedness is preserved by substitution") {
  gen::Rng rng(105);
  TypeVar a = tv("wsub");
  for (int i = 0; i < 100; ++i) {
    ET t = gen::open_etype(rng, {}, {a}, 10);
    ET s = gen::closed_etype(rng, 8);
    CHECK(check_wf({}, {}, subst_type(t, s, a)));
  }
}

TEST_CASE("subtyping is a preorder") {
  gen::Rng rng(107);
  std::vector<ET> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(gen::closed_etype(rng, 8));
  for (const auto& t : pool) CHECK(subtype(t, t));
  // transitivity over chains built by mutation
  for (int i = 0; i < 60; ++i) {
    ET t = pool[rng.below(pool.size())];
    ET s = gen::mutate_super(rng, t);
    ET u = gen::mutate_super(rng, s);
    INFO(render(t) << "  <=  " << render(s) << "  <=  " << render(u));
    CHECK(subtype(t, s));
    CHECK(subtype(s, u));
    CHECK(subtype(t, u));
  }
}

TEST_CASE("duality is contravariant for subtyping") {
  gen::Rng rng(109);
  for (int i = 0; i < 120; ++i) {
    ET t = gen::closed_etype(rng, 10);
    ET s = i % 2 ? gen::mutate_super(rng, t) : gen::closed_etype(rng, 10);
    bool forward = subtype(t, s);
    bool backward = subtype(dual(s), dual(t));
    INFO(render(t) << " vs " << render(s));
    CHECK(forward == backward);
  }
}

TEST_CASE("weights are monotone along subtyping") {
  gen::Rng rng(111);
  for (int i = 0; i < 120; ++i) {
    ET t = gen::closed_etype(rng, 10);
    ET s = gen::mutate_super(rng, t);
    if (!subtype(t, s)) continue;
    INFO(render(t) << " <= " << render(s));
    CHECK(weight(t) <= weight(s));
  }
}

TEST_CASE("weight is invariant under unfolding") {
  gen::Rng rng(113);
  int recs = 0;
  for (int i = 0; i < 300 && recs < 80; ++i) {
    ET t = gen::closed_etype(rng, 12);
    if (t->kind != TKind::Rec) continue;
    ++recs;
    INFO(render(t));
    CHECK(weight(t) == weight(unfold(t)));
  }
  CHECK(recs > 20);
}

TEST_CASE("algorithm and oracle agree") {
  gen::Rng rng(115);
  for (int i = 0; i < 150; ++i) {
    ET t = gen::closed_etype(rng, 9);
    ET s = i % 3 == 0 ? gen::closed_etype(rng, 9) : gen::mutate_super(rng, t);
    unsigned fuel = static_cast<unsigned>(2 * (node_count(t) + node_count(s)) + 16);
    INFO(render(t) << " vs " << render(s));
    CHECK(subtype(t, s) == subtype_oracle(t, s, fuel));
  }
  for (int i = 0; i < 150; ++i) {
    ET t = gen::closed_etype(rng, 10);
    unsigned cap = static_cast<unsigned>(prefix_count(t) + 2);
    INFO(render(t));
    CHECK(weight(t) == weight_oracle({}, t, cap));
  }
}

TEST_CASE("finite weights survive substitution") {
  gen::Rng rng(117);
  TypeVar a = tv("fsub");
  int tried = 0;
  for (int i = 0; i < 300 && tried < 80; ++i) {
    ET t = gen::open_etype(rng, {a}, {}, 10);
    ET s = gen::closed_etype(rng, 8);
    if (!weight({a}, t).is_finite() || !weight(s).is_finite()) continue;
    ++tried;
    INFO(render(t) << " with " << render(s));
    CHECK(weight(subst_type(t, s, a)).is_finite());
  }
  CHECK(tried > 20);
}

// ---------------------------------------------------------------------------
// Environment tracking across reductions: replays the typing environments
// alongside the heap and checks heap well-typedness after every step.

namespace {

struct TrackedEnvs {
  TypeEnv roots;   // unrestricted pointers and heap roots
  TypeEnv queued;  // linear pointers sitting in queues
};

ET expose(ET t) {
  while (t->kind == TKind::Rec) t = unfold(t);
  return t;
}

void apply_rule(TrackedEnvs& envs, const Configuration& before, const Redex& r) {
  const PP& leaf = before.leaves.at(r.leaf);
  auto move_args = [&](const std::vector<Name>& args) {
    for (const Name& v : args) {
      auto it = envs.roots.find(v);
      REQUIRE(it != envs.roots.end());
      if (it->second.qual == Qual::Lin) {
        envs.queued.emplace(it->first, it->second);
        envs.roots.erase(it);
      }
    }
  };
  switch (r.kind) {
    case RuleKind::OpenLinear: {
      // names allocated by the step: the two most recent counter values
      Sym la = intern(sym_name(leaf->loc_a) + "#" + std::to_string(before.next_loc));
      Sym lb = intern(sym_name(leaf->loc_b) + "#" + std::to_string(before.next_loc + 1));
      envs.roots.emplace(linear(la), Type{Qual::Lin, leaf->type_a});
      envs.roots.emplace(linear(lb), Type{Qual::Lin, leaf->type_b});
      return;
    }
    case RuleKind::OpenUn: {
      Sym la = intern(sym_name(leaf->loc_a) + "#" + std::to_string(before.next_loc));
      envs.roots.emplace(linear(la), Type{Qual::Lin, leaf->type_a});
      envs.roots.emplace(shared(la), Type{Qual::Un, dual(leaf->type_a)});
      return;
    }
    case RuleKind::SendLinear:
    case RuleKind::SendUn: {
      Type& subject = envs.roots.at(leaf->subject.kind == NameKind::Shared
                                        ? Name{NameKind::Shared, leaf->subject.sym}
                                        : leaf->subject);
      ET t = expose(subject.body);
      REQUIRE(t->kind == TKind::Internal);
      const TBranch* branch = nullptr;
      for (const auto& b : t->branches)
        if (b.tag == leaf->tag) branch = &b;
      REQUIRE(branch != nullptr);
      std::map<TypeVar, ET> sub;
      for (size_t i = 0; i < branch->typarams.size(); ++i)
        sub.emplace(branch->typarams[i], leaf->tyargs[i]);
      if (subject.qual == Qual::Lin)
        subject = Type{Qual::Lin, subst_type_many(branch->cont, sub)};
      move_args(leaf->args);
      return;
    }
    case RuleKind::Receive: {
      const Endpoint& ep = before.heap.at(leaf->subject.sym);
      const Message& msg = ep.queue.front();
      Type& subject = envs.roots.at(leaf->subject);
      ET t = expose(subject.body);
      REQUIRE(t->kind == TKind::External);
      const TBranch* branch = nullptr;
      for (const auto& b : t->branches)
        if (b.tag == msg.tag) branch = &b;
      REQUIRE(branch != nullptr);
      std::map<TypeVar, ET> sub;
      for (size_t i = 0; i < branch->typarams.size(); ++i) sub.emplace(branch->typarams[i], msg.tyargs[i]);
      subject = Type{Qual::Lin, subst_type_many(branch->cont, sub)};
      for (const Name& v : msg.args) {
        auto it = envs.queued.find(v);
        if (it != envs.queued.end()) {
          envs.roots.emplace(it->first, it->second);
          envs.queued.erase(it);
        }
      }
      return;
    }
    default:
      return;  // choice and rec do not move ownership
  }
}

void run_with_heap_typing(const char* fixture, std::uint64_t seed, size_t max_steps) {
  auto f = copyless::testutil::load_fixture(FIXTURES_DIR, fixture);
  REQUIRE(f.program.main.has_value());
  Configuration c = make_config(*f.program.main);
  TrackedEnvs envs;
  std::mt19937_64 rng(seed);
  for (size_t stepno = 0; stepno < max_steps; ++stepno) {
    RedexSet rs = redexes(c);
    if (rs.enabled.empty()) break;
    const Redex& r = rs.enabled[rng() % rs.enabled.size()];
    apply_rule(envs, c, r);
    c = step(c, r);
    MonitorVerdict v = monitor(c);
    INFO(fixture << " step " << stepno << ": " << render(c.heap));
    REQUIRE_FALSE(v.is_violation());
    // every step preserves "at most one peer queue nonempty"
    for (const auto& [loc, ep] : c.heap) {
      if (loc == ep.peer) continue;
      const Endpoint& peer = c.heap.at(ep.peer);
      CHECK((ep.queue.empty() || peer.queue.empty()));
    }
    HeapVerdict hv = check_heap(envs.queued, envs.roots, c.heap);
    INFO("condition " << hv.condition << ": " << hv.witness);
    CHECK(hv.ok());
  }
}

}  // namespace

TEST_CASE("heap stays well typed along reductions of accepted fixtures") {
  run_with_heap_typing("two_party_close.proc", 1, 50);
  run_with_heap_typing("pingpong.proc", 1, 50);
  run_with_heap_typing("delegation.proc", 1, 50);
  run_with_heap_typing("delegation.proc", 9, 50);
  run_with_heap_typing("unrest_service.proc", 4, 60);
}

#pragma once

// Deterministic random generators for well-formed endpoint types and
// syntactically valid processes, used by the property suites. Generation
// follows the well-formedness judgment: an (outer, inner) pair of variable
// contexts drives which variables may appear where.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "copyless/copyless.hpp"

namespace copyless::gen {

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  size_t below(size_t n) { return n == 0 ? 0 : static_cast<size_t>(engine() % n); }
  bool chance(int percent) { return static_cast<int>(engine() % 100) < percent; }
};

inline const std::vector<std::string>& tag_pool() {
  static const std::vector<std::string> tags{"m1", "m2", "m3", "ping", "data", "eos"};
  return tags;
}

struct TypeGen {
  Rng& rng;
  int var_counter = 0;

  TypeVar fresh_name() { return tv("g" + std::to_string(var_counter++)); }

  // Generates a type derivable under (outer; inner). `guard_pending` holds
  // the rec binders not yet protected by a prefix, which must not occur at
  // the top level yet (contractivity).
  ET etype(const TypeVarSet& outer, const TypeVarSet& inner, TypeVarSet guard_pending, int budget) {
    std::vector<TypeVar> usable;
    for (const auto& v : outer)
      if (!inner.count(v) && !guard_pending.count(v)) usable.push_back(v);
    if (budget <= 1) {
      if (!usable.empty() && rng.chance(40)) return t_var(usable[rng.below(usable.size())]);
      return t_end();
    }
    switch (rng.below(6)) {
      case 0:
        return t_end();
      case 1:
        if (!usable.empty()) return t_var(usable[rng.below(usable.size())]);
        [[fallthrough]];
      case 2: {  // rec
        TypeVar binder = fresh_name();
        TypeVarSet o = outer;
        o.insert(binder);
        TypeVarSet i = inner;
        i.erase(binder);
        TypeVarSet pend = guard_pending;
        pend.insert(binder);
        ET body = etype(o, i, pend, budget - 1);
        if (!detail::guarded_body(body, binder)) return t_end();
        return t_rec(binder, body);
      }
      default: {  // choice
        bool internal = rng.chance(50);
        size_t n_branches = 1 + rng.below(2);
        int sub_budget = (budget - 1) / static_cast<int>(n_branches);
        std::vector<TBranch> branches;
        std::vector<size_t> tags_used;
        for (size_t i = 0; i < n_branches; ++i) {
          size_t tag_idx;
          bool dup;
          do {
            tag_idx = rng.below(tag_pool().size());
            dup = false;
            for (auto u : tags_used) dup = dup || u == tag_idx;
          } while (dup);
          tags_used.push_back(tag_idx);
          TBranch b;
          b.tag = tag(tag_pool()[tag_idx]);
          size_t n_typarams = rng.below(2);
          for (size_t j = 0; j < n_typarams; ++j) b.typarams.push_back(fresh_name());
          TypeVarSet arg_outer = outer;
          arg_outer.insert(inner.begin(), inner.end());
          for (const auto& tp : b.typarams) arg_outer.insert(tp);
          size_t n_args = rng.below(3);
          for (size_t j = 0; j < n_args; ++j) {
            ET at = etype(arg_outer, {}, {}, sub_budget / 2 + 1);
            b.argtypes.push_back(Type{Qual::Lin, at});
          }
          TypeVarSet cont_inner = inner;
          for (const auto& tp : b.typarams) cont_inner.insert(tp);
          b.cont = etype(outer, cont_inner, {}, sub_budget);
          branches.push_back(std::move(b));
        }
        return internal ? t_internal(std::move(branches)) : t_external(std::move(branches));
      }
    }
  }
};

// A closed well-formed endpoint type of at most roughly `max_nodes` nodes.
inline ET closed_etype(Rng& rng, int max_nodes = 12) {
  TypeGen g{rng};
  for (int attempt = 0; attempt < 50; ++attempt) {
    ET t = g.etype({}, {}, {}, max_nodes);
    if (node_count(t) <= static_cast<size_t>(max_nodes) && check_wf({}, {}, t)) return t;
  }
  return t_end();
}

// A well-formed endpoint type with the given free variables available
// everywhere (outer) or only within prefixes (inner).
inline ET open_etype(Rng& rng, const TypeVarSet& outer, const TypeVarSet& inner, int max_nodes = 12) {
  TypeGen g{rng};
  for (int attempt = 0; attempt < 50; ++attempt) {
    ET t = g.etype(outer, inner, {}, max_nodes);
    TypeVarSet o = outer;
    if (check_wf(o, inner, t)) return t;
  }
  return t_end();
}

// Mutates t into a supertype: drops internal-choice branches, widens
// external choices with fresh branches, recurses covariantly into
// continuations and with the proper variance into argument types.
inline ET mutate_super(Rng& rng, const ET& t, int depth = 0);
inline ET mutate_sub(Rng& rng, const ET& t, int depth = 0);

inline ET mutate_super(Rng& rng, const ET& t, int depth) {
  if (depth > 6) return t;
  switch (t->kind) {
    case TKind::End:
    case TKind::Var:
      return t;
    case TKind::Rec:
      return raw::make_rec(t->var, mutate_super(rng, t->rec_body, depth + 1));
    case TKind::Internal: {
      std::vector<TBranch> out;
      for (const auto& b : t->branches) {
        if (t->branches.size() > 1 && out.size() + 1 < t->branches.size() && rng.chance(30))
          continue;  // supertype of an internal choice offers fewer tags
        TBranch nb{b.tag, b.typarams, {}, nullptr};
        for (const auto& at : b.argtypes)
          nb.argtypes.push_back(Type{at.qual, mutate_sub(rng, at.body, depth + 1)});
        nb.cont = mutate_super(rng, b.cont, depth + 1);
        out.push_back(std::move(nb));
      }
      if (out.empty()) out.push_back(t->branches.front());
      return raw::make_choice(TKind::Internal, std::move(out));
    }
    case TKind::External: {
      std::vector<TBranch> out;
      for (const auto& b : t->branches) {
        TBranch nb{b.tag, b.typarams, {}, nullptr};
        for (const auto& at : b.argtypes)
          nb.argtypes.push_back(Type{at.qual, mutate_super(rng, at.body, depth + 1)});
        nb.cont = mutate_super(rng, b.cont, depth + 1);
        out.push_back(std::move(nb));
      }
      if (rng.chance(30)) {
        // a supertype of an external choice may offer extra tags
        for (const auto& cand : tag_pool()) {
          bool taken = false;
          for (const auto& b : out) taken = taken || b.tag == tag(cand);
          if (!taken) {
            out.push_back(TBranch{tag(cand), {}, {}, t_end()});
            break;
          }
        }
      }
      return raw::make_choice(TKind::External, std::move(out));
    }
  }
  return t;
}

inline ET mutate_sub(Rng& rng, const ET& t, int depth) {
  if (depth > 6) return t;
  switch (t->kind) {
    case TKind::End:
    case TKind::Var:
      return t;
    case TKind::Rec:
      return raw::make_rec(t->var, mutate_sub(rng, t->rec_body, depth + 1));
    case TKind::Internal: {
      std::vector<TBranch> out;
      for (const auto& b : t->branches) {
        TBranch nb{b.tag, b.typarams, {}, nullptr};
        for (const auto& at : b.argtypes)
          nb.argtypes.push_back(Type{at.qual, mutate_super(rng, at.body, depth + 1)});
        nb.cont = mutate_sub(rng, b.cont, depth + 1);
        out.push_back(std::move(nb));
      }
      if (rng.chance(30)) {
        for (const auto& cand : tag_pool()) {
          bool taken = false;
          for (const auto& b : out) taken = taken || b.tag == tag(cand);
          if (!taken) {
            out.push_back(TBranch{tag(cand), {}, {}, t_end()});
            break;
          }
        }
      }
      return raw::make_choice(TKind::Internal, std::move(out));
    }
    case TKind::External: {
      std::vector<TBranch> out;
      for (const auto& b : t->branches) {
        if (t->branches.size() > 1 && out.size() + 1 < t->branches.size() && rng.chance(30)) continue;
        TBranch nb{b.tag, b.typarams, {}, nullptr};
        for (const auto& at : b.argtypes)
          nb.argtypes.push_back(Type{at.qual, mutate_sub(rng, at.body, depth + 1)});
        nb.cont = mutate_sub(rng, b.cont, depth + 1);
        out.push_back(std::move(nb));
      }
      if (out.empty()) out.push_back(t->branches.front());
      return raw::make_choice(TKind::External, std::move(out));
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Random processes (syntactically valid, not necessarily typable).

struct ProcGen {
  Rng& rng;
  int counter = 0;

  Sym fresh_loc() { return intern("l" + std::to_string(counter++)); }

  PP process(int budget, std::vector<Name> names, std::vector<std::string> pvars, int tyvars) {
    if (budget <= 1) {
      if (!names.empty() && rng.chance(50)) return p_close(names[rng.below(names.size())]);
      return p_idle();
    }
    switch (rng.below(8)) {
      case 0:
        return p_idle();
      case 1:
        if (!names.empty()) return p_close(names[rng.below(names.size())]);
        return p_idle();
      case 2: {  // open linear
        Sym a = fresh_loc(), b = fresh_loc();
        TypeGen tg{rng};
        ET ta = closed_etype(rng, 6);
        auto ns = names;
        ns.push_back(linear(a));
        ns.push_back(linear(b));
        return p_open_linear(a, ta, b, dual(ta), process(budget - 2, ns, pvars, tyvars));
      }
      case 3: {  // send
        if (names.empty()) return p_idle();
        Name u = names[rng.below(names.size())];
        std::vector<Name> args;
        if (!names.empty() && rng.chance(50)) args.push_back(names[rng.below(names.size())]);
        std::vector<ET> tyargs;
        if (rng.chance(30)) tyargs.push_back(closed_etype(rng, 4));
        return p_send(u, tag(tag_pool()[rng.below(tag_pool().size())]), std::move(tyargs),
                      std::move(args), process(budget - 2, names, pvars, tyvars));
      }
      case 4: {  // receive
        if (names.empty()) return p_idle();
        Name u = names[rng.below(names.size())];
        size_t n_branches = 1 + rng.below(2);
        std::vector<RBranch> branches;
        std::vector<size_t> used;
        for (size_t i = 0; i < n_branches; ++i) {
          size_t ti;
          bool dup;
          do {
            ti = rng.below(tag_pool().size());
            dup = false;
            for (auto uidx : used) dup = dup || uidx == ti;
          } while (dup);
          used.push_back(ti);
          RBranch b;
          b.tag = tag(tag_pool()[ti]);
          TypeVar tp = tv("r" + std::to_string(counter++));
          if (rng.chance(40)) b.typarams.push_back(tp);
          auto ns = names;
          if (rng.chance(60)) {
            Sym x = intern("x" + std::to_string(counter++));
            ET pt = b.typarams.empty() ? closed_etype(rng, 4) : t_var(tp);
            b.params.push_back(RParam{x, Type{Qual::Lin, pt}});
            ns.push_back(variable(x));
          }
          b.body = process(budget / 2, ns, pvars, tyvars);
          branches.push_back(std::move(b));
        }
        return p_receive(u, std::move(branches));
      }
      case 5:
        return p_choice(process(budget / 2, names, pvars, tyvars),
                        process(budget / 2, names, pvars, tyvars));
      case 6:
        return p_par(process(budget / 2, names, pvars, tyvars),
                     process(budget / 2, names, pvars, tyvars));
      default: {  // rec
        std::string x = "X" + std::to_string(counter++);
        auto pv = pvars;
        pv.push_back(x);
        PP body = process(budget - 1, names, pv, tyvars);
        if (!pvars.empty() && rng.chance(30)) body = p_par(body, p_pvar(pvar(pvars[0])));
        return p_rec(pvar(x), body);
      }
    }
  }
};

// Free program variables have no concrete syntax (they only arise bound),
// so round-trip tests must not seed them; substitution tests may.
inline PP random_process(Rng& rng, int budget = 14, bool with_free_variable = false) {
  ProcGen g{rng};
  std::vector<Name> names{linear(intern("a0")), shared(intern("u0"))};
  if (with_free_variable) names.push_back(variable(intern("v0")));
  return g.process(budget, names, {}, 0);
}

}  // namespace copyless::gen

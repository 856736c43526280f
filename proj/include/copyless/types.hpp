#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "copyless/symbols.hpp"

namespace copyless {

enum class Qual : std::uint8_t { Lin, Un };

enum class TKind : std::uint8_t { End, Var, Rec, Internal, External };

struct EType;
using ET = std::shared_ptr<const EType>;

// Qualified endpoint type.
struct Type {
  Qual qual{Qual::Lin};
  ET body;
};

// One alternative of a choice: a tagged message carrying zero or more type
// parameters and argument types, followed by a continuation. The type
// parameters bind in the argument types and, within prefixes only, in the
// continuation.
struct TBranch {
  Tag tag{};
  std::vector<TypeVar> typarams;
  std::vector<Type> argtypes;
  ET cont;
};

struct EType {
  TKind kind{TKind::End};
  TypeVar var{};                 // Var: the variable; Rec: the binder
  ET rec_body;                   // Rec
  std::vector<TBranch> branches; // Internal / External
};

struct TypeSyntaxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using TypeVarSet = std::set<TypeVar>;

// ---------------------------------------------------------------------------
// Raw node builders. These splice existing subterms without touching binder
// identities; substitution, unfolding and duality use them. User-facing
// construction goes through the freshening factories below.

namespace raw {

inline ET make_end() {
  static const ET e = std::make_shared<const EType>(EType{TKind::End, {}, nullptr, {}});
  return e;
}

inline ET make_var(TypeVar v) {
  return std::make_shared<const EType>(EType{TKind::Var, v, nullptr, {}});
}

inline ET make_rec(TypeVar v, ET body) {
  return std::make_shared<const EType>(EType{TKind::Rec, v, std::move(body), {}});
}

inline ET make_choice(TKind k, std::vector<TBranch> branches) {
  return std::make_shared<const EType>(EType{k, {}, nullptr, std::move(branches)});
}

}  // namespace raw

// ---------------------------------------------------------------------------
// Substitution and analyses.

namespace detail {

inline void collect_type_vars(const ET& t, std::vector<TypeVar>& bound_stack,
                              TypeVarSet& ftv, TypeVarSet& btv) {
  switch (t->kind) {
    case TKind::End:
      return;
    case TKind::Var: {
      for (auto it = bound_stack.rbegin(); it != bound_stack.rend(); ++it)
        if (*it == t->var) return;
      ftv.insert(t->var);
      return;
    }
    case TKind::Rec: {
      btv.insert(t->var);
      bound_stack.push_back(t->var);
      collect_type_vars(t->rec_body, bound_stack, ftv, btv);
      bound_stack.pop_back();
      return;
    }
    case TKind::Internal:
    case TKind::External: {
      for (const auto& b : t->branches) {
        for (const auto& tp : b.typarams) btv.insert(tp);
        size_t depth = bound_stack.size();
        bound_stack.insert(bound_stack.end(), b.typarams.begin(), b.typarams.end());
        for (const auto& at : b.argtypes) collect_type_vars(at.body, bound_stack, ftv, btv);
        collect_type_vars(b.cont, bound_stack, ftv, btv);
        bound_stack.resize(depth);
      }
      return;
    }
  }
}

}  // namespace detail

// Free and bound type variables, with rec and prefix binders both counted
// as binding occurrences.
inline std::pair<TypeVarSet, TypeVarSet> analyze_type_vars(const ET& t) {
  TypeVarSet ftv, btv;
  std::vector<TypeVar> stack;
  detail::collect_type_vars(t, stack, ftv, btv);
  return {std::move(ftv), std::move(btv)};
}

inline TypeVarSet ftv(const ET& t) { return analyze_type_vars(t).first; }
inline TypeVarSet btv(const ET& t) { return analyze_type_vars(t).second; }
inline TypeVarSet ftv(const Type& t) { return ftv(t.body); }

// Capture-avoiding substitution of several endpoint types for several type
// variables at once. Shadowed scopes are skipped; no renaming happens since
// binders are globally unique by construction.
inline ET subst_type_many(const ET& t, const std::map<TypeVar, ET>& sub) {
  if (sub.empty()) return t;
  switch (t->kind) {
    case TKind::End:
      return t;
    case TKind::Var: {
      auto it = sub.find(t->var);
      return it == sub.end() ? t : it->second;
    }
    case TKind::Rec: {
      if (sub.count(t->var)) {
        auto inner = sub;
        inner.erase(t->var);
        if (inner.empty()) return t;
        return raw::make_rec(t->var, subst_type_many(t->rec_body, inner));
      }
      ET body = subst_type_many(t->rec_body, sub);
      return body == t->rec_body ? t : raw::make_rec(t->var, body);
    }
    case TKind::Internal:
    case TKind::External: {
      std::vector<TBranch> out;
      out.reserve(t->branches.size());
      bool changed = false;
      for (const auto& b : t->branches) {
        auto inner = sub;
        for (const auto& tp : b.typarams) inner.erase(tp);
        TBranch nb{b.tag, b.typarams, {}, nullptr};
        nb.argtypes.reserve(b.argtypes.size());
        for (const auto& at : b.argtypes)
          nb.argtypes.push_back(Type{at.qual, subst_type_many(at.body, inner)});
        nb.cont = subst_type_many(b.cont, inner);
        for (size_t i = 0; i < b.argtypes.size(); ++i)
          changed = changed || nb.argtypes[i].body != b.argtypes[i].body;
        changed = changed || nb.cont != b.cont;
        out.push_back(std::move(nb));
      }
      return changed ? raw::make_choice(t->kind, std::move(out)) : t;
    }
  }
  return t;
}

inline ET subst_type(const ET& t, const ET& s, TypeVar a) {
  return subst_type_many(t, {{a, s}});
}

inline Type subst_type(const Type& t, const ET& s, TypeVar a) {
  return Type{t.qual, subst_type(t.body, s, a)};
}

// Inner substitution: replaces free occurrences of the variable inside
// message prefixes (argument types) only. Occurrences along the spine of
// continuations stay put; they are recursion points, not payloads.
inline ET subst_inner(const ET& t, const ET& s, TypeVar a) {
  switch (t->kind) {
    case TKind::End:
    case TKind::Var:
      return t;
    case TKind::Rec:
      if (t->var == a) return t;
      return raw::make_rec(t->var, subst_inner(t->rec_body, s, a));
    case TKind::Internal:
    case TKind::External: {
      std::vector<TBranch> out;
      out.reserve(t->branches.size());
      for (const auto& b : t->branches) {
        bool shadowed = false;
        for (const auto& tp : b.typarams) shadowed = shadowed || tp == a;
        TBranch nb{b.tag, b.typarams, {}, nullptr};
        for (const auto& at : b.argtypes)
          nb.argtypes.push_back(shadowed ? at : Type{at.qual, subst_type(at.body, s, a)});
        nb.cont = shadowed ? b.cont : subst_inner(b.cont, s, a);
        out.push_back(std::move(nb));
      }
      return raw::make_choice(t->kind, std::move(out));
    }
  }
  return t;
}

// One unfolding of a recursive type: rec a.T becomes T with the whole term
// substituted for a. The result is never syntactically equal to the input.
inline ET unfold(const ET& t) {
  if (t->kind != TKind::Rec) throw TypeSyntaxError("unfold: not a recursive type");
  return subst_type(t->rec_body, t, t->var);
}

// ---------------------------------------------------------------------------
// Alpha equality and canonical keys.

namespace detail {

inline bool alpha_eq_rec(const ET& a, const ET& b, std::vector<std::pair<TypeVar, TypeVar>>& corr);

inline bool var_matches(TypeVar x, TypeVar y, const std::vector<std::pair<TypeVar, TypeVar>>& corr) {
  for (auto it = corr.rbegin(); it != corr.rend(); ++it) {
    if (it->first == x || it->second == y) return it->first == x && it->second == y;
  }
  return x == y;
}

inline bool alpha_eq_type(const Type& a, const Type& b, std::vector<std::pair<TypeVar, TypeVar>>& corr) {
  return a.qual == b.qual && alpha_eq_rec(a.body, b.body, corr);
}

inline bool alpha_eq_rec(const ET& a, const ET& b, std::vector<std::pair<TypeVar, TypeVar>>& corr) {
  if (a.get() == b.get() && corr.empty()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TKind::End:
      return true;
    case TKind::Var:
      return var_matches(a->var, b->var, corr);
    case TKind::Rec: {
      corr.emplace_back(a->var, b->var);
      bool ok = alpha_eq_rec(a->rec_body, b->rec_body, corr);
      corr.pop_back();
      return ok;
    }
    case TKind::Internal:
    case TKind::External: {
      if (a->branches.size() != b->branches.size()) return false;
      // Branch order is significant only up to tags; match by tag.
      for (const auto& ba : a->branches) {
        const TBranch* bb = nullptr;
        for (const auto& cand : b->branches)
          if (cand.tag == ba.tag) { bb = &cand; break; }
        if (!bb) return false;
        if (ba.typarams.size() != bb->typarams.size()) return false;
        if (ba.argtypes.size() != bb->argtypes.size()) return false;
        size_t depth = corr.size();
        for (size_t i = 0; i < ba.typarams.size(); ++i)
          corr.emplace_back(ba.typarams[i], bb->typarams[i]);
        bool ok = true;
        for (size_t i = 0; ok && i < ba.argtypes.size(); ++i)
          ok = alpha_eq_type(ba.argtypes[i], bb->argtypes[i], corr);
        ok = ok && alpha_eq_rec(ba.cont, bb->cont, corr);
        corr.resize(depth);
        if (!ok) return false;
      }
      return true;
    }
  }
  return false;
}

inline void canon_rec(const ET& t, std::vector<TypeVar>& binders, std::string& out);

inline void canon_type(const Type& t, std::vector<TypeVar>& binders, std::string& out) {
  out += (t.qual == Qual::Lin) ? "l " : "u ";
  canon_rec(t.body, binders, out);
}

inline void canon_var(TypeVar v, const std::vector<TypeVar>& binders, std::string& out) {
  for (size_t i = binders.size(); i > 0; --i) {
    if (binders[i - 1] == v) {
      out += '#';
      out += std::to_string(binders.size() - i);
      return;
    }
  }
  out += 'v';
  out += std::to_string(v.sym);
}

inline void canon_rec(const ET& t, std::vector<TypeVar>& binders, std::string& out) {
  switch (t->kind) {
    case TKind::End:
      out += 'e';
      return;
    case TKind::Var:
      canon_var(t->var, binders, out);
      return;
    case TKind::Rec:
      out += "r.";
      binders.push_back(t->var);
      canon_rec(t->rec_body, binders, out);
      binders.pop_back();
      return;
    case TKind::Internal:
    case TKind::External: {
      out += (t->kind == TKind::Internal) ? '!' : '?';
      // Sort branches by tag name for a stable key.
      std::vector<const TBranch*> sorted;
      for (const auto& b : t->branches) sorted.push_back(&b);
      std::sort(sorted.begin(), sorted.end(), [](const TBranch* x, const TBranch* y) {
        return sym_name(x->tag.sym) < sym_name(y->tag.sym);
      });
      out += '{';
      for (const TBranch* b : sorted) {
        out += sym_name(b->tag.sym);
        out += '<';
        out += std::to_string(b->typarams.size());
        out += ">(";
        size_t depth = binders.size();
        binders.insert(binders.end(), b->typarams.begin(), b->typarams.end());
        for (const auto& at : b->argtypes) {
          canon_type(at, binders, out);
          out += ',';
        }
        out += ").";
        canon_rec(b->cont, binders, out);
        binders.resize(depth);
        out += ',';
      }
      out += '}';
      return;
    }
  }
}

}  // namespace detail

// Structural equality modulo consistent renaming of bound variables. Does
// not unfold recursion.
inline bool alpha_equal(const ET& a, const ET& b) {
  std::vector<std::pair<TypeVar, TypeVar>> corr;
  return detail::alpha_eq_rec(a, b, corr);
}

inline bool alpha_equal(const Type& a, const Type& b) {
  std::vector<std::pair<TypeVar, TypeVar>> corr;
  return detail::alpha_eq_type(a, b, corr);
}

// Canonical key: alpha-variants map to the same string, distinct terms to
// distinct strings. Used for memoization and deduplication.
inline std::string canon_key(const ET& t) {
  std::string out;
  std::vector<TypeVar> binders;
  detail::canon_rec(t, binders, out);
  return out;
}

inline std::string canon_key(const Type& t) {
  std::string out;
  std::vector<TypeVar> binders;
  detail::canon_type(t, binders, out);
  return out;
}

// ---------------------------------------------------------------------------
// Freshening factories. Every binder written by a caller is renamed to a
// brand-new symbol, so distinct binder occurrences never share an identity
// and substitution stays capture-free.

namespace detail {

inline bool guarded_body(const ET& body, const TypeVar& binder) {
  // Contractivity: the recursion variable must sit behind a prefix.
  switch (body->kind) {
    case TKind::Var:
      return body->var != binder;
    case TKind::Rec:
      return guarded_body(body->rec_body, binder);
    default:
      return true;
  }
}

}  // namespace detail

inline ET t_end() { return raw::make_end(); }
inline ET t_var(TypeVar v) { return raw::make_var(v); }

inline ET t_rec(TypeVar binder, const ET& body) {
  if (!detail::guarded_body(body, binder))
    throw TypeSyntaxError("recursion variable '" + sym_name(binder.sym) + "' is not guarded by a prefix");
  TypeVar fresh{fresh_sym(sym_name(binder.sym))};
  return raw::make_rec(fresh, subst_type(body, raw::make_var(fresh), binder));
}

inline ET t_choice(TKind kind, std::vector<TBranch> branches) {
  if (branches.empty()) throw TypeSyntaxError("a choice needs at least one branch");
  for (size_t i = 0; i < branches.size(); ++i)
    for (size_t j = i + 1; j < branches.size(); ++j)
      if (branches[i].tag == branches[j].tag)
        throw TypeSyntaxError("duplicate tag '" + sym_name(branches[i].tag.sym) + "' in choice");
  for (auto& b : branches) {
    std::map<TypeVar, ET> ren;
    std::vector<TypeVar> fresh_params;
    fresh_params.reserve(b.typarams.size());
    for (const auto& tp : b.typarams) {
      TypeVar f{fresh_sym(sym_name(tp.sym))};
      fresh_params.push_back(f);
      ren.emplace(tp, raw::make_var(f));
    }
    for (auto& at : b.argtypes) at = Type{at.qual, subst_type_many(at.body, ren)};
    b.cont = subst_type_many(b.cont, ren);
    b.typarams = std::move(fresh_params);
  }
  return raw::make_choice(kind, std::move(branches));
}

inline ET t_internal(std::vector<TBranch> branches) { return t_choice(TKind::Internal, std::move(branches)); }
inline ET t_external(std::vector<TBranch> branches) { return t_choice(TKind::External, std::move(branches)); }

inline Type lin(const ET& t) { return Type{Qual::Lin, t}; }
inline Type un(const ET& t) { return Type{Qual::Un, t}; }

// Renames every binder in the term to a fresh symbol. The result is
// alpha-equal to the input and satisfies the Barendregt convention.
inline ET rename_binders_fresh(const ET& t) {
  switch (t->kind) {
    case TKind::End:
    case TKind::Var:
      return t;
    case TKind::Rec: {
      TypeVar f{fresh_sym(sym_name(t->var.sym))};
      return raw::make_rec(f, rename_binders_fresh(subst_type(t->rec_body, raw::make_var(f), t->var)));
    }
    case TKind::Internal:
    case TKind::External: {
      std::vector<TBranch> out;
      out.reserve(t->branches.size());
      for (const auto& b : t->branches) {
        std::map<TypeVar, ET> ren;
        TBranch nb{b.tag, {}, {}, nullptr};
        for (const auto& tp : b.typarams) {
          TypeVar f{fresh_sym(sym_name(tp.sym))};
          nb.typarams.push_back(f);
          ren.emplace(tp, raw::make_var(f));
        }
        for (const auto& at : b.argtypes)
          nb.argtypes.push_back(Type{at.qual, rename_binders_fresh(subst_type_many(at.body, ren))});
        nb.cont = rename_binders_fresh(subst_type_many(b.cont, ren));
        out.push_back(std::move(nb));
      }
      return raw::make_choice(t->kind, std::move(out));
    }
  }
  return t;
}

// Number of prefixes (choice constructors) in the term, counting nested
// argument types. Bounds any finite weight of the term.
inline size_t prefix_count(const ET& t) {
  switch (t->kind) {
    case TKind::End:
    case TKind::Var:
      return 0;
    case TKind::Rec:
      return prefix_count(t->rec_body);
    case TKind::Internal:
    case TKind::External: {
      size_t n = 1;
      for (const auto& b : t->branches) {
        for (const auto& at : b.argtypes) n += prefix_count(at.body);
        n += prefix_count(b.cont);
      }
      return n;
    }
  }
  return 0;
}

inline size_t node_count(const ET& t) {
  switch (t->kind) {
    case TKind::End:
    case TKind::Var:
      return 1;
    case TKind::Rec:
      return 1 + node_count(t->rec_body);
    case TKind::Internal:
    case TKind::External: {
      size_t n = 1;
      for (const auto& b : t->branches) {
        for (const auto& at : b.argtypes) n += node_count(at.body);
        n += node_count(b.cont);
      }
      return n;
    }
  }
  return 1;
}

inline TypeVarSet disjoint_union(const TypeVarSet& a, const TypeVarSet& b) {
  TypeVarSet out = a;
  for (const auto& v : b)
    if (!out.insert(v).second)
      throw TypeSyntaxError("type variable contexts overlap on '" + sym_name(v.sym) + "'");
  return out;
}

}  // namespace copyless

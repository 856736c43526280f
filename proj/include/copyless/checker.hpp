#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "copyless/heap.hpp"
#include "copyless/printer.hpp"
#include "copyless/process.hpp"
#include "copyless/runtime.hpp"
#include "copyless/type_algebra.hpp"

namespace copyless {

// ---------------------------------------------------------------------------
// Type environments.

using TypeEnv = std::map<Name, Type>;

struct EnvConflictError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool is_un(const TypeEnv& env) {
  for (const auto& [n, t] : env)
    if (t.qual != Qual::Un) return false;
  return true;
}

inline TypeEnv restrict_env(const TypeEnv& env, Qual q) {
  TypeEnv out;
  for (const auto& [n, t] : env)
    if (t.qual == q) out.emplace(n, t);
  return out;
}

inline std::set<Name> env_dom(const TypeEnv& env) {
  std::set<Name> out;
  for (const auto& [n, t] : env) out.insert(n);
  return out;
}

// Adds an association. A fresh name is inserted; re-adding the same
// unrestricted association is a no-op; everything else is undefined.
inline TypeEnv env_add(TypeEnv env, const Name& u, const Type& t) {
  auto it = env.find(u);
  if (it == env.end()) {
    env.emplace(u, t);
    return env;
  }
  if (t.qual == Qual::Un && it->second.qual == Qual::Un && alpha_equal(it->second, t)) return env;
  throw EnvConflictError("conflicting association for '" + sym_name(u.sym) + "'");
}

inline TypeEnv env_merge(TypeEnv a, const TypeEnv& b) {
  for (const auto& [n, t] : b) a = env_add(std::move(a), n, t);
  return a;
}

// ---------------------------------------------------------------------------
// Errors.

enum class ErrKind : std::uint8_t {
  UnknownName,
  QualifierMismatch,
  NotWellFormed,
  NoSuchTag,
  ArgSubtypeFail,
  WeightInfinite,
  EnvConflict,
  LinearUnused,
  SplitFail,
  DualMismatch,
  RecVarMismatch,
};

inline const char* err_kind_name(ErrKind k) {
  switch (k) {
    case ErrKind::UnknownName: return "UnknownName";
    case ErrKind::QualifierMismatch: return "QualifierMismatch";
    case ErrKind::NotWellFormed: return "NotWellFormed";
    case ErrKind::NoSuchTag: return "NoSuchTag";
    case ErrKind::ArgSubtypeFail: return "ArgSubtypeFail";
    case ErrKind::WeightInfinite: return "WeightInfinite";
    case ErrKind::EnvConflict: return "EnvConflict";
    case ErrKind::LinearUnused: return "LinearUnused";
    case ErrKind::SplitFail: return "SplitFail";
    case ErrKind::DualMismatch: return "DualMismatch";
    case ErrKind::RecVarMismatch: return "RecVarMismatch";
  }
  return "?";
}

struct TypeError {
  ErrKind kind{};
  std::string path;
  std::string message;

  std::string str() const { return std::string(err_kind_name(kind)) + " @ " + path + " : " + message; }
};

// A rejection carries exactly one primary error; dead receive branches are
// reported as warnings.
struct CheckResult {
  std::optional<TypeError> error;
  std::vector<TypeError> warnings;
  bool ok() const { return !error.has_value(); }
};

template <typename T>
struct Res {
  std::optional<T> value;
  std::optional<TypeError> error;
  bool ok() const { return value.has_value(); }
};

// ---------------------------------------------------------------------------
// The residual type of a receiving endpoint after a sequence of messages.

struct MessageSpec {
  Tag tag{};
  std::vector<ET> tyargs;
  std::vector<Type> argtypes;
};

inline Res<ET> tail(ET t, std::span<const MessageSpec> specs) {
  for (const auto& spec : specs) {
    while (t->kind == TKind::Rec) t = unfold(t);
    if (t->kind != TKind::External)
      return {std::nullopt,
              TypeError{ErrKind::QualifierMismatch, "tail",
                        "no message can be received from '" + render(t) + "'"}};
    const TBranch* branch = nullptr;
    for (const auto& b : t->branches)
      if (b.tag == spec.tag) { branch = &b; break; }
    if (!branch)
      return {std::nullopt, TypeError{ErrKind::NoSuchTag, "tail",
                                      "tag '" + sym_name(spec.tag.sym) + "' not offered by '" +
                                          render(t) + "'"}};
    if (branch->typarams.size() != spec.tyargs.size() ||
        branch->argtypes.size() != spec.argtypes.size())
      return {std::nullopt, TypeError{ErrKind::ArgSubtypeFail, "tail",
                                      "arity mismatch for tag '" + sym_name(spec.tag.sym) + "'"}};
    std::map<TypeVar, ET> sub;
    for (size_t i = 0; i < branch->typarams.size(); ++i)
      sub.emplace(branch->typarams[i], spec.tyargs[i]);
    for (size_t i = 0; i < spec.argtypes.size(); ++i) {
      Type expect{branch->argtypes[i].qual, subst_type_many(branch->argtypes[i].body, sub)};
      if (!subtype_qualified(spec.argtypes[i], expect))
        return {std::nullopt,
                TypeError{ErrKind::ArgSubtypeFail, "tail",
                          "argument type '" + render(spec.argtypes[i]) + "' is not a subtype of '" +
                              render(expect) + "'"}};
    }
    t = subst_type_many(branch->cont, sub);
  }
  return {t, std::nullopt};
}

// ---------------------------------------------------------------------------
// Environment splitting for parallel composition.

inline Res<std::pair<TypeEnv, TypeEnv>> split_env(const TypeEnv& env, const std::set<Name>& fn_left,
                                                  const std::set<Name>& fn_right) {
  TypeEnv left, right;
  for (const auto& [n, t] : env) {
    if (t.qual == Qual::Un) {
      left.emplace(n, t);
      right.emplace(n, t);
      continue;
    }
    bool in_left = fn_left.count(n) != 0, in_right = fn_right.count(n) != 0;
    if (in_left && in_right)
      return {std::nullopt,
              TypeError{ErrKind::SplitFail, "par",
                        "linear name '" + sym_name(n.sym) + "' is shared by both branches"}};
    if (!in_left && !in_right)
      return {std::nullopt, TypeError{ErrKind::SplitFail, "par",
                                      "linear name '" + sym_name(n.sym) + "' is used by neither branch"}};
    (in_left ? left : right).emplace(n, t);
  }
  return {std::make_pair(std::move(left), std::move(right)), std::nullopt};
}

// ---------------------------------------------------------------------------
// Typing processes.

struct ProcVarBinding {
  TypeVarSet tyvars;
  TypeEnv env;
};
using ProcVarEnv = std::map<PVar, ProcVarBinding>;

namespace detail {

struct CheckFailure {
  TypeError error;
};

class ProcessChecker {
 public:
  std::vector<TypeError> warnings;

  void check(const ProcVarEnv& sigma, const TypeVarSet& delta, const TypeEnv& gamma, const PP& p) {
    switch (p->kind) {
      case PKind::Idle:
        require_unrestricted(gamma, "idle process");
        return;
      case PKind::Close: {
        PathGuard g(this, "close(" + name_str(p->subject) + ")");
        Type t = lookup(gamma, p->subject);
        if (t.qual != Qual::Lin)
          fail(ErrKind::QualifierMismatch, "only linear endpoints of type end can be closed");
        if (expose(t.body)->kind != TKind::End)
          fail(ErrKind::QualifierMismatch,
               "'" + name_str(p->subject) + "' has type '" + render(t.body) + "', not end");
        TypeEnv rest = gamma;
        rest.erase(p->subject);
        require_unrestricted(rest, "close");
        return;
      }
      case PKind::OpenLinear: {
        PathGuard g(this, "open(" + sym_name(p->loc_a) + "," + sym_name(p->loc_b) + ")");
        check_annotation(delta, p->type_a);
        check_annotation(delta, p->type_b);
        if (!is_dual_pair(p->type_a, p->type_b))
          fail(ErrKind::DualMismatch, "'" + render(p->type_a) + "' and '" + render(p->type_b) +
                                          "' are not dual endpoint types");
        TypeEnv g2 = add(gamma, linear(p->loc_a), Type{Qual::Lin, p->type_a});
        g2 = add(std::move(g2), linear(p->loc_b), Type{Qual::Lin, p->type_b});
        check(sigma, delta, g2, p->left);
        return;
      }
      case PKind::OpenUn: {
        PathGuard g(this, "open(" + sym_name(p->loc_a) + ")");
        check_annotation(delta, p->type_a);
        ET co = dual(p->type_a);
        if (!is_un_form(co))
          fail(ErrKind::QualifierMismatch,
               "'" + render(co) + "' cannot be qualified unrestricted");
        TypeEnv g2 = add(gamma, linear(p->loc_a), Type{Qual::Lin, p->type_a});
        g2 = add(std::move(g2), shared(p->loc_a), Type{Qual::Un, co});
        check(sigma, delta, g2, p->left);
        return;
      }
      case PKind::Send:
        check_send(sigma, delta, gamma, p);
        return;
      case PKind::Receive:
        check_receive(sigma, delta, gamma, p);
        return;
      case PKind::Choice: {
        {
          PathGuard g(this, "choice.l");
          check(sigma, delta, gamma, p->left);
        }
        PathGuard g(this, "choice.r");
        check(sigma, delta, gamma, p->right);
        return;
      }
      case PKind::Par: {
        auto halves = split_env(gamma, needed_names(sigma, p->left), needed_names(sigma, p->right));
        if (!halves.ok()) {
          TypeError e = *halves.error;
          e.path = path_str();
          throw CheckFailure{std::move(e)};
        }
        {
          PathGuard g(this, "par.l");
          check(sigma, delta, halves.value->first, p->left);
        }
        PathGuard g(this, "par.r");
        check(sigma, delta, halves.value->second, p->right);
        return;
      }
      case PKind::Rec: {
        PathGuard g(this, "rec " + sym_name(p->pv.sym));
        std::set<Name> body_fn = fn(p->left);
        for (const auto& [n, t] : gamma)
          if (t.qual == Qual::Lin && !body_fn.count(n))
            fail(ErrKind::LinearUnused, "linear name '" + name_str(n) +
                                            "' is not used by the recursive process");
        ProcVarEnv s2 = sigma;
        s2[p->pv] = ProcVarBinding{delta, gamma};
        check(s2, delta, gamma, p->left);
        return;
      }
      case PKind::PVarRef: {
        PathGuard g(this, sym_name(p->pv.sym));
        auto it = sigma.find(p->pv);
        if (it == sigma.end())
          fail(ErrKind::RecVarMismatch, "unbound process variable '" + sym_name(p->pv.sym) + "'");
        const ProcVarBinding& bind = it->second;
        for (const auto& v : bind.tyvars)
          if (!delta.count(v))
            fail(ErrKind::RecVarMismatch,
                 "type variable context no longer contains '" + sym_name(v.sym) + "'");
        for (const auto& [n, t] : bind.env) {
          auto g_it = gamma.find(n);
          if (g_it == gamma.end())
            fail(ErrKind::RecVarMismatch,
                 "environment lost '" + name_str(n) + "' required at the recursion point");
          if (g_it->second.qual != t.qual || !alpha_equal(g_it->second, t))
            fail(ErrKind::RecVarMismatch,
                 "'" + name_str(n) + "' has type '" + render(g_it->second) +
                     "' but the recursion point requires '" + render(t) + "'");
        }
        for (const auto& [n, t] : gamma)
          if (!bind.env.count(n) && t.qual != Qual::Un)
            fail(ErrKind::RecVarMismatch,
                 "linear name '" + name_str(n) + "' would leak through the recursion");
        return;
      }
      case PKind::Call:
        fail(ErrKind::RecVarMismatch, "unresolved definition reference '" + p->call_name + "'");
        return;
    }
  }

  std::string path_str() const {
    if (path_.empty()) return "top";
    std::string out;
    for (const auto& seg : path_) {
      if (!out.empty()) out += "/";
      out += seg;
    }
    return out;
  }

 private:
  std::vector<std::string> path_;

  struct PathGuard {
    ProcessChecker* c;
    PathGuard(ProcessChecker* checker, std::string seg) : c(checker) { c->path_.push_back(std::move(seg)); }
    ~PathGuard() { c->path_.pop_back(); }
  };

  [[noreturn]] void fail(ErrKind kind, std::string msg) {
    throw CheckFailure{TypeError{kind, path_str(), std::move(msg)}};
  }

  static std::string name_str(const Name& n) {
    return (n.kind == NameKind::Shared ? "*" : "") + sym_name(n.sym);
  }

  static ET expose(ET t) {
    while (t->kind == TKind::Rec) t = unfold(t);
    return t;
  }

  static void free_pvars(const PP& p, std::set<PVar>& bound, std::set<PVar>& out) {
    switch (p->kind) {
      case PKind::PVarRef:
        if (!bound.count(p->pv)) out.insert(p->pv);
        return;
      case PKind::Rec: {
        bool fresh = bound.insert(p->pv).second;
        free_pvars(p->left, bound, out);
        if (fresh) bound.erase(p->pv);
        return;
      }
      default:
        if (p->left) free_pvars(p->left, bound, out);
        if (p->right) free_pvars(p->right, bound, out);
        for (const auto& b : p->branches) free_pvars(b.body, bound, out);
        return;
    }
  }

  // The names a parallel component must keep hold of: its free names plus,
  // for every recursion variable it may unfold into, the linear names the
  // recursion point was typed with. A bare variable has no free names of
  // its own, yet its environment is pinned by the snapshot.
  static std::set<Name> needed_names(const ProcVarEnv& sigma, const PP& p) {
    std::set<Name> out = fn(p);
    std::set<PVar> bound, frees;
    free_pvars(p, bound, frees);
    for (const auto& x : frees) {
      auto it = sigma.find(x);
      if (it == sigma.end()) continue;
      for (const auto& [n, t] : it->second.env)
        if (t.qual == Qual::Lin) out.insert(n);
    }
    return out;
  }

  Type lookup(const TypeEnv& gamma, const Name& u) {
    auto it = gamma.find(u);
    if (it == gamma.end()) fail(ErrKind::UnknownName, "unknown name '" + name_str(u) + "'");
    return it->second;
  }

  TypeEnv add(TypeEnv gamma, const Name& u, const Type& t) {
    try {
      return env_add(std::move(gamma), u, t);
    } catch (const EnvConflictError& e) {
      fail(ErrKind::EnvConflict, e.what());
    }
  }

  void require_unrestricted(const TypeEnv& gamma, const std::string& where) {
    for (const auto& [n, t] : gamma)
      if (t.qual == Qual::Lin)
        fail(ErrKind::LinearUnused,
             "linear name '" + name_str(n) + "' is left unused at " + where);
  }

  void check_annotation(const TypeVarSet& delta, const ET& t) {
    if (!check_wf(delta, {}, t))
      fail(ErrKind::NotWellFormed, "'" + render(t) + "' is not well formed here");
    if (has_top_level_free_var(t))
      fail(ErrKind::NotWellFormed,
           "'" + render(t) + "' has a top-level type variable; its dual is undefined");
  }

  void check_send(const ProcVarEnv& sigma, const TypeVarSet& delta, const TypeEnv& gamma,
                  const PP& p) {
    PathGuard g(this, name_str(p->subject) + "!" + sym_name(p->tag.sym));
    Type subject = lookup(gamma, p->subject);
    ET t = expose(subject.body);
    if (t->kind != TKind::Internal)
      fail(ErrKind::QualifierMismatch,
           "'" + name_str(p->subject) + "' of type '" + render(subject.body) + "' cannot send");
    const TBranch* branch = nullptr;
    for (const auto& b : t->branches)
      if (b.tag == p->tag) { branch = &b; break; }
    if (!branch)
      fail(ErrKind::NoSuchTag, "tag '" + sym_name(p->tag.sym) + "' is not offered by '" +
                                   render(subject.body) + "'");
    if (branch->typarams.size() != p->tyargs.size())
      fail(ErrKind::ArgSubtypeFail, "expected " + std::to_string(branch->typarams.size()) +
                                        " type argument(s), got " + std::to_string(p->tyargs.size()));
    if (branch->argtypes.size() != p->args.size())
      fail(ErrKind::ArgSubtypeFail, "expected " + std::to_string(branch->argtypes.size()) +
                                        " argument(s), got " + std::to_string(p->args.size()));
    std::map<TypeVar, ET> sub;
    for (size_t i = 0; i < p->tyargs.size(); ++i) {
      const ET& s = p->tyargs[i];
      if (!check_wf(delta, {}, s))
        fail(ErrKind::NotWellFormed, "type argument '" + render(s) + "' is not well formed");
      if (!weight(delta, s).is_finite())
        fail(ErrKind::WeightInfinite, "type argument '" + render(s) +
                                          "' has infinite weight and cannot instantiate a type variable");
      sub.emplace(branch->typarams[i], s);
    }
    // Argument values: subtyping against the instantiated payload types and
    // the finite-weight restriction on what may travel through a queue.
    TypeEnv next = gamma;
    next[p->subject] = Type{subject.qual, subst_type_many(branch->cont, sub)};
    if (subject.qual == Qual::Un && !alpha_equal(next[p->subject].body, subject.body))
      fail(ErrKind::QualifierMismatch, "an unrestricted endpoint must keep its type after a send");
    for (size_t i = 0; i < p->args.size(); ++i) {
      const Name& v = p->args[i];
      for (size_t j = 0; j < i; ++j)
        if (p->args[j] == v && lookup(gamma, v).qual == Qual::Lin)
          fail(ErrKind::EnvConflict, "linear name '" + name_str(v) + "' is sent twice");
      Type actual = lookup(gamma, v);
      if (v == p->subject && actual.qual == Qual::Lin)
        fail(ErrKind::EnvConflict, "linear endpoint '" + name_str(v) + "' cannot be sent over itself");
      Type expect{branch->argtypes[i].qual, subst_type_many(branch->argtypes[i].body, sub)};
      if (!subtype_qualified(actual, expect))
        fail(ErrKind::ArgSubtypeFail, "argument '" + name_str(v) + "' has type '" + render(actual) +
                                          "', expected a subtype of '" + render(expect) + "'");
      if (!weight(delta, actual).is_finite())
        fail(ErrKind::WeightInfinite, "argument '" + name_str(v) + "' of type '" + render(actual) +
                                          "' has infinite weight and cannot be sent");
      if (actual.qual == Qual::Lin) next.erase(v);
    }
    check(sigma, delta, next, p->left);
  }

  void check_receive(const ProcVarEnv& sigma, const TypeVarSet& delta, const TypeEnv& gamma,
                     const PP& p) {
    PathGuard g(this, name_str(p->subject) + "?");
    Type subject = lookup(gamma, p->subject);
    if (subject.qual != Qual::Lin)
      fail(ErrKind::QualifierMismatch, "receive needs a linear endpoint");
    ET t = expose(subject.body);
    if (t->kind != TKind::External)
      fail(ErrKind::QualifierMismatch,
           "'" + name_str(p->subject) + "' of type '" + render(subject.body) + "' cannot receive");
    // Every tag the type may deliver needs a handler; extra handlers are
    // dead code, reported but not checked.
    for (const auto& tb : t->branches) {
      bool covered = false;
      for (const auto& pb : p->branches) covered = covered || pb.tag == tb.tag;
      if (!covered)
        fail(ErrKind::NoSuchTag,
             "no branch handles message '" + sym_name(tb.tag.sym) + "'");
    }
    for (const auto& pb : p->branches) {
      bool in_type = false;
      for (const auto& tb : t->branches) in_type = in_type || tb.tag == pb.tag;
      if (!in_type)
        warnings.push_back(TypeError{ErrKind::NoSuchTag, path_str(),
                                     "branch '" + sym_name(pb.tag.sym) +
                                         "' can never fire and was not checked"});
    }
    for (const auto& tb : t->branches) {
      const RBranch* pb = nullptr;
      for (const auto& cand : p->branches)
        if (cand.tag == tb.tag) { pb = &cand; break; }
      PathGuard bg(this, name_str(p->subject) + "?" + sym_name(tb.tag.sym));
      if (pb->typarams.size() != tb.typarams.size())
        fail(ErrKind::ArgSubtypeFail, "expected " + std::to_string(tb.typarams.size()) +
                                          " type parameter(s), got " + std::to_string(pb->typarams.size()));
      if (pb->params.size() != tb.argtypes.size())
        fail(ErrKind::ArgSubtypeFail, "expected " + std::to_string(tb.argtypes.size()) +
                                          " parameter(s), got " + std::to_string(pb->params.size()));
      // Identify the type's parameters with the process's.
      std::map<TypeVar, ET> sub;
      TypeVarSet d2 = delta;
      for (size_t i = 0; i < tb.typarams.size(); ++i) {
        sub.emplace(tb.typarams[i], raw::make_var(pb->typarams[i]));
        d2 = disjoint_union(d2, {pb->typarams[i]});
      }
      TypeEnv g2 = gamma;
      g2[p->subject] = Type{Qual::Lin, subst_type_many(tb.cont, sub)};
      for (size_t i = 0; i < pb->params.size(); ++i) {
        const Type& declared = pb->params[i].type;
        if (!check_qualified(d2, declared))
          fail(ErrKind::NotWellFormed,
               "declared parameter type '" + render(declared) + "' is not well formed");
        Type carried{tb.argtypes[i].qual, subst_type_many(tb.argtypes[i].body, sub)};
        if (!subtype_qualified(carried, declared))
          fail(ErrKind::ArgSubtypeFail,
               "parameter '" + sym_name(pb->params[i].var) + "' declares '" + render(declared) +
                   "', which cannot receive '" + render(carried) + "'");
        g2 = add(std::move(g2), variable(pb->params[i].var), declared);
      }
      check(sigma, d2, g2, pb->body);
    }
  }
};

}  // namespace detail

inline CheckResult typecheck(const ProcVarEnv& sigma, const TypeVarSet& delta, const TypeEnv& gamma,
                             const PP& p) {
  detail::ProcessChecker checker;
  CheckResult out;
  try {
    for (const auto& [n, t] : gamma)
      if (!check_qualified(delta, t))
        throw detail::CheckFailure{TypeError{
            ErrKind::NotWellFormed, "env",
            "binding '" + sym_name(n.sym) + ": " + render(t) + "' is not well formed"}};
    checker.check(sigma, delta, gamma, p);
  } catch (const detail::CheckFailure& f) {
    out.error = f.error;
  }
  out.warnings = std::move(checker.warnings);
  return out;
}

inline CheckResult typecheck(const TypeEnv& gamma, const PP& p) {
  return typecheck({}, {}, gamma, p);
}

// ---------------------------------------------------------------------------
// Heap typing: the five conditions a consistent heap satisfies with respect
// to a root environment and an environment for queued (non-root) pointers.

struct HeapVerdict {
  int condition = 0;  // 0 = well typed, otherwise the first failing condition
  std::string witness;
  bool ok() const { return condition == 0; }
};

inline HeapVerdict check_heap(const TypeEnv& queued, const TypeEnv& roots, const Heap& heap) {
  for (const auto& [n, t] : queued) {
    if (t.qual != Qual::Lin) throw std::invalid_argument("check_heap: queued environment must be linear");
    if (roots.count(n)) throw std::invalid_argument("check_heap: environments overlap");
  }
  auto all_lookup = [&](const Name& n) -> const Type* {
    auto it = queued.find(n);
    if (it != queued.end()) return &it->second;
    it = roots.find(n);
    if (it != roots.end()) return &it->second;
    return nullptr;
  };
  for (const auto& [n, t] : queued)
    if (!check_qualified({}, t)) throw std::invalid_argument("check_heap: ill-formed binding");
  for (const auto& [n, t] : roots)
    if (!check_qualified({}, t)) throw std::invalid_argument("check_heap: ill-formed binding");

  // (1) peers are allocated and at most one of the two queues is nonempty.
  for (const auto& [loc, ep] : heap) {
    const Endpoint* peer = heap.find(ep.peer);
    if (!peer || peer->peer != loc)
      return {1, sym_name(loc) + ": peer '" + sym_name(ep.peer) + "' missing or mismatched"};
    if (loc != ep.peer && !ep.queue.empty() && !peer->queue.empty())
      return {1, "both queues of '" + sym_name(loc) + "' and '" + sym_name(ep.peer) + "' are nonempty"};
  }

  auto specs_of = [&](const std::vector<Message>& queue, std::string& err) {
    std::vector<MessageSpec> specs;
    for (const auto& m : queue) {
      MessageSpec spec{m.tag, m.tyargs, {}};
      for (const auto& v : m.args) {
        const Type* vt = all_lookup(v);
        if (!vt) {
          err = "queued value '" + sym_name(v.sym) + "' has no type";
          return specs;
        }
        spec.argtypes.push_back(*vt);
      }
      specs.push_back(std::move(spec));
    }
    return specs;
  };

  auto check_pair = [&](Sym empty_side, Sym queued_side, const Type& t_empty, const Type& t_queued,
                        const std::vector<Message>& queue, int condition) -> std::optional<HeapVerdict> {
    for (const auto& m : queue) {
      for (const auto& s : m.tyargs)
        if (!weight(TypeVarSet{}, s).is_finite())
          return HeapVerdict{condition, "queued type argument '" + render(s) + "' has infinite weight"};
      for (const auto& v : m.args) {
        const Type* vt = all_lookup(v);
        if (vt && !weight(TypeVarSet{}, *vt).is_finite())
          return HeapVerdict{condition, "queued value '" + sym_name(v.sym) + "' has infinite weight"};
      }
    }
    std::string err;
    auto specs = specs_of(queue, err);
    if (!err.empty()) return HeapVerdict{condition, err};
    auto residual = tail(t_queued.body, specs);
    if (!residual.ok())
      return HeapVerdict{condition, "tail undefined between '" + sym_name(empty_side) + "' and '" +
                                        sym_name(queued_side) + "': " + residual.error->message};
    if (!is_dual_pair(t_empty.body, *residual.value))
      return HeapVerdict{condition, "'" + sym_name(empty_side) + "' and '" + sym_name(queued_side) +
                                        "' are not dual after consuming the queue"};
    return std::nullopt;
  };

  // (2) linear peers agree up to the pending queue; (3) likewise for the
  // two faces of an unrestricted channel. Endpoints the environments do not
  // name at all are left for the domain condition (4) to flag.
  for (const auto& [loc, ep] : heap) {
    if (loc == ep.peer) {
      const Type* t_shared = all_lookup(shared(loc));
      const Type* t_lin = all_lookup(linear(loc));
      if (!t_lin) continue;
      if (!t_shared)
        return {3, "no unrestricted binding for '*" + sym_name(loc) + "'"};
      if (t_shared->qual != Qual::Un)
        return {3, "'*" + sym_name(loc) + "' is not unrestricted"};
      if (t_lin->qual != Qual::Lin) return {3, "'" + sym_name(loc) + "' is not linear"};
      if (auto v = check_pair(loc, loc, *t_shared, *t_lin, ep.queue, 3)) return *v;
      continue;
    }
    if (!ep.queue.empty()) continue;  // handled from the empty side
    const Endpoint& peer = heap.at(ep.peer);
    const Type* t_a = all_lookup(linear(loc));
    const Type* t_b = all_lookup(linear(ep.peer));
    if (!t_a || !t_b) continue;
    if (t_a->qual != Qual::Lin) return {2, "'" + sym_name(loc) + "' is not linear"};
    if (t_b->qual != Qual::Lin) return {2, "'" + sym_name(ep.peer) + "' is not linear"};
    if (auto v = check_pair(loc, ep.peer, *t_a, *t_b, peer.queue, 2)) return *v;
  }

  // (4) the heap holds exactly the linear pointers the environments name,
  // and all of them are reachable from the roots.
  std::set<Sym> heap_dom;
  for (const auto& [loc, ep] : heap) heap_dom.insert(loc);
  std::set<Sym> env_dom_lin;
  for (const auto& [n, t] : queued) env_dom_lin.insert(n.sym);
  for (const auto& [n, t] : roots)
    if (t.qual == Qual::Lin) env_dom_lin.insert(n.sym);
  if (heap_dom != env_dom_lin) {
    std::string w = "heap domain and linear environment domain differ";
    return {4, w};
  }
  std::set<Sym> reach = reachable(env_dom(roots), heap);
  if (reach != heap_dom) return {4, "reachability from the roots does not cover the heap"};

  // (5) distinct roots reach disjoint regions.
  std::set<Name> root_set = env_dom(roots);
  std::vector<Name> root_names(root_set.begin(), root_set.end());
  for (size_t i = 0; i < root_names.size(); ++i)
    for (size_t j = i + 1; j < root_names.size(); ++j) {
      auto ra = reachable({root_names[i]}, heap);
      auto rb = reachable({root_names[j]}, heap);
      for (const auto& s : ra)
        if (rb.count(s))
          return {5, "roots '" + sym_name(root_names[i].sym) + "' and '" + sym_name(root_names[j].sym) +
                         "' both reach '" + sym_name(s) + "'"};
    }
  return {};
}

}  // namespace copyless

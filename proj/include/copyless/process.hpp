#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "copyless/types.hpp"

namespace copyless {

enum class PKind : std::uint8_t {
  Idle,
  Close,
  OpenLinear,
  OpenUn,
  Send,
  Receive,
  Choice,
  Par,
  PVarRef,
  Rec,
  Call,  // unresolved reference to a named definition; eliminated by the frontend
};

struct Proc;
using PP = std::shared_ptr<const Proc>;

struct RParam {
  Sym var{};  // a Variable-kind name
  Type type;
};

struct RBranch {
  Tag tag{};
  std::vector<TypeVar> typarams;
  std::vector<RParam> params;
  PP body;
};

struct Proc {
  PKind kind{PKind::Idle};
  Name subject{};                // Close, Send, Receive
  Sym loc_a{}, loc_b{};          // OpenLinear binds both, OpenUn binds loc_a (and *loc_a)
  ET type_a, type_b;             // open annotations
  Tag tag{};                     // Send
  std::vector<ET> tyargs;        // Send
  std::vector<Name> args;        // Send
  std::vector<RBranch> branches; // Receive
  PP left, right;                // Choice/Par; prefix continuations use left
  PVar pv{};                     // PVarRef / Rec binder
  std::string call_name;         // Call
  std::vector<ET> call_tyargs;   // Call
  std::vector<Name> call_args;   // Call
};

struct ProcSyntaxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace raw {

inline PP make_proc(Proc&& p) { return std::make_shared<const Proc>(std::move(p)); }

inline PP idle() {
  static const PP p = make_proc(Proc{});
  return p;
}

}  // namespace raw

// ---------------------------------------------------------------------------
// Factories. Binders (open locations, receive parameters and type
// parameters, recursion variables) are freshened on construction, mirroring
// the type layer.

inline PP p_idle() { return raw::idle(); }

inline PP p_close(Name u) {
  Proc p;
  p.kind = PKind::Close;
  p.subject = u;
  return raw::make_proc(std::move(p));
}

inline PP p_send(Name u, Tag m, std::vector<ET> tyargs, std::vector<Name> args, PP cont) {
  Proc p;
  p.kind = PKind::Send;
  p.subject = u;
  p.tag = m;
  p.tyargs = std::move(tyargs);
  p.args = std::move(args);
  p.left = std::move(cont);
  return raw::make_proc(std::move(p));
}

inline PP p_choice(PP a, PP b) {
  Proc p;
  p.kind = PKind::Choice;
  p.left = std::move(a);
  p.right = std::move(b);
  return raw::make_proc(std::move(p));
}

inline PP p_par(PP a, PP b) {
  Proc p;
  p.kind = PKind::Par;
  p.left = std::move(a);
  p.right = std::move(b);
  return raw::make_proc(std::move(p));
}

inline PP p_pvar(PVar x) {
  Proc p;
  p.kind = PKind::PVarRef;
  p.pv = x;
  return raw::make_proc(std::move(p));
}

inline PP p_call(std::string name, std::vector<ET> tyargs, std::vector<Name> args) {
  Proc p;
  p.kind = PKind::Call;
  p.call_name = std::move(name);
  p.call_tyargs = std::move(tyargs);
  p.call_args = std::move(args);
  return raw::make_proc(std::move(p));
}

// Substitutions, declared early because the freshening factories rename
// through them.
PP subst_value(const PP& p, Name value, Sym var);
PP subst_tyvar_many(const PP& p, const std::map<TypeVar, ET>& sub);
PP subst_pvar(const PP& p, const PP& q, PVar x);
// Renames a location. A linear open binds only the bare names a, b; an
// unrestricted open binds a together with its twin *a, hence the flag.
PP rename_loc(const PP& p, Sym from, Sym to, bool linear_only = false);

inline PP subst_tyvar(const PP& p, const ET& s, TypeVar a) { return subst_tyvar_many(p, {{a, s}}); }

inline PP p_open_linear(Sym a, ET ta, Sym b, ET tb, PP body) {
  if (a == b) throw ProcSyntaxError("open: the two endpoints must be distinct");
  Sym fa = fresh_sym(sym_name(a)), fb = fresh_sym(sym_name(b));
  body = rename_loc(rename_loc(std::move(body), a, fa, true), b, fb, true);
  Proc p;
  p.kind = PKind::OpenLinear;
  p.loc_a = fa;
  p.loc_b = fb;
  p.type_a = std::move(ta);
  p.type_b = std::move(tb);
  p.left = std::move(body);
  return raw::make_proc(std::move(p));
}

inline PP p_open_un(Sym a, ET ta, PP body) {
  Sym fa = fresh_sym(sym_name(a));
  body = rename_loc(std::move(body), a, fa);  // renames both a and *a
  Proc p;
  p.kind = PKind::OpenUn;
  p.loc_a = fa;
  p.type_a = std::move(ta);
  p.left = std::move(body);
  return raw::make_proc(std::move(p));
}

inline PP p_receive(Name u, std::vector<RBranch> branches) {
  if (branches.empty()) throw ProcSyntaxError("receive needs at least one branch");
  for (size_t i = 0; i < branches.size(); ++i)
    for (size_t j = i + 1; j < branches.size(); ++j)
      if (branches[i].tag == branches[j].tag)
        throw ProcSyntaxError("duplicate tag '" + sym_name(branches[i].tag.sym) + "' in receive");
  for (auto& b : branches) {
    std::map<TypeVar, ET> ren;
    std::vector<TypeVar> fresh_tps;
    for (const auto& tp : b.typarams) {
      TypeVar f{fresh_sym(sym_name(tp.sym))};
      fresh_tps.push_back(f);
      ren.emplace(tp, raw::make_var(f));
    }
    PP body = subst_tyvar_many(b.body, ren);
    std::vector<RParam> fresh_params;
    for (const auto& par : b.params) {
      Sym f = fresh_sym(sym_name(par.var));
      body = subst_value(body, variable(f), par.var);
      fresh_params.push_back(RParam{f, Type{par.type.qual, subst_type_many(par.type.body, ren)}});
    }
    b.typarams = std::move(fresh_tps);
    b.params = std::move(fresh_params);
    b.body = std::move(body);
  }
  Proc p;
  p.kind = PKind::Receive;
  p.subject = u;
  p.branches = std::move(branches);
  return raw::make_proc(std::move(p));
}

inline PP p_rec(PVar x, PP body) {
  PVar f{fresh_sym(sym_name(x.sym))};
  body = subst_pvar(std::move(body), p_pvar(f), x);
  Proc p;
  p.kind = PKind::Rec;
  p.pv = f;
  p.left = std::move(body);
  return raw::make_proc(std::move(p));
}

// ---------------------------------------------------------------------------
// Name and variable analysis.

struct NameAnalysis {
  std::set<Name> fn, bn;
  TypeVarSet ftv, btv;
};

namespace detail {

inline void analyze_proc(const PP& p, NameAnalysis& out) {
  switch (p->kind) {
    case PKind::Idle:
    case PKind::PVarRef:
      return;
    case PKind::Close:
      out.fn.insert(p->subject);
      return;
    case PKind::OpenLinear: {
      NameAnalysis inner;
      analyze_proc(p->left, inner);
      inner.fn.erase(linear(p->loc_a));
      inner.fn.erase(linear(p->loc_b));
      out.fn.insert(inner.fn.begin(), inner.fn.end());
      out.bn.insert(linear(p->loc_a));
      out.bn.insert(linear(p->loc_b));
      out.bn.insert(inner.bn.begin(), inner.bn.end());
      auto fa = ftv(p->type_a), fb = ftv(p->type_b);
      out.ftv.insert(fa.begin(), fa.end());
      out.ftv.insert(fb.begin(), fb.end());
      out.ftv.insert(inner.ftv.begin(), inner.ftv.end());
      out.btv.insert(inner.btv.begin(), inner.btv.end());
      return;
    }
    case PKind::OpenUn: {
      // open(a:T) implicitly binds *a in addition to a.
      NameAnalysis inner;
      analyze_proc(p->left, inner);
      inner.fn.erase(linear(p->loc_a));
      inner.fn.erase(shared(p->loc_a));
      out.fn.insert(inner.fn.begin(), inner.fn.end());
      out.bn.insert(linear(p->loc_a));
      out.bn.insert(shared(p->loc_a));
      out.bn.insert(inner.bn.begin(), inner.bn.end());
      auto fa = ftv(p->type_a);
      out.ftv.insert(fa.begin(), fa.end());
      out.ftv.insert(inner.ftv.begin(), inner.ftv.end());
      out.btv.insert(inner.btv.begin(), inner.btv.end());
      return;
    }
    case PKind::Send: {
      out.fn.insert(p->subject);
      for (const auto& a : p->args) out.fn.insert(a);
      for (const auto& s : p->tyargs) {
        auto f = ftv(s);
        out.ftv.insert(f.begin(), f.end());
      }
      analyze_proc(p->left, out);
      return;
    }
    case PKind::Receive: {
      out.fn.insert(p->subject);
      for (const auto& b : p->branches) {
        NameAnalysis inner;
        analyze_proc(b.body, inner);
        TypeVarSet branch_ftv = inner.ftv;
        for (const auto& par : b.params) {
          inner.fn.erase(variable(par.var));
          out.bn.insert(variable(par.var));
          auto f = ftv(par.type.body);
          branch_ftv.insert(f.begin(), f.end());
        }
        for (const auto& tp : b.typarams) {
          branch_ftv.erase(tp);
          out.btv.insert(tp);
        }
        out.fn.insert(inner.fn.begin(), inner.fn.end());
        out.bn.insert(inner.bn.begin(), inner.bn.end());
        out.ftv.insert(branch_ftv.begin(), branch_ftv.end());
        out.btv.insert(inner.btv.begin(), inner.btv.end());
      }
      return;
    }
    case PKind::Choice:
    case PKind::Par:
      analyze_proc(p->left, out);
      analyze_proc(p->right, out);
      return;
    case PKind::Rec:
      analyze_proc(p->left, out);
      return;
    case PKind::Call: {
      for (const auto& a : p->call_args) out.fn.insert(a);
      for (const auto& s : p->call_tyargs) {
        auto f = ftv(s);
        out.ftv.insert(f.begin(), f.end());
      }
      return;
    }
  }
}

}  // namespace detail

inline NameAnalysis analyze_process_names(const PP& p) {
  NameAnalysis out;
  detail::analyze_proc(p, out);
  return out;
}

inline std::set<Name> fn(const PP& p) { return analyze_process_names(p).fn; }

// ---------------------------------------------------------------------------
// Substitutions. All three sorts are capture-avoiding thanks to unique
// binders; traversal still respects shadowing for robustness.

namespace detail {

template <typename FVisit>
inline PP rebuild(const PP& p, FVisit&& visit) {
  // Generic structural rebuild applying `visit` to immediate subprocesses.
  Proc np = *p;
  bool changed = false;
  if (p->left) {
    np.left = visit(p->left);
    changed = changed || np.left != p->left;
  }
  if (p->right) {
    np.right = visit(p->right);
    changed = changed || np.right != p->right;
  }
  for (auto& b : np.branches) {
    PP nb = visit(b.body);
    changed = changed || nb != b.body;
    b.body = std::move(nb);
  }
  return changed ? raw::make_proc(std::move(np)) : p;
}

}  // namespace detail

inline PP subst_value(const PP& p, Name value, Sym var) {
  auto on_name = [&](Name n) { return (n.kind == NameKind::Variable && n.sym == var) ? value : n; };
  switch (p->kind) {
    case PKind::Idle:
    case PKind::PVarRef:
      return p;
    case PKind::Close: {
      Name n = on_name(p->subject);
      if (n == p->subject) return p;
      Proc np = *p;
      np.subject = n;
      return raw::make_proc(std::move(np));
    }
    case PKind::Send: {
      Proc np = *p;
      np.subject = on_name(p->subject);
      for (auto& a : np.args) a = on_name(a);
      np.left = subst_value(p->left, value, var);
      return raw::make_proc(std::move(np));
    }
    case PKind::Receive: {
      Proc np = *p;
      np.subject = on_name(p->subject);
      for (auto& b : np.branches) {
        bool shadowed = false;
        for (const auto& par : b.params) shadowed = shadowed || par.var == var;
        if (!shadowed) b.body = subst_value(b.body, value, var);
      }
      return raw::make_proc(std::move(np));
    }
    case PKind::Call: {
      Proc np = *p;
      for (auto& a : np.call_args) a = on_name(a);
      return raw::make_proc(std::move(np));
    }
    default:
      return detail::rebuild(p, [&](const PP& q) { return subst_value(q, value, var); });
  }
}

inline PP subst_tyvar_many(const PP& p, const std::map<TypeVar, ET>& sub) {
  if (sub.empty()) return p;
  switch (p->kind) {
    case PKind::Idle:
    case PKind::Close:
    case PKind::PVarRef:
      return p;
    case PKind::OpenLinear: {
      Proc np = *p;
      np.type_a = subst_type_many(p->type_a, sub);
      np.type_b = subst_type_many(p->type_b, sub);
      np.left = subst_tyvar_many(p->left, sub);
      return raw::make_proc(std::move(np));
    }
    case PKind::OpenUn: {
      Proc np = *p;
      np.type_a = subst_type_many(p->type_a, sub);
      np.left = subst_tyvar_many(p->left, sub);
      return raw::make_proc(std::move(np));
    }
    case PKind::Send: {
      Proc np = *p;
      for (auto& s : np.tyargs) s = subst_type_many(s, sub);
      np.left = subst_tyvar_many(p->left, sub);
      return raw::make_proc(std::move(np));
    }
    case PKind::Receive: {
      Proc np = *p;
      for (auto& b : np.branches) {
        auto inner = sub;
        for (const auto& tp : b.typarams) inner.erase(tp);
        for (auto& par : b.params) par.type = Type{par.type.qual, subst_type_many(par.type.body, inner)};
        b.body = subst_tyvar_many(b.body, inner);
      }
      return raw::make_proc(std::move(np));
    }
    case PKind::Call: {
      Proc np = *p;
      for (auto& s : np.call_tyargs) s = subst_type_many(s, sub);
      return raw::make_proc(std::move(np));
    }
    default:
      return detail::rebuild(p, [&](const PP& q) { return subst_tyvar_many(q, sub); });
  }
}

inline PP subst_pvar(const PP& p, const PP& q, PVar x) {
  switch (p->kind) {
    case PKind::PVarRef:
      return p->pv == x ? q : p;
    case PKind::Rec:
      if (p->pv == x) return p;
      return detail::rebuild(p, [&](const PP& r) { return subst_pvar(r, q, x); });
    default:
      return detail::rebuild(p, [&](const PP& r) { return subst_pvar(r, q, x); });
  }
}

inline PP rename_loc(const PP& p, Sym from, Sym to, bool linear_only) {
  auto on_name = [&](Name n) {
    if (n.sym != from || n.kind == NameKind::Variable) return n;
    if (linear_only && n.kind != NameKind::Linear) return n;
    return Name{n.kind, to};
  };
  switch (p->kind) {
    case PKind::Idle:
    case PKind::PVarRef:
      return p;
    case PKind::Close: {
      Name n = on_name(p->subject);
      if (n == p->subject) return p;
      Proc np = *p;
      np.subject = n;
      return raw::make_proc(std::move(np));
    }
    case PKind::OpenLinear:
      if (p->loc_a == from || p->loc_b == from) return p;
      return detail::rebuild(p, [&](const PP& q) { return rename_loc(q, from, to, linear_only); });
    case PKind::OpenUn:
      if (p->loc_a == from) return p;
      return detail::rebuild(p, [&](const PP& q) { return rename_loc(q, from, to, linear_only); });
    case PKind::Send: {
      Proc np = *p;
      np.subject = on_name(p->subject);
      for (auto& a : np.args) a = on_name(a);
      np.left = rename_loc(p->left, from, to, linear_only);
      return raw::make_proc(std::move(np));
    }
    case PKind::Receive: {
      Proc np = *p;
      np.subject = on_name(p->subject);
      for (auto& b : np.branches) b.body = rename_loc(b.body, from, to, linear_only);
      return raw::make_proc(std::move(np));
    }
    case PKind::Call: {
      Proc np = *p;
      for (auto& a : np.call_args) a = on_name(a);
      return raw::make_proc(std::move(np));
    }
    default:
      return detail::rebuild(p, [&](const PP& q) { return rename_loc(q, from, to, linear_only); });
  }
}

// ---------------------------------------------------------------------------
// Alpha equality and canonical keys for processes.

namespace detail {

struct PCorr {
  std::vector<std::pair<Sym, Sym>> locs;    // open binders
  std::vector<std::pair<Sym, Sym>> vars;    // receive params
  std::vector<std::pair<TypeVar, TypeVar>> tvars;
  std::vector<std::pair<Sym, Sym>> pvars;
};

inline bool sym_matches(Sym x, Sym y, const std::vector<std::pair<Sym, Sym>>& corr) {
  for (auto it = corr.rbegin(); it != corr.rend(); ++it)
    if (it->first == x || it->second == y) return it->first == x && it->second == y;
  return x == y;
}

inline bool name_matches(const Name& a, const Name& b, const PCorr& c) {
  if (a.kind != b.kind) return false;
  if (a.kind == NameKind::Variable) return sym_matches(a.sym, b.sym, c.vars);
  return sym_matches(a.sym, b.sym, c.locs);
}

inline bool alpha_eq_proc(const PP& a, const PP& b, PCorr& c) {
  if (a->kind != b->kind) return false;
  auto type_eq = [&](const ET& x, const ET& y) {
    std::vector<std::pair<TypeVar, TypeVar>> corr = c.tvars;
    return alpha_eq_rec(x, y, corr);
  };
  switch (a->kind) {
    case PKind::Idle:
      return true;
    case PKind::Close:
      return name_matches(a->subject, b->subject, c);
    case PKind::OpenLinear: {
      if (!type_eq(a->type_a, b->type_a) || !type_eq(a->type_b, b->type_b)) return false;
      c.locs.emplace_back(a->loc_a, b->loc_a);
      c.locs.emplace_back(a->loc_b, b->loc_b);
      bool ok = alpha_eq_proc(a->left, b->left, c);
      c.locs.pop_back();
      c.locs.pop_back();
      return ok;
    }
    case PKind::OpenUn: {
      if (!type_eq(a->type_a, b->type_a)) return false;
      c.locs.emplace_back(a->loc_a, b->loc_a);
      bool ok = alpha_eq_proc(a->left, b->left, c);
      c.locs.pop_back();
      return ok;
    }
    case PKind::Send: {
      if (a->tag != b->tag || !name_matches(a->subject, b->subject, c)) return false;
      if (a->tyargs.size() != b->tyargs.size() || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->tyargs.size(); ++i)
        if (!type_eq(a->tyargs[i], b->tyargs[i])) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!name_matches(a->args[i], b->args[i], c)) return false;
      return alpha_eq_proc(a->left, b->left, c);
    }
    case PKind::Receive: {
      if (!name_matches(a->subject, b->subject, c)) return false;
      if (a->branches.size() != b->branches.size()) return false;
      for (const auto& ba : a->branches) {
        const RBranch* bb = nullptr;
        for (const auto& cand : b->branches)
          if (cand.tag == ba.tag) { bb = &cand; break; }
        if (!bb || ba.typarams.size() != bb->typarams.size() || ba.params.size() != bb->params.size())
          return false;
        size_t tdepth = c.tvars.size(), vdepth = c.vars.size();
        for (size_t i = 0; i < ba.typarams.size(); ++i)
          c.tvars.emplace_back(ba.typarams[i], bb->typarams[i]);
        bool ok = true;
        for (size_t i = 0; ok && i < ba.params.size(); ++i) {
          ok = ba.params[i].type.qual == bb->params[i].type.qual &&
               type_eq(ba.params[i].type.body, bb->params[i].type.body);
          c.vars.emplace_back(ba.params[i].var, bb->params[i].var);
        }
        ok = ok && alpha_eq_proc(ba.body, bb->body, c);
        c.tvars.resize(tdepth);
        c.vars.resize(vdepth);
        if (!ok) return false;
      }
      return true;
    }
    case PKind::Choice:
    case PKind::Par:
      return alpha_eq_proc(a->left, b->left, c) && alpha_eq_proc(a->right, b->right, c);
    case PKind::PVarRef:
      return sym_matches(a->pv.sym, b->pv.sym, c.pvars);
    case PKind::Rec: {
      c.pvars.emplace_back(a->pv.sym, b->pv.sym);
      bool ok = alpha_eq_proc(a->left, b->left, c);
      c.pvars.pop_back();
      return ok;
    }
    case PKind::Call:
      return a->call_name == b->call_name;
  }
  return false;
}

struct PCanonCtx {
  std::vector<Sym> locs, vars, pvars;
  std::vector<TypeVar> tvars;
};

inline void canon_sym(Sym s, const std::vector<Sym>& binders, char freemark, std::string& out) {
  for (size_t i = binders.size(); i > 0; --i) {
    if (binders[i - 1] == s) {
      out += '#';
      out += std::to_string(binders.size() - i);
      return;
    }
  }
  out += freemark;
  out += std::to_string(s);
}

inline void canon_name(const Name& n, const PCanonCtx& c, std::string& out) {
  switch (n.kind) {
    case NameKind::Linear: out += 'L'; canon_sym(n.sym, c.locs, 'f', out); break;
    case NameKind::Shared: out += 'S'; canon_sym(n.sym, c.locs, 'f', out); break;
    case NameKind::Variable: out += 'V'; canon_sym(n.sym, c.vars, 'f', out); break;
  }
}

inline void canon_proc(const PP& p, PCanonCtx& c, std::string& out) {
  auto canon_t = [&](const ET& t) {
    std::vector<TypeVar> binders = c.tvars;
    canon_rec(t, binders, out);
  };
  switch (p->kind) {
    case PKind::Idle:
      out += '0';
      return;
    case PKind::Close:
      out += "c(";
      canon_name(p->subject, c, out);
      out += ')';
      return;
    case PKind::OpenLinear:
      out += "o2(";
      canon_t(p->type_a);
      out += ',';
      canon_t(p->type_b);
      out += ").";
      c.locs.push_back(p->loc_a);
      c.locs.push_back(p->loc_b);
      canon_proc(p->left, c, out);
      c.locs.pop_back();
      c.locs.pop_back();
      return;
    case PKind::OpenUn:
      out += "o1(";
      canon_t(p->type_a);
      out += ").";
      c.locs.push_back(p->loc_a);
      canon_proc(p->left, c, out);
      c.locs.pop_back();
      return;
    case PKind::Send: {
      out += 's';
      canon_name(p->subject, c, out);
      out += '!';
      out += sym_name(p->tag.sym);
      out += '<';
      for (const auto& s : p->tyargs) {
        canon_t(s);
        out += ',';
      }
      out += ">(";
      for (const auto& a : p->args) {
        canon_name(a, c, out);
        out += ',';
      }
      out += ").";
      canon_proc(p->left, c, out);
      return;
    }
    case PKind::Receive: {
      out += 'r';
      canon_name(p->subject, c, out);
      std::vector<const RBranch*> sorted;
      for (const auto& b : p->branches) sorted.push_back(&b);
      std::sort(sorted.begin(), sorted.end(), [](const RBranch* x, const RBranch* y) {
        return sym_name(x->tag.sym) < sym_name(y->tag.sym);
      });
      out += '{';
      for (const RBranch* b : sorted) {
        out += sym_name(b->tag.sym);
        size_t td = c.tvars.size(), vd = c.vars.size();
        c.tvars.insert(c.tvars.end(), b->typarams.begin(), b->typarams.end());
        out += '<';
        out += std::to_string(b->typarams.size());
        out += ">(";
        for (const auto& par : b->params) {
          out += par.type.qual == Qual::Lin ? "l " : "u ";
          canon_t(par.type.body);
          c.vars.push_back(par.var);
          out += ',';
        }
        out += ").";
        canon_proc(b->body, c, out);
        c.tvars.resize(td);
        c.vars.resize(vd);
        out += ',';
      }
      out += '}';
      return;
    }
    case PKind::Choice:
      out += "(+ ";
      canon_proc(p->left, c, out);
      out += ' ';
      canon_proc(p->right, c, out);
      out += ')';
      return;
    case PKind::Par:
      out += "(| ";
      canon_proc(p->left, c, out);
      out += ' ';
      canon_proc(p->right, c, out);
      out += ')';
      return;
    case PKind::PVarRef:
      out += 'X';
      canon_sym(p->pv.sym, c.pvars, 'f', out);
      return;
    case PKind::Rec:
      out += "mu.";
      c.pvars.push_back(p->pv.sym);
      canon_proc(p->left, c, out);
      c.pvars.pop_back();
      return;
    case PKind::Call:
      out += "call:" + p->call_name;
      return;
  }
}

}  // namespace detail

inline bool alpha_equal(const PP& a, const PP& b) {
  detail::PCorr corr;
  return detail::alpha_eq_proc(a, b, corr);
}

inline std::string canon_key(const PP& p) {
  std::string out;
  detail::PCanonCtx c;
  detail::canon_proc(p, c, out);
  return out;
}

}  // namespace copyless

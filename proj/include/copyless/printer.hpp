#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "copyless/heap.hpp"
#include "copyless/process.hpp"
#include "copyless/types.hpp"

// Rendering back to concrete syntax. Free symbols print as their base
// names. Binders print as their base names too unless that would collide
// with another symbol in the same term, in which case a numeric suffix is
// appended; assignment is by first appearance, so output is deterministic.

namespace copyless {

namespace detail {

class DisplayNames {
 public:
  void reserve_free(Sym s) {
    if (names_.count(s)) return;
    const std::string& base = sym_name(s);
    names_[s] = base;
    used_.insert(base);
  }

  void assign_binder(Sym s) {
    if (names_.count(s)) return;
    const std::string& base = sym_name(s);
    if (!used_.count(base)) {
      names_[s] = base;
      used_.insert(base);
      return;
    }
    for (int i = 2;; ++i) {
      std::string cand = base + std::to_string(i);
      if (!used_.count(cand)) {
        names_[s] = cand;
        used_.insert(cand);
        return;
      }
    }
  }

  const std::string& name(Sym s) {
    auto it = names_.find(s);
    if (it == names_.end()) {
      reserve_free(s);
      it = names_.find(s);
    }
    return it->second;
  }

 private:
  std::map<Sym, std::string> names_;
  std::set<std::string> used_;
};

// Pre-pass: claim every free symbol's base name before binders pick theirs.
inline void claim_frees_type(const ET& t, std::vector<TypeVar> bound, DisplayNames& d) {
  switch (t->kind) {
    case TKind::End:
      return;
    case TKind::Var: {
      for (const auto& b : bound)
        if (b == t->var) return;
      d.reserve_free(t->var.sym);
      return;
    }
    case TKind::Rec:
      bound.push_back(t->var);
      claim_frees_type(t->rec_body, std::move(bound), d);
      return;
    case TKind::Internal:
    case TKind::External:
      for (const auto& b : t->branches) {
        auto inner = bound;
        inner.insert(inner.end(), b.typarams.begin(), b.typarams.end());
        for (const auto& at : b.argtypes) claim_frees_type(at.body, inner, d);
        claim_frees_type(b.cont, inner, d);
      }
      return;
  }
}

inline void render_type(const ET& t, DisplayNames& d, std::string& out);

inline void render_qualified(const Type& t, DisplayNames& d, std::string& out) {
  out += t.qual == Qual::Lin ? "lin " : "un ";
  render_type(t.body, d, out);
}

inline void render_branch(const TBranch& b, DisplayNames& d, std::string& out) {
  out += sym_name(b.tag.sym);
  if (!b.typarams.empty()) {
    out += '<';
    for (size_t i = 0; i < b.typarams.size(); ++i) {
      if (i) out += ", ";
      d.assign_binder(b.typarams[i].sym);
      out += d.name(b.typarams[i].sym);
    }
    out += '>';
  }
  out += '(';
  for (size_t i = 0; i < b.argtypes.size(); ++i) {
    if (i) out += ", ";
    render_qualified(b.argtypes[i], d, out);
  }
  out += ").";
  render_type(b.cont, d, out);
}

inline void render_type(const ET& t, DisplayNames& d, std::string& out) {
  switch (t->kind) {
    case TKind::End:
      out += "end";
      return;
    case TKind::Var:
      out += d.name(t->var.sym);
      return;
    case TKind::Rec:
      d.assign_binder(t->var.sym);
      out += "rec ";
      out += d.name(t->var.sym);
      out += '.';
      render_type(t->rec_body, d, out);
      return;
    case TKind::Internal:
    case TKind::External: {
      out += t->kind == TKind::Internal ? '!' : '?';
      if (t->branches.size() == 1) {
        render_branch(t->branches[0], d, out);
      } else {
        out += '{';
        for (size_t i = 0; i < t->branches.size(); ++i) {
          if (i) out += ", ";
          render_branch(t->branches[i], d, out);
        }
        out += '}';
      }
      return;
    }
  }
}

inline void claim_frees_proc(const PP& p, DisplayNames& d) {
  NameAnalysis a = analyze_process_names(p);
  for (const auto& n : a.fn) d.reserve_free(n.sym);
  for (const auto& v : a.ftv) d.reserve_free(v.sym);
}

inline void render_name(const Name& n, DisplayNames& d, std::string& out) {
  if (n.kind == NameKind::Shared) out += '*';
  out += d.name(n.sym);
}

// Precedence: parallel binds loosest, then (+), prefixes tightest.
enum class PPrec { Par = 0, Choice = 1, Prefix = 2 };

inline void render_proc(const PP& p, DisplayNames& d, PPrec min_prec, std::string& out) {
  auto paren = [&](PPrec mine, auto&& body) {
    bool need = static_cast<int>(mine) < static_cast<int>(min_prec);
    if (need) out += '(';
    body();
    if (need) out += ')';
  };
  switch (p->kind) {
    case PKind::Idle:
      out += '0';
      return;
    case PKind::Close:
      out += "close(";
      render_name(p->subject, d, out);
      out += ')';
      return;
    case PKind::OpenLinear:
      d.assign_binder(p->loc_a);
      d.assign_binder(p->loc_b);
      out += "open(";
      out += d.name(p->loc_a);
      out += ": ";
      render_type(p->type_a, d, out);
      out += ", ";
      out += d.name(p->loc_b);
      out += ": ";
      render_type(p->type_b, d, out);
      out += ").";
      render_proc(p->left, d, PPrec::Prefix, out);
      return;
    case PKind::OpenUn:
      d.assign_binder(p->loc_a);
      out += "open(";
      out += d.name(p->loc_a);
      out += ": ";
      render_type(p->type_a, d, out);
      out += ").";
      render_proc(p->left, d, PPrec::Prefix, out);
      return;
    case PKind::Send: {
      render_name(p->subject, d, out);
      out += '!';
      out += sym_name(p->tag.sym);
      if (!p->tyargs.empty()) {
        out += '<';
        for (size_t i = 0; i < p->tyargs.size(); ++i) {
          if (i) out += ", ";
          render_type(p->tyargs[i], d, out);
        }
        out += '>';
      }
      out += '(';
      for (size_t i = 0; i < p->args.size(); ++i) {
        if (i) out += ", ";
        render_name(p->args[i], d, out);
      }
      out += ").";
      render_proc(p->left, d, PPrec::Prefix, out);
      return;
    }
    case PKind::Receive: {
      render_name(p->subject, d, out);
      out += "?{";
      for (size_t i = 0; i < p->branches.size(); ++i) {
        if (i) out += ", ";
        const RBranch& b = p->branches[i];
        out += sym_name(b.tag.sym);
        if (!b.typarams.empty()) {
          out += '<';
          for (size_t j = 0; j < b.typarams.size(); ++j) {
            if (j) out += ", ";
            d.assign_binder(b.typarams[j].sym);
            out += d.name(b.typarams[j].sym);
          }
          out += '>';
        }
        out += '(';
        for (size_t j = 0; j < b.params.size(); ++j) {
          if (j) out += ", ";
          d.assign_binder(b.params[j].var);
          out += d.name(b.params[j].var);
          out += ": ";
          render_qualified(b.params[j].type, d, out);
        }
        out += ").";
        render_proc(b.body, d, PPrec::Par, out);
      }
      out += '}';
      return;
    }
    case PKind::Choice:
      paren(PPrec::Choice, [&] {
        render_proc(p->left, d, PPrec::Prefix, out);
        out += " (+) ";
        render_proc(p->right, d, PPrec::Choice, out);
      });
      return;
    case PKind::Par:
      paren(PPrec::Par, [&] {
        render_proc(p->left, d, PPrec::Choice, out);
        out += " | ";
        render_proc(p->right, d, PPrec::Par, out);
      });
      return;
    case PKind::PVarRef:
      out += d.name(p->pv.sym);
      return;
    case PKind::Rec:
      d.assign_binder(p->pv.sym);
      out += "rec ";
      out += d.name(p->pv.sym);
      out += '.';
      render_proc(p->left, d, PPrec::Prefix, out);
      return;
    case PKind::Call: {
      out += p->call_name;
      if (!p->call_tyargs.empty()) {
        out += '<';
        for (size_t i = 0; i < p->call_tyargs.size(); ++i) {
          if (i) out += ", ";
          render_type(p->call_tyargs[i], d, out);
        }
        out += '>';
      }
      if (!p->call_args.empty()) {
        out += '(';
        for (size_t i = 0; i < p->call_args.size(); ++i) {
          if (i) out += ", ";
          render_name(p->call_args[i], d, out);
        }
        out += ')';
      }
      return;
    }
  }
}

}  // namespace detail

inline std::string render(const ET& t) {
  detail::DisplayNames d;
  detail::claim_frees_type(t, {}, d);
  std::string out;
  detail::render_type(t, d, out);
  return out;
}

inline std::string render(const Type& t) {
  detail::DisplayNames d;
  detail::claim_frees_type(t.body, {}, d);
  std::string out;
  detail::render_qualified(t, d, out);
  return out;
}

inline std::string render(const PP& p) {
  detail::DisplayNames d;
  detail::claim_frees_proc(p, d);
  std::string out;
  detail::render_proc(p, d, detail::PPrec::Par, out);
  return out;
}

inline std::string render(const Message& m) {
  std::string out = sym_name(m.tag.sym);
  if (!m.tyargs.empty()) {
    out += '<';
    for (size_t i = 0; i < m.tyargs.size(); ++i) {
      if (i) out += ", ";
      out += render(m.tyargs[i]);
    }
    out += '>';
  }
  out += '(';
  for (size_t i = 0; i < m.args.size(); ++i) {
    if (i) out += ", ";
    if (m.args[i].kind == NameKind::Shared) out += '*';
    out += sym_name(m.args[i].sym);
  }
  out += ')';
  return out;
}

inline std::string render(const Heap& h) {
  std::string out = "{";
  bool first = true;
  for (const auto& [loc, ep] : h) {
    if (!first) out += ", ";
    first = false;
    out += sym_name(loc);
    out += " |-> [";
    out += sym_name(ep.peer);
    out += ", ";
    if (ep.queue.empty()) {
      out += "eps";
    } else {
      for (size_t i = 0; i < ep.queue.size(); ++i) {
        if (i) out += " :: ";
        out += render(ep.queue[i]);
      }
    }
    out += ']';
  }
  out += '}';
  return out;
}

}  // namespace copyless

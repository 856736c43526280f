#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "copyless/process.hpp"
#include "copyless/type_algebra.hpp"
#include "copyless/types.hpp"

namespace copyless {

struct ParseError : std::runtime_error {
  size_t line, col;
  ParseError(size_t l, size_t c, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        line(l),
        col(c) {}
};

struct TypeDef {
  std::string name;
  std::vector<Sym> params;  // tyvar symbols, free in body
  ET body;
};

struct ProcDef {
  std::string name;
  std::vector<Sym> typarams;                  // tyvar symbols, free in body
  std::vector<std::pair<Sym, Type>> params;   // variable symbols with declared types
  PP body;                                    // may contain unresolved Call nodes
};

struct SourceProgram {
  std::vector<TypeDef> typedefs;
  std::vector<ProcDef> procdefs;
  std::optional<PP> main;  // resolved, no Call nodes

  const ProcDef* find_def(const std::string& name) const {
    for (const auto& d : procdefs)
      if (d.name == name) return &d;
    return nullptr;
  }
};

namespace detail {

// ---------------------------------------------------------------------------
// Lexer.

enum class Tok : std::uint8_t {
  Ident, Zero, LParen, RParen, LBrace, RBrace, LAngle, RAngle,
  Colon, Dot, Comma, Eq, Bang, Query, Star, Bar, ChoiceOp, End,
};

struct Token {
  Tok kind;
  std::string text;
  size_t line, col;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  size_t line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Tok k, std::string text) { out.push_back({k, std::move(text), line, col}); };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '(' && i + 2 < src.size() && src[i + 1] == '+' && src[i + 2] == ')') {
      push(Tok::ChoiceOp, "(+)");
      i += 3;
      col += 3;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = i;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' ||
                                src[i] == '\''))
        ++i;
      std::string text(src.substr(start, i - start));
      push(Tok::Ident, std::move(text));
      col += i - start;
      continue;
    }
    if (c == '0') {
      push(Tok::Zero, "0");
      ++i;
      ++col;
      continue;
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case '<': k = Tok::LAngle; break;
      case '>': k = Tok::RAngle; break;
      case ':': k = Tok::Colon; break;
      case '.': k = Tok::Dot; break;
      case ',': k = Tok::Comma; break;
      case '=': k = Tok::Eq; break;
      case '!': k = Tok::Bang; break;
      case '?': k = Tok::Query; break;
      case '*': k = Tok::Star; break;
      case '|': k = Tok::Bar; break;
      default:
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    push(k, std::string(1, c));
    ++i;
    ++col;
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

// ---------------------------------------------------------------------------
// Parser. Bound identifiers are resolved to their raw interned symbols; the
// freshening factories sort out shadowing bottom-up.

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  SourceProgram parse_program() {
    SourceProgram prog;
    while (!at(Tok::End)) {
      const Token& t = peek();
      if (t.kind == Tok::Ident && t.text == "type") {
        next();
        parse_typedef(prog);
      } else if (t.kind == Tok::Ident && t.text == "def") {
        next();
        parse_procdef(prog);
      } else if (t.kind == Tok::Ident && t.text == "main") {
        next();
        expect(Tok::Eq, "'=' after 'main'");
        if (prog.main) err("duplicate 'main'");
        typedefs_ = &prog.typedefs;
        PP raw = parse_process();
        prog.main = resolve_calls(prog, raw);
      } else {
        err("expected 'type', 'def' or 'main'");
      }
    }
    return prog;
  }

  ET parse_etype_expr() {
    ET t = parse_etype();
    expect(Tok::End, "end of input");
    return t;
  }

  Type parse_type_expr() {
    Type t = parse_qualified();
    expect(Tok::End, "end of input");
    return t;
  }

  PP parse_process_expr() {
    PP p = parse_process();
    expect(Tok::End, "end of input");
    return p;
  }

  // Folds definition references into rec-terms; cycles are tied at the
  // first re-entry with identical arguments.
  PP resolve_calls(const SourceProgram& prog, const PP& p, int depth = 0) {
    if (depth > 64) err("recursive process definitions do not fold (non-uniform arguments?)");
    switch (p->kind) {
      case PKind::Call: {
        const ProcDef* def = prog.find_def(p->call_name);
        if (!def) err("unknown process definition '" + p->call_name + "'");
        if (def->typarams.size() != p->call_tyargs.size())
          err("'" + p->call_name + "' expects " + std::to_string(def->typarams.size()) +
              " type argument(s)");
        if (def->params.size() != p->call_args.size())
          err("'" + p->call_name + "' expects " + std::to_string(def->params.size()) + " argument(s)");
        std::string key = call_key(p);
        auto it = active_.find(key);
        if (it != active_.end()) {
          used_.insert(key);
          return p_pvar(it->second);
        }
        PVar pv{fresh_sym("Rec" + p->call_name)};
        active_.emplace(key, pv);
        std::map<TypeVar, ET> tysub;
        for (size_t i = 0; i < def->typarams.size(); ++i)
          tysub.emplace(TypeVar{def->typarams[i]}, p->call_tyargs[i]);
        PP body = subst_tyvar_many(def->body, tysub);
        for (size_t i = 0; i < def->params.size(); ++i)
          body = subst_value(body, p->call_args[i], def->params[i].first);
        body = resolve_calls(prog, body, depth + 1);
        active_.erase(key);
        if (used_.count(key)) {
          used_.erase(key);
          return p_rec(pv, body);
        }
        return body;
      }
      case PKind::Idle:
      case PKind::Close:
      case PKind::PVarRef:
        return p;
      default: {
        Proc np = *p;
        if (p->left) np.left = resolve_calls(prog, p->left, depth);
        if (p->right) np.right = resolve_calls(prog, p->right, depth);
        for (auto& b : np.branches) b.body = resolve_calls(prog, b.body, depth);
        return raw::make_proc(std::move(np));
      }
    }
  }

  // Resolves a definition body for standalone checking (parameters stay
  // symbolic).
  PP resolve_def_body(const SourceProgram& prog, const ProcDef& def) {
    std::string key = def.name + "/self";
    PVar pv{fresh_sym("Rec" + def.name)};
    std::vector<Name> self_args;
    for (const auto& [sym, type] : def.params) self_args.push_back(variable(sym));
    std::vector<ET> self_tyargs;
    for (const auto& s : def.typarams) self_tyargs.push_back(raw::make_var(TypeVar{s}));
    std::string self_key = call_key(p_call(def.name, self_tyargs, self_args));
    active_.emplace(self_key, pv);
    PP body = resolve_calls(prog, def.body, 0);
    active_.erase(self_key);
    if (used_.count(self_key)) {
      used_.erase(self_key);
      return p_rec(pv, body);
    }
    return body;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::vector<TypeDef>* typedefs_ = nullptr;
  std::vector<std::string> tyvar_scope_;
  std::vector<std::pair<std::string, Name>> name_scope_;
  std::vector<std::string> pvar_scope_;
  std::map<std::string, PVar> active_;
  std::set<std::string> used_;

  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool eat(Tok k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  const Token& expect(Tok k, const std::string& what) {
    if (!at(k)) err("expected " + what);
    return next();
  }
  [[noreturn]] void err(const std::string& msg) const {
    throw ParseError(peek().line, peek().col, msg);
  }

  std::string expect_ident(const std::string& what) {
    if (!at(Tok::Ident)) err("expected " + what);
    return next().text;
  }

  bool ident_is(const char* kw) const { return at(Tok::Ident) && peek().text == kw; }

  static std::string call_key(const PP& call) {
    std::string key = call->call_name + "|";
    for (const auto& t : call->call_tyargs) key += canon_key(t) + ";";
    key += "|";
    for (const auto& a : call->call_args) {
      key += std::to_string(static_cast<int>(a.kind)) + ":" + std::to_string(a.sym) + ";";
    }
    return key;
  }

  // ---- types ----

  const TypeDef* find_typedef(const std::string& name) const {
    if (!typedefs_) return nullptr;
    for (const auto& d : *typedefs_)
      if (d.name == name) return &d;
    return nullptr;
  }

  bool tyvar_in_scope(const std::string& n) const {
    for (const auto& s : tyvar_scope_)
      if (s == n) return true;
    return false;
  }

  Type parse_qualified() {
    if (ident_is("lin")) {
      next();
      return Type{Qual::Lin, parse_etype()};
    }
    if (ident_is("un")) {
      next();
      return Type{Qual::Un, parse_etype()};
    }
    err("expected 'lin' or 'un'");
  }

  ET parse_etype() {
    if (eat(Tok::LParen)) {
      ET t = parse_etype();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (at(Tok::Bang) || at(Tok::Query)) {
      bool internal = at(Tok::Bang);
      next();
      std::vector<TBranch> branches;
      if (eat(Tok::LBrace)) {
        do {
          branches.push_back(parse_tbranch());
        } while (eat(Tok::Comma));
        expect(Tok::RBrace, "'}'");
      } else {
        branches.push_back(parse_tbranch());
      }
      try {
        return t_choice(internal ? TKind::Internal : TKind::External, std::move(branches));
      } catch (const TypeSyntaxError& e) {
        err(e.what());
      }
    }
    if (at(Tok::Ident)) {
      const std::string name = peek().text;
      if (name == "end") {
        next();
        return t_end();
      }
      if (name == "rec") {
        next();
        std::string binder = expect_ident("recursion variable");
        expect(Tok::Dot, "'.'");
        tyvar_scope_.push_back(binder);
        ET body = parse_etype();
        tyvar_scope_.pop_back();
        try {
          return t_rec(tv(binder), body);
        } catch (const TypeSyntaxError& e) {
          err(e.what());
        }
      }
      if (name == "dual") {
        next();
        expect(Tok::LParen, "'('");
        ET inner = parse_etype();
        expect(Tok::RParen, "')'");
        try {
          return dual(inner);
        } catch (const TypeSyntaxError& e) {
          err(e.what());
        }
      }
      next();
      if (!tyvar_in_scope(name)) {
        if (const TypeDef* def = find_typedef(name)) {
          std::vector<ET> args;
          if (eat(Tok::LAngle)) {
            do {
              args.push_back(parse_etype());
            } while (eat(Tok::Comma));
            expect(Tok::RAngle, "'>'");
          }
          if (args.size() != def->params.size())
            err("type '" + name + "' expects " + std::to_string(def->params.size()) +
                " argument(s), got " + std::to_string(args.size()));
          std::map<TypeVar, ET> sub;
          for (size_t i = 0; i < args.size(); ++i) sub.emplace(TypeVar{def->params[i]}, args[i]);
          return subst_type_many(def->body, sub);
        }
      }
      return t_var(tv(name));  // bound occurrence or free type variable
    }
    err("expected an endpoint type");
  }

  TBranch parse_tbranch() {
    TBranch b;
    b.tag = tag(expect_ident("message tag"));
    size_t scope_depth = tyvar_scope_.size();
    if (eat(Tok::LAngle)) {
      do {
        std::string v = expect_ident("type parameter");
        b.typarams.push_back(tv(v));
        tyvar_scope_.push_back(v);
      } while (eat(Tok::Comma));
      expect(Tok::RAngle, "'>'");
    }
    if (eat(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        do {
          b.argtypes.push_back(parse_qualified());
        } while (eat(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Dot, "'.'");
    b.cont = parse_etype();
    tyvar_scope_.resize(scope_depth);
    return b;
  }

  // ---- processes ----

  Name resolve_name(const std::string& text, bool starred) {
    for (auto it = name_scope_.rbegin(); it != name_scope_.rend(); ++it) {
      if (it->first != text) continue;
      if (!starred) return it->second;
      if (it->second.kind == NameKind::Variable)
        err("'" + text + "' is a variable; '*' applies to channel locations");
      return shared(it->second.sym);
    }
    return starred ? shared(intern(text)) : linear(intern(text));
  }

  bool pvar_in_scope(const std::string& n) const {
    for (const auto& s : pvar_scope_)
      if (s == n) return true;
    return false;
  }

  PP parse_process() {
    std::vector<PP> parts{parse_choice()};
    while (eat(Tok::Bar)) parts.push_back(parse_choice());
    PP p = parts.back();
    for (size_t i = parts.size(); i-- > 1;) p = p_par(parts[i - 1], p);
    return p;
  }

  PP parse_choice() {
    std::vector<PP> parts{parse_prefix()};
    while (eat(Tok::ChoiceOp)) parts.push_back(parse_prefix());
    PP p = parts.back();
    for (size_t i = parts.size(); i-- > 1;) p = p_choice(parts[i - 1], p);
    return p;
  }

  PP parse_prefix() {
    if (eat(Tok::Zero)) return p_idle();
    if (eat(Tok::LParen)) {
      PP p = parse_process();
      expect(Tok::RParen, "')'");
      return p;
    }
    if (at(Tok::Star) || at(Tok::Ident)) {
      if (ident_is("close")) {
        next();
        expect(Tok::LParen, "'('");
        Name u = parse_name();
        expect(Tok::RParen, "')'");
        return p_close(u);
      }
      if (ident_is("open")) return parse_open();
      if (ident_is("rec")) {
        next();
        std::string x = expect_ident("process variable");
        expect(Tok::Dot, "'.'");
        pvar_scope_.push_back(x);
        PP body = parse_prefix();
        pvar_scope_.pop_back();
        return p_rec(pvar(x), body);
      }
      // A name followed by ! or ? is a communication; otherwise it is a
      // process variable or a definition reference.
      bool starred = at(Tok::Star);
      size_t save = pos_;
      if (starred) next();
      std::string name_text = expect_ident("name");
      if (at(Tok::Bang)) {
        Name u = resolve_name(name_text, starred);
        next();
        return parse_send(u);
      }
      if (at(Tok::Query)) {
        Name u = resolve_name(name_text, starred);
        next();
        return parse_receive(u);
      }
      if (starred) {
        pos_ = save;
        err("'*' must be followed by a communication");
      }
      if (pvar_in_scope(name_text)) return p_pvar(pvar(name_text));
      return parse_call(name_text);
    }
    err("expected a process");
  }

  Name parse_name() {
    bool starred = eat(Tok::Star);
    return resolve_name(expect_ident("name"), starred);
  }

  PP parse_open() {
    next();  // 'open'
    expect(Tok::LParen, "'('");
    std::string a = expect_ident("endpoint name");
    expect(Tok::Colon, "':'");
    ET ta = parse_etype();
    if (eat(Tok::Comma)) {
      std::string b = expect_ident("endpoint name");
      expect(Tok::Colon, "':'");
      ET tb = parse_etype();
      expect(Tok::RParen, "')'");
      expect(Tok::Dot, "'.'");
      Sym sa = intern(a), sb = intern(b);
      if (sa == sb) err("open: endpoint names must differ");
      name_scope_.emplace_back(a, linear(sa));
      name_scope_.emplace_back(b, linear(sb));
      PP body = parse_prefix();
      name_scope_.pop_back();
      name_scope_.pop_back();
      return p_open_linear(sa, ta, sb, tb, body);
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Dot, "'.'");
    Sym sa = intern(a);
    name_scope_.emplace_back(a, linear(sa));
    PP body = parse_prefix();
    name_scope_.pop_back();
    return p_open_un(sa, ta, body);
  }

  PP parse_send(Name u) {
    Tag m = tag(expect_ident("message tag"));
    std::vector<ET> tyargs;
    if (eat(Tok::LAngle)) {
      do {
        tyargs.push_back(parse_etype());
      } while (eat(Tok::Comma));
      expect(Tok::RAngle, "'>'");
    }
    std::vector<Name> args;
    if (eat(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        do {
          args.push_back(parse_name());
        } while (eat(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Dot, "'.'");
    PP cont = parse_prefix();
    return p_send(u, m, std::move(tyargs), std::move(args), cont);
  }

  PP parse_receive(Name u) {
    std::vector<RBranch> branches;
    if (eat(Tok::LBrace)) {
      do {
        branches.push_back(parse_rbranch(/*braced=*/true));
      } while (eat(Tok::Comma));
      expect(Tok::RBrace, "'}'");
    } else {
      branches.push_back(parse_rbranch(/*braced=*/false));
    }
    try {
      return p_receive(u, std::move(branches));
    } catch (const ProcSyntaxError& e) {
      err(e.what());
    }
  }

  RBranch parse_rbranch(bool braced) {
    RBranch b;
    b.tag = tag(expect_ident("message tag"));
    size_t ty_depth = tyvar_scope_.size(), name_depth = name_scope_.size();
    if (eat(Tok::LAngle)) {
      do {
        std::string v = expect_ident("type parameter");
        b.typarams.push_back(tv(v));
        tyvar_scope_.push_back(v);
      } while (eat(Tok::Comma));
      expect(Tok::RAngle, "'>'");
    }
    if (eat(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        do {
          std::string x = expect_ident("parameter");
          expect(Tok::Colon, "':'");
          Type t = parse_qualified();
          Sym sx = intern(x);
          b.params.push_back(RParam{sx, t});
          name_scope_.emplace_back(x, variable(sx));
        } while (eat(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Dot, "'.'");
    b.body = braced ? parse_process() : parse_prefix();
    tyvar_scope_.resize(ty_depth);
    name_scope_.resize(name_depth);
    return b;
  }

  PP parse_call(const std::string& name) {
    std::vector<ET> tyargs;
    if (eat(Tok::LAngle)) {
      do {
        tyargs.push_back(parse_etype());
      } while (eat(Tok::Comma));
      expect(Tok::RAngle, "'>'");
    }
    std::vector<Name> args;
    if (eat(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        do {
          args.push_back(parse_name());
        } while (eat(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
    }
    return p_call(name, std::move(tyargs), std::move(args));
  }

  // ---- top-level items ----

  void parse_typedef(SourceProgram& prog) {
    typedefs_ = &prog.typedefs;
    TypeDef def;
    def.name = expect_ident("type name");
    if (find_typedef(def.name)) err("duplicate type definition '" + def.name + "'");
    size_t depth = tyvar_scope_.size();
    if (eat(Tok::LAngle)) {
      do {
        std::string v = expect_ident("type parameter");
        def.params.push_back(intern(v));
        tyvar_scope_.push_back(v);
      } while (eat(Tok::Comma));
      expect(Tok::RAngle, "'>'");
    }
    expect(Tok::Eq, "'='");
    def.body = parse_etype();
    tyvar_scope_.resize(depth);
    prog.typedefs.push_back(std::move(def));
  }

  void parse_procdef(SourceProgram& prog) {
    typedefs_ = &prog.typedefs;
    ProcDef def;
    def.name = expect_ident("definition name");
    if (prog.find_def(def.name)) err("duplicate process definition '" + def.name + "'");
    size_t ty_depth = tyvar_scope_.size(), name_depth = name_scope_.size();
    if (eat(Tok::LAngle)) {
      do {
        std::string v = expect_ident("type parameter");
        def.typarams.push_back(intern(v));
        tyvar_scope_.push_back(v);
      } while (eat(Tok::Comma));
      expect(Tok::RAngle, "'>'");
    }
    if (eat(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        do {
          std::string x = expect_ident("parameter");
          expect(Tok::Colon, "':'");
          Type t = parse_qualified();
          Sym sx = intern(x);
          def.params.emplace_back(sx, t);
          name_scope_.emplace_back(x, variable(sx));
        } while (eat(Tok::Comma));
      }
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Eq, "'='");
    def.body = parse_process();
    tyvar_scope_.resize(ty_depth);
    name_scope_.resize(name_depth);
    prog.procdefs.push_back(std::move(def));
  }
};

}  // namespace detail

inline SourceProgram parse_program(std::string_view src) {
  detail::Parser p(src);
  return p.parse_program();
}

inline ET parse_etype(std::string_view src) {
  detail::Parser p(src);
  return p.parse_etype_expr();
}

inline Type parse_type(std::string_view src) {
  detail::Parser p(src);
  return p.parse_type_expr();
}

inline PP parse_process(std::string_view src) {
  detail::Parser p(src);
  return p.parse_process_expr();
}

// Resolves a definition body (folding references into rec-terms) so it can
// be checked against its declared parameter types.
inline PP resolve_def(const SourceProgram& prog, const ProcDef& def) {
  detail::Parser p("");
  return p.resolve_def_body(prog, def);
}

}  // namespace copyless

#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// Interned identifiers. Named symbols come from source text and are
// deduplicated; fresh symbols are minted for binders so that every binder
// in every constructed term has a globally unique identity. Substitution
// relies on this: it never needs to rename on the fly because a binder id
// can never collide with a free id that predates it.

namespace copyless {

using Sym = std::uint32_t;

class SymbolTable {
 public:
  Sym intern(std::string_view name) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = interned_.find(std::string(name));
    if (it != interned_.end()) return it->second;
    Sym id = static_cast<Sym>(entries_.size());
    entries_.push_back(Entry{std::string(name), false});
    interned_.emplace(std::string(name), id);
    return id;
  }

  Sym fresh(std::string_view base) {
    std::lock_guard<std::mutex> lock(mutex_);
    Sym id = static_cast<Sym>(entries_.size());
    entries_.push_back(Entry{std::string(base), true});
    return id;
  }

  const std::string& name(Sym s) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_[s].base;
  }

  bool is_fresh(Sym s) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_[s].fresh;
  }

  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }

 private:
  struct Entry {
    std::string base;
    bool fresh;
  };
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, Sym> interned_;
};

inline Sym intern(std::string_view name) { return SymbolTable::instance().intern(name); }
inline Sym fresh_sym(std::string_view base) { return SymbolTable::instance().fresh(base); }
inline const std::string& sym_name(Sym s) { return SymbolTable::instance().name(s); }
inline bool sym_is_fresh(Sym s) { return SymbolTable::instance().is_fresh(s); }

struct TypeVar {
  Sym sym{};
  friend auto operator<=>(const TypeVar&, const TypeVar&) = default;
};

struct Tag {
  Sym sym{};
  friend auto operator<=>(const Tag&, const Tag&) = default;
};

struct PVar {
  Sym sym{};
  friend auto operator<=>(const PVar&, const PVar&) = default;
};

// Names are the operands of processes: linear pointers a, unrestricted
// pointers *a (sharing the location symbol of their linear twin), and
// program variables x. The three sorts never mix.
enum class NameKind : std::uint8_t { Linear, Shared, Variable };

struct Name {
  NameKind kind{NameKind::Linear};
  Sym sym{};
  friend auto operator<=>(const Name&, const Name&) = default;
};

inline Name linear(Sym s) { return Name{NameKind::Linear, s}; }
inline Name shared(Sym s) { return Name{NameKind::Shared, s}; }
inline Name variable(Sym s) { return Name{NameKind::Variable, s}; }

inline TypeVar tv(std::string_view n) { return TypeVar{intern(n)}; }
inline Tag tag(std::string_view n) { return Tag{intern(n)}; }
inline PVar pvar(std::string_view n) { return PVar{intern(n)}; }

}  // namespace copyless

template <>
struct std::hash<copyless::TypeVar> {
  size_t operator()(const copyless::TypeVar& v) const noexcept { return std::hash<copyless::Sym>{}(v.sym); }
};
template <>
struct std::hash<copyless::Name> {
  size_t operator()(const copyless::Name& n) const noexcept {
    return std::hash<copyless::Sym>{}(n.sym) * 3u + static_cast<size_t>(n.kind);
  }
};

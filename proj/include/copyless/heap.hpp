#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "copyless/process.hpp"

namespace copyless {

// A queued message: tag, the endpoint types instantiating the type
// parameters, and the transferred values.
struct Message {
  Tag tag{};
  std::vector<ET> tyargs;
  std::vector<Name> args;  // Linear or Shared names
};

struct Endpoint {
  Sym peer{};
  std::vector<Message> queue;  // FIFO, front at index 0
};

// Insertion-ordered map from locations to endpoints. Allocation order is
// part of the observable behavior (trace summaries print it), so a plain
// sorted map will not do.
class Heap {
 public:
  bool contains(Sym loc) const { return find(loc) != nullptr; }

  const Endpoint* find(Sym loc) const {
    for (const auto& e : entries_)
      if (e.first == loc) return &e.second;
    return nullptr;
  }

  Endpoint* find(Sym loc) {
    for (auto& e : entries_)
      if (e.first == loc) return &e.second;
    return nullptr;
  }

  const Endpoint& at(Sym loc) const {
    const Endpoint* e = find(loc);
    if (!e) throw std::out_of_range("heap: no endpoint at '" + sym_name(loc) + "'");
    return *e;
  }

  void allocate(Sym loc, Endpoint ep) {
    if (contains(loc)) throw std::invalid_argument("heap: location '" + sym_name(loc) + "' already allocated");
    entries_.emplace_back(loc, std::move(ep));
  }

  std::vector<Sym> dom() const {
    std::vector<Sym> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
  }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

 private:
  std::vector<std::pair<Sym, Endpoint>> entries_;
};

}  // namespace copyless

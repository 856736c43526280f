#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "copyless/heap.hpp"
#include "copyless/printer.hpp"
#include "copyless/process.hpp"

namespace copyless {

// A configuration pairs a heap with a process kept in congruence-normal
// form: parallel compositions are flattened into a multiset of leaves,
// idle units dropped, leaves ordered by a stable structural key.
struct Configuration {
  Heap heap;
  std::vector<PP> leaves;
  std::uint32_t next_loc = 0;  // allocation counter, scoped to the run
};

// ---------------------------------------------------------------------------
// Structural congruence normal form.

namespace detail {

inline void flatten_par(const PP& p, std::vector<PP>& out) {
  if (p->kind == PKind::Par) {
    flatten_par(p->left, out);
    flatten_par(p->right, out);
  } else if (p->kind != PKind::Idle) {
    out.push_back(p);
  }
}

inline void sort_leaves(std::vector<PP>& leaves) {
  std::stable_sort(leaves.begin(), leaves.end(),
                   [](const PP& a, const PP& b) { return canon_key(a) < canon_key(b); });
}

}  // namespace detail

inline PP normalize(const PP& p) {
  std::vector<PP> leaves;
  detail::flatten_par(p, leaves);
  detail::sort_leaves(leaves);
  if (leaves.empty()) return p_idle();
  PP acc = leaves.back();
  for (size_t i = leaves.size() - 1; i-- > 0;) acc = p_par(leaves[i], acc);
  return acc;
}

inline Configuration make_config(const PP& p, Heap heap = {}) {
  Configuration c;
  c.heap = std::move(heap);
  detail::flatten_par(p, c.leaves);
  detail::sort_leaves(c.leaves);
  return c;
}

inline Configuration normalize(Configuration c) {
  std::vector<PP> flat;
  for (const auto& leaf : c.leaves) detail::flatten_par(leaf, flat);
  detail::sort_leaves(flat);
  c.leaves = std::move(flat);
  return c;
}

inline PP process_of(const Configuration& c) {
  if (c.leaves.empty()) return p_idle();
  PP acc = c.leaves.back();
  for (size_t i = c.leaves.size(); i-- > 1;) acc = p_par(c.leaves[i - 1], acc);
  return acc;
}

// ---------------------------------------------------------------------------
// Reachability: the closure of "appears as a value in the queue of".
// Nothing is reachable from an unrestricted pointer, and the result only
// ever contains linear locations.

inline std::set<Sym> reachable(const std::set<Name>& roots, const Heap& heap) {
  std::set<Sym> out;
  std::vector<Sym> work;
  for (const auto& n : roots)
    if (n.kind == NameKind::Linear && out.insert(n.sym).second) work.push_back(n.sym);
  while (!work.empty()) {
    Sym cur = work.back();
    work.pop_back();
    const Endpoint* ep = heap.find(cur);
    if (!ep) continue;
    for (const auto& msg : ep->queue)
      for (const auto& v : msg.args)
        if (v.kind == NameKind::Linear && out.insert(v.sym).second) work.push_back(v.sym);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Redex enumeration.

enum class RuleKind : std::uint8_t {
  OpenLinear,
  OpenUn,
  ChoiceLeft,
  ChoiceRight,
  SendLinear,
  SendUn,
  Receive,
  Rec,
};

inline const char* rule_name(RuleKind k) {
  switch (k) {
    case RuleKind::OpenLinear: return "R-Open Linear Channel";
    case RuleKind::OpenUn: return "R-Open Unrestricted Channel";
    case RuleKind::ChoiceLeft: return "R-Choice Left";
    case RuleKind::ChoiceRight: return "R-Choice Right";
    case RuleKind::SendLinear: return "R-Send Linear";
    case RuleKind::SendUn: return "R-Send Unrestricted";
    case RuleKind::Receive: return "R-Receive";
    case RuleKind::Rec: return "R-Rec";
  }
  return "?";
}

struct Redex {
  size_t leaf{};
  RuleKind kind{};
  size_t branch{};  // receive: selected branch index
};

struct RedexMarker {
  enum Kind { Fault, CommError } kind;
  size_t leaf;
  std::string detail;
};

struct RedexSet {
  std::vector<Redex> enabled;
  std::vector<RedexMarker> markers;
};

inline RedexSet redexes(const Configuration& c) {
  RedexSet out;
  for (size_t i = 0; i < c.leaves.size(); ++i) {
    const PP& p = c.leaves[i];
    switch (p->kind) {
      case PKind::OpenLinear:
        out.enabled.push_back({i, RuleKind::OpenLinear, 0});
        break;
      case PKind::OpenUn:
        out.enabled.push_back({i, RuleKind::OpenUn, 0});
        break;
      case PKind::Choice:
        out.enabled.push_back({i, RuleKind::ChoiceLeft, 0});
        out.enabled.push_back({i, RuleKind::ChoiceRight, 0});
        break;
      case PKind::Rec:
        out.enabled.push_back({i, RuleKind::Rec, 0});
        break;
      case PKind::Send: {
        const Name& u = p->subject;
        if (u.kind == NameKind::Linear) {
          const Endpoint* ep = c.heap.find(u.sym);
          if (!ep) {
            out.markers.push_back({RedexMarker::Fault, i,
                                   "send on unallocated endpoint '" + sym_name(u.sym) + "'"});
            break;
          }
          if (ep->peer != u.sym && c.heap.contains(ep->peer))
            out.enabled.push_back({i, RuleKind::SendLinear, 0});
          // A linear send on a self-looped endpoint has no rule: stuck.
        } else if (u.kind == NameKind::Shared) {
          const Endpoint* ep = c.heap.find(u.sym);
          if (ep && ep->peer == u.sym) out.enabled.push_back({i, RuleKind::SendUn, 0});
          // Otherwise no rule applies; the leaf is stuck on the shared send.
        }
        break;
      }
      case PKind::Receive: {
        const Name& u = p->subject;
        if (u.kind != NameKind::Linear) break;  // no rule
        const Endpoint* ep = c.heap.find(u.sym);
        if (!ep) {
          out.markers.push_back({RedexMarker::Fault, i,
                                 "receive on unallocated endpoint '" + sym_name(u.sym) + "'"});
          break;
        }
        if (ep->queue.empty()) break;  // premise unmet, no redex and no error
        const Message& head = ep->queue.front();
        const RBranch* match = nullptr;
        size_t idx = 0;
        for (size_t j = 0; j < p->branches.size(); ++j)
          if (p->branches[j].tag == head.tag) {
            match = &p->branches[j];
            idx = j;
            break;
          }
        if (!match) {
          out.markers.push_back({RedexMarker::CommError, i,
                                 "unexpected message '" + sym_name(head.tag.sym) + "' on '" +
                                     sym_name(u.sym) + "'"});
          break;
        }
        if (match->typarams.size() != head.tyargs.size() ||
            match->params.size() != head.args.size()) {
          out.markers.push_back({RedexMarker::CommError, i,
                                 "message '" + sym_name(head.tag.sym) + "' arity mismatch on '" +
                                     sym_name(u.sym) + "'"});
          break;
        }
        out.enabled.push_back({i, RuleKind::Receive, idx});
        break;
      }
      default:
        break;  // Idle (absent post-normalize), Close, PVarRef: no redex
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// One reduction step.

namespace detail {

inline Sym alloc_loc(Configuration& c, Sym base) {
  // Deterministic per-run naming; interning makes replays byte-stable.
  Sym s = intern(sym_name(base) + "#" + std::to_string(c.next_loc++));
  return s;
}

// The engine keeps leaves in insertion order: it is deterministic (a pure
// function of the applied redexes) and avoids re-keying every leaf on every
// step. Canonical ordering is only needed for deduplication.
inline void replace_leaf(Configuration& c, size_t leaf, const PP& next) {
  std::vector<PP> flat;
  for (size_t i = 0; i < c.leaves.size(); ++i) {
    if (i == leaf)
      flatten_par(next, flat);
    else
      flat.push_back(c.leaves[i]);
  }
  c.leaves = std::move(flat);
}

}  // namespace detail

inline Configuration step(const Configuration& c, const Redex& r) {
  Configuration next = c;
  const PP& p = c.leaves.at(r.leaf);
  switch (r.kind) {
    case RuleKind::OpenLinear: {
      Sym la = detail::alloc_loc(next, p->loc_a);
      Sym lb = detail::alloc_loc(next, p->loc_b);
      next.heap.allocate(la, Endpoint{lb, {}});
      next.heap.allocate(lb, Endpoint{la, {}});
      PP body = rename_loc(rename_loc(p->left, p->loc_a, la, true), p->loc_b, lb, true);
      detail::replace_leaf(next, r.leaf, body);
      return next;
    }
    case RuleKind::OpenUn: {
      Sym la = detail::alloc_loc(next, p->loc_a);
      next.heap.allocate(la, Endpoint{la, {}});
      PP body = rename_loc(p->left, p->loc_a, la, false);
      detail::replace_leaf(next, r.leaf, body);
      return next;
    }
    case RuleKind::ChoiceLeft:
      detail::replace_leaf(next, r.leaf, p->left);
      return next;
    case RuleKind::ChoiceRight:
      detail::replace_leaf(next, r.leaf, p->right);
      return next;
    case RuleKind::SendLinear: {
      Endpoint* self = next.heap.find(p->subject.sym);
      Endpoint* peer = next.heap.find(self->peer);
      peer->queue.push_back(Message{p->tag, p->tyargs, p->args});
      detail::replace_leaf(next, r.leaf, p->left);
      return next;
    }
    case RuleKind::SendUn: {
      Endpoint* self = next.heap.find(p->subject.sym);
      self->queue.push_back(Message{p->tag, p->tyargs, p->args});
      detail::replace_leaf(next, r.leaf, p->left);
      return next;
    }
    case RuleKind::Receive: {
      Endpoint* self = next.heap.find(p->subject.sym);
      Message msg = self->queue.front();
      self->queue.erase(self->queue.begin());
      const RBranch& b = p->branches.at(r.branch);
      std::map<TypeVar, ET> tysub;
      for (size_t i = 0; i < b.typarams.size(); ++i) tysub.emplace(b.typarams[i], msg.tyargs[i]);
      PP body = subst_tyvar_many(b.body, tysub);
      for (size_t i = 0; i < b.params.size(); ++i) body = subst_value(body, msg.args[i], b.params[i].var);
      detail::replace_leaf(next, r.leaf, body);
      return next;
    }
    case RuleKind::Rec: {
      PP body = subst_pvar(p->left, p, p->pv);
      detail::replace_leaf(next, r.leaf, body);
      return next;
    }
  }
  return next;
}

// ---------------------------------------------------------------------------
// The well-behavedness monitor.

struct MonitorVerdict {
  enum Kind { OK, StuckOK, Leak, IsolationViolation, Fault, CommError } kind = OK;
  std::vector<Sym> locs;       // leak witnesses / shared location
  std::string detail;

  bool is_violation() const { return kind != OK && kind != StuckOK; }

  std::string str() const {
    auto locs_str = [&] {
      std::string s = "{";
      for (size_t i = 0; i < locs.size(); ++i) {
        if (i) s += ", ";
        s += sym_name(locs[i]);
      }
      return s + "}";
    };
    switch (kind) {
      case OK: return "OK";
      case StuckOK: return "StuckOK";
      case Leak: return "Leak(" + locs_str() + ")";
      case IsolationViolation: return "IsolationViolation(" + locs_str() + (detail.empty() ? "" : "; " + detail) + ")";
      case Fault: return "Fault(" + detail + ")";
      case CommError: return "CommError(" + detail + ")";
    }
    return "?";
  }
};

inline MonitorVerdict monitor(const Configuration& c) {
  // Condition (1): the heap domain is exactly what the process reaches.
  std::set<Name> all_roots;
  std::vector<std::set<Name>> leaf_fn;
  leaf_fn.reserve(c.leaves.size());
  for (const auto& leaf : c.leaves) {
    auto f = fn(leaf);
    all_roots.insert(f.begin(), f.end());
    leaf_fn.push_back(std::move(f));
  }
  std::set<Sym> reach = reachable(all_roots, c.heap);
  std::vector<Sym> excess;
  for (const auto& loc : reach)
    if (!c.heap.contains(loc)) excess.push_back(loc);
  if (!excess.empty()) {
    MonitorVerdict v;
    v.kind = MonitorVerdict::Fault;
    v.locs = excess;
    v.detail = "pointer to unallocated endpoint '" + sym_name(excess.front()) + "'";
    return v;
  }
  std::vector<Sym> leaked;
  for (const auto& loc : c.heap.dom())
    if (!reach.count(loc)) leaked.push_back(loc);
  if (!leaked.empty()) {
    MonitorVerdict v;
    v.kind = MonitorVerdict::Leak;
    v.locs = leaked;
    return v;
  }

  // Condition (2): parallel leaves reach pairwise disjoint heap regions.
  std::vector<std::set<Sym>> leaf_reach;
  leaf_reach.reserve(c.leaves.size());
  for (const auto& f : leaf_fn) leaf_reach.push_back(reachable(f, c.heap));
  for (size_t i = 0; i < c.leaves.size(); ++i)
    for (size_t j = i + 1; j < c.leaves.size(); ++j)
      for (const auto& loc : leaf_reach[i])
        if (leaf_reach[j].count(loc)) {
          MonitorVerdict v;
          v.kind = MonitorVerdict::IsolationViolation;
          v.locs = {loc};
          v.detail = "shared by '" + render(c.leaves[i]) + "' and '" + render(c.leaves[j]) + "'";
          return v;
        }

  // Condition (3): a leaf with no applicable rule must be a terminated
  // close or a receive waiting on an allocated, empty endpoint.
  RedexSet rs = redexes(c);
  for (const auto& m : rs.markers) {
    MonitorVerdict v;
    v.kind = m.kind == RedexMarker::Fault ? MonitorVerdict::Fault : MonitorVerdict::CommError;
    v.detail = m.detail;
    return v;
  }
  std::vector<bool> has_redex(c.leaves.size(), false);
  for (const auto& r : rs.enabled) has_redex[r.leaf] = true;
  bool any_receive_wait = false;
  for (size_t i = 0; i < c.leaves.size(); ++i) {
    if (has_redex[i]) continue;
    const PP& leaf = c.leaves[i];
    if (leaf->kind == PKind::Close && leaf->subject.kind == NameKind::Linear) {
      const Endpoint* ep = c.heap.find(leaf->subject.sym);
      if (ep && ep->queue.empty()) continue;
      MonitorVerdict v;
      v.kind = MonitorVerdict::CommError;
      v.detail = ep ? "orphan messages on closed endpoint '" + sym_name(leaf->subject.sym) + "'"
                    : "close of unallocated endpoint '" + sym_name(leaf->subject.sym) + "'";
      return v;
    }
    if (leaf->kind == PKind::Receive && leaf->subject.kind == NameKind::Linear) {
      const Endpoint* ep = c.heap.find(leaf->subject.sym);
      if (ep && ep->queue.empty()) {
        any_receive_wait = true;
        continue;
      }
      MonitorVerdict v;
      v.kind = MonitorVerdict::CommError;
      v.detail = "receive stuck on '" + sym_name(leaf->subject.sym) + "'";
      return v;
    }
    MonitorVerdict v;
    v.kind = MonitorVerdict::CommError;
    v.detail = "stuck leaf '" + render(leaf) + "'";
    return v;
  }

  MonitorVerdict v;
  v.kind = (rs.enabled.empty() && any_receive_wait) ? MonitorVerdict::StuckOK : MonitorVerdict::OK;
  return v;
}

// ---------------------------------------------------------------------------
// Scheduler, traces, bounded exhaustive exploration.

struct TraceEvent {
  size_t step{};
  std::string rule;
  std::string redex;
  std::vector<std::string> heap_dom;
  size_t redex_index{};  // index into redexes(c).enabled, enough to replay
};

struct RunResult {
  Configuration final_config;
  std::vector<TraceEvent> trace;
  MonitorVerdict verdict;
  size_t steps = 0;
};

namespace detail {

inline TraceEvent make_event(size_t step, const Configuration& before, const Redex& r,
                             size_t redex_index, const Configuration& after) {
  TraceEvent ev;
  ev.step = step;
  ev.rule = rule_name(r.kind);
  ev.redex = render(before.leaves.at(r.leaf));
  for (const auto& loc : after.heap.dom()) ev.heap_dom.push_back(sym_name(loc));
  ev.redex_index = redex_index;
  return ev;
}

}  // namespace detail

inline RunResult run(Configuration c0, std::uint64_t seed, size_t max_steps) {
  RunResult out;
  Configuration c = normalize(std::move(c0));
  std::mt19937_64 rng(seed);
  out.verdict = monitor(c);
  while (!out.verdict.is_violation() && out.steps < max_steps) {
    RedexSet rs = redexes(c);
    if (rs.enabled.empty()) break;
    size_t idx = static_cast<size_t>(rng() % rs.enabled.size());
    Configuration next = step(c, rs.enabled[idx]);
    out.trace.push_back(detail::make_event(out.steps + 1, c, rs.enabled[idx], idx, next));
    c = std::move(next);
    ++out.steps;
    out.verdict = monitor(c);
  }
  out.final_config = std::move(c);
  return out;
}

// Replays recorded choices; the result matches the original run exactly.
inline Configuration replay(Configuration c0, const std::vector<TraceEvent>& trace) {
  Configuration c = normalize(std::move(c0));
  for (const auto& ev : trace) {
    RedexSet rs = redexes(c);
    c = step(c, rs.enabled.at(ev.redex_index));
  }
  return c;
}

// Canonical key for deduplication: leaves are sorted structurally and all
// locations relabelled in order of first appearance, so configurations that
// differ only in allocation naming or leaf order collapse to one key.
inline std::string canonical_config_key(const Configuration& c) {
  std::vector<PP> leaves = c.leaves;
  detail::sort_leaves(leaves);
  std::map<Sym, size_t> relabel;
  auto label = [&](Sym s) {
    auto it = relabel.find(s);
    if (it == relabel.end()) it = relabel.emplace(s, relabel.size()).first;
    return "%" + std::to_string(it->second);
  };
  for (const auto& leaf : leaves)
    for (const auto& n : fn(leaf))
      if (n.kind != NameKind::Variable) label(n.sym);
  auto relabelled = [&](PP leaf) {
    for (const auto& [from, idx] : relabel)
      leaf = rename_loc(leaf, from, intern("%" + std::to_string(idx)), false);
    return leaf;
  };
  std::vector<std::string> keys;
  keys.reserve(leaves.size());
  for (const auto& leaf : leaves) keys.push_back(canon_key(relabelled(leaf)));
  std::sort(keys.begin(), keys.end());
  std::string key;
  for (const auto& k : keys) {
    key += k;
    key += ';';
  }
  key += '|';
  // Heap entries: labelled ones in label order, unreachable leftovers after.
  std::vector<Sym> order = c.heap.dom();
  std::sort(order.begin(), order.end(), [&](Sym a, Sym b) {
    size_t ia = relabel.count(a) ? relabel.at(a) : SIZE_MAX;
    size_t ib = relabel.count(b) ? relabel.at(b) : SIZE_MAX;
    if (ia != ib) return ia < ib;
    return a < b;
  });
  for (const auto& loc : order) {
    const Endpoint& ep = c.heap.at(loc);
    key += label(loc);
    key += "->[";
    key += label(ep.peer);
    key += ':';
    for (const auto& m : ep.queue) {
      key += sym_name(m.tag.sym);
      key += '<';
      for (const auto& t : m.tyargs) key += canon_key(t) + ",";
      key += ">(";
      for (const auto& v : m.args) {
        key += v.kind == NameKind::Shared ? "*" : "";
        key += label(v.sym);
        key += ',';
      }
      key += ")::";
    }
    key += "];";
  }
  return key;
}

struct ExploreViolation {
  MonitorVerdict verdict;
  std::vector<size_t> choices;  // redex indices from the initial configuration
};

struct ExploreSummary {
  size_t configurations = 0;
  size_t transitions = 0;
  size_t depth_reached = 0;
  bool truncated = false;
  std::vector<ExploreViolation> violations;
};

inline ExploreSummary explore(const Configuration& c0, size_t depth, size_t max_configs = 200000) {
  ExploreSummary out;
  struct Item {
    Configuration config;
    std::vector<size_t> choices;
  };
  std::deque<Item> frontier;
  std::unordered_set<std::string> seen;
  Configuration start = normalize(c0);
  seen.insert(canonical_config_key(start));
  frontier.push_back({std::move(start), {}});
  while (!frontier.empty()) {
    Item item = std::move(frontier.front());
    frontier.pop_front();
    ++out.configurations;
    out.depth_reached = std::max(out.depth_reached, item.choices.size());
    MonitorVerdict v = monitor(item.config);
    if (v.is_violation()) {
      out.violations.push_back({v, item.choices});
      continue;  // violating configurations are terminal, like in run()
    }
    if (item.choices.size() >= depth) continue;
    RedexSet rs = redexes(item.config);
    for (size_t i = 0; i < rs.enabled.size(); ++i) {
      if (seen.size() >= max_configs) {
        out.truncated = true;
        return out;
      }
      Configuration next = step(item.config, rs.enabled[i]);
      ++out.transitions;
      std::string key = canonical_config_key(next);
      if (seen.insert(std::move(key)).second) {
        auto choices = item.choices;
        choices.push_back(i);
        frontier.push_back({std::move(next), std::move(choices)});
      }
    }
  }
  return out;
}

}  // namespace copyless

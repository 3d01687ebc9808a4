#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "opack/design.hpp"
#include "opack/finite_system.hpp"

namespace opack {

// Verdict of one opacity check. A negative verdict carries a witness run of
// the system (state indices) whose observations admit no qualifying
// alternative; for the infinite-step notion, witness_k marks the revealed
// secret step.
struct OpacityVerdict {
  Notion notion = Notion::Init;
  double delta = 0;
  bool opaque = true;
  bool trivially_violated = false;  // X0 contained in X_S
  std::vector<int> witness;
  int witness_k = -1;
  std::size_t pairs_explored = 0;
};

namespace detail {

// Interns belief sets (sorted state-index vectors) so reachability works on
// small integer pairs.
class BeliefPool {
 public:
  int intern(std::vector<int> b) {
    auto [it, fresh] = ids_.try_emplace(std::move(b), static_cast<int>(ids_.size()));
    if (fresh) order_.push_back(&it->first);
    return it->second;
  }
  const std::vector<int>& get(int id) const { return *order_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return ids_.size(); }

 private:
  std::map<std::vector<int>, int> ids_;
  std::vector<const std::vector<int>*> order_;
};

inline bool outputs_close(const FiniteSystem& t, int a, int b, double delta) {
  return sup_dist(t.outputs[static_cast<std::size_t>(a)], t.outputs[static_cast<std::size_t>(b)]) <=
         delta + abs_tol(delta);
}

// One belief step: alternatives reachable from b whose outputs stay
// delta-close to the observed successor state.
inline std::vector<int> advance_belief(const FiniteSystem& t,
                                       const std::vector<std::vector<int>>& erased,
                                       const std::vector<int>& b, int observed, double delta) {
  std::set<int> next;
  for (int x : b)
    for (int d : erased[static_cast<std::size_t>(x)])
      if (outputs_close(t, observed, d, delta)) next.insert(d);
  return {next.begin(), next.end()};
}

struct SearchNode {
  int state;
  int belief;
  int parent;  // index into the node arena, -1 for roots
};

inline std::vector<int> unwind(const std::vector<SearchNode>& arena, int node) {
  std::vector<int> run;
  for (int i = node; i != -1; i = arena[static_cast<std::size_t>(i)].parent)
    run.push_back(arena[static_cast<std::size_t>(i)].state);
  std::reverse(run.begin(), run.end());
  return run;
}

}  // namespace detail

// delta-approximate initial-state opacity: every run from a secret initial
// state must be matched, step by step within delta, by some run from a
// non-secret initial state.
inline OpacityVerdict verify_init_opacity(const FiniteSystem& t, double delta) {
  if (t.has_internal()) throw Error("verify: internal alphabet must be empty");
  OpacityVerdict v;
  v.notion = Notion::Init;
  v.delta = delta;

  std::vector<int> secret_inits, alt_inits;
  for (int s : t.initial_states())
    (t.secret[static_cast<std::size_t>(s)] ? secret_inits : alt_inits).push_back(s);
  if (!secret_inits.empty() && alt_inits.empty()) {
    v.opaque = false;
    v.trivially_violated = true;
    v.witness = {secret_inits.front()};
    return v;
  }

  std::vector<std::vector<int>> erased(static_cast<std::size_t>(t.state_count()));
  for (int s = 0; s < t.state_count(); ++s) erased[static_cast<std::size_t>(s)] = t.erased_successors(s);

  detail::BeliefPool pool;
  std::vector<detail::SearchNode> arena;
  std::deque<int> queue;
  std::set<std::pair<int, int>> visited;

  for (int x0 : secret_inits) {
    std::vector<int> b0;
    for (int a : alt_inits)
      if (detail::outputs_close(t, x0, a, delta)) b0.push_back(a);
    if (b0.empty()) {
      v.opaque = false;
      v.witness = {x0};
      return v;
    }
    const int bid = pool.intern(std::move(b0));
    if (visited.insert({x0, bid}).second) {
      arena.push_back({x0, bid, -1});
      queue.push_back(static_cast<int>(arena.size()) - 1);
    }
  }
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop_front();
    const auto [x, bid, parent] = arena[static_cast<std::size_t>(node)];
    (void)parent;
    for (int xd : erased[static_cast<std::size_t>(x)]) {
      auto bd = detail::advance_belief(t, erased, pool.get(bid), xd, delta);
      if (bd.empty()) {
        v.opaque = false;
        v.witness = detail::unwind(arena, node);
        v.witness.push_back(xd);
        v.pairs_explored = visited.size();
        return v;
      }
      const int bdid = pool.intern(std::move(bd));
      if (visited.insert({xd, bdid}).second) {
        arena.push_back({xd, bdid, node});
        queue.push_back(static_cast<int>(arena.size()) - 1);
      }
    }
  }
  v.pairs_explored = visited.size();
  return v;
}

// delta-approximate current-state opacity: no observation may pin the
// current state inside the secret set.
inline OpacityVerdict verify_current_opacity(const FiniteSystem& t, double delta) {
  if (t.has_internal()) throw Error("verify: internal alphabet must be empty");
  OpacityVerdict v;
  v.notion = Notion::Current;
  v.delta = delta;

  const auto inits = t.initial_states();
  bool any_nonsecret_init = false;
  for (int s : inits) any_nonsecret_init = any_nonsecret_init || !t.secret[static_cast<std::size_t>(s)];
  if (!inits.empty() && !any_nonsecret_init) {
    v.opaque = false;
    v.trivially_violated = true;
    v.witness = {inits.front()};
    return v;
  }

  std::vector<std::vector<int>> erased(static_cast<std::size_t>(t.state_count()));
  for (int s = 0; s < t.state_count(); ++s) erased[static_cast<std::size_t>(s)] = t.erased_successors(s);

  auto exposed = [&](int x, const std::vector<int>& b) {
    if (!t.secret[static_cast<std::size_t>(x)]) return false;
    for (int a : b)
      if (!t.secret[static_cast<std::size_t>(a)]) return false;
    return true;
  };

  detail::BeliefPool pool;
  std::vector<detail::SearchNode> arena;
  std::deque<int> queue;
  std::set<std::pair<int, int>> visited;

  for (int x0 : inits) {
    std::vector<int> b0;
    for (int a : inits)
      if (detail::outputs_close(t, x0, a, delta)) b0.push_back(a);
    const int bid = pool.intern(b0);
    if (exposed(x0, b0)) {
      v.opaque = false;
      v.witness = {x0};
      return v;
    }
    if (visited.insert({x0, bid}).second) {
      arena.push_back({x0, bid, -1});
      queue.push_back(static_cast<int>(arena.size()) - 1);
    }
  }
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop_front();
    const auto [x, bid, parent] = arena[static_cast<std::size_t>(node)];
    (void)parent;
    for (int xd : erased[static_cast<std::size_t>(x)]) {
      auto bd = detail::advance_belief(t, erased, pool.get(bid), xd, delta);
      const bool bad = exposed(xd, bd);
      const int bdid = pool.intern(std::move(bd));
      if (bad) {
        v.opaque = false;
        v.witness = detail::unwind(arena, node);
        v.witness.push_back(xd);
        v.pairs_explored = visited.size();
        return v;
      }
      if (visited.insert({xd, bdid}).second) {
        arena.push_back({xd, bdid, node});
        queue.push_back(static_cast<int>(arena.size()) - 1);
      }
    }
  }
  v.pairs_explored = visited.size();
  return v;
}

// delta-approximate infinite-step opacity: a secret visit at any step k of a
// run must stay deniable under the whole run's observations. Phase one walks
// prefix pairs (state, belief); phase two re-walks suffixes from each flagged
// pair with the belief restricted to non-secret alternatives at step k.
// Phase-two verdicts are memoized on (state, restricted belief).
inline OpacityVerdict verify_infinite_opacity(const FiniteSystem& t, double delta) {
  if (t.has_internal()) throw Error("verify: internal alphabet must be empty");
  OpacityVerdict v;
  v.notion = Notion::Infinite;
  v.delta = delta;

  const auto inits = t.initial_states();
  bool any_nonsecret_init = false;
  for (int s : inits) any_nonsecret_init = any_nonsecret_init || !t.secret[static_cast<std::size_t>(s)];
  if (!inits.empty() && !any_nonsecret_init) {
    v.opaque = false;
    v.trivially_violated = true;
    v.witness = {inits.front()};
    return v;
  }

  std::vector<std::vector<int>> erased(static_cast<std::size_t>(t.state_count()));
  for (int s = 0; s < t.state_count(); ++s) erased[static_cast<std::size_t>(s)] = t.erased_successors(s);

  detail::BeliefPool pool;
  std::map<std::pair<int, int>, std::optional<std::vector<int>>> phase2_memo;

  // Returns the suffix (excluding the flagged state) of a revealing
  // continuation, or nothing when the restricted belief never empties.
  auto phase2 = [&](int x, const std::vector<int>& c0) -> std::optional<std::vector<int>> {
    const int c0id = pool.intern(c0);
    auto memo = phase2_memo.find({x, c0id});
    if (memo != phase2_memo.end()) return memo->second;
    std::optional<std::vector<int>> result;
    if (c0.empty()) {
      result = std::vector<int>{};
    } else {
      std::vector<detail::SearchNode> arena;
      std::deque<int> queue;
      std::set<std::pair<int, int>> visited{{x, c0id}};
      arena.push_back({x, c0id, -1});
      queue.push_back(0);
      while (!queue.empty() && !result) {
        const int node = queue.front();
        queue.pop_front();
        const auto [y, cid, parent] = arena[static_cast<std::size_t>(node)];
        (void)parent;
        for (int yd : erased[static_cast<std::size_t>(y)]) {
          auto cd = detail::advance_belief(t, erased, pool.get(cid), yd, delta);
          if (cd.empty()) {
            auto run = detail::unwind(arena, node);
            run.push_back(yd);
            run.erase(run.begin());  // drop the flagged state itself
            result = std::move(run);
            break;
          }
          const int cdid = pool.intern(std::move(cd));
          if (visited.insert({yd, cdid}).second) {
            arena.push_back({yd, cdid, node});
            queue.push_back(static_cast<int>(arena.size()) - 1);
          }
        }
      }
    }
    phase2_memo[{x, c0id}] = result;
    return result;
  };

  std::vector<detail::SearchNode> arena;
  std::deque<int> queue;
  std::set<std::pair<int, int>> visited;
  std::size_t flagged_checked = 0;

  auto check_flagged = [&](int node) -> bool {
    const auto [x, bid, parent] = arena[static_cast<std::size_t>(node)];
    (void)parent;
    if (!t.secret[static_cast<std::size_t>(x)]) return false;
    std::vector<int> c0;
    for (int a : pool.get(bid))
      if (!t.secret[static_cast<std::size_t>(a)]) c0.push_back(a);
    ++flagged_checked;
    auto suffix = phase2(x, c0);
    if (!suffix) return false;
    v.opaque = false;
    v.witness = detail::unwind(arena, node);
    v.witness_k = static_cast<int>(v.witness.size()) - 1;
    v.witness.insert(v.witness.end(), suffix->begin(), suffix->end());
    return true;
  };

  for (int x0 : inits) {
    std::vector<int> b0;
    for (int a : inits)
      if (detail::outputs_close(t, x0, a, delta)) b0.push_back(a);
    const int bid = pool.intern(std::move(b0));
    if (visited.insert({x0, bid}).second) {
      arena.push_back({x0, bid, -1});
      queue.push_back(static_cast<int>(arena.size()) - 1);
      if (check_flagged(static_cast<int>(arena.size()) - 1)) return v;
    }
  }
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop_front();
    const auto [x, bid, parent] = arena[static_cast<std::size_t>(node)];
    (void)parent;
    for (int xd : erased[static_cast<std::size_t>(x)]) {
      auto bd = detail::advance_belief(t, erased, pool.get(bid), xd, delta);
      const int bdid = pool.intern(std::move(bd));
      if (visited.insert({xd, bdid}).second) {
        arena.push_back({xd, bdid, node});
        queue.push_back(static_cast<int>(arena.size()) - 1);
        if (check_flagged(static_cast<int>(arena.size()) - 1)) return v;
      }
    }
  }
  v.pairs_explored = visited.size() + flagged_checked;
  return v;
}

inline OpacityVerdict verify_opacity(const FiniteSystem& t, Notion notion, double delta) {
  switch (notion) {
    case Notion::Init: return verify_init_opacity(t, delta);
    case Notion::Current: return verify_current_opacity(t, delta);
    case Notion::Infinite: return verify_infinite_opacity(t, delta);
  }
  throw Error("verify: bad notion");
}

// Abstraction verdict at delta_hat plus simulation accuracy epsilon yields
// the concrete guarantee delta_hat + 2 * epsilon.
inline double transfer_bound(double delta_hat, double epsilon) {
  if (delta_hat < 0 || epsilon < 0) throw Error("transfer_bound: negative argument");
  return delta_hat + 2.0 * epsilon;
}

}  // namespace opack

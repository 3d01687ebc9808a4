#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "opack/common.hpp"

namespace opack {

// Directed interconnection graph over vertices 1..n. An edge (from, to) means
// `from` feeds an internal input of `to`.
class Digraph {
 public:
  Digraph() = default;
  Digraph(int n, std::vector<std::pair<int, int>> edges) : n_(n), edges_(std::move(edges)) {
    for (const auto& [f, t] : edges_) {
      if (f < 1 || f > n_ || t < 1 || t > n_) throw Error("digraph: vertex out of range");
      if (f == t) throw Error("digraph: self-loop on vertex " + std::to_string(f));
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  }

  int size() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  std::vector<int> successors(int v) const {
    std::vector<int> out;
    for (const auto& [f, t] : edges_)
      if (f == v) out.push_back(t);
    return out;
  }
  std::vector<int> predecessors(int v) const {
    std::vector<int> out;
    for (const auto& [f, t] : edges_)
      if (t == v) out.push_back(f);
    return out;
  }

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
};

struct SccDecomposition {
  std::vector<std::vector<int>> components;        // each sorted; ordered by smallest vertex
  std::vector<int> component_of;                   // 1-based vertex -> component position
  std::vector<std::pair<int, int>> condensation;   // edges between component positions
  std::vector<bool> is_bscc;                       // no outgoing condensation edge

  int component_count() const { return static_cast<int>(components.size()); }
};

// Iterative Tarjan. Components come out sorted by their smallest vertex so
// results are reproducible regardless of edge order.
inline SccDecomposition tarjan_scc(const Digraph& g) {
  const int n = g.size();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n) + 1);
  for (const auto& [f, t] : g.edges()) adj[static_cast<std::size_t>(f)].push_back(t);

  std::vector<int> index(static_cast<std::size_t>(n) + 1, 0), low(static_cast<std::size_t>(n) + 1, 0);
  std::vector<bool> on_stack(static_cast<std::size_t>(n) + 1, false);
  std::vector<int> stack;
  std::vector<std::vector<int>> comps;
  int counter = 0;

  struct Frame {
    int v;
    std::size_t next_child;
  };
  for (int root = 1; root <= n; ++root) {
    if (index[static_cast<std::size_t>(root)] != 0) continue;
    std::vector<Frame> frames{{root, 0}};
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = ++counter;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = true;
    while (!frames.empty()) {
      Frame& fr = frames.back();
      const auto& children = adj[static_cast<std::size_t>(fr.v)];
      if (fr.next_child < children.size()) {
        const int c = children[fr.next_child++];
        if (index[static_cast<std::size_t>(c)] == 0) {
          index[static_cast<std::size_t>(c)] = low[static_cast<std::size_t>(c)] = ++counter;
          stack.push_back(c);
          on_stack[static_cast<std::size_t>(c)] = true;
          frames.push_back({c, 0});
        } else if (on_stack[static_cast<std::size_t>(c)]) {
          low[static_cast<std::size_t>(fr.v)] =
              std::min(low[static_cast<std::size_t>(fr.v)], index[static_cast<std::size_t>(c)]);
        }
      } else {
        if (low[static_cast<std::size_t>(fr.v)] == index[static_cast<std::size_t>(fr.v)]) {
          std::vector<int> comp;
          while (true) {
            const int w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = false;
            comp.push_back(w);
            if (w == fr.v) break;
          }
          std::sort(comp.begin(), comp.end());
          comps.push_back(std::move(comp));
        }
        const int v = fr.v;
        frames.pop_back();
        if (!frames.empty()) {
          const int p = frames.back().v;
          low[static_cast<std::size_t>(p)] =
              std::min(low[static_cast<std::size_t>(p)], low[static_cast<std::size_t>(v)]);
        }
      }
    }
  }

  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  SccDecomposition d;
  d.components = std::move(comps);
  d.component_of.assign(static_cast<std::size_t>(n) + 1, -1);
  for (int k = 0; k < d.component_count(); ++k)
    for (int v : d.components[static_cast<std::size_t>(k)])
      d.component_of[static_cast<std::size_t>(v)] = k;
  std::set<std::pair<int, int>> cedges;
  for (const auto& [f, t] : g.edges()) {
    const int cf = d.component_of[static_cast<std::size_t>(f)];
    const int ct = d.component_of[static_cast<std::size_t>(t)];
    if (cf != ct) cedges.insert({cf, ct});
  }
  d.condensation.assign(cedges.begin(), cedges.end());
  d.is_bscc.assign(static_cast<std::size_t>(d.component_count()), true);
  for (const auto& [cf, ct] : d.condensation) d.is_bscc[static_cast<std::size_t>(cf)] = false;
  return d;
}

}  // namespace opack

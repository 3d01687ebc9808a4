#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "opack/finite_system.hpp"
#include "opack/geometry.hpp"
#include "opack/model.hpp"

namespace opack {

// Quantization tuple q = (eta, theta, mu, phi) of one subsystem: state grid
// step, secret inflation radius, external input grid step, internal input
// grid steps per predecessor block (ascending source index).
struct QuantTuple {
  double eta = 0;
  double theta = 0;
  double mu = 0;
  std::vector<double> phi;
};

// Internal input values per predecessor block. phi_ij > 0 grids the declared
// W_ij box; phi_ij = 0 wires the block to the exact output values the
// predecessor's grid can produce.
inline std::vector<std::vector<std::vector<double>>> internal_input_values(
    const NetworkSpec& net, int index, const QuantTuple& q,
    const std::map<int, double>& etas) {
  const SubsystemSpec& sub = net.sub(index);
  std::vector<std::vector<std::vector<double>>> out;
  if (sub.internal.size() != q.phi.size() && !(q.phi.empty() && sub.internal.empty()))
    throw Error("internal_input_values: phi arity mismatch on subsystem " +
                std::to_string(index));
  for (std::size_t b = 0; b < sub.internal.size(); ++b) {
    const InternalBlock& blk = sub.internal[b];
    const double phi = q.phi[b];
    std::vector<std::vector<double>> values;
    if (phi > 0) {
      if (phi > boxspan(blk.set) + abs_tol(phi))
        throw Error("internal_input_values: phi exceeds span(W) on subsystem " +
                    std::to_string(index));
      values = quantize(blk.set, phi).points();
      if (blk.output_set) {
        // well-posedness: [Y_ji]_phi must fall inside W_ij
        const GridSet ygrid = quantize(*blk.output_set, phi);
        for (const auto& y : ygrid.points())
          if (!blk.set.contains(y))
            throw Error("internal_input_values: [Y]_phi not contained in W on subsystem " +
                        std::to_string(index));
      }
    } else {
      auto it = etas.find(blk.source);
      if (it == etas.end())
        throw Error("internal_input_values: missing eta for predecessor " +
                    std::to_string(blk.source));
      const SubsystemSpec& src = net.sub(blk.source);
      const GridSet src_grid = quantize(src.state_set, it->second);
      std::set<std::vector<double>> seen;
      for (const auto& x : src_grid.points()) {
        auto y = src.output_block_value(index, x);
        if (!blk.set.contains(y))
          throw Error("ill-posed interconnection: output of subsystem " +
                      std::to_string(blk.source) + " at (" + format_values(x) +
                      ") leaves W of subsystem " + std::to_string(index));
        seen.insert(std::move(y));
      }
      values.assign(seen.begin(), seen.end());
    }
    if (values.empty())
      throw Error("internal_input_values: empty internal alphabet on subsystem " +
                  std::to_string(index));
    out.push_back(std::move(values));
  }
  return out;
}

// Symbolic model of one deterministic subsystem on the eta-grid of X, with
// X_hat = X0_hat = [X]_eta, X_S_hat = [inflate(X_S, theta) /\ X]_eta,
// U_hat = [U]_mu and the transition rule
//   x_d in f_hat(x, u, w)  iff  || x_d - f(x, u, w) || <= eta.
inline FiniteSystem build_abstraction(const SubsystemSpec& sub, const QuantTuple& q,
                                      const std::vector<std::vector<std::vector<double>>>&
                                          internal_values) {
  if (q.eta <= 0) throw Error("build_abstraction: eta must be positive");
  if (q.theta < 0) throw Error("build_abstraction: theta must be non-negative");
  const double cap_s = sub.secret_set.empty() ? std::numeric_limits<double>::infinity()
                                              : boxspan(sub.secret_set);
  const BoxUnion rest = difference(sub.state_set, sub.secret_set);
  const double cap_r = rest.empty() ? std::numeric_limits<double>::infinity() : boxspan(rest);
  if (q.eta > std::min(cap_s, cap_r) + abs_tol(q.eta))
    throw Error("build_abstraction: eta exceeds min{span(X_S), span(X \\ X_S)} on subsystem " +
                std::to_string(sub.index));

  const GridSet grid = quantize(sub.state_set, q.eta);
  if (!grid.finite() || grid.size() == 0)
    throw Error("build_abstraction: empty state grid on subsystem " + std::to_string(sub.index));

  // secret grid: inflate, clip to X, reuse the same lattice
  std::set<std::vector<long long>> secret_keys;
  if (!sub.secret_set.empty()) {
    const BoxUnion inflated = intersect(inflate(sub.secret_set, q.theta), sub.state_set);
    if (!inflated.empty()) {
      const GridSet sgrid = lattice_points(inflated, q.eta);
      for (const auto& k : sgrid.keys()) secret_keys.insert(k);
    }
  }

  // external input alphabet
  std::vector<std::vector<double>> uvals;
  if (sub.input_dim == 0) {
    uvals.push_back({});
  } else if (q.mu > 0) {
    if (q.mu >= boxspan(sub.input_set) - abs_tol(q.mu) && !sub.input_set.all_degenerate())
      throw Error("build_abstraction: mu must satisfy 0 < mu < span(U) on subsystem " +
                  std::to_string(sub.index));
    uvals = quantize(sub.input_set, q.mu).points();
  } else {
    if (!sub.input_set.all_degenerate())
      throw Error("build_abstraction: mu = 0 needs a finite (singleton) input set on subsystem " +
                  std::to_string(sub.index));
    uvals = quantize(sub.input_set, 0.0).points();
  }

  if (internal_values.size() != sub.internal.size())
    throw Error("build_abstraction: internal alphabet arity mismatch");
  std::vector<std::vector<double>> wvals;
  if (!sub.internal.empty()) {
    // cartesian product of the per-block values, lexicographic
    wvals.push_back({});
    for (const auto& block_values : internal_values) {
      std::vector<std::vector<double>> next;
      for (const auto& prefix : wvals) {
        for (const auto& v : block_values) {
          auto w = prefix;
          w.insert(w.end(), v.begin(), v.end());
          next.push_back(std::move(w));
        }
      }
      wvals = std::move(next);
    }
    std::sort(wvals.begin(), wvals.end());
  }

  FiniteSystem t;
  t.name = "subsystem." + std::to_string(sub.index);
  t.owner = sub.index;
  t.keys = grid.keys();
  t.payloads = grid.points();
  t.inputs = uvals;
  t.winputs = wvals;
  int woff = 0;
  for (const auto& blk : sub.internal) {
    t.winput_blocks.push_back({blk.source, woff, blk.set.dim()});
    woff += blk.set.dim();
  }
  int yoff = 0;
  for (const auto& blk : sub.outputs) {
    t.output_blocks.push_back({blk.target, yoff, static_cast<int>(blk.exprs.size())});
    yoff += static_cast<int>(blk.exprs.size());
  }
  for (int s = 0; s < t.state_count(); ++s) {
    t.initial.push_back(1);  // X0 = X
    t.secret.push_back(secret_keys.count(t.keys[static_cast<std::size_t>(s)]) ? 1 : 0);
    std::vector<double> y;
    for (const auto& blk : sub.outputs) {
      auto v = sub.output_block_value(blk.target, t.payloads[static_cast<std::size_t>(s)]);
      y.insert(y.end(), v.begin(), v.end());
    }
    t.outputs.push_back(std::move(y));
  }

  const int nu = t.input_count();
  const int nw = std::max(t.winput_count(), 1);
  t.succ.assign(static_cast<std::size_t>(t.state_count()) * static_cast<std::size_t>(nu) *
                    static_cast<std::size_t>(nw),
                {});
  std::map<std::vector<long long>, int> key_index;
  for (int s = 0; s < t.state_count(); ++s) key_index[t.keys[static_cast<std::size_t>(s)]] = s;
  for (int s = 0; s < t.state_count(); ++s) {
    for (int u = 0; u < nu; ++u) {
      for (int w = 0; w < nw; ++w) {
        const std::vector<double> wvec =
            t.has_internal() ? t.winputs[static_cast<std::size_t>(w)] : std::vector<double>{};
        const auto target =
            sub.step(t.payloads[static_cast<std::size_t>(s)], t.inputs[static_cast<std::size_t>(u)], wvec);
        auto near = nearest_grid_points(target, grid, q.eta);
        if (near.empty())
          throw Error("build_abstraction: blocking cell on subsystem " + std::to_string(sub.index) +
                      " at state (" + format_values(t.payloads[static_cast<std::size_t>(s)]) +
                      "), input (" + format_values(t.inputs[static_cast<std::size_t>(u)]) +
                      "), internal (" + format_values(wvec) + ")");
        auto& dst = t.successors(s, u, w);
        for (const auto& p : near) {
          std::vector<long long> k(p.size());
          for (std::size_t d = 0; d < p.size(); ++d)
            k[d] = static_cast<long long>(std::llround(p[d] / q.eta));
          dst.push_back(key_index.at(k));
        }
        std::sort(dst.begin(), dst.end());
      }
    }
  }
  t.validate();
  return t;
}

inline FiniteSystem build_abstraction(const NetworkSpec& net, int index, const QuantTuple& q,
                                      const std::map<int, double>& etas) {
  return build_abstraction(net.sub(index), q, internal_input_values(net, index, q, etas));
}

// Interconnection of per-subsystem symbolic models under the phi matrix.
// A composite transition exists iff every subsystem can pick an internal
// input within phi of what its predecessors' current outputs say; phi = 0
// forces the exact value.
inline FiniteSystem compose(const std::vector<FiniteSystem>& parts,
                            const std::map<std::pair<int, int>, double>& phi,
                            const NetworkSpec& net) {
  const int n = static_cast<int>(parts.size());
  if (n != net.size()) throw Error("compose: part count differs from the network");
  for (int k = 0; k < n; ++k) {
    if (parts[static_cast<std::size_t>(k)].owner != k + 1)
      throw Error("compose: parts must be ordered by subsystem index");
  }
  auto phi_of = [&phi](int receiver, int source) {
    auto it = phi.find({receiver, source});
    return it == phi.end() ? 0.0 : it->second;
  };

  // Per subsystem and state assignment, the set of admissible internal input
  // indices, then the union of local successor sets per external input.
  // Composite successors are the product of the local ones.
  FiniteSystem c;
  c.name = "network";
  c.owner = 0;

  // composite states: lexicographic product of part state indices
  std::vector<int> sizes(static_cast<std::size_t>(n));
  long long total = 1;
  for (int k = 0; k < n; ++k) {
    sizes[static_cast<std::size_t>(k)] = parts[static_cast<std::size_t>(k)].state_count();
    total *= sizes[static_cast<std::size_t>(k)];
    if (total > 2'000'000) throw Error("compose: composite state space too large");
  }
  std::vector<int> isizes(static_cast<std::size_t>(n));
  long long itotal = 1;
  for (int k = 0; k < n; ++k) {
    isizes[static_cast<std::size_t>(k)] = parts[static_cast<std::size_t>(k)].input_count();
    itotal *= isizes[static_cast<std::size_t>(k)];
    if (itotal > 1'000'000) throw Error("compose: composite input space too large");
  }

  auto state_tuple = [&](long long flat) {
    std::vector<int> tup(static_cast<std::size_t>(n));
    for (int k = n - 1; k >= 0; --k) {
      tup[static_cast<std::size_t>(k)] = static_cast<int>(flat % sizes[static_cast<std::size_t>(k)]);
      flat /= sizes[static_cast<std::size_t>(k)];
    }
    return tup;
  };
  auto input_tuple = [&](long long flat) {
    std::vector<int> tup(static_cast<std::size_t>(n));
    for (int k = n - 1; k >= 0; --k) {
      tup[static_cast<std::size_t>(k)] = static_cast<int>(flat % isizes[static_cast<std::size_t>(k)]);
      flat /= isizes[static_cast<std::size_t>(k)];
    }
    return tup;
  };

  for (long long flat = 0; flat < total; ++flat) {
    const auto tup = state_tuple(flat);
    std::vector<double> payload, output;
    std::vector<long long> key;
    bool init = true, secret = true;
    for (int k = 0; k < n; ++k) {
      const FiniteSystem& p = parts[static_cast<std::size_t>(k)];
      const int s = tup[static_cast<std::size_t>(k)];
      payload.insert(payload.end(), p.payloads[static_cast<std::size_t>(s)].begin(),
                     p.payloads[static_cast<std::size_t>(s)].end());
      if (!p.keys.empty())
        key.insert(key.end(), p.keys[static_cast<std::size_t>(s)].begin(),
                   p.keys[static_cast<std::size_t>(s)].end());
      init = init && p.initial[static_cast<std::size_t>(s)];
      secret = secret && p.secret[static_cast<std::size_t>(s)];
      // external output block; subsystems with h_ii == 0 contribute nothing
      for (const auto& b : p.output_blocks) {
        if (b.target != p.owner) continue;
        auto y = p.output_block_value(s, p.owner);
        output.insert(output.end(), y.begin(), y.end());
      }
    }
    c.payloads.push_back(std::move(payload));
    if (!key.empty()) c.keys.push_back(std::move(key));
    c.initial.push_back(init ? 1 : 0);
    c.secret.push_back(secret ? 1 : 0);
    c.outputs.push_back(std::move(output));
  }
  int yoff = 0;
  for (int k = 0; k < n; ++k) {
    const FiniteSystem& p = parts[static_cast<std::size_t>(k)];
    for (const auto& b : p.output_blocks) {
      if (b.target != p.owner) continue;
      c.output_blocks.push_back({p.owner, yoff, b.dim});
      yoff += b.dim;
    }
  }
  for (long long flat = 0; flat < itotal; ++flat) {
    const auto tup = input_tuple(flat);
    std::vector<double> u;
    for (int k = 0; k < n; ++k) {
      const auto& v =
          parts[static_cast<std::size_t>(k)].inputs[static_cast<std::size_t>(tup[static_cast<std::size_t>(k)])];
      u.insert(u.end(), v.begin(), v.end());
    }
    c.inputs.push_back(std::move(u));
  }

  c.succ.assign(static_cast<std::size_t>(total) * static_cast<std::size_t>(itotal), {});
  for (long long flat = 0; flat < total; ++flat) {
    const auto tup = state_tuple(flat);
    // admissible internal input indices per part, given predecessor outputs
    std::vector<std::vector<int>> admissible(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const FiniteSystem& p = parts[static_cast<std::size_t>(k)];
      if (!p.has_internal()) {
        admissible[static_cast<std::size_t>(k)] = {0};
        continue;
      }
      for (int w = 0; w < p.winput_count(); ++w) {
        bool ok = true;
        for (const auto& blk : p.winput_blocks) {
          const FiniteSystem& src = parts[static_cast<std::size_t>(blk.target - 1)];
          const auto y = src.output_block_value(tup[static_cast<std::size_t>(blk.target - 1)], p.owner);
          const auto& wv = p.winputs[static_cast<std::size_t>(w)];
          std::vector<double> wblk(wv.begin() + blk.offset, wv.begin() + blk.offset + blk.dim);
          const double bound = phi_of(p.owner, blk.target);
          if (sup_dist(y, wblk) > bound + abs_tol(std::max(1.0, bound))) ok = false;
        }
        if (ok) admissible[static_cast<std::size_t>(k)].push_back(w);
      }
      if (admissible[static_cast<std::size_t>(k)].empty())
        throw Error("compose: ill-posed interconnection at subsystem " + std::to_string(k + 1) +
                    ", composite state " + std::to_string(flat) +
                    " (no admissible internal input)");
    }
    for (long long uflat = 0; uflat < itotal; ++uflat) {
      const auto utup = input_tuple(uflat);
      // local successor sets
      std::vector<std::vector<int>> local(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        const FiniteSystem& p = parts[static_cast<std::size_t>(k)];
        std::set<int> acc;
        for (int w : admissible[static_cast<std::size_t>(k)]) {
          const auto& dsts = p.successors(tup[static_cast<std::size_t>(k)],
                                          utup[static_cast<std::size_t>(k)],
                                          p.has_internal() ? w : 0);
          acc.insert(dsts.begin(), dsts.end());
        }
        local[static_cast<std::size_t>(k)].assign(acc.begin(), acc.end());
      }
      bool any_empty = false;
      for (const auto& l : local) any_empty = any_empty || l.empty();
      if (any_empty) continue;
      // product of local successors
      std::vector<long long> dests{0};
      for (int k = 0; k < n; ++k) {
        std::vector<long long> next;
        for (long long base : dests)
          for (int d : local[static_cast<std::size_t>(k)])
            next.push_back(base * sizes[static_cast<std::size_t>(k)] + d);
        dests = std::move(next);
      }
      auto& slot = c.succ[static_cast<std::size_t>(flat * itotal + uflat)];
      for (long long d : dests) slot.push_back(static_cast<int>(d));
      std::sort(slot.begin(), slot.end());
      slot.erase(std::unique(slot.begin(), slot.end()), slot.end());
    }
  }
  c.validate();
  return c;
}

}  // namespace opack

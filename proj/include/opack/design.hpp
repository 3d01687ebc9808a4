#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opack/graph.hpp"
#include "opack/kinf.hpp"
#include "opack/model.hpp"

namespace opack {

enum class Notion { Init, Current, Infinite };

inline const char* notion_name(Notion n) {
  switch (n) {
    case Notion::Init: return "init";
    case Notion::Current: return "current";
    case Notion::Infinite: return "inf";
  }
  return "?";
}

inline Notion notion_from_string(const std::string& s) {
  if (s == "init") return Notion::Init;
  if (s == "current") return Notion::Current;
  if (s == "inf" || s == "infinite") return Notion::Infinite;
  throw Error("unknown opacity notion '" + s + "' (expected init|current|inf)");
}

// Interconnection gains gamma_ij = kappa_i^-1 o rho_int,i o alpha_j^-1 on
// in-component edges, zero elsewhere.
class GainMatrix {
 public:
  GainMatrix() = default;
  GainMatrix(const NetworkSpec& net, const SccDecomposition& scc) {
    n_ = net.size();
    gains_.assign(static_cast<std::size_t>(n_ * n_), MonotoneFn::zero());
    for (const auto& [from, to] : net.edges) {
      if (scc.component_of[static_cast<std::size_t>(from)] !=
          scc.component_of[static_cast<std::size_t>(to)])
        continue;
      const IssCertificate& c = net.sub(to).cert;
      at(to, from) = compose(compose(c.kappa.inverse(), c.rho_int), net.sub(from).cert.alpha().inverse());
    }
  }

  // gamma_{ij}: i is the receiving vertex, j its predecessor.
  const MonotoneFn& operator()(int i, int j) const {
    return gains_[static_cast<std::size_t>((i - 1) * n_ + (j - 1))];
  }
  MonotoneFn& at(int i, int j) { return gains_[static_cast<std::size_t>((i - 1) * n_ + (j - 1))]; }
  int size() const { return n_; }

 private:
  int n_ = 0;
  std::vector<MonotoneFn> gains_;
};

struct SmallGainResult {
  bool ok = true;
  std::vector<int> witness_cycle;  // vertex sequence of a violating simple cycle
  double witness_product = 0.0;
};

namespace detail {

// All simple cycles inside one component, reported as vertex sequences
// starting from their smallest vertex.
inline void enumerate_cycles(const std::vector<int>& comp,
                             const std::vector<std::vector<int>>& adj_in_comp,
                             const std::function<void(const std::vector<int>&)>& emit) {
  const int m = static_cast<int>(comp.size());
  std::vector<int> pos(adj_in_comp.size(), -1);
  for (int k = 0; k < m; ++k) pos[static_cast<std::size_t>(comp[static_cast<std::size_t>(k)])] = k;
  std::vector<int> path;
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  // Only cycles whose smallest vertex is the start are emitted, so each
  // simple cycle appears exactly once.
  auto dfs = [&](int startk, int vk, auto&& self) -> void {
    path.push_back(comp[static_cast<std::size_t>(vk)]);
    used[static_cast<std::size_t>(vk)] = true;
    for (int succ : adj_in_comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(vk)])]) {
      const int sk = pos[static_cast<std::size_t>(succ)];
      if (sk == startk) {
        emit(path);
      } else if (sk > startk && !used[static_cast<std::size_t>(sk)]) {
        self(startk, sk, self);
      }
    }
    used[static_cast<std::size_t>(vk)] = false;
    path.pop_back();
  };
  for (int k = 0; k < m; ++k) dfs(k, k, dfs);
}

// Karp-style check that every cycle's log-gain sum is negative; used as an
// independent route against the enumerated-cycle verdict.
inline bool max_cycle_log_gain_negative(const std::vector<int>& comp,
                                        const std::vector<std::vector<int>>& adj,
                                        const GainMatrix& gains) {
  const int m = static_cast<int>(comp.size());
  if (m == 1) return true;
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  std::vector<int> pos(static_cast<std::size_t>(gains.size()) + 1, -1);
  for (int k = 0; k < m; ++k) pos[static_cast<std::size_t>(comp[static_cast<std::size_t>(k)])] = k;
  // d[len][v] = max log-gain of a walk of exactly `len` edges ending at v
  std::vector<std::vector<double>> d(static_cast<std::size_t>(m) + 1,
                                     std::vector<double>(static_cast<std::size_t>(m), ninf));
  for (int k = 0; k < m; ++k) d[0][static_cast<std::size_t>(k)] = 0.0;
  for (int len = 1; len <= m; ++len) {
    for (int k = 0; k < m; ++k) {
      const int v = comp[static_cast<std::size_t>(k)];
      for (int s : adj[static_cast<std::size_t>(v)]) {
        const int sk = pos[static_cast<std::size_t>(s)];
        const MonotoneFn& gfn = gains(s, v);
        if (gfn.is_zero()) continue;
        const double w = std::log(gfn.gain());
        const double base = d[static_cast<std::size_t>(len - 1)][static_cast<std::size_t>(k)];
        if (base == ninf) continue;
        double& slot = d[static_cast<std::size_t>(len)][static_cast<std::size_t>(sk)];
        slot = std::max(slot, base + w);
      }
    }
  }
  // max cycle mean < 0  <=>  every cycle product < 1
  double best = ninf;
  for (int k = 0; k < m; ++k) {
    if (d[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] == ninf) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (int len = 0; len < m; ++len) {
      if (d[static_cast<std::size_t>(len)][static_cast<std::size_t>(k)] == ninf) continue;
      worst = std::min(worst, (d[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] -
                               d[static_cast<std::size_t>(len)][static_cast<std::size_t>(k)]) /
                                  static_cast<double>(m - len));
    }
    best = std::max(best, worst);
  }
  return best == ninf || best < 0.0;
}

}  // namespace detail

// Assumption-1 check: every cyclic gain composition inside every component
// lies strictly below the identity. Exact only for linear gains; the cycle
// enumeration is cross-validated by a max-cycle-mean test, and disagreement
// is a hard internal error.
inline SmallGainResult check_small_gain(const Digraph& g, const SccDecomposition& scc,
                                        const GainMatrix& gains) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.size()) + 1);
  for (const auto& [f, t] : g.edges()) {
    if (scc.component_of[static_cast<std::size_t>(f)] == scc.component_of[static_cast<std::size_t>(t)])
      adj[static_cast<std::size_t>(f)].push_back(t);
  }
  SmallGainResult res;
  for (const auto& comp : scc.components) {
    if (comp.size() == 1) continue;  // no self-loops, hence no cycles
    for (int v : comp) {
      for (int s : adj[static_cast<std::size_t>(v)]) {
        const MonotoneFn& gfn = gains(s, v);
        if (!gfn.is_zero() && !gfn.is_linear())
          throw Error("check_small_gain: non-linear gain on edge " + std::to_string(v) + " -> " +
                      std::to_string(s) + "; supply sigma functions");
      }
    }
    detail::enumerate_cycles(comp, adj, [&](const std::vector<int>& cycle) {
      double product = 1.0;
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        const int j = cycle[k];
        const int i = cycle[(k + 1) % cycle.size()];
        product *= gains(i, j).is_zero() ? 0.0 : gains(i, j).gain();
      }
      if (product >= 1.0 && (res.ok || product > res.witness_product)) {
        res.ok = false;
        res.witness_cycle = cycle;
        res.witness_product = product;
      }
    });
    const bool spectral = detail::max_cycle_log_gain_negative(comp, adj, gains);
    bool enumerated = true;
    detail::enumerate_cycles(comp, adj, [&](const std::vector<int>& cycle) {
      double product = 1.0;
      for (std::size_t k = 0; k < cycle.size(); ++k)
        product *= gains(cycle[(k + 1) % cycle.size()], cycle[k]).is_zero()
                       ? 0.0
                       : gains(cycle[(k + 1) % cycle.size()], cycle[k]).gain();
      enumerated = enumerated && product < 1.0;
    });
    if (spectral != enumerated)
      throw Error("internal error: spectral and enumerated small-gain verdicts disagree");
  }
  return res;
}

inline SmallGainResult check_small_gain(const NetworkSpec& net) {
  const Digraph g(net.size(), net.edges);
  const SccDecomposition scc = tarjan_scc(g);
  return check_small_gain(g, scc, GainMatrix(net, scc));
}

// Per-vertex scaling functions sigma_i with max_{j in Pre} gamma_ij o sigma_j
// strictly below sigma_i, normalized to max gain 1. Linear gains only; other
// gain classes take user-supplied sigmas.
inline std::map<int, MonotoneFn> find_sigma(const Digraph& g, const SccDecomposition& scc,
                                            const GainMatrix& gains) {
  std::map<int, MonotoneFn> sigma;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.size()) + 1);
  for (const auto& [f, t] : g.edges()) {
    if (scc.component_of[static_cast<std::size_t>(f)] == scc.component_of[static_cast<std::size_t>(t)])
      adj[static_cast<std::size_t>(f)].push_back(t);
  }
  for (const auto& comp : scc.components) {
    if (comp.size() == 1) {
      sigma[comp.front()] = MonotoneFn::identity();
      continue;
    }
    // contraction factor strictly between the worst cycle mean and 1
    double rho = 0.0;
    detail::enumerate_cycles(comp, adj, [&](const std::vector<int>& cycle) {
      double product = 1.0;
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        const MonotoneFn& gfn = gains(cycle[(k + 1) % cycle.size()], cycle[k]);
        if (!gfn.is_linear() && !gfn.is_zero())
          throw Error("find_sigma: non-linear gain; supply sigma functions");
        product *= gfn.is_zero() ? 0.0 : gfn.gain();
      }
      rho = std::max(rho, std::pow(product, 1.0 / static_cast<double>(cycle.size())));
    });
    if (rho >= 1.0) throw Error("find_sigma: small-gain condition violated");
    const double shrink = 0.5 * (1.0 + rho);
    const int m = static_cast<int>(comp.size());
    std::map<int, double> s;
    for (int v : comp) s[v] = 1.0;
    for (int round = 0; round < m; ++round) {
      for (int v : comp) {
        double best = 1.0;
        for (int j : comp) {
          const MonotoneFn& gfn = gains(v, j);
          if (gfn.is_zero()) continue;
          best = std::max(best, gfn.gain() / shrink * s[j]);
        }
        s[v] = std::max(s[v], best);
      }
    }
    double smax = 0.0;
    for (int v : comp) smax = std::max(smax, s[v]);
    for (int v : comp) {
      // strictness: gain/shrink * s_j <= s_v with shrink < 1
      for (int j : comp) {
        const MonotoneFn& gfn = gains(v, j);
        if (!gfn.is_zero() && gfn.gain() * s[j] >= s[v])
          throw Error("internal error: sigma construction is not strict");
      }
      sigma[v] = MonotoneFn::linear(s[v] / smax);
    }
  }
  return sigma;
}

inline std::map<int, MonotoneFn> find_sigma(const NetworkSpec& net) {
  const Digraph g(net.size(), net.edges);
  const SccDecomposition scc = tarjan_scc(g);
  return find_sigma(g, scc, GainMatrix(net, scc));
}

struct SubsystemDesign {
  double varpi = 0;      // local precision
  double vartheta = 0;   // internal-input mismatch budget
  double eta_max = 0;    // largest admissible state quantization
  double theta_min = 0;  // secret inflation lower bound (current/inf notions)
  double mu = 0;         // chosen external input quantization
  std::optional<double> mu_max;  // admissible sup for mu (absent when rho_ext = 0)
  double eta = 0;        // chosen state quantization
  double theta = 0;      // chosen secret inflation
};

struct DesignResult {
  Notion notion = Notion::Init;
  double network_varpi = 0;
  double epsilon = 0;  // alpha^-1(varpi) for the composed network
  std::vector<SubsystemDesign> subs;           // position k holds subsystem k+1
  std::map<std::pair<int, int>, double> phi;   // (receiver i, source j) -> phi_ij

  const SubsystemDesign& sub(int index) const {
    return subs[static_cast<std::size_t>(index - 1)];
  }
  double phi_of(int receiver, int source) const {
    auto it = phi.find({receiver, source});
    return it == phi.end() ? 0.0 : it->second;
  }
  std::vector<double> phi_vector(const NetworkSpec& net, int index) const {
    std::vector<double> out;
    for (int j : net.predecessors(index)) out.push_back(phi_of(index, j));
    return out;
  }
};

struct DesignOptions {
  Notion notion = Notion::Init;
  // Strict inequalities of the design algorithm leave slack unchosen. phi
  // parameters default to 0 and the singleton-component vartheta to
  // min(varpi_i, theta_fraction * rho_int^-1(kappa(varpi_i))), reproducing
  // the shipped fixture models; both are adjustable.
  double phi_fraction = 0.0;
  double theta_fraction = 0.9;
};

// Largest eta admitted by the quantization condition
//   eta <= min{ gamma_hat^-1[kappa(varpi) - rho_int(vartheta) - rho_ext(mu)],
//               alpha_upper^-1(varpi) }
// additionally capped by the spans of X_S and X \ X_S when those sets are
// nonempty.
inline double max_eta(const IssCertificate& cert, double varpi, double vartheta, double mu,
                      std::optional<double> span_cap = std::nullopt) {
  const double budget = cert.kappa(varpi) - cert.rho_int(vartheta) - cert.rho_ext(mu);
  if (budget <= 0) throw Error("max_eta: infeasible precision split");
  double eta = std::min(cert.gamma_hat.inverse()(budget), cert.alpha_upper.inverse()(varpi));
  if (span_cap) eta = std::min(eta, *span_cap);
  return eta;
}

inline double secret_span_cap(const SubsystemSpec& sub) {
  double cap = std::numeric_limits<double>::infinity();
  if (!sub.secret_set.empty()) cap = std::min(cap, boxspan(sub.secret_set));
  const BoxUnion rest = difference(sub.state_set, sub.secret_set);
  if (!rest.empty()) cap = std::min(cap, boxspan(rest));
  return cap;
}

// theta >= alpha_lower^-1(varpi), required by the current-state and
// infinite-step constructions; initial-state abstractions may use theta = 0.
inline double min_theta(const IssCertificate& cert, double varpi) {
  return cert.alpha_lower.inverse()(varpi);
}

// epsilon = alpha^-1(varpi) for the composed network, where
// alpha = (max_i alpha_i^-1)^-1.
inline double epsilon_of(const MonotoneFn& alpha, double varpi) {
  return alpha.inverse()(varpi);
}

inline double network_epsilon(const NetworkSpec& net, double varpi) {
  double eps = 0.0;
  for (const auto& sub : net.subs) eps = std::max(eps, sub.cert.alpha().inverse()(varpi));
  return eps;
}

struct ComposabilityViolation {
  int receiver = 0, source = 0;
  double lhs = 0, vartheta = 0;
};

// Verifies alpha_j^-1(varpi_j) + phi_ij <= vartheta_i on every edge.
inline std::vector<ComposabilityViolation> check_composability(const DesignResult& d,
                                                               const NetworkSpec& net) {
  std::vector<ComposabilityViolation> out;
  for (const auto& [from, to] : net.edges) {
    const double lhs =
        net.sub(from).cert.alpha().inverse()(d.sub(from).varpi) + d.phi_of(to, from);
    const double rhs = d.sub(to).vartheta;
    if (lhs > rhs + 1e-12 * std::max(1.0, std::fabs(rhs)))
      out.push_back({to, from, lhs, rhs});
  }
  return out;
}

// Compositional design of the local parameters (varpi_i, vartheta_i) and the
// internal-input quantizations phi_ij. Bottom components of the shrinking
// condensation are handled first; peeled components constrain their
// predecessors through vartheta_j - phi_ji budgets.
inline DesignResult design_parameters(const NetworkSpec& net, double varpi,
                                      const std::map<int, MonotoneFn>& sigma,
                                      const DesignOptions& opt = {}) {
  if (varpi <= 0) throw Error("design_parameters: precision must be positive");
  const int n = net.size();
  const Digraph g(n, net.edges);
  const SccDecomposition scc = tarjan_scc(g);
  for (const auto& comp : scc.components) {
    for (int v : comp) {
      if (sigma.find(v) == sigma.end())
        throw Error("design_parameters: missing sigma for subsystem " + std::to_string(v));
    }
  }

  DesignResult res;
  res.notion = opt.notion;
  res.subs.assign(static_cast<std::size_t>(n), SubsystemDesign{});
  std::vector<bool> done_comp(static_cast<std::size_t>(scc.component_count()), false);
  std::vector<bool> removed(static_cast<std::size_t>(scc.component_count()), false);
  std::vector<bool> assigned(static_cast<std::size_t>(n) + 1, false);

  auto in_comp_pre = [&](int i, const std::vector<int>& comp) {
    std::vector<int> out;
    for (int j : g.predecessors(i))
      if (std::find(comp.begin(), comp.end(), j) != comp.end()) out.push_back(j);
    return out;
  };
  auto cross_pre = [&](int i, const std::vector<int>& comp) {
    std::vector<int> out;
    for (int j : g.predecessors(i))
      if (std::find(comp.begin(), comp.end(), j) == comp.end()) out.push_back(j);
    return out;
  };
  auto cross_post = [&](int i, const std::vector<int>& comp) {
    std::vector<int> out;
    for (int j : g.successors(i))
      if (std::find(comp.begin(), comp.end(), j) == comp.end()) out.push_back(j);
    return out;
  };

  auto set_varpi = [&](int i, double value) {
    res.subs[static_cast<std::size_t>(i - 1)].varpi = value;
    assigned[static_cast<std::size_t>(i)] = true;
  };

  auto rho_kappa_bound = [&](int i) -> double {
    // rho_int^-1 o kappa at varpi_i; infinite when rho_int vanishes
    const IssCertificate& c = net.sub(i).cert;
    const double k = c.kappa(res.sub(i).varpi);
    if (c.rho_int.is_zero()) return std::numeric_limits<double>::infinity();
    return c.rho_int.inverse()(k);
  };

  auto choose_in_comp_phi = [&](const std::vector<int>& comp) {
    for (int i : comp) {
      const auto pre = in_comp_pre(i, comp);
      if (pre.empty()) continue;
      double worst = 0.0;
      for (int j : pre)
        worst = std::max(worst, net.sub(j).cert.alpha().inverse()(res.sub(j).varpi));
      const double bound = rho_kappa_bound(i) - worst;
      if (bound <= 0)
        throw Error("design_parameters: infeasible in-component phi bound at subsystem " +
                    std::to_string(i) + " (rho_int^-1(kappa(varpi)) - max alpha_j^-1(varpi_j) <= 0)");
      double value = 0.0;
      if (opt.phi_fraction > 0) {
        if (!std::isfinite(bound))
          throw Error("design_parameters: phi fraction needs a finite bound at subsystem " +
                      std::to_string(i));
        value = opt.phi_fraction * bound;
      }
      for (int j : pre) res.phi[{i, j}] = value;
    }
    for (int i : comp) {
      const auto pre = in_comp_pre(i, comp);
      if (pre.empty()) continue;
      double t = 0.0;
      for (int j : pre)
        t = std::max(t, net.sub(j).cert.alpha().inverse()(res.sub(j).varpi) + res.phi[{i, j}]);
      res.subs[static_cast<std::size_t>(i - 1)].vartheta = t;
    }
  };

  auto choose_singleton_vartheta = [&](int i) {
    const double bound = rho_kappa_bound(i);
    const double varpi_i = res.sub(i).varpi;
    double t = varpi_i;
    if (std::isfinite(bound)) t = std::min(t, opt.theta_fraction * bound);
    if (t <= 0) throw Error("design_parameters: infeasible vartheta at subsystem " +
                            std::to_string(i));
    res.subs[static_cast<std::size_t>(i - 1)].vartheta = t;
  };

  auto choose_cross_phi = [&](const std::vector<int>& comp) {
    for (int i : comp) {
      for (int j : cross_pre(i, comp)) {
        res.phi[{i, j}] = opt.phi_fraction > 0
                              ? opt.phi_fraction * res.sub(i).vartheta
                              : 0.0;
      }
    }
  };

  bool first_pass = true;
  int remaining = scc.component_count();
  while (remaining > 0) {
    // bottom components of the current shrunken graph
    std::vector<int> bottom;
    for (int k = 0; k < scc.component_count(); ++k) {
      if (removed[static_cast<std::size_t>(k)]) continue;
      bool has_out = false;
      for (const auto& [cf, ct] : scc.condensation)
        has_out = has_out || (cf == k && !removed[static_cast<std::size_t>(ct)]);
      if (!has_out) bottom.push_back(k);
    }
    for (int k : bottom) {
      if (done_comp[static_cast<std::size_t>(k)]) continue;
      done_comp[static_cast<std::size_t>(k)] = true;
      const auto& comp = scc.components[static_cast<std::size_t>(k)];
      if (first_pass) {
        if (comp.size() > 1) {
          // max_i sigma_i(r) = varpi  =>  r = min_i sigma_i^-1(varpi)
          double r = std::numeric_limits<double>::infinity();
          for (int i : comp) r = std::min(r, sigma.at(i).inverse()(varpi));
          for (int i : comp) set_varpi(i, sigma.at(i)(r));
          choose_in_comp_phi(comp);
        } else {
          set_varpi(comp.front(), varpi);
          choose_singleton_vartheta(comp.front());
        }
      } else {
        // later passes: successors already carry their budgets
        if (comp.size() > 1) {
          double r = std::numeric_limits<double>::infinity();
          for (int i : comp) {
            r = std::min(r, sigma.at(i).inverse()(varpi));
            const auto post = cross_post(i, comp);
            if (post.empty()) continue;
            double budget = std::numeric_limits<double>::infinity();
            for (int j : post) budget = std::min(budget, res.sub(j).vartheta - res.phi_of(j, i));
            if (budget <= 0)
              throw Error("design_parameters: exhausted budget toward subsystem " +
                          std::to_string(i));
            r = std::min(r, sigma.at(i).inverse()(net.sub(i).cert.alpha()(budget)));
          }
          for (int i : comp) set_varpi(i, sigma.at(i)(r));
          choose_in_comp_phi(comp);
        } else {
          const int i = comp.front();
          const auto post = cross_post(i, comp);
          double budget = std::numeric_limits<double>::infinity();
          for (int j : post) budget = std::min(budget, res.sub(j).vartheta - res.phi_of(j, i));
          if (budget <= 0)
            throw Error("design_parameters: exhausted budget toward subsystem " +
                        std::to_string(i));
          double value = varpi;
          if (std::isfinite(budget)) value = std::min(value, net.sub(i).cert.alpha()(budget));
          set_varpi(i, value);
          choose_singleton_vartheta(i);
        }
      }
      choose_cross_phi(comp);
    }
    for (int k : bottom) {
      removed[static_cast<std::size_t>(k)] = true;
      --remaining;
    }
    first_pass = false;
  }
  for (int i = 1; i <= n; ++i) {
    if (!assigned[static_cast<std::size_t>(i)])
      throw Error("internal error: subsystem " + std::to_string(i) + " left unassigned");
  }

  res.network_varpi = 0.0;
  for (const auto& s : res.subs) res.network_varpi = std::max(res.network_varpi, s.varpi);
  res.epsilon = network_epsilon(net, res.network_varpi);

  for (int i = 1; i <= n; ++i) {
    SubsystemDesign& s = res.subs[static_cast<std::size_t>(i - 1)];
    const IssCertificate& c = net.sub(i).cert;
    // invariant from the feasibility argument: the eta budget stays positive
    if (c.kappa(s.varpi) - c.rho_int(s.vartheta) <= 0)
      throw Error("internal error: design lost the eta budget at subsystem " + std::to_string(i));
    s.mu = 0.0;
    if (!c.rho_ext.is_zero())
      s.mu_max = c.rho_ext.inverse()(c.kappa(s.varpi) - c.rho_int(s.vartheta));
    s.eta_max = max_eta(c, s.varpi, s.vartheta, s.mu, secret_span_cap(net.sub(i)));
    s.eta = s.eta_max;
    s.theta_min = opt.notion == Notion::Init ? 0.0 : min_theta(c, s.varpi);
    s.theta = s.theta_min;
  }
  if (!check_composability(res, net).empty())
    throw Error("internal error: designed parameters violate the composability condition");
  return res;
}

inline DesignResult design_parameters(const NetworkSpec& net, double varpi,
                                      const DesignOptions& opt = {}) {
  const auto sg = check_small_gain(net);
  if (!sg.ok) {
    std::string cycle;
    for (std::size_t i = 0; i < sg.witness_cycle.size(); ++i) {
      if (i) cycle += " -> ";
      cycle += std::to_string(sg.witness_cycle[i]);
    }
    throw Error("design_parameters: small-gain condition violated on cycle " + cycle +
                " (gain product " + std::to_string(sg.witness_product) + ")");
  }
  return design_parameters(net, varpi, find_sigma(net), opt);
}

}  // namespace opack

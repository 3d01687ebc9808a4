#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opack/abstraction.hpp"
#include "opack/design.hpp"
#include "opack/finite_system.hpp"

namespace opack {

// A candidate opacity-preserving simulation relation between two finite
// systems, stored as a dense boolean matrix over state pairs.
struct OpRelation {
  Notion notion = Notion::Init;
  double epsilon = 0;
  int rows = 0, cols = 0;           // |X| x |X_hat|
  std::vector<char> pairs;          // row-major

  bool at(int x, int xh) const { return pairs[static_cast<std::size_t>(x * cols + xh)] != 0; }
  void set(int x, int xh, bool v) { pairs[static_cast<std::size_t>(x * cols + xh)] = v ? 1 : 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (char c : pairs) n += c != 0;
    return n;
  }
  bool subset_of(const OpRelation& other) const {
    if (rows != other.rows || cols != other.cols) return false;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (pairs[i] && !other.pairs[i]) return false;
    return true;
  }
};

struct RelationFailure {
  std::string clause;  // e.g. "1a", "3b"
  int x = -1, xh = -1;
};

struct RelationResult {
  bool ok = false;
  OpRelation relation;
  std::optional<RelationFailure> failure;
};

namespace detail {

// Clause 3 closure test for one pair under the given notion. `r` is
// consulted for successor pairs.
inline std::optional<std::string> closure_violation(const FiniteSystem& a, const FiniteSystem& b,
                                                    const OpRelation& r, int x, int xh,
                                                    Notion notion) {
  auto related_exists = [&](const std::vector<int>& xds, const std::vector<int>& xhds,
                            auto&& pred) {
    // for every concrete successor there is a related abstract one
    for (int xd : xds) {
      bool found = false;
      for (int xhd : xhds)
        if (r.at(xd, xhd) && pred(xd, xhd)) {
          found = true;
          break;
        }
      if (!found) return false;
    }
    return true;
  };
  std::vector<int> a_all, b_all;
  for (int u = 0; u < a.input_count(); ++u)
    for (int d : a.successors(x, u)) a_all.push_back(d);
  for (int u = 0; u < b.input_count(); ++u)
    for (int d : b.successors(xh, u)) b_all.push_back(d);
  std::sort(a_all.begin(), a_all.end());
  a_all.erase(std::unique(a_all.begin(), a_all.end()), a_all.end());
  std::sort(b_all.begin(), b_all.end());
  b_all.erase(std::unique(b_all.begin(), b_all.end()), b_all.end());

  auto any = [](int, int) { return true; };
  // 3(a): every concrete move is matched by some abstract move
  if (!related_exists(a_all, b_all, any)) return "3a";
  // reverse direction: every abstract move matched by some concrete move
  {
    for (int xhd : b_all) {
      bool found = false;
      for (int xd : a_all)
        if (r.at(xd, xhd)) {
          found = true;
          break;
        }
      if (!found) return notion == Notion::Init ? "3b" : "3c";
    }
  }
  if (notion != Notion::Init) {
    // 3(b): secret concrete successors matched by secret abstract ones
    std::vector<int> a_secret, b_secret, b_nonsecret;
    for (int d : a_all)
      if (a.secret[static_cast<std::size_t>(d)]) a_secret.push_back(d);
    for (int d : b_all)
      (b.secret[static_cast<std::size_t>(d)] ? b_secret : b_nonsecret).push_back(d);
    if (!related_exists(a_secret, b_secret, any)) return "3b";
    // 3(d): non-secret abstract successors matched by non-secret concrete ones
    for (int xhd : b_nonsecret) {
      bool found = false;
      for (int xd : a_all)
        if (!a.secret[static_cast<std::size_t>(xd)] && r.at(xd, xhd)) {
          found = true;
          break;
        }
      if (!found) return "3d";
    }
  }
  return std::nullopt;
}

inline std::optional<RelationFailure> initial_condition_violation(const FiniteSystem& a,
                                                                  const FiniteSystem& b,
                                                                  const OpRelation& r,
                                                                  Notion notion) {
  auto covered = [&](int x0, bool secret_only, bool nonsecret_only) {
    for (int xh0 : b.initial_states()) {
      if (secret_only && !b.secret[static_cast<std::size_t>(xh0)]) continue;
      if (nonsecret_only && b.secret[static_cast<std::size_t>(xh0)]) continue;
      if (r.at(x0, xh0)) return true;
    }
    return false;
  };
  auto covered_rev = [&](int xh0) {
    for (int x0 : a.initial_states())
      if (!a.secret[static_cast<std::size_t>(x0)] && r.at(x0, xh0)) return true;
    return false;
  };
  if (notion == Notion::Current || notion == Notion::Infinite) {
    for (int x0 : a.initial_states())
      if (!covered(x0, false, false)) return RelationFailure{"1", x0, -1};
  }
  if (notion == Notion::Init || notion == Notion::Infinite) {
    const char* c1a = notion == Notion::Infinite ? "1b" : "1a";
    const char* c1b = notion == Notion::Infinite ? "1c" : "1b";
    for (int x0 : a.initial_states()) {
      if (!a.secret[static_cast<std::size_t>(x0)]) continue;
      if (!covered(x0, true, false)) return RelationFailure{c1a, x0, -1};
    }
    for (int xh0 : b.initial_states()) {
      if (b.secret[static_cast<std::size_t>(xh0)]) continue;
      if (!covered_rev(xh0)) return RelationFailure{c1b, -1, xh0};
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Greatest relation satisfying the output-closeness and closure clauses of
// the chosen notion, then checked against the initial/secret matching
// clauses. Deletion order does not change the result.
inline RelationResult max_relation(const FiniteSystem& a, const FiniteSystem& b, double epsilon,
                                   Notion notion) {
  if (a.has_internal() || b.has_internal())
    throw Error("max_relation: internal alphabets must be empty");
  OpRelation r;
  r.notion = notion;
  r.epsilon = epsilon;
  r.rows = a.state_count();
  r.cols = b.state_count();
  r.pairs.assign(static_cast<std::size_t>(r.rows) * static_cast<std::size_t>(r.cols), 0);
  for (int x = 0; x < r.rows; ++x)
    for (int xh = 0; xh < r.cols; ++xh)
      r.set(x, xh,
            sup_dist(a.outputs[static_cast<std::size_t>(x)],
                     b.outputs[static_cast<std::size_t>(xh)]) <= epsilon + abs_tol(epsilon));
  bool changed = true;
  while (changed) {
    changed = false;
    for (int x = 0; x < r.rows; ++x) {
      for (int xh = 0; xh < r.cols; ++xh) {
        if (!r.at(x, xh)) continue;
        if (detail::closure_violation(a, b, r, x, xh, notion)) {
          r.set(x, xh, false);
          changed = true;
        }
      }
    }
  }
  RelationResult out;
  out.relation = r;
  auto fail = detail::initial_condition_violation(a, b, r, notion);
  if (fail) {
    out.ok = false;
    out.failure = fail;
  } else {
    out.ok = true;
  }
  return out;
}

// Sublevel set {(x, x_hat) : G(payload_x, payload_xhat) <= varpi}, tagged
// with epsilon = alpha^-1(varpi). Not yet validated.
inline OpRelation levelset_relation(const FiniteSystem& a, const FiniteSystem& b,
                                    const std::function<double(const std::vector<double>&,
                                                               const std::vector<double>&)>& G,
                                    double varpi, Notion notion,
                                    const MonotoneFn& alpha = MonotoneFn::identity()) {
  OpRelation r;
  r.notion = notion;
  r.epsilon = epsilon_of(alpha, varpi);
  r.rows = a.state_count();
  r.cols = b.state_count();
  r.pairs.assign(static_cast<std::size_t>(r.rows) * static_cast<std::size_t>(r.cols), 0);
  for (int x = 0; x < r.rows; ++x)
    for (int xh = 0; xh < r.cols; ++xh)
      r.set(x, xh,
            G(a.payloads[static_cast<std::size_t>(x)], b.payloads[static_cast<std::size_t>(xh)]) <=
                varpi + abs_tol(varpi));
  return r;
}

// Checks a fixed candidate relation against all clauses of the notion.
inline std::optional<RelationFailure> validate_relation(const FiniteSystem& a,
                                                        const FiniteSystem& b,
                                                        const OpRelation& r, Notion notion) {
  for (int x = 0; x < r.rows; ++x) {
    for (int xh = 0; xh < r.cols; ++xh) {
      if (!r.at(x, xh)) continue;
      if (sup_dist(a.outputs[static_cast<std::size_t>(x)],
                   b.outputs[static_cast<std::size_t>(xh)]) > r.epsilon + abs_tol(r.epsilon))
        return RelationFailure{"2", x, xh};
      auto c = detail::closure_violation(a, b, r, x, xh, notion);
      if (c) return RelationFailure{*c, x, xh};
    }
  }
  return detail::initial_condition_violation(a, b, r, notion);
}

// ---------------------------------------------------------------------------
// Sample validation of the opacity-preserving simulation-function conditions
// between a concrete subsystem and its symbolic model.
// ---------------------------------------------------------------------------

struct ClauseStat {
  long long checked = 0;
  long long failed = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min over checks of slack

  void note(double slack, double tol) {
    ++checked;
    if (slack < -tol) ++failed;
    worst_margin = std::min(worst_margin, slack);
  }
};

struct SopsfReport {
  Notion notion = Notion::Init;
  int samples = 0;
  std::map<std::string, ClauseStat> clauses;

  bool ok() const {
    for (const auto& [k, c] : clauses)
      if (c.failed > 0) return false;
    return true;
  }
  long long failures(const std::string& prefix) const {
    long long n = 0;
    for (const auto& [k, c] : clauses)
      if (k.rfind(prefix, 0) == 0) n += c.failed;
    return n;
  }
};

// Definition-level clause check on sampled state pairs. The concrete side is
// deterministic, so the existential concrete moves are realized with the
// matching input choice u = u_hat; random-sample failures refute the
// certificate/tuple pair, they are never averaged away.
inline SopsfReport validate_sopsf(const SubsystemSpec& sub, const FiniteSystem& abs,
                                  double varpi, double vartheta, Notion notion, int samples,
                                  std::uint64_t seed, double tol = 1e-9, double mu = 0.0) {
  SopsfReport rep;
  rep.notion = notion;
  rep.samples = samples;
  Rng rng(seed);
  const GFunction& G = sub.cert.g;
  const MonotoneFn alpha = sub.cert.alpha();

  // concrete sample states: every grid point plus uniform draws
  std::vector<std::vector<double>> xs = abs.payloads;
  for (int i = 0; i < samples; ++i) xs.push_back(detail::sample_point(sub.state_set, rng));

  // initial/secret matching clauses; the sets of clauses differ per notion
  if (notion != Notion::Current) {
    // 1(a): secret concrete states vs the abstract secret grid
    for (int i = 0; i < samples && !sub.secret_set.empty(); ++i) {
      const auto x0 = detail::sample_point(sub.secret_set, rng);
      double best = std::numeric_limits<double>::infinity();
      for (int s = 0; s < abs.state_count(); ++s) {
        if (!abs.secret[static_cast<std::size_t>(s)] || !abs.initial[static_cast<std::size_t>(s)])
          continue;
        best = std::min(best, G(x0, abs.payloads[static_cast<std::size_t>(s)]));
      }
      rep.clauses["1a"].note(varpi - best, tol);
    }
    // 1(b): abstract non-secret initial states vs concrete ones
    for (int s = 0; s < abs.state_count(); ++s) {
      if (!abs.initial[static_cast<std::size_t>(s)] || abs.secret[static_cast<std::size_t>(s)])
        continue;
      const auto& p = abs.payloads[static_cast<std::size_t>(s)];
      // the grid point itself lies in X0 \ X_S whenever it avoids the secret set
      const double best =
          sub.secret_set.contains(p) ? std::numeric_limits<double>::infinity() : 0.0;
      rep.clauses["1b"].note(varpi - best, tol);
    }
  }
  if (notion != Notion::Init) {
    // plain initial cover: every concrete state (X0 = X) has a close grid point
    for (int i = 0; i < samples; ++i) {
      const auto x0 = detail::sample_point(sub.state_set, rng);
      double best = std::numeric_limits<double>::infinity();
      for (int s = 0; s < abs.state_count(); ++s) {
        if (!abs.initial[static_cast<std::size_t>(s)]) continue;
        best = std::min(best, G(x0, abs.payloads[static_cast<std::size_t>(s)]));
      }
      rep.clauses["1"].note(varpi - best, tol);
    }
  }

  for (const auto& x : xs) {
    for (int s = 0; s < abs.state_count(); ++s) {
      const auto& xh = abs.payloads[static_cast<std::size_t>(s)];
      const double g = G(x, xh);
      // clause 2 holds for every pair, related or not
      double dy = 0;
      for (const auto& blk : sub.outputs) {
        dy = std::max(dy, sup_dist(sub.output_block_value(blk.target, x),
                                   abs.output_block_value(s, blk.target)));
      }
      rep.clauses["2"].note(g - alpha(dy), tol);
      if (g > varpi + tol) continue;

      // internal input pairs: sampled w against each abstract w within vartheta
      std::vector<std::pair<std::vector<double>, int>> wpairs;
      if (abs.has_internal()) {
        const auto w = detail::sample_internal(sub, rng);
        for (int wi = 0; wi < abs.winput_count(); ++wi) {
          if (sup_dist(w, abs.winputs[static_cast<std::size_t>(wi)]) <= vartheta + tol)
            wpairs.push_back({w, wi});
        }
      } else {
        wpairs.push_back({{}, 0});
      }
      for (const auto& [w, wi] : wpairs) {
        // free concrete inputs: draw u from U and pair it with a grid input
        // within mu, the existence the input grid guarantees
        if (sub.input_dim > 0 && mu > 0) {
          const auto u = detail::sample_point(sub.input_set, rng);
          int nearest = -1;
          double du = std::numeric_limits<double>::infinity();
          for (int ui = 0; ui < abs.input_count(); ++ui) {
            const double d = sup_dist(u, abs.inputs[static_cast<std::size_t>(ui)]);
            if (d < du) {
              du = d;
              nearest = ui;
            }
          }
          if (du <= mu + tol) {
            const auto xd = sub.step(x, u, w);
            const auto& succ = abs.successors(s, nearest, abs.has_internal() ? wi : 0);
            double best = std::numeric_limits<double>::infinity();
            for (int d : succ)
              best = std::min(best, G(xd, abs.payloads[static_cast<std::size_t>(d)]));
            rep.clauses["3a"].note(varpi - best, tol);
          }
        }
        for (int ui = 0; ui < abs.input_count(); ++ui) {
          const auto& uh = abs.inputs[static_cast<std::size_t>(ui)];
          // concrete input choice u = u_hat
          const auto xd = sub.step(x, uh, w);
          const auto& succ = abs.successors(s, ui, abs.has_internal() ? wi : 0);
          // 3(a): some abstract successor stays within varpi
          double best = std::numeric_limits<double>::infinity();
          for (int d : succ) best = std::min(best, G(xd, abs.payloads[static_cast<std::size_t>(d)]));
          rep.clauses["3a"].note(varpi - best, tol);
          // 3(b)/(c): every abstract successor is matched by the concrete step
          for (int d : succ) {
            const auto& xhd = abs.payloads[static_cast<std::size_t>(d)];
            rep.clauses[notion == Notion::Init ? "3b" : "3c"].note(varpi - G(xd, xhd), tol);
            if (notion != Notion::Init && !abs.secret[static_cast<std::size_t>(d)]) {
              // 3(d): non-secret abstract successors need a non-secret
              // concrete match; the deterministic step is the candidate
              const double slack =
                  sub.secret_set.contains(xd) ? -1.0 : varpi - G(xd, xhd);
              rep.clauses["3d"].note(slack, tol);
            }
          }
          if (notion != Notion::Init && sub.secret_set.contains(xd)) {
            // 3(b): secret concrete successors need a secret abstract match
            double bests = std::numeric_limits<double>::infinity();
            for (int d : succ)
              if (abs.secret[static_cast<std::size_t>(d)])
                bests = std::min(bests, G(xd, abs.payloads[static_cast<std::size_t>(d)]));
            rep.clauses["3b"].note(varpi - bests, tol);
          }
        }
      }
    }
  }
  return rep;
}

// Samples the composed-network simulation-function conditions
//   V_tilde(x, x_hat) = max_i (varpi / varpi_i) G_i(x_i, x_hat_i)
// against the designed parameters: one-step containment of condition 3 and
// the internal-input mismatch bound ||w_i - w_hat_i|| <= vartheta_i. Works on
// the quantization data directly, so it also covers designs whose symbolic
// models would be too large to materialize.
struct ComposedFunctionReport {
  int samples = 0;
  long long mismatch_checked = 0, mismatch_failed = 0;
  long long step_checked = 0, step_failed = 0;
  long long out_of_domain = 0;  // sampled successors leaving X; no run of the model visits them
  double worst_mismatch_margin = std::numeric_limits<double>::infinity();
  double worst_step_margin = std::numeric_limits<double>::infinity();

  bool ok() const { return mismatch_failed + step_failed == 0; }
};

inline ComposedFunctionReport validate_composed_function(const NetworkSpec& net,
                                                         const DesignResult& design, int samples,
                                                         std::uint64_t seed, double tol = 1e-9) {
  ComposedFunctionReport rep;
  rep.samples = samples;
  Rng rng(seed);
  const int n = net.size();

  std::vector<GridSet> grids;
  for (int i = 1; i <= n; ++i)
    grids.push_back(quantize(net.sub(i).state_set, design.sub(i).eta));

  for (int iter = 0; iter < samples; ++iter) {
    // concrete state and a related abstract grid point per subsystem
    std::vector<std::vector<double>> xi(static_cast<std::size_t>(n)),
        xhi(static_cast<std::size_t>(n)), ui(static_cast<std::size_t>(n));
    bool found_all = true;
    for (int k = 0; k < n; ++k) {
      const SubsystemSpec& sub = net.sub(k + 1);
      xi[static_cast<std::size_t>(k)] = detail::sample_point(sub.state_set, rng);
      // G_i(x_i, x_hat_i) <= varpi_i keeps V_tilde <= varpi
      std::vector<std::vector<double>> close;
      for (const auto& p : grids[static_cast<std::size_t>(k)].points())
        if (sub.cert.g(xi[static_cast<std::size_t>(k)], p) <= design.sub(k + 1).varpi + tol)
          close.push_back(p);
      if (close.empty()) {
        found_all = false;
        break;
      }
      xhi[static_cast<std::size_t>(k)] = close[rng.below(close.size())];
      if (sub.input_dim > 0) ui[static_cast<std::size_t>(k)] = detail::sample_point(sub.input_set, rng);
    }
    if (!found_all) continue;

    // internal-input mismatch bound per subsystem
    bool mismatch_ok = true;
    for (int k = 0; k < n; ++k) {
      const SubsystemSpec& sub = net.sub(k + 1);
      if (sub.internal.empty()) continue;
      double d = 0;
      for (const auto& blk : sub.internal) {
        const auto y = net.sub(blk.source).output_block_value(sub.index,
                                                              xi[static_cast<std::size_t>(blk.source - 1)]);
        const auto yh = net.sub(blk.source).output_block_value(sub.index,
                                                               xhi[static_cast<std::size_t>(blk.source - 1)]);
        // phi = 0 wiring: the abstract internal input equals the neighbor output
        d = std::max(d, sup_dist(y, yh));
      }
      const double slack = design.sub(k + 1).vartheta - d;
      rep.worst_mismatch_margin = std::min(rep.worst_mismatch_margin, slack);
      ++rep.mismatch_checked;
      if (slack < -tol) {
        ++rep.mismatch_failed;
        mismatch_ok = false;
      }
    }
    if (!mismatch_ok) continue;

    // condition 3(a) with u_hat = u: each block's successor must stay within
    // varpi_i of some abstract successor on its grid
    for (int k = 0; k < n; ++k) {
      const SubsystemSpec& sub = net.sub(k + 1);
      std::vector<double> w, wh;
      for (const auto& blk : sub.internal) {
        const auto y = net.sub(blk.source).output_block_value(sub.index,
                                                              xi[static_cast<std::size_t>(blk.source - 1)]);
        const auto yh = net.sub(blk.source).output_block_value(sub.index,
                                                               xhi[static_cast<std::size_t>(blk.source - 1)]);
        w.insert(w.end(), y.begin(), y.end());
        wh.insert(wh.end(), yh.begin(), yh.end());
      }
      const auto xd = sub.step(xi[static_cast<std::size_t>(k)], ui[static_cast<std::size_t>(k)], w);
      const auto xhd_center = sub.step(xhi[static_cast<std::size_t>(k)], ui[static_cast<std::size_t>(k)], wh);
      if (!sub.state_set.contains(xd) || !sub.state_set.contains(xhd_center)) {
        ++rep.out_of_domain;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p :
           nearest_grid_points(xhd_center, grids[static_cast<std::size_t>(k)], design.sub(k + 1).eta))
        best = std::min(best, sub.cert.g(xd, p));
      const double slack = design.sub(k + 1).varpi - best;
      rep.worst_step_margin = std::min(rep.worst_step_margin, slack);
      ++rep.step_checked;
      if (slack < -tol) ++rep.step_failed;
    }
  }
  return rep;
}

}  // namespace opack

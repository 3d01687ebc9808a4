#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "opack/common.hpp"

namespace opack {

// Finite transition system with metric outputs.
//
// States carry real payload vectors (grid points after abstraction) and
// optional integer grid keys so composed systems can match states by exact
// integer arithmetic. Transitions are indexed (state, external input,
// internal input) -> successor set; systems without internal inputs use a
// single dummy internal slot. Verification requires the internal alphabet to
// be empty (composed or standalone systems).
struct FiniteSystem {
  struct Block {
    int target = 0;  // peer subsystem index, or the owner's own index for the external block
    int offset = 0;
    int dim = 0;
  };

  std::string name;
  int owner = 0;  // subsystem index for per-subsystem models, 0 for composed ones

  std::vector<std::vector<double>> payloads;        // per state, ascending lexicographic
  std::vector<std::vector<long long>> keys;         // optional grid keys, parallel to payloads
  std::vector<char> initial;
  std::vector<char> secret;
  std::vector<std::vector<double>> outputs;         // h(x) per state
  std::vector<Block> output_blocks;                 // structure of the output vector

  std::vector<std::vector<double>> inputs;          // external input alphabet
  std::vector<std::vector<double>> winputs;         // internal input alphabet (may be empty)
  std::vector<Block> winput_blocks;                 // structure of internal input vectors

  // succ[(s * |inputs| + u) * max(|winputs|,1) + w], each sorted ascending
  std::vector<std::vector<int>> succ;

  int state_count() const { return static_cast<int>(payloads.size()); }
  int input_count() const { return static_cast<int>(inputs.size()); }
  int winput_count() const { return static_cast<int>(winputs.size()); }
  bool has_internal() const { return !winputs.empty(); }

  const std::vector<int>& successors(int s, int u, int w = 0) const {
    const int nw = std::max(winput_count(), 1);
    return succ[static_cast<std::size_t>((s * input_count() + u) * nw + w)];
  }
  std::vector<int>& successors(int s, int u, int w = 0) {
    const int nw = std::max(winput_count(), 1);
    return succ[static_cast<std::size_t>((s * input_count() + u) * nw + w)];
  }

  // Input-erased successor relation, used by the opacity verifiers.
  std::vector<int> erased_successors(int s) const {
    if (has_internal()) throw Error("finite system: internal alphabet must be empty here");
    std::set<int> out;
    for (int u = 0; u < input_count(); ++u)
      for (int d : successors(s, u)) out.insert(d);
    return {out.begin(), out.end()};
  }

  std::vector<int> initial_states() const {
    std::vector<int> out;
    for (int s = 0; s < state_count(); ++s)
      if (initial[static_cast<std::size_t>(s)]) out.push_back(s);
    return out;
  }

  std::vector<double> output_block_value(int state, int target) const {
    for (const auto& b : output_blocks) {
      if (b.target == target) {
        const auto& y = outputs[static_cast<std::size_t>(state)];
        return {y.begin() + b.offset, y.begin() + b.offset + b.dim};
      }
    }
    throw Error("finite system: no output block toward " + std::to_string(target));
  }

  long long transition_count() const {
    long long n = 0;
    for (const auto& v : succ) n += static_cast<long long>(v.size());
    return n;
  }

  void validate() const {
    const int ns = state_count();
    if (ns == 0) throw Error("finite system: no states");
    if (input_count() == 0) throw Error("finite system: no external inputs");
    const std::size_t expected = static_cast<std::size_t>(ns) *
                                 static_cast<std::size_t>(input_count()) *
                                 static_cast<std::size_t>(std::max(winput_count(), 1));
    if (succ.size() != expected) throw Error("finite system: transition table size mismatch");
    for (int s = 0; s < ns; ++s) {
      bool live = false;
      for (int u = 0; u < input_count() && !live; ++u)
        for (int w = 0; w < std::max(winput_count(), 1) && !live; ++w)
          live = !successors(s, u, w).empty();
      if (!live)
        throw Error("finite system: blocking state " + std::to_string(s));
    }
    for (const auto& v : succ)
      for (int d : v)
        if (d < 0 || d >= ns) throw Error("finite system: successor out of range");
  }
};

// ---------------------------------------------------------------------------
// JSON form: deterministic, sorted state indices, 12 significant digits.
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json vec_json(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(round12(x));
  return a;
}

}  // namespace detail

inline nlohmann::json to_json(const FiniteSystem& t) {
  nlohmann::json j;
  j["schema"] = "opack-system-v1";
  j["name"] = t.name;
  j["owner"] = t.owner;
  nlohmann::json states = nlohmann::json::array();
  for (int s = 0; s < t.state_count(); ++s) {
    nlohmann::json st;
    st["index"] = s;
    st["payload"] = detail::vec_json(t.payloads[static_cast<std::size_t>(s)]);
    if (!t.keys.empty()) st["key"] = t.keys[static_cast<std::size_t>(s)];
    st["initial"] = static_cast<bool>(t.initial[static_cast<std::size_t>(s)]);
    st["secret"] = static_cast<bool>(t.secret[static_cast<std::size_t>(s)]);
    st["output"] = detail::vec_json(t.outputs[static_cast<std::size_t>(s)]);
    states.push_back(std::move(st));
  }
  j["states"] = std::move(states);
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& u : t.inputs) inputs.push_back(detail::vec_json(u));
  j["inputs"] = std::move(inputs);
  if (t.has_internal()) {
    nlohmann::json winputs = nlohmann::json::array();
    for (const auto& w : t.winputs) winputs.push_back(detail::vec_json(w));
    j["internal_inputs"] = std::move(winputs);
  }
  auto blocks_json = [](const std::vector<FiniteSystem::Block>& blocks) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& b : blocks)
      a.push_back({{"target", b.target}, {"offset", b.offset}, {"dim", b.dim}});
    return a;
  };
  j["output_blocks"] = blocks_json(t.output_blocks);
  if (!t.winput_blocks.empty()) j["internal_input_blocks"] = blocks_json(t.winput_blocks);
  nlohmann::json trans = nlohmann::json::array();
  const int nw = std::max(t.winput_count(), 1);
  for (int s = 0; s < t.state_count(); ++s)
    for (int u = 0; u < t.input_count(); ++u)
      for (int w = 0; w < nw; ++w)
        for (int d : t.successors(s, u, w)) {
          if (t.has_internal())
            trans.push_back({s, u, w, d});
          else
            trans.push_back({s, u, d});
        }
  j["transitions"] = std::move(trans);
  return j;
}

inline FiniteSystem system_from_json(const nlohmann::json& j) {
  if (!j.contains("schema") || j["schema"] != "opack-system-v1")
    throw Error("system file: unsupported schema");
  FiniteSystem t;
  t.name = j.value("name", std::string());
  t.owner = j.value("owner", 0);
  for (const auto& st : j.at("states")) {
    t.payloads.push_back(st.at("payload").get<std::vector<double>>());
    if (st.contains("key")) t.keys.push_back(st.at("key").get<std::vector<long long>>());
    t.initial.push_back(st.at("initial").get<bool>() ? 1 : 0);
    t.secret.push_back(st.at("secret").get<bool>() ? 1 : 0);
    t.outputs.push_back(st.at("output").get<std::vector<double>>());
  }
  for (const auto& u : j.at("inputs")) t.inputs.push_back(u.get<std::vector<double>>());
  if (j.contains("internal_inputs"))
    for (const auto& w : j["internal_inputs"]) t.winputs.push_back(w.get<std::vector<double>>());
  auto blocks_from = [](const nlohmann::json& a) {
    std::vector<FiniteSystem::Block> out;
    for (const auto& b : a)
      out.push_back({b.at("target").get<int>(), b.at("offset").get<int>(), b.at("dim").get<int>()});
    return out;
  };
  if (j.contains("output_blocks")) t.output_blocks = blocks_from(j["output_blocks"]);
  if (j.contains("internal_input_blocks"))
    t.winput_blocks = blocks_from(j["internal_input_blocks"]);
  const int nw = std::max(t.winput_count(), 1);
  t.succ.assign(static_cast<std::size_t>(t.state_count()) *
                    static_cast<std::size_t>(t.input_count()) * static_cast<std::size_t>(nw),
                {});
  for (const auto& e : j.at("transitions")) {
    if (t.has_internal()) {
      t.successors(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>())
          .push_back(e.at(3).get<int>());
    } else {
      t.successors(e.at(0).get<int>(), e.at(1).get<int>()).push_back(e.at(2).get<int>());
    }
  }
  for (auto& v : t.succ) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  t.validate();
  return t;
}

inline FiniteSystem load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open system file '" + path + "'");
  nlohmann::json j;
  in >> j;
  return system_from_json(j);
}

// ---------------------------------------------------------------------------
// DOT export, mirroring the usual drawing of such automata: node label on
// top, output below, secret states filled, initial states fed by sourceless
// arrows.
// ---------------------------------------------------------------------------

inline std::string format_values(const std::vector<double>& v) {
  std::string s;
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    std::snprintf(buf, sizeof(buf), "%.6g", v[i]);
    s += buf;
  }
  return s;
}

inline std::string to_dot(const FiniteSystem& t, bool reachable_only = false) {
  std::vector<bool> keep(static_cast<std::size_t>(t.state_count()), true);
  if (reachable_only) {
    keep.assign(static_cast<std::size_t>(t.state_count()), false);
    std::vector<int> queue = t.initial_states();
    for (int s : queue) keep[static_cast<std::size_t>(s)] = true;
    while (!queue.empty()) {
      const int s = queue.back();
      queue.pop_back();
      const int nw = std::max(t.winput_count(), 1);
      for (int u = 0; u < t.input_count(); ++u)
        for (int w = 0; w < nw; ++w)
          for (int d : t.successors(s, u, w))
            if (!keep[static_cast<std::size_t>(d)]) {
              keep[static_cast<std::size_t>(d)] = true;
              queue.push_back(d);
            }
    }
  }
  std::string out = "digraph opack {\n  rankdir=LR;\n  node [shape=Mrecord];\n";
  for (int s = 0; s < t.state_count(); ++s) {
    if (!keep[static_cast<std::size_t>(s)]) continue;
    out += "  s" + std::to_string(s) + " [label=\"{" +
           format_values(t.payloads[static_cast<std::size_t>(s)]) + "|" +
           format_values(t.outputs[static_cast<std::size_t>(s)]) + "}\"";
    if (t.secret[static_cast<std::size_t>(s)]) out += ", style=filled, fillcolor=\"#e87070\"";
    out += "];\n";
  }
  int anchor = 0;
  for (int s = 0; s < t.state_count(); ++s) {
    if (!keep[static_cast<std::size_t>(s)] || !t.initial[static_cast<std::size_t>(s)]) continue;
    const std::string src = "init" + std::to_string(anchor++);
    out += "  " + src + " [shape=point, style=invis];\n";
    out += "  " + src + " -> s" + std::to_string(s) + ";\n";
  }
  const int nw = std::max(t.winput_count(), 1);
  std::set<std::pair<int, int>> drawn;
  for (int s = 0; s < t.state_count(); ++s) {
    if (!keep[static_cast<std::size_t>(s)]) continue;
    for (int u = 0; u < t.input_count(); ++u)
      for (int w = 0; w < nw; ++w)
        for (int d : t.successors(s, u, w)) {
          if (!keep[static_cast<std::size_t>(d)]) continue;
          if (drawn.insert({s, d}).second)
            out += "  s" + std::to_string(s) + " -> s" + std::to_string(d) + ";\n";
        }
  }
  out += "}\n";
  return out;
}

// Exact equality of labeled automata after matching states by payload.
// Payload vectors must be unique per system for the match to be well defined.
inline bool same_labeled_automaton(const FiniteSystem& a, const FiniteSystem& b, double tol) {
  if (a.state_count() != b.state_count()) return false;
  if (a.inputs.size() != b.inputs.size()) return false;
  std::vector<int> match(static_cast<std::size_t>(a.state_count()), -1);
  for (int s = 0; s < a.state_count(); ++s) {
    for (int r = 0; r < b.state_count(); ++r) {
      if (a.payloads[static_cast<std::size_t>(s)].size() !=
          b.payloads[static_cast<std::size_t>(r)].size())
        continue;
      if (sup_dist(a.payloads[static_cast<std::size_t>(s)],
                   b.payloads[static_cast<std::size_t>(r)]) <= tol) {
        if (match[static_cast<std::size_t>(s)] != -1) return false;  // ambiguous payloads
        match[static_cast<std::size_t>(s)] = r;
      }
    }
    if (match[static_cast<std::size_t>(s)] == -1) return false;
  }
  for (int s = 0; s < a.state_count(); ++s) {
    const int r = match[static_cast<std::size_t>(s)];
    if (a.initial[static_cast<std::size_t>(s)] != b.initial[static_cast<std::size_t>(r)])
      return false;
    if (a.secret[static_cast<std::size_t>(s)] != b.secret[static_cast<std::size_t>(r)])
      return false;
    if (sup_dist(a.outputs[static_cast<std::size_t>(s)],
                 b.outputs[static_cast<std::size_t>(r)]) > tol)
      return false;
    if (a.has_internal() || b.has_internal())
      throw Error("same_labeled_automaton: expected composed systems");
    std::set<int> sa, sb;
    for (int u = 0; u < a.input_count(); ++u)
      for (int d : a.successors(s, u)) sa.insert(match[static_cast<std::size_t>(d)]);
    for (int u = 0; u < b.input_count(); ++u)
      for (int d : b.successors(r, u)) sb.insert(d);
    if (sa != sb) return false;
  }
  return true;
}

}  // namespace opack

#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "opack/expr.hpp"
#include "opack/geometry.hpp"
#include "opack/kinf.hpp"

namespace opack {

// Simulation-function shape G(x, x'). The default is the sup-norm difference;
// a quadratic form (x-x')^T P (x-x') is accepted but has to survive the
// certificate sample validation like everything else.
struct GFunction {
  enum class Kind { SupNorm, Quadratic };
  Kind kind = Kind::SupNorm;
  std::vector<std::vector<double>> P;

  double operator()(const std::vector<double>& a, const std::vector<double>& b) const {
    if (kind == Kind::SupNorm) return sup_dist(a, b);
    if (a.size() != b.size() || P.size() != a.size()) throw Error("G: dimension mismatch");
    double v = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) v += (a[i] - b[i]) * P[i][j] * (a[j] - b[j]);
    return v;
  }
};

struct IssCertificate {
  MonotoneFn kappa;
  MonotoneFn rho_int;
  MonotoneFn rho_ext;
  MonotoneFn alpha_lower;
  MonotoneFn alpha_upper;
  MonotoneFn gamma_hat;
  MonotoneFn lipschitz;
  GFunction g;

  // alpha = (lipschitz o alpha_lower^-1)^-1, never user-set.
  MonotoneFn alpha() const {
    return compose(lipschitz, alpha_lower.inverse()).inverse();
  }
};

struct OutputBlock {
  int target = 0;  // subsystem index receiving this block; target == owner is the external block
  std::vector<Expr> exprs;
};

struct InternalBlock {
  int source = 0;  // predecessor subsystem producing this block
  BoxUnion set;    // W_{i,source}
  std::optional<BoxUnion> output_set;  // declared Y_{source,i}, needed when phi > 0
};

struct SubsystemSpec {
  int index = 0;
  int state_dim = 0;
  int input_dim = 0;
  BoxUnion state_set;   // X, with X0 = X
  BoxUnion secret_set;  // X_S
  BoxUnion input_set;   // U
  std::vector<InternalBlock> internal;  // ascending source index
  std::vector<Expr> dynamics;
  std::vector<OutputBlock> outputs;     // ascending target index
  IssCertificate cert;

  int internal_dim() const {
    int n = 0;
    for (const auto& b : internal) n += b.set.dim();
    return n;
  }

  const OutputBlock* output_to(int target) const {
    for (const auto& b : outputs)
      if (b.target == target) return &b;
    return nullptr;
  }
  const InternalBlock* internal_from(int source) const {
    for (const auto& b : internal)
      if (b.source == source) return &b;
    return nullptr;
  }
  // Offset of the block from `source` inside the concatenated w vector.
  int internal_offset(int source) const {
    int off = 0;
    for (const auto& b : internal) {
      if (b.source == source) return off;
      off += b.set.dim();
    }
    throw Error("subsystem " + std::to_string(index) + ": no internal block from " +
                std::to_string(source));
  }

  std::vector<double> output_block_value(int target, const std::vector<double>& x) const {
    const OutputBlock* b = output_to(target);
    if (!b) throw Error("subsystem " + std::to_string(index) + ": no output block toward " +
                        std::to_string(target));
    EvalEnv env;
    env.x = x;
    std::vector<double> y;
    y.reserve(b->exprs.size());
    for (const auto& e : b->exprs) y.push_back(eval_expr(e, env));
    return y;
  }

  // Deterministic one-step successor f_i(x, u, w). Domain violations name the
  // offending set.
  std::vector<double> step(const std::vector<double>& x, const std::vector<double>& u,
                           const std::vector<double>& w) const {
    if (static_cast<int>(x.size()) != state_dim)
      throw Error("step: state dimension mismatch");
    if (!state_set.contains(x))
      throw Error("step: state outside X of subsystem " + std::to_string(index));
    if (static_cast<int>(u.size()) != input_dim)
      throw Error("step: input dimension mismatch");
    if (input_dim > 0 && !input_set.contains(u))
      throw Error("step: input outside U of subsystem " + std::to_string(index));
    if (static_cast<int>(w.size()) != internal_dim())
      throw Error("step: internal input dimension mismatch");
    int off = 0;
    for (const auto& b : internal) {
      std::vector<double> wb(w.begin() + off, w.begin() + off + b.set.dim());
      if (!b.set.contains(wb))
        throw Error("step: internal input outside W of subsystem " + std::to_string(index) +
                    " (block from " + std::to_string(b.source) + ")");
      off += b.set.dim();
    }
    EvalEnv env;
    env.x = x;
    env.u = u;
    env.w = w;
    std::vector<double> next;
    next.reserve(dynamics.size());
    for (const auto& e : dynamics) next.push_back(eval_expr(e, env));
    return next;
  }
};

struct NetworkSpec {
  std::vector<SubsystemSpec> subs;             // position k holds index k+1
  std::vector<std::pair<int, int>> edges;      // (from, to), 1-based

  int size() const { return static_cast<int>(subs.size()); }
  const SubsystemSpec& sub(int index) const {
    if (index < 1 || index > size()) throw Error("no subsystem " + std::to_string(index));
    return subs[static_cast<std::size_t>(index - 1)];
  }

  std::vector<int> predecessors(int i) const {
    std::vector<int> out;
    for (const auto& [f, t] : edges)
      if (t == i) out.push_back(f);
    std::sort(out.begin(), out.end());
    return out;
  }
  std::vector<int> successors(int j) const {
    std::vector<int> out;
    for (const auto& [f, t] : edges)
      if (f == j) out.push_back(t);
    std::sort(out.begin(), out.end());
    return out;
  }

  int state_dim() const {
    int n = 0;
    for (const auto& s : subs) n += s.state_dim;
    return n;
  }
  int input_dim() const {
    int n = 0;
    for (const auto& s : subs) n += s.input_dim;
    return n;
  }

  // Concrete network step with w_ij := y_ji = h_ji(x_j) (phi = 0).
  std::vector<double> network_step(const std::vector<double>& x,
                                   const std::vector<double>& u) const {
    if (static_cast<int>(x.size()) != state_dim()) throw Error("network_step: bad state size");
    if (static_cast<int>(u.size()) != input_dim()) throw Error("network_step: bad input size");
    std::vector<std::vector<double>> xi(subs.size()), ui(subs.size());
    std::size_t xoff = 0, uoff = 0;
    for (std::size_t k = 0; k < subs.size(); ++k) {
      xi[k].assign(x.begin() + static_cast<long>(xoff),
                   x.begin() + static_cast<long>(xoff + static_cast<std::size_t>(subs[k].state_dim)));
      ui[k].assign(u.begin() + static_cast<long>(uoff),
                   u.begin() + static_cast<long>(uoff + static_cast<std::size_t>(subs[k].input_dim)));
      xoff += static_cast<std::size_t>(subs[k].state_dim);
      uoff += static_cast<std::size_t>(subs[k].input_dim);
    }
    std::vector<double> next;
    next.reserve(x.size());
    for (std::size_t k = 0; k < subs.size(); ++k) {
      const SubsystemSpec& s = subs[k];
      std::vector<double> w;
      for (const auto& blk : s.internal) {
        auto y = sub(blk.source).output_block_value(s.index, xi[static_cast<std::size_t>(blk.source - 1)]);
        w.insert(w.end(), y.begin(), y.end());
      }
      auto nx = s.step(xi[k], ui[k], w);
      next.insert(next.end(), nx.begin(), nx.end());
    }
    return next;
  }
};

// ---------------------------------------------------------------------------
// Model file parsing. Sectioned plain text:
//
//   [subsystem.1]
//   state_set  = ["(0, 0.6)"]
//   secret_set = ["(0, 0.2]"]
//   input_set  = ["[0.145, 0.145]"]
//   internal_set.2 = ["(0, 0.6)"]      # W_{1,2}, block fed by subsystem 2
//   output_set.2   = ["(0, 0.6)"]      # declared Y_{1,2} box (optional)
//   dynamics = ["0.1*x1 + u1 + 0.05*w1"]
//   output.2 = ["x1"]                  # h_{1,2}; output.1 would be external
//   [subsystem.1.certificate]
//   kappa = "0.9*s"   ... (seven function strings)
//   [network]
//   edges = [[1, 2]]                   # subsystem 1 feeds subsystem 2
// ---------------------------------------------------------------------------

namespace detail {

struct IniValue {
  enum class Kind { String, Number, Array };
  Kind kind = Kind::String;
  std::string str;
  double num = 0;
  std::vector<IniValue> items;
};

inline void skip_ws(const std::string& s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

inline IniValue parse_ini_value(const std::string& s, std::size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) throw Error("model file: missing value");
  IniValue v;
  if (s[i] == '"') {
    ++i;
    const std::size_t end = s.find('"', i);
    if (end == std::string::npos) throw Error("model file: unterminated string");
    v.kind = IniValue::Kind::String;
    v.str = s.substr(i, end - i);
    i = end + 1;
    return v;
  }
  if (s[i] == '[') {
    ++i;
    v.kind = IniValue::Kind::Array;
    skip_ws(s, i);
    if (i < s.size() && s[i] == ']') {
      ++i;
      return v;
    }
    while (true) {
      v.items.push_back(parse_ini_value(s, i));
      skip_ws(s, i);
      if (i >= s.size()) throw Error("model file: unterminated array");
      if (s[i] == ',') {
        ++i;
        continue;
      }
      if (s[i] == ']') {
        ++i;
        return v;
      }
      throw Error("model file: expected ',' or ']' in array");
    }
  }
  char* end = nullptr;
  v.num = std::strtod(s.c_str() + i, &end);
  if (end == s.c_str() + i) throw Error("model file: malformed value near '" + s.substr(i, 12) + "'");
  v.kind = IniValue::Kind::Number;
  i = static_cast<std::size_t>(end - s.c_str());
  return v;
}

struct IniFile {
  // section -> key -> value, in file order
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, IniValue>>>> sections;

  const std::vector<std::pair<std::string, IniValue>>* find(const std::string& name) const {
    for (const auto& [n, kv] : sections)
      if (n == name) return &kv;
    return nullptr;
  }
};

inline IniFile parse_ini(const std::string& text) {
  IniFile file;
  std::vector<std::pair<std::string, IniValue>>* current = nullptr;
  std::istringstream in(text);
  std::string line, pending;
  int depth = 0;
  auto strip_comment = [](std::string l) {
    bool quoted = false;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (l[i] == '"') quoted = !quoted;
      if (l[i] == '#' && !quoted) return l.substr(0, i);
    }
    return l;
  };
  while (std::getline(in, line)) {
    line = strip_comment(line);
    std::string t = line;
    if (!pending.empty()) {
      pending += " " + t;
      for (char c : t) depth += (c == '[') - (c == ']');
      if (depth > 0) continue;
      t = pending;
      pending.clear();
    } else {
      std::size_t b = 0;
      skip_ws(t, b);
      if (b == t.size()) continue;
      if (t[b] == '[' && t.find('=') == std::string::npos) {
        const std::size_t end = t.find(']', b);
        if (end == std::string::npos) throw Error("model file: unterminated section header");
        file.sections.push_back({t.substr(b + 1, end - b - 1), {}});
        current = &file.sections.back().second;
        continue;
      }
      depth = 0;
      bool quoted = false;
      for (char c : t) {
        if (c == '"') quoted = !quoted;
        if (!quoted) depth += (c == '[') - (c == ']');
      }
      if (depth > 0) {
        pending = t;
        continue;
      }
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw Error("model file: expected 'key = value' near '" + t + "'");
    std::string key = t.substr(0, eq);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    std::size_t ks = 0;
    skip_ws(key, ks);
    key = key.substr(ks);
    if (!current) throw Error("model file: entry outside any section");
    std::size_t vi = eq + 1;
    IniValue v = parse_ini_value(t, vi);
    skip_ws(t, vi);
    if (vi != t.size()) throw Error("model file: trailing characters after value of '" + key + "'");
    current->push_back({key, std::move(v)});
  }
  if (!pending.empty()) throw Error("model file: unterminated array");
  return file;
}

inline std::vector<std::string> as_string_list(const IniValue& v, const std::string& key) {
  std::vector<std::string> out;
  if (v.kind == IniValue::Kind::String) {
    out.push_back(v.str);
    return out;
  }
  if (v.kind != IniValue::Kind::Array)
    throw Error("model file: '" + key + "' must be a string or list of strings");
  for (const auto& it : v.items) {
    if (it.kind != IniValue::Kind::String)
      throw Error("model file: '" + key + "' must contain strings");
    out.push_back(it.str);
  }
  return out;
}

}  // namespace detail

NetworkSpec parse_model(const std::string& text);

inline NetworkSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

inline NetworkSpec parse_model(const std::string& text) {
  using detail::IniValue;
  const detail::IniFile file = detail::parse_ini(text);

  NetworkSpec net;
  std::set<int> indices;
  for (const auto& [name, kv] : file.sections) {
    if (name.rfind("subsystem.", 0) != 0) continue;
    const std::string rest = name.substr(10);
    if (rest.find('.') != std::string::npos) continue;  // certificate sections later
    indices.insert(std::stoi(rest));
  }
  if (indices.empty()) throw Error("model file: no [subsystem.i] sections");
  int expect = 1;
  for (int idx : indices) {
    if (idx != expect++)
      throw Error("model file: subsystem indices must be 1..N without gaps");
  }

  // network section first so edges are known while reading subsystems
  const auto* netsec = file.find("network");
  if (netsec) {
    for (const auto& [key, value] : *netsec) {
      if (key != "edges") throw Error("model file: unknown [network] key '" + key + "'");
      if (value.kind != IniValue::Kind::Array)
        throw Error("model file: edges must be an array of [from, to] pairs");
      for (const auto& e : value.items) {
        if (e.kind != IniValue::Kind::Array || e.items.size() != 2 ||
            e.items[0].kind != IniValue::Kind::Number || e.items[1].kind != IniValue::Kind::Number)
          throw Error("model file: edges must be an array of [from, to] pairs");
        net.edges.push_back({static_cast<int>(e.items[0].num), static_cast<int>(e.items[1].num)});
      }
    }
  }
  for (const auto& [f, t] : net.edges) {
    if (f == t) throw Error("model file: self-loop on subsystem " + std::to_string(f));
    if (indices.count(f) == 0 || indices.count(t) == 0)
      throw Error("model file: edge references unknown subsystem");
  }

  for (int idx : indices) {
    const std::string base = "subsystem." + std::to_string(idx);
    const auto* sec = file.find(base);
    if (!sec) throw Error("model file: missing section [" + base + "]");
    SubsystemSpec sub;
    sub.index = idx;
    std::map<int, BoxUnion> internal_sets, output_sets;
    std::map<int, std::vector<std::string>> output_exprs;
    for (const auto& [key, value] : *sec) {
      if (key == "state_set") {
        sub.state_set = parse_box_union(detail::as_string_list(value, key));
      } else if (key == "secret_set") {
        sub.secret_set = parse_box_union(detail::as_string_list(value, key));
      } else if (key == "input_set") {
        sub.input_set = parse_box_union(detail::as_string_list(value, key));
      } else if (key == "dynamics") {
        for (const auto& s : detail::as_string_list(value, key))
          sub.dynamics.push_back(parse_expr(s));
      } else if (key.rfind("internal_set.", 0) == 0) {
        internal_sets[std::stoi(key.substr(13))] =
            parse_box_union(detail::as_string_list(value, key));
      } else if (key.rfind("output_set.", 0) == 0) {
        output_sets[std::stoi(key.substr(11))] =
            parse_box_union(detail::as_string_list(value, key));
      } else if (key.rfind("output.", 0) == 0) {
        output_exprs[std::stoi(key.substr(7))] = detail::as_string_list(value, key);
      } else {
        throw Error("model file: unknown key '" + key + "' in [" + base + "]");
      }
    }
    if (sub.state_set.empty()) throw Error("model file: [" + base + "] needs state_set");
    if (sub.secret_set.empty()) throw Error("model file: [" + base + "] needs secret_set");
    sub.state_dim = sub.state_set.dim();
    if (static_cast<int>(sub.dynamics.size()) != sub.state_dim)
      throw Error("model file: [" + base + "] dynamics arity differs from state dimension");
    sub.input_dim = sub.input_set.empty() ? 0 : sub.input_set.dim();
    if (sub.secret_set.dim() != sub.state_dim)
      throw Error("model file: [" + base + "] secret_set dimension mismatch");
    if (!subset_of(sub.secret_set, sub.state_set))
      throw Error("model file: [" + base + "] secret_set must be a subset of state_set");

    for (auto& [src, set] : internal_sets) {
      InternalBlock blk;
      blk.source = src;
      blk.set = set;
      auto it = output_sets.find(src);
      if (it != output_sets.end()) blk.output_set = it->second;
      sub.internal.push_back(std::move(blk));
    }
    for (auto& [tgt, exprs] : output_exprs) {
      OutputBlock blk;
      blk.target = tgt;
      for (const auto& s : exprs) blk.exprs.push_back(parse_expr(s));
      sub.outputs.push_back(std::move(blk));
    }

    const std::string certname = base + ".certificate";
    const auto* certsec = file.find(certname);
    if (!certsec) throw Error("model file: missing section [" + certname + "]");
    std::map<std::string, std::string> fns;
    for (const auto& [key, value] : *certsec) {
      if (value.kind != IniValue::Kind::String)
        throw Error("model file: certificate entry '" + key + "' must be a string");
      fns[key] = value.str;
    }
    auto fn = [&](const char* name) {
      auto it = fns.find(name);
      if (it == fns.end())
        throw Error("model file: [" + certname + "] is missing '" + name + "'");
      return classify_monotone(parse_expr(it->second), base + "." + name);
    };
    sub.cert.kappa = fn("kappa");
    sub.cert.rho_int = fn("rho_int");
    sub.cert.rho_ext = fn("rho_ext");
    sub.cert.alpha_lower = fn("alpha_lower");
    sub.cert.alpha_upper = fn("alpha_upper");
    sub.cert.gamma_hat = fn("gamma_hat");
    sub.cert.lipschitz = fn("lipschitz");
    // rho_int and rho_ext may vanish; the rest must be class K-infinity
    const std::pair<const char*, const MonotoneFn*> kinf_required[] = {
        {"kappa", &sub.cert.kappa},         {"alpha_lower", &sub.cert.alpha_lower},
        {"alpha_upper", &sub.cert.alpha_upper}, {"gamma_hat", &sub.cert.gamma_hat},
        {"lipschitz", &sub.cert.lipschitz}};
    for (const auto& [fname, f] : kinf_required) {
      if (f->is_zero())
        throw Error("model file: certificate entry '" + std::string(fname) + "' of [" + base +
                    "] must be strictly increasing");
    }
    for (const auto& [k, v] : fns) {
      static const std::set<std::string> known = {"kappa",       "rho_int",   "rho_ext",
                                                  "alpha_lower", "alpha_upper", "gamma_hat",
                                                  "lipschitz"};
      if (known.count(k) == 0)
        throw Error("model file: unknown certificate entry '" + k + "'");
    }
    net.subs.push_back(std::move(sub));
  }

  // cross validation against the declared edges
  for (const auto& [from, to] : net.edges) {
    const SubsystemSpec& src = net.sub(from);
    SubsystemSpec& dst = net.subs[static_cast<std::size_t>(to - 1)];
    const OutputBlock* y = src.output_to(to);
    if (!y)
      throw Error("model file: edge [" + std::to_string(from) + ", " + std::to_string(to) +
                  "] has no output." + std::to_string(to) + " block on subsystem " +
                  std::to_string(from));
    const InternalBlock* w = dst.internal_from(from);
    if (!w)
      throw Error("model file: edge [" + std::to_string(from) + ", " + std::to_string(to) +
                  "] has no internal_set." + std::to_string(from) + " block on subsystem " +
                  std::to_string(to));
    if (static_cast<int>(y->exprs.size()) != w->set.dim())
      throw Error("model file: dimension of w_" + std::to_string(to) + std::to_string(from) +
                  " must equal that of y_" + std::to_string(from) + std::to_string(to));
  }
  for (const auto& sub : net.subs) {
    for (const auto& blk : sub.internal) {
      bool found = false;
      for (const auto& [f, t] : net.edges) found = found || (f == blk.source && t == sub.index);
      if (!found)
        throw Error("model file: internal_set." + std::to_string(blk.source) + " on subsystem " +
                    std::to_string(sub.index) + " has no matching edge");
    }
    for (const auto& blk : sub.outputs) {
      if (blk.target == sub.index) continue;
      bool found = false;
      for (const auto& [f, t] : net.edges) found = found || (f == sub.index && t == blk.target);
      if (!found)
        throw Error("model file: output." + std::to_string(blk.target) + " on subsystem " +
                    std::to_string(sub.index) + " has no matching edge");
    }
    // variable binding
    const int wd = sub.internal_dim();
    auto check_vars = [&](const Expr& e, bool x_only, const char* where) {
      auto rec = [&](const Expr& n, auto&& self) -> void {
        if (n.node == Expr::Node::Variable) {
          switch (n.var_kind) {
            case VarKind::X:
              if (n.var_index >= sub.state_dim)
                throw Error("model file: x" + std::to_string(n.var_index + 1) +
                            " undeclared in " + where + " of subsystem " +
                            std::to_string(sub.index));
              break;
            case VarKind::U:
              if (x_only || n.var_index >= sub.input_dim)
                throw Error("model file: u" + std::to_string(n.var_index + 1) +
                            " undeclared in " + where + " of subsystem " +
                            std::to_string(sub.index));
              break;
            case VarKind::W:
              if (x_only || n.var_index >= wd)
                throw Error("model file: w" + std::to_string(n.var_index + 1) +
                            " undeclared in " + where + " of subsystem " +
                            std::to_string(sub.index));
              break;
            case VarKind::S:
              throw Error("model file: variable s is reserved for certificates");
          }
        }
        for (const auto& a : n.args) self(a, self);
      };
      rec(e, rec);
    };
    for (const auto& e : sub.dynamics) check_vars(e, false, "dynamics");
    for (const auto& blk : sub.outputs)
      for (const auto& e : blk.exprs) check_vars(e, true, "outputs");
  }
  // X0 = X for every subsystem, so the network-wide requirement X0 not a
  // subset of X_S reduces to some X_i exceeding X_iS.
  bool proper = false;
  for (const auto& sub : net.subs) proper = proper || !difference(sub.state_set, sub.secret_set).empty();
  if (!proper) throw Error("model file: X0 is contained in X_S; opacity is trivially violated");
  return net;
}

// ---------------------------------------------------------------------------
// Certificate sample validation
// ---------------------------------------------------------------------------

struct CertificateReport {
  int samples = 0;
  int iss_bound_failures = 0;       // alpha_lower <= G <= alpha_upper
  int iss_decrease_failures = 0;    // one-step decrease inequality
  int lipschitz_failures = 0;       // output Lipschitz bound
  int triangle_failures = 0;        // G(x,x') <= G(x,x'') + gamma_hat(|x'-x''|)
  double worst_margin = 0;          // most negative slack seen

  bool ok() const {
    return iss_bound_failures + iss_decrease_failures + lipschitz_failures + triangle_failures ==
           0;
  }
};

namespace detail {

inline std::vector<double> sample_point(const BoxUnion& a, Rng& rng) {
  const auto& boxes = a.boxes();
  if (boxes.empty()) throw Error("sample_point: empty set");
  const Box& b = boxes[static_cast<std::size_t>(rng.below(boxes.size()))];
  std::vector<double> p;
  p.reserve(b.faces.size());
  for (const auto& f : b.faces) p.push_back(rng.uniform(f.lo, f.hi));
  return p;
}

inline std::vector<double> sample_internal(const SubsystemSpec& sub, Rng& rng) {
  std::vector<double> w;
  for (const auto& blk : sub.internal) {
    auto v = sample_point(blk.set, rng);
    w.insert(w.end(), v.begin(), v.end());
  }
  return w;
}

}  // namespace detail

// Checks the incremental ISS inequalities, the output Lipschitz bound and the
// triangle-type bound on sampled tuples. Sampling can refute a certificate,
// never certify it; a failure rejects the certificate.
inline CertificateReport validate_certificate(const SubsystemSpec& sub, int samples,
                                              std::uint64_t seed, double tol = 1e-9) {
  Rng rng(seed);
  CertificateReport rep;
  rep.samples = samples;
  const IssCertificate& c = sub.cert;
  for (int n = 0; n < samples; ++n) {
    const auto x = detail::sample_point(sub.state_set, rng);
    const auto xp = detail::sample_point(sub.state_set, rng);
    std::vector<double> u, up;
    if (sub.input_dim > 0) {
      u = detail::sample_point(sub.input_set, rng);
      up = detail::sample_point(sub.input_set, rng);
    }
    const auto w = detail::sample_internal(sub, rng);
    const auto wp = detail::sample_internal(sub, rng);
    const double g = c.g(x, xp);
    const double dx = sup_dist(x, xp);

    auto note = [&rep, tol](double slack, int& counter) {
      if (slack < -tol) ++counter;
      rep.worst_margin = std::min(rep.worst_margin, slack);
    };
    note(g - c.alpha_lower(dx), rep.iss_bound_failures);
    note(c.alpha_upper(dx) - g, rep.iss_bound_failures);

    const auto fx = sub.step(x, u, w);
    const auto fxp = sub.step(xp, up, wp);
    const double du = u.empty() ? 0.0 : sup_dist(u, up);
    const double dw = w.empty() ? 0.0 : sup_dist(w, wp);
    note(-c.kappa(g) + c.rho_int(dw) + c.rho_ext(du) - (c.g(fx, fxp) - g),
         rep.iss_decrease_failures);

    for (const auto& blk : sub.outputs) {
      const auto y = sub.output_block_value(blk.target, x);
      const auto yp = sub.output_block_value(blk.target, xp);
      note(c.lipschitz(dx) - sup_dist(y, yp), rep.lipschitz_failures);
    }

    const auto xpp = detail::sample_point(sub.state_set, rng);
    note(c.g(x, xpp) + c.gamma_hat(sup_dist(xp, xpp)) - c.g(x, xp), rep.triangle_failures);
  }
  return rep;
}

}  // namespace opack

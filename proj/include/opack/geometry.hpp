#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opack/common.hpp"

namespace opack {

// One axis of a box. Degenerate intervals (lo == hi) stand for single points
// and must have both ends closed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  double span() const { return hi - lo; }

  bool empty() const {
    if (lo > hi) return true;
    if (lo == hi) return lo_open || hi_open;
    return false;
  }

  bool contains(double v) const {
    const double tl = abs_tol(lo), th = abs_tol(hi);
    const bool above = lo_open ? (v - lo > tl) : (v - lo >= -tl);
    const bool below = hi_open ? (hi - v > th) : (hi - v >= -th);
    return above && below;
  }

  std::string to_string() const;
};

struct Box {
  std::vector<Interval> faces;

  int dim() const { return static_cast<int>(faces.size()); }
  bool empty() const {
    for (const auto& f : faces)
      if (f.empty()) return true;
    return faces.empty();
  }
  bool degenerate() const {
    for (const auto& f : faces)
      if (f.lo != f.hi) return false;
    return true;
  }
  bool contains(const std::vector<double>& p) const {
    if (static_cast<int>(p.size()) != dim()) return false;
    for (int d = 0; d < dim(); ++d)
      if (!faces[static_cast<std::size_t>(d)].contains(p[static_cast<std::size_t>(d)])) return false;
    return true;
  }
  double min_edge() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& f : faces) m = std::min(m, f.span());
    return m;
  }
  std::string to_string() const;
};

// Finite union of axis-aligned boxes, all of the same dimension.
class BoxUnion {
 public:
  BoxUnion() = default;
  explicit BoxUnion(std::vector<Box> boxes) : boxes_(std::move(boxes)) {
    for (auto it = boxes_.begin(); it != boxes_.end();) {
      it = it->empty() ? boxes_.erase(it) : std::next(it);
    }
    if (!boxes_.empty()) {
      dim_ = boxes_.front().dim();
      for (const auto& b : boxes_) {
        if (b.dim() != dim_) throw Error("box union: mixed dimensions");
        for (const auto& f : b.faces) {
          if (f.lo > f.hi) throw Error("box union: lower bound above upper bound");
          if (f.lo == f.hi && (f.lo_open || f.hi_open))
            throw Error("box union: degenerate interval must be closed");
        }
      }
    }
  }

  static BoxUnion single(Box b) { return BoxUnion(std::vector<Box>{std::move(b)}); }

  bool empty() const { return boxes_.empty(); }
  int dim() const { return dim_; }
  const std::vector<Box>& boxes() const { return boxes_; }

  bool contains(const std::vector<double>& p) const {
    for (const auto& b : boxes_)
      if (b.contains(p)) return true;
    return false;
  }

  bool all_degenerate() const {
    if (boxes_.empty()) return false;
    for (const auto& b : boxes_)
      if (!b.degenerate()) return false;
    return true;
  }

  std::string to_string() const;

 private:
  std::vector<Box> boxes_;
  int dim_ = 0;
};

// Minimum edge length over all boxes of the union.
inline double boxspan(const BoxUnion& a) {
  if (a.empty()) throw Error("boxspan: empty set");
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : a.boxes()) m = std::min(m, b.min_edge());
  return m;
}

// Per-dimension variant, used with vector quantization parameters.
inline double boxspan_dim(const BoxUnion& a, int d) {
  if (a.empty()) throw Error("boxspan: empty set");
  if (d < 0 || d >= a.dim()) throw Error("boxspan: dimension out of range");
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : a.boxes()) m = std::min(m, b.faces[static_cast<std::size_t>(d)].span());
  return m;
}

// Minkowski sum with the closed infinity-norm ball of radius theta.
inline BoxUnion inflate(const BoxUnion& a, double theta) {
  if (theta < 0) throw Error("inflate: negative radius");
  if (theta == 0) return a;
  std::vector<Box> out;
  out.reserve(a.boxes().size());
  for (const auto& b : a.boxes()) {
    Box g = b;
    for (auto& f : g.faces) {
      f.lo -= theta;
      f.hi += theta;
      f.lo_open = false;
      f.hi_open = false;
    }
    out.push_back(std::move(g));
  }
  return BoxUnion(std::move(out));
}

namespace detail {

inline std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  Interval r;
  if (a.lo > b.lo) {
    r.lo = a.lo;
    r.lo_open = a.lo_open;
  } else if (b.lo > a.lo) {
    r.lo = b.lo;
    r.lo_open = b.lo_open;
  } else {
    r.lo = a.lo;
    r.lo_open = a.lo_open || b.lo_open;
  }
  if (a.hi < b.hi) {
    r.hi = a.hi;
    r.hi_open = a.hi_open;
  } else if (b.hi < a.hi) {
    r.hi = b.hi;
    r.hi_open = b.hi_open;
  } else {
    r.hi = a.hi;
    r.hi_open = a.hi_open || b.hi_open;
  }
  if (r.empty()) return std::nullopt;
  return r;
}

// Pieces of box a not covered by box b, as a list of disjoint boxes.
inline void subtract_box(const Box& a, const Box& b, std::vector<Box>& out) {
  const int m = a.dim();
  for (int d = 0; d < m; ++d) {
    if (!intersect(a.faces[static_cast<std::size_t>(d)], b.faces[static_cast<std::size_t>(d)]))
      { out.push_back(a); return; }
  }
  Box cur = a;
  for (int d = 0; d < m; ++d) {
    const Interval& ia = cur.faces[static_cast<std::size_t>(d)];
    const Interval& ib = b.faces[static_cast<std::size_t>(d)];
    // part of cur below b in dimension d
    Interval below{ia.lo, ib.lo, ia.lo_open, !ib.lo_open};
    if (!below.empty() && below.hi - below.lo >= 0) {
      Box piece = cur;
      piece.faces[static_cast<std::size_t>(d)] = below;
      if (!piece.empty()) out.push_back(piece);
    }
    // part of cur above b in dimension d
    Interval above{ib.hi, ia.hi, !ib.hi_open, ia.hi_open};
    if (!above.empty()) {
      Box piece = cur;
      piece.faces[static_cast<std::size_t>(d)] = above;
      if (!piece.empty()) out.push_back(piece);
    }
    auto mid = intersect(ia, ib);
    if (!mid) return;
    cur.faces[static_cast<std::size_t>(d)] = *mid;
  }
  // cur is now inside b and dropped
}

}  // namespace detail

inline BoxUnion intersect(const BoxUnion& a, const BoxUnion& b) {
  std::vector<Box> out;
  for (const auto& ba : a.boxes()) {
    for (const auto& bb : b.boxes()) {
      Box r;
      bool ok = true;
      for (int d = 0; d < a.dim() && ok; ++d) {
        auto f = detail::intersect(ba.faces[static_cast<std::size_t>(d)],
                                   bb.faces[static_cast<std::size_t>(d)]);
        if (!f)
          ok = false;
        else
          r.faces.push_back(*f);
      }
      if (ok) out.push_back(std::move(r));
    }
  }
  return BoxUnion(std::move(out));
}

inline BoxUnion difference(const BoxUnion& a, const BoxUnion& b) {
  std::vector<Box> cur;
  for (const auto& ba : a.boxes()) cur.push_back(ba);
  for (const auto& bb : b.boxes()) {
    std::vector<Box> next;
    for (const auto& piece : cur) detail::subtract_box(piece, bb, next);
    cur = std::move(next);
  }
  return BoxUnion(std::move(cur));
}

inline bool subset_of(const BoxUnion& a, const BoxUnion& b) {
  return a.empty() || difference(a, b).empty();
}

// Quantization [A]_eta of a box union. Three shapes arise:
//   - a lattice grid for eta > 0 (the usual case),
//   - the explicit point list of an all-degenerate union at eta = 0,
//   - the symbolic marker [A]_0 = A for non-finite sets at eta = 0.
class GridSet {
 public:
  enum class Mode { Lattice, Points, Symbolic };

  static GridSet symbolic(BoxUnion source) {
    GridSet g;
    g.mode_ = Mode::Symbolic;
    g.source_ = std::move(source);
    return g;
  }
  static GridSet points(BoxUnion source) {
    GridSet g;
    g.mode_ = Mode::Points;
    g.source_ = std::move(source);
    for (const auto& b : g.source_.boxes()) {
      std::vector<double> p;
      for (const auto& f : b.faces) p.push_back(f.lo);
      g.payloads_.push_back(std::move(p));
    }
    std::sort(g.payloads_.begin(), g.payloads_.end());
    g.payloads_.erase(std::unique(g.payloads_.begin(), g.payloads_.end()), g.payloads_.end());
    return g;
  }
  static GridSet lattice(BoxUnion source, std::vector<double> eta,
                         std::vector<std::vector<long long>> keys) {
    GridSet g;
    g.mode_ = Mode::Lattice;
    g.source_ = std::move(source);
    g.eta_ = std::move(eta);
    g.keys_ = std::move(keys);
    std::sort(g.keys_.begin(), g.keys_.end());
    g.keys_.erase(std::unique(g.keys_.begin(), g.keys_.end()), g.keys_.end());
    for (const auto& k : g.keys_) g.payloads_.push_back(g.payload_of(k));
    return g;
  }

  Mode mode() const { return mode_; }
  bool finite() const { return mode_ != Mode::Symbolic; }
  const BoxUnion& source() const { return source_; }
  const std::vector<double>& eta() const { return eta_; }

  std::size_t size() const {
    if (!finite()) throw Error("grid set is not finite");
    return payloads_.size();
  }
  // Lexicographically ascending.
  const std::vector<std::vector<double>>& points() const {
    if (!finite()) throw Error("grid set is not finite");
    return payloads_;
  }
  const std::vector<std::vector<long long>>& keys() const {
    if (mode_ != Mode::Lattice) throw Error("grid set has no lattice keys");
    return keys_;
  }

  std::vector<double> payload_of(const std::vector<long long>& key) const {
    std::vector<double> p(key.size());
    for (std::size_t d = 0; d < key.size(); ++d) p[d] = static_cast<double>(key[d]) * eta_[d];
    return p;
  }

  bool contains_key(const std::vector<long long>& key) const {
    if (mode_ != Mode::Lattice) throw Error("grid set has no lattice keys");
    return std::binary_search(keys_.begin(), keys_.end(), key);
  }

  // Membership of an arbitrary point: lattice roundedness within relative
  // tolerance plus containment in the source set.
  bool contains(const std::vector<double>& p) const {
    switch (mode_) {
      case Mode::Symbolic:
        return source_.contains(p);
      case Mode::Points: {
        for (const auto& q : payloads_) {
          bool eq = q.size() == p.size();
          for (std::size_t d = 0; eq && d < q.size(); ++d) eq = nearly_equal(q[d], p[d]);
          if (eq) return true;
        }
        return false;
      }
      case Mode::Lattice: {
        if (p.size() != eta_.size()) return false;
        std::vector<long long> key(p.size());
        for (std::size_t d = 0; d < p.size(); ++d) {
          const double q = p[d] / eta_[d];
          const double r = std::round(q);
          if (std::fabs(q - r) > kRelTol * std::max(1.0, std::fabs(q))) return false;
          key[d] = static_cast<long long>(r);
        }
        return contains_key(key);
      }
    }
    return false;
  }

 private:
  Mode mode_ = Mode::Symbolic;
  BoxUnion source_;
  std::vector<double> eta_;
  std::vector<std::vector<long long>> keys_;      // lattice mode
  std::vector<std::vector<double>> payloads_;     // lattice and point modes
};

namespace detail {

inline void enumerate_box(const Box& b, const std::vector<double>& eta,
                          std::set<std::vector<long long>>& out) {
  const int m = b.dim();
  std::vector<long long> klo(static_cast<std::size_t>(m)), khi(static_cast<std::size_t>(m));
  for (int d = 0; d < m; ++d) {
    const auto& f = b.faces[static_cast<std::size_t>(d)];
    const double e = eta[static_cast<std::size_t>(d)];
    klo[static_cast<std::size_t>(d)] =
        static_cast<long long>(std::ceil(f.lo / e - kRelTol * std::max(1.0, std::fabs(f.lo / e))));
    khi[static_cast<std::size_t>(d)] =
        static_cast<long long>(std::floor(f.hi / e + kRelTol * std::max(1.0, std::fabs(f.hi / e))));
    if (khi[static_cast<std::size_t>(d)] < klo[static_cast<std::size_t>(d)]) return;
  }
  std::vector<long long> k = klo;
  while (true) {
    std::vector<double> p(static_cast<std::size_t>(m));
    bool inside = true;
    for (int d = 0; d < m && inside; ++d) {
      p[static_cast<std::size_t>(d)] =
          static_cast<double>(k[static_cast<std::size_t>(d)]) * eta[static_cast<std::size_t>(d)];
      inside = b.faces[static_cast<std::size_t>(d)].contains(p[static_cast<std::size_t>(d)]);
    }
    if (inside) out.insert(k);
    int d = m - 1;
    while (d >= 0) {
      if (++k[static_cast<std::size_t>(d)] <= khi[static_cast<std::size_t>(d)]) break;
      k[static_cast<std::size_t>(d)] = klo[static_cast<std::size_t>(d)];
      --d;
    }
    if (d < 0) break;
  }
}

}  // namespace detail

// Lattice points of a set without the coarseness precondition; used for
// derived sets (inflated secrets clipped to X) whose fragments may be
// thinner than eta.
inline GridSet lattice_points(const BoxUnion& a, double eta) {
  if (a.empty()) throw Error("lattice_points: empty set");
  if (eta <= 0) throw Error("lattice_points: eta must be positive");
  const std::vector<double> etas(static_cast<std::size_t>(a.dim()), eta);
  std::set<std::vector<long long>> keys;
  for (const auto& b : a.boxes()) detail::enumerate_box(b, etas, keys);
  return GridSet::lattice(a, etas,
                          std::vector<std::vector<long long>>(keys.begin(), keys.end()));
}

inline GridSet quantize(const BoxUnion& a, const std::vector<double>& eta) {
  if (a.empty()) throw Error("quantize: empty set");
  if (static_cast<int>(eta.size()) != a.dim()) throw Error("quantize: eta dimension mismatch");
  bool all_zero = true, any_zero = false;
  for (double e : eta) {
    if (e < 0) throw Error("quantize: negative eta");
    all_zero = all_zero && e == 0;
    any_zero = any_zero || e == 0;
  }
  if (any_zero && !all_zero) throw Error("quantize: mixed zero and positive eta");
  if (all_zero) {
    // [A]_0 := A
    return a.all_degenerate() ? GridSet::points(a) : GridSet::symbolic(a);
  }
  for (int d = 0; d < a.dim(); ++d) {
    if (eta[static_cast<std::size_t>(d)] >
        boxspan_dim(a, d) + abs_tol(eta[static_cast<std::size_t>(d)]))
      throw Error("quantize: grid too coarse");
  }
  std::set<std::vector<long long>> keys;
  for (const auto& b : a.boxes()) detail::enumerate_box(b, eta, keys);
  return GridSet::lattice(a, eta,
                          std::vector<std::vector<long long>>(keys.begin(), keys.end()));
}

inline GridSet quantize(const BoxUnion& a, double eta) {
  if (a.empty()) throw Error("quantize: empty set");
  return quantize(a, std::vector<double>(static_cast<std::size_t>(a.dim()), eta));
}

// All grid points q with ||q - p||_inf <= eta. May be empty.
inline std::vector<std::vector<double>> nearest_grid_points(const std::vector<double>& p,
                                                            const GridSet& g, double eta) {
  if (!g.finite()) throw Error("nearest_grid_points: grid set is not finite");
  std::vector<std::vector<double>> out;
  if (g.mode() == GridSet::Mode::Points) {
    for (const auto& q : g.points()) {
      if (sup_dist(q, p) <= eta + abs_tol(eta)) out.push_back(q);
    }
    return out;
  }
  const auto& step = g.eta();
  if (p.size() != step.size()) throw Error("nearest_grid_points: dimension mismatch");
  const int m = static_cast<int>(p.size());
  std::vector<long long> klo(static_cast<std::size_t>(m)), khi(static_cast<std::size_t>(m));
  for (int d = 0; d < m; ++d) {
    const double e = step[static_cast<std::size_t>(d)];
    const double lo = (p[static_cast<std::size_t>(d)] - eta) / e;
    const double hi = (p[static_cast<std::size_t>(d)] + eta) / e;
    klo[static_cast<std::size_t>(d)] =
        static_cast<long long>(std::ceil(lo - kRelTol * std::max(1.0, std::fabs(lo))));
    khi[static_cast<std::size_t>(d)] =
        static_cast<long long>(std::floor(hi + kRelTol * std::max(1.0, std::fabs(hi))));
    if (khi[static_cast<std::size_t>(d)] < klo[static_cast<std::size_t>(d)]) return out;
  }
  std::vector<long long> k = klo;
  while (true) {
    if (g.contains_key(k)) {
      auto q = g.payload_of(k);
      if (sup_dist(q, p) <= eta + abs_tol(eta)) out.push_back(std::move(q));
    }
    int d = m - 1;
    while (d >= 0) {
      if (++k[static_cast<std::size_t>(d)] <= khi[static_cast<std::size_t>(d)]) break;
      k[static_cast<std::size_t>(d)] = klo[static_cast<std::size_t>(d)];
      --d;
    }
    if (d < 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Interval strings: "(0, 0.6)" open, "[0, 0.6]" closed, mixed forms allowed;
// products of intervals are joined by "x".
inline std::string Interval::to_string() const {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%c%.12g, %.12g%c", lo_open ? '(' : '[', lo, hi,
                hi_open ? ')' : ']');
  return buf;
}

inline std::string Box::to_string() const {
  std::string s;
  for (std::size_t d = 0; d < faces.size(); ++d) {
    if (d) s += " x ";
    s += faces[d].to_string();
  }
  return s;
}

inline std::string BoxUnion::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (i) s += " u ";
    s += boxes_[i].to_string();
  }
  return s.empty() ? "{}" : s;
}

inline Interval parse_interval(const std::string& text) {
  std::size_t i = 0;
  auto skip_ws = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
  skip_ws();
  if (i >= text.size() || (text[i] != '[' && text[i] != '(' && text[i] != ']'))
    throw Error("interval: expected '[', '(' or ']' in \"" + text + "\"");
  Interval r;
  r.lo_open = text[i] == '(' || text[i] == ']';
  ++i;
  char* end = nullptr;
  r.lo = std::strtod(text.c_str() + i, &end);
  if (end == text.c_str() + i) throw Error("interval: bad lower bound in \"" + text + "\"");
  i = static_cast<std::size_t>(end - text.c_str());
  skip_ws();
  if (i >= text.size() || text[i] != ',') throw Error("interval: expected ',' in \"" + text + "\"");
  ++i;
  r.hi = std::strtod(text.c_str() + i, &end);
  if (end == text.c_str() + i) throw Error("interval: bad upper bound in \"" + text + "\"");
  i = static_cast<std::size_t>(end - text.c_str());
  skip_ws();
  if (i >= text.size() || (text[i] != ']' && text[i] != ')' && text[i] != '['))
    throw Error("interval: expected ']', ')' or '[' in \"" + text + "\"");
  r.hi_open = text[i] == ')' || text[i] == '[';
  ++i;
  skip_ws();
  if (i != text.size()) throw Error("interval: trailing characters in \"" + text + "\"");
  if (r.lo > r.hi) throw Error("interval: lower bound above upper bound in \"" + text + "\"");
  if (r.lo == r.hi && (r.lo_open || r.hi_open))
    throw Error("interval: empty interval \"" + text + "\"");
  return r;
}

// A product of intervals joined by "x", e.g. "(0, 0.2] x [0.4, 0.6)".
inline Box parse_box(const std::string& text) {
  Box b;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find('x', pos);
    std::string part =
        next == std::string::npos ? text.substr(pos) : text.substr(pos, next - pos);
    b.faces.push_back(parse_interval(part));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (b.faces.empty()) throw Error("box: empty description");
  return b;
}

inline BoxUnion parse_box_union(const std::vector<std::string>& parts) {
  std::vector<Box> boxes;
  boxes.reserve(parts.size());
  for (const auto& p : parts) boxes.push_back(parse_box(p));
  return BoxUnion(std::move(boxes));
}

}  // namespace opack

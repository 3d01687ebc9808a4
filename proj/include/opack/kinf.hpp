#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opack/common.hpp"

namespace opack {

// A class-K-infinity comparison function (strictly increasing, f(0) = 0,
// unbounded), or the constant zero where the interconnection gains vanish.
//
// Linear gains and power laws carry closed forms for inversion and
// composition; anything else is kept as an evaluable monotone callable whose
// inverse is computed by bisection. Such numeric functions are accepted for
// certificate evaluation but are rejected by the decision procedures
// (strictly_below_identity), which must stay exact.
class MonotoneFn {
 public:
  MonotoneFn() = default;  // identity

  static MonotoneFn zero() {
    MonotoneFn f;
    f.kind_ = Kind::Zero;
    return f;
  }
  static MonotoneFn identity() { return linear(1.0); }
  static MonotoneFn linear(double c) {
    if (c < 0) throw Error("monotone function: negative linear gain");
    if (c == 0) return zero();
    MonotoneFn f;
    f.kind_ = Kind::Linear;
    f.a_ = c;
    return f;
  }
  // a * s^b
  static MonotoneFn power(double a, double b) {
    if (a <= 0 || b <= 0) throw Error("monotone function: power law needs a > 0, b > 0");
    if (b == 1) return linear(a);
    MonotoneFn f;
    f.kind_ = Kind::Power;
    f.a_ = a;
    f.b_ = b;
    return f;
  }
  static MonotoneFn numeric(std::function<double(double)> fwd, std::string name) {
    MonotoneFn f;
    f.kind_ = Kind::Numeric;
    f.num_ = std::make_shared<Numeric>(Numeric{std::move(fwd), std::move(name), false});
    return f;
  }

  bool is_zero() const { return kind_ == Kind::Zero; }
  bool is_linear() const { return kind_ == Kind::Linear; }
  bool is_identity() const { return kind_ == Kind::Linear && a_ == 1.0; }
  double gain() const {
    if (kind_ == Kind::Zero) return 0.0;
    if (kind_ != Kind::Linear) throw Error("monotone function: not linear");
    return a_;
  }

  double operator()(double s) const {
    if (s < 0) throw Error("monotone function: negative argument");
    switch (kind_) {
      case Kind::Zero:
        return 0.0;
      case Kind::Linear:
        return a_ * s;
      case Kind::Power:
        return a_ * std::pow(s, b_);
      case Kind::Numeric:
        return num_->inverted ? bisect(num_->fwd, s) : num_->fwd(s);
      case Kind::Chain: {
        double v = s;
        for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) v = (*it)(v);
        return v;
      }
    }
    return 0.0;
  }

  MonotoneFn inverse() const {
    switch (kind_) {
      case Kind::Zero:
        throw Error("monotone function: not invertible");
      case Kind::Linear:
        return linear(1.0 / a_);
      case Kind::Power:
        return power(std::pow(a_, -1.0 / b_), 1.0 / b_);
      case Kind::Numeric: {
        MonotoneFn f;
        f.kind_ = Kind::Numeric;
        f.num_ = std::make_shared<Numeric>(
            Numeric{num_->fwd, num_->name + "^-1", !num_->inverted});
        return f;
      }
      case Kind::Chain: {
        MonotoneFn f;
        f.kind_ = Kind::Chain;
        for (auto it = chain_.rbegin(); it != chain_.rend(); ++it)
          f.chain_.push_back(it->inverse());
        return f;
      }
    }
    throw Error("monotone function: not invertible");
  }

  // True iff f(s) < s for all s > 0. Exact for linear gains and zero;
  // everything else is rejected rather than guessed. A caller holding an
  // externally verified bound f(s) <= c*s with c < 1 may pass it in.
  bool strictly_below_identity(std::optional<double> verified_linear_bound = std::nullopt) const {
    switch (kind_) {
      case Kind::Zero:
        return true;
      case Kind::Linear:
        return a_ < 1.0;
      case Kind::Power:
        throw Error(
            "strictly_below_identity: undecidable for power laws with exponent != 1; "
            "f(s) < s cannot hold for all s > 0");
      case Kind::Numeric:
      case Kind::Chain:
        if (verified_linear_bound && *verified_linear_bound < 1.0) return true;
        throw Error("strictly_below_identity: undecidable on samples");
    }
    return false;
  }

  std::string describe() const {
    char buf[96];
    switch (kind_) {
      case Kind::Zero:
        return "0";
      case Kind::Linear:
        if (a_ == 1.0) return "s";
        std::snprintf(buf, sizeof(buf), "%.12g*s", a_);
        return buf;
      case Kind::Power:
        std::snprintf(buf, sizeof(buf), "%.12g*s^%.12g", a_, b_);
        return buf;
      case Kind::Numeric:
        return num_->name;
      case Kind::Chain: {
        std::string s;
        for (std::size_t i = 0; i < chain_.size(); ++i) {
          if (i) s += " o ";
          s += chain_[i].describe();
        }
        return s;
      }
    }
    return "?";
  }

  friend MonotoneFn compose(const MonotoneFn& f, const MonotoneFn& g);

 private:
  struct Numeric {
    std::function<double(double)> fwd;
    std::string name;
    bool inverted;
  };
  enum class Kind { Zero, Linear, Power, Numeric, Chain };

  // Solve fwd(t) = y on t >= 0 to absolute tolerance 1e-10.
  static double bisect(const std::function<double(double)>& fwd, double y) {
    if (y <= 0) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (fwd(hi) < y) {
      hi *= 2.0;
      if (++guard > 2000) throw Error("monotone function: inverse bracket not found");
    }
    double lo = 0.0;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (fwd(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  Kind kind_ = Kind::Linear;
  double a_ = 1.0;
  double b_ = 1.0;
  std::shared_ptr<const Numeric> num_;
  std::vector<MonotoneFn> chain_;  // f = chain_[0] o chain_[1] o ...
};

// (f o g)(s) = f(g(s)). Closed forms collapse; mixed chains are kept as-is.
inline MonotoneFn compose(const MonotoneFn& f, const MonotoneFn& g) {
  using Kind = MonotoneFn::Kind;
  if (f.kind_ == Kind::Zero || g.kind_ == Kind::Zero) return MonotoneFn::zero();
  if (f.is_identity()) return g;
  if (g.is_identity()) return f;
  const bool f_closed = f.kind_ == Kind::Linear || f.kind_ == Kind::Power;
  const bool g_closed = g.kind_ == Kind::Linear || g.kind_ == Kind::Power;
  if (f_closed && g_closed) {
    // (a1 s^b1) o (a2 s^b2) = a1*a2^b1 * s^(b1*b2)
    const double a = f.a_ * std::pow(g.a_, f.b_);
    const double b = f.b_ * g.b_;
    return b == 1.0 ? MonotoneFn::linear(a) : MonotoneFn::power(a, b);
  }
  MonotoneFn h;
  h.kind_ = Kind::Chain;
  auto append = [&h](const MonotoneFn& x) {
    if (x.kind_ == Kind::Chain)
      h.chain_.insert(h.chain_.end(), x.chain_.begin(), x.chain_.end());
    else
      h.chain_.push_back(x);
  };
  append(f);
  append(g);
  return h;
}

}  // namespace opack

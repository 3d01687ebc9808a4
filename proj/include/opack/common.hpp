#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace opack {

// Library-wide error type; messages are meant to be shown verbatim by the CLI.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Relative tolerance used for grid membership and set boundary tests.
inline constexpr double kRelTol = 1e-9;

inline double abs_tol(double scale) {
  return kRelTol * std::max(1.0, std::fabs(scale));
}

inline bool nearly_equal(double a, double b) {
  return std::fabs(a - b) <= kRelTol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline double sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("sup_dist: dimension mismatch");
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

// Deterministic RNG wrapper. Raw mt19937_64 output is mapped to doubles by
// hand because std::uniform_real_distribution is not portable across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return n == 0 ? 0 : eng_() % n;  // modulo bias is irrelevant for test-scale n
  }

 private:
  std::mt19937_64 eng_;
};

// FNV-1a, used to stamp model files into reports.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

// Rounds a double to 12 significant digits so reports serialize identically
// across runs and platforms.
inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace opack

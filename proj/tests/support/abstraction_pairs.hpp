#pragma once

// Seeded pairs of symbolic models of random scalar contractive subsystems at
// two grid resolutions. Level sets of |x - x_hat| between such pairs validate
// frequently, which makes them useful containment-test subjects.

#include <cstdio>
#include <string>

#include "opack/abstraction.hpp"
#include "opack/design.hpp"

namespace testgen {

struct AbstractionPair {
  opack::FiniteSystem fine, coarse;
  double varpi = 0;
};

inline AbstractionPair random_abstraction_pair(opack::Rng& rng) {
  using namespace opack;
  const double a = rng.uniform(0.1, 0.5);
  const double b = rng.uniform(0.1, 0.3);
  char buf[512];
  std::snprintf(buf, sizeof(buf), R"m(
[subsystem.1]
state_set  = ["(0, 1)"]
secret_set = ["(0, %.3f]"]
input_set  = ["[%.3f, %.3f]"]
dynamics   = ["%.3f*x1 + u1"]
output.1   = ["x1"]
)m",
                rng.uniform(0.3, 0.6), b, b, a);
  std::string text = buf;
  std::snprintf(buf, sizeof(buf), R"m(
[subsystem.1.certificate]
kappa       = "%.3f*s"
rho_int     = "0"
rho_ext     = "s"
alpha_lower = "s"
alpha_upper = "s"
gamma_hat   = "s"
lipschitz   = "s"
[network]
edges = []
)m",
                1.0 - a);
  text += buf;
  const auto net = parse_model(text);
  AbstractionPair out;
  out.varpi = rng.uniform(0.15, 0.3);
  const double bound = (1.0 - a) * out.varpi;  // eta budget at vartheta = mu = 0
  const double cap = std::min(bound, secret_span_cap(net.sub(1)));
  QuantTuple coarse_q, fine_q;
  coarse_q.eta = cap * rng.uniform(0.6, 0.99);
  fine_q.eta = coarse_q.eta * rng.uniform(0.3, 0.7);
  out.coarse = build_abstraction(net, 1, coarse_q, {{1, coarse_q.eta}});
  out.fine = build_abstraction(net, 1, fine_q, {{1, fine_q.eta}});
  return out;
}

}  // namespace testgen

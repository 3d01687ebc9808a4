#include <catch2/catch_amalgamated.hpp>

#include "opack/abstraction.hpp"
#include "opack/opacity.hpp"

using namespace opack;

namespace {

const char* kModelsDir = OPACK_MODELS_DIR;

NetworkSpec cascade(int n) { return load_model_file(std::string(kModelsDir) + "/cascade" +
                                                    std::to_string(n) + ".model"); }

QuantTuple cascade_tuple(const SubsystemSpec& sub) {
  QuantTuple q;
  q.eta = 0.2;
  q.theta = 0.0;
  q.mu = 0.0;  // singleton input set
  q.phi.assign(sub.internal.size(), 0.0);
  return q;
}

std::vector<FiniteSystem> cascade_parts(const NetworkSpec& net) {
  std::map<int, double> etas;
  for (int i = 1; i <= net.size(); ++i) etas[i] = 0.2;
  std::vector<FiniteSystem> parts;
  for (int i = 1; i <= net.size(); ++i)
    parts.push_back(build_abstraction(net, i, cascade_tuple(net.sub(i)), etas));
  return parts;
}

FiniteSystem compose_cascade(int n) {
  const auto net = cascade(n);
  return compose(cascade_parts(net), {}, net);
}

// hand-built expected automaton: payloads are the cascade grid vectors over
// {0.2, 0.4}, encoded by bit patterns (bit k set = subsystem k+1 at 0.4)
FiniteSystem expected_automaton(int n, const std::vector<int>& secret_codes,
                                const std::vector<std::pair<int, int>>& edges) {
  FiniteSystem t;
  t.inputs = {std::vector<double>(static_cast<std::size_t>(n), 0.145)};
  const int total = 1 << n;
  for (int code = 0; code < total; ++code) {
    std::vector<double> payload;
    for (int k = 0; k < n; ++k) payload.push_back((code >> k) & 1 ? 0.4 : 0.2);
    t.payloads.push_back(payload);
    t.initial.push_back(1);
    t.secret.push_back(std::count(secret_codes.begin(), secret_codes.end(), code) ? 1 : 0);
    t.outputs.push_back({payload.back()});
  }
  // states are sorted by payload, i.e. by the code read as little-endian bits
  std::vector<int> order(static_cast<std::size_t>(total));
  for (int code = 0; code < total; ++code) {
    int rank = 0;
    for (int other = 0; other < total; ++other) {
      if (t.payloads[static_cast<std::size_t>(other)] < t.payloads[static_cast<std::size_t>(code)])
        ++rank;
    }
    order[static_cast<std::size_t>(code)] = rank;
  }
  FiniteSystem sorted = t;
  for (int code = 0; code < total; ++code) {
    const int at = order[static_cast<std::size_t>(code)];
    sorted.payloads[static_cast<std::size_t>(at)] = t.payloads[static_cast<std::size_t>(code)];
    sorted.initial[static_cast<std::size_t>(at)] = t.initial[static_cast<std::size_t>(code)];
    sorted.secret[static_cast<std::size_t>(at)] = t.secret[static_cast<std::size_t>(code)];
    sorted.outputs[static_cast<std::size_t>(at)] = t.outputs[static_cast<std::size_t>(code)];
  }
  sorted.succ.assign(static_cast<std::size_t>(total), {});
  for (const auto& [from, to] : edges)
    sorted.successors(order[static_cast<std::size_t>(from)], 0)
        .push_back(order[static_cast<std::size_t>(to)]);
  for (auto& v : sorted.succ) std::sort(v.begin(), v.end());
  sorted.validate();
  return sorted;
}

}  // namespace

TEST_CASE("cascade subsystem abstractions have two states") {
  const auto net = cascade(2);
  std::map<int, double> etas{{1, 0.2}, {2, 0.2}};

  const auto t1 = build_abstraction(net, 1, cascade_tuple(net.sub(1)), etas);
  REQUIRE(t1.state_count() == 2);
  CHECK(t1.payloads[0][0] == Catch::Approx(0.2));
  CHECK(t1.payloads[1][0] == Catch::Approx(0.4));
  CHECK(t1.secret == std::vector<char>{1, 0});
  // f(0.2) = 0.165 and f(0.4) = 0.185 both quantize to 0.2 only
  CHECK(t1.successors(0, 0) == std::vector<int>{0});
  CHECK(t1.successors(1, 0) == std::vector<int>{0});

  const auto t2 = build_abstraction(net, 2, cascade_tuple(net.sub(2)), etas);
  REQUIRE(t2.state_count() == 2);
  CHECK(t2.secret == std::vector<char>{0, 1});
  REQUIRE(t2.winput_count() == 2);
  CHECK(t2.winputs[0][0] == Catch::Approx(0.2));
  CHECK(t2.winputs[1][0] == Catch::Approx(0.4));
  // from 0.4 under w = 0.4 the image 0.205 sits within eta of both points
  CHECK(t2.successors(1, 0, 1) == std::vector<int>{0, 1});
  CHECK(t2.successors(1, 0, 0) == std::vector<int>{0});
  CHECK(t2.successors(0, 0, 0) == std::vector<int>{0});
  CHECK(t2.successors(0, 0, 1) == std::vector<int>{0});
}

TEST_CASE("secret grid uses the inflated set clipped to X") {
  const auto net = cascade(2);
  std::map<int, double> etas{{1, 0.2}, {2, 0.2}};
  QuantTuple q = cascade_tuple(net.sub(1));
  q.theta = 0.25;  // X_S = (0, 0.2] inflates to [-0.25, 0.45]
  const auto t = build_abstraction(net, 1, q, etas);
  CHECK(t.secret == std::vector<char>{1, 1});
}

TEST_CASE("quantization bound violations are rejected") {
  const auto net = cascade(2);
  std::map<int, double> etas{{1, 0.25}, {2, 0.25}};
  QuantTuple q = cascade_tuple(net.sub(1));
  q.eta = 0.25;  // exceeds span(X_S) = 0.2 of subsystem 1
  CHECK_THROWS_WITH(build_abstraction(net, 1, q, etas),
                    Catch::Matchers::ContainsSubstring("span"));

  QuantTuple qmu = cascade_tuple(net.sub(1));
  qmu.mu = 0.1;  // singleton input set admits no positive grid step
  CHECK_THROWS(build_abstraction(net, 1, qmu, etas));
}

TEST_CASE("blocking cells are reported") {
  // dynamics escaping the covered region: x' = x + 2 on X = [0, 1]
  const std::string text = R"(
[subsystem.1]
state_set  = ["[0, 1]"]
secret_set = ["[0, 0.5]"]
input_set  = ["[0, 0]"]
dynamics   = ["x1 + 2"]
output.1   = ["x1"]
[subsystem.1.certificate]
kappa       = "0.5*s"
rho_int     = "0"
rho_ext     = "s"
alpha_lower = "s"
alpha_upper = "s"
gamma_hat   = "s"
lipschitz   = "s"
[network]
edges = []
)";
  const auto net = parse_model(text);
  QuantTuple q;
  q.eta = 0.5;
  CHECK_THROWS_WITH(build_abstraction(net, 1, q, {{1, 0.5}}),
                    Catch::Matchers::ContainsSubstring("blocking cell"));
}

TEST_CASE("transition soundness and completeness against the defining rule") {
  const auto net = cascade(3);
  const auto parts = cascade_parts(net);
  for (int i = 1; i <= 3; ++i) {
    const auto& t = parts[static_cast<std::size_t>(i - 1)];
    const auto& sub = net.sub(i);
    const int nw = std::max(t.winput_count(), 1);
    for (int s = 0; s < t.state_count(); ++s) {
      for (int u = 0; u < t.input_count(); ++u) {
        for (int w = 0; w < nw; ++w) {
          const std::vector<double> wv =
              t.has_internal() ? t.winputs[static_cast<std::size_t>(w)] : std::vector<double>{};
          const auto img = sub.step(t.payloads[static_cast<std::size_t>(s)],
                                    t.inputs[static_cast<std::size_t>(u)], wv);
          const auto& succ = t.successors(s, u, w);
          for (int d = 0; d < t.state_count(); ++d) {
            const bool within =
                sup_dist(t.payloads[static_cast<std::size_t>(d)], img) <= 0.2 + 1e-12;
            const bool present = std::find(succ.begin(), succ.end(), d) != succ.end();
            CHECK(within == present);
          }
        }
      }
    }
  }
}

TEST_CASE("secret covering") {
  const auto net = cascade(2);
  const auto parts = cascade_parts(net);
  Rng rng(5);
  for (int i = 1; i <= 2; ++i) {
    const auto& t = parts[static_cast<std::size_t>(i - 1)];
    for (int k = 0; k < 200; ++k) {
      const auto x = detail::sample_point(net.sub(i).secret_set, rng);
      double best = 1e9;
      for (int s = 0; s < t.state_count(); ++s)
        if (t.secret[static_cast<std::size_t>(s)])
          best = std::min(best, sup_dist(x, t.payloads[static_cast<std::size_t>(s)]));
      CHECK(best <= 0.2 + 1e-12);
    }
  }
}

TEST_CASE("two-subsystem composition reproduces the expected automaton") {
  const auto composed = compose_cascade(2);
  REQUIRE(composed.state_count() == 4);
  CHECK_FALSE(composed.has_internal());

  // codes: bit 0 = subsystem 1 high, bit 1 = subsystem 2 high
  const int aa = 0, Aa = 1, aA = 2, AA = 3;
  const auto expected = expected_automaton(
      2, {aA}, {{aa, aa}, {Aa, aa}, {aA, aa}, {AA, aa}, {AA, aA}});
  CHECK(same_labeled_automaton(composed, expected, 1e-9));
}

TEST_CASE("three-subsystem composition matches the defining rule") {
  const auto composed = compose_cascade(3);
  REQUIRE(composed.state_count() == 8);

  const int aaa = 0, Aaa = 1, aAa = 2, AAa = 3, aaA = 4, AaA = 5, aAA = 6, AAA = 7;
  const auto expected = expected_automaton(3, {aAa, aAA},
                                           {{aaa, aaa},
                                            {aAa, aaa},
                                            {Aaa, aaa},
                                            {AAa, aaa},
                                            {AAa, aAa},
                                            {aaA, aaa},
                                            {AaA, aaa},
                                            {aAA, aaa},
                                            {aAA, aaA},
                                            {AAA, aaa},
                                            {AAA, aaA},
                                            {AAA, aAa},
                                            {AAA, aAA}});
  CHECK(same_labeled_automaton(composed, expected, 1e-9));
}

TEST_CASE("positive internal quantization loosens the wiring") {
  const auto net = cascade(2);
  std::map<int, double> etas{{1, 0.2}, {2, 0.2}};
  QuantTuple q1 = cascade_tuple(net.sub(1));
  QuantTuple q2 = cascade_tuple(net.sub(2));
  q2.phi = {0.2};  // grids W_21 = (0, 0.6) into {0.2, 0.4}
  const std::vector<FiniteSystem> parts = {build_abstraction(net, 1, q1, etas),
                                           build_abstraction(net, 2, q2, etas)};
  const auto loose = compose(parts, {{{2, 1}, 0.2}}, net);
  const auto exact = compose_cascade(2);
  // every exact transition survives, and the slack adds new ones
  CHECK(loose.transition_count() > exact.transition_count());
  for (int s = 0; s < exact.state_count(); ++s) {
    const auto& tight = exact.successors(s, 0);
    const auto& wide = loose.successors(s, 0);
    for (int d : tight) CHECK(std::find(wide.begin(), wide.end(), d) != wide.end());
  }
  // the loosened composition still hides the secret start
  CHECK(verify_init_opacity(loose, 0.0).opaque);
}

TEST_CASE("outputs escaping the declared internal input set are rejected") {
  auto net = cascade(2);
  // shrink W_21 below the neighbor's reachable outputs
  net.subs[1].internal[0].set = parse_box_union({"(0, 0.3)"});
  std::map<int, double> etas{{1, 0.2}, {2, 0.2}};
  CHECK_THROWS_WITH(build_abstraction(net, 2, cascade_tuple(net.sub(2)), etas),
                    Catch::Matchers::ContainsSubstring("ill-posed interconnection"));
}

TEST_CASE("phi grids outside the internal input set are rejected") {
  auto net = cascade(2);
  net.subs[1].internal[0].output_set = parse_box_union({"(0, 0.9)"});
  QuantTuple q = cascade_tuple(net.sub(2));
  q.phi = {0.2};  // [Y]_0.2 reaches 0.8, outside W = (0, 0.6)
  std::map<int, double> etas{{1, 0.2}, {2, 0.2}};
  CHECK_THROWS_WITH(build_abstraction(net, 2, q, etas),
                    Catch::Matchers::ContainsSubstring("not contained in W"));
}

TEST_CASE("composing a single unconnected subsystem drops the internal alphabet") {
  const std::string text = R"(
[subsystem.1]
state_set  = ["[0, 1]"]
secret_set = ["[0, 0.4]"]
input_set  = ["[0, 0]"]
dynamics   = ["0.5*x1"]
output.1   = ["x1"]
[subsystem.1.certificate]
kappa       = "0.5*s"
rho_int     = "0"
rho_ext     = "0"
alpha_lower = "s"
alpha_upper = "s"
gamma_hat   = "s"
lipschitz   = "s"
[network]
edges = []
)";
  const auto net = parse_model(text);
  QuantTuple q;
  q.eta = 0.25;
  const auto part = build_abstraction(net, 1, q, {{1, 0.25}});
  const auto composed = compose({part}, {}, net);
  CHECK_FALSE(composed.has_internal());
  CHECK(composed.state_count() == part.state_count());
  CHECK(same_labeled_automaton(composed, part, 1e-9));
}

TEST_CASE("composition with exact wiring equals the monolithic product abstraction") {
  // the three-subsystem cascade written as one three-dimensional system
  const std::string text = R"m(
[subsystem.1]
state_set  = ["(0, 0.6) x (0, 0.6) x (0, 0.6)"]
secret_set = ["(0, 0.2] x [0.4, 0.6) x (0, 0.6)"]
input_set  = ["[0.145, 0.145] x [0.145, 0.145] x [0.145, 0.145]"]
dynamics   = ["0.1*x1 + u1", "0.1*x2 + u2 + 0.05*x1", "0.1*x3 + u3 + 0.05*x2"]
output.1   = ["x3"]
[subsystem.1.certificate]
kappa       = "0.9*s"
rho_int     = "0"
rho_ext     = "s"
alpha_lower = "s"
alpha_upper = "s"
gamma_hat   = "s"
lipschitz   = "s"
[network]
edges = []
)m";
  const auto mono_net = parse_model(text);
  QuantTuple q;
  q.eta = 0.2;
  const auto mono = build_abstraction(mono_net, 1, q, {{1, 0.2}});
  const auto composed = compose_cascade(3);
  CHECK(same_labeled_automaton(composed, mono, 1e-9));
}

TEST_CASE("every produced system is non-blocking by construction") {
  for (int n : {2, 3, 4}) {
    const auto composed = compose_cascade(n);
    CHECK_NOTHROW(composed.validate());
    CHECK(composed.state_count() == (1 << n));
  }
}

TEST_CASE("finite system JSON round trip") {
  const auto composed = compose_cascade(2);
  const auto back = system_from_json(to_json(composed));
  CHECK(same_labeled_automaton(composed, back, 0.0));
  CHECK(to_json(back).dump() == to_json(composed).dump());
}

TEST_CASE("DOT export shape") {
  const auto composed = compose_cascade(2);
  const auto dot = to_dot(composed);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("Mrecord") != std::string::npos);
  // exactly one filled (secret) node and four initial arrows
  std::size_t filled = 0, arrows = 0, pos = 0;
  while ((pos = dot.find("fillcolor", pos)) != std::string::npos) {
    ++filled;
    ++pos;
  }
  pos = 0;
  while ((pos = dot.find("init", pos)) != std::string::npos) {
    ++arrows;
    ++pos;
  }
  CHECK(filled == 1);
  CHECK(arrows == 8);  // four invisible anchors, each mentioned twice

  // eight records and two filled nodes for the three-subsystem network
  const auto dot3 = to_dot(compose_cascade(3));
  std::size_t filled3 = 0;
  pos = 0;
  while ((pos = dot3.find("fillcolor", pos)) != std::string::npos) {
    ++filled3;
    ++pos;
  }
  CHECK(filled3 == 2);

  // no secret states, no filled nodes
  auto plain = compose_cascade(2);
  plain.secret.assign(plain.secret.size(), 0);
  CHECK(to_dot(plain).find("fillcolor") == std::string::npos);
}

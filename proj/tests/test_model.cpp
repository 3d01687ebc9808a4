#include <catch2/catch_amalgamated.hpp>

#include "opack/model.hpp"

using namespace opack;

namespace {

const char* kModelsDir = OPACK_MODELS_DIR;

NetworkSpec cascade(int n) { return load_model_file(std::string(kModelsDir) + "/cascade" +
                                                     std::to_string(n) + ".model"); }
NetworkSpec nonlinear6() { return load_model_file(std::string(kModelsDir) + "/nonlinear6.model"); }

}  // namespace

TEST_CASE("cascade model loads with the declared structure") {
  const auto net = cascade(3);
  REQUIRE(net.size() == 3);
  CHECK(net.sub(1).internal.empty());
  CHECK(net.sub(2).internal.size() == 1);
  CHECK(net.predecessors(3) == std::vector<int>{2});
  CHECK(net.successors(1) == std::vector<int>{2});
  CHECK(net.sub(1).input_set.all_degenerate());
  CHECK(net.sub(2).cert.kappa.gain() == Catch::Approx(0.9));
  CHECK(net.sub(2).cert.rho_int.gain() == Catch::Approx(0.05));
  CHECK(net.sub(2).cert.alpha().is_identity());
}

TEST_CASE("subsystem step") {
  const auto net = cascade(2);
  // x' = 0.1 x + u + 0.05 w on subsystem 2
  CHECK(net.sub(2).step({0.4}, {0.145}, {0.4})[0] == Catch::Approx(0.205));
  // subsystem 1 has no internal input
  CHECK(net.sub(1).step({0.2}, {0.145}, {})[0] == Catch::Approx(0.165));

  CHECK_THROWS_WITH(net.sub(1).step({0.7}, {0.145}, {}),
                    Catch::Matchers::ContainsSubstring("outside X"));
  CHECK_THROWS_WITH(net.sub(1).step({0.2}, {0.3}, {}),
                    Catch::Matchers::ContainsSubstring("outside U"));
  CHECK_THROWS_WITH(net.sub(2).step({0.2}, {0.145}, {0.7}),
                    Catch::Matchers::ContainsSubstring("outside W"));
}

TEST_CASE("network step wires internal inputs to neighbor outputs") {
  const auto net = cascade(2);
  const auto next = net.network_step({0.2, 0.4}, {0.145, 0.145});
  REQUIRE(next.size() == 2);
  CHECK(next[0] == Catch::Approx(0.165));
  CHECK(next[1] == Catch::Approx(0.195));
}

TEST_CASE("identity dynamics leave the state unchanged") {
  const std::string text = R"(
[subsystem.1]
state_set  = ["[0, 1]"]
secret_set = ["[0, 0.5]"]
input_set  = ["[0, 0]"]
dynamics   = ["x1"]
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
  CHECK(net.network_step({0.37}, {0.0})[0] == Catch::Approx(0.37));
}

TEST_CASE("six-subsystem model steps to zero from the origin") {
  const auto net = nonlinear6();
  REQUIRE(net.size() == 6);
  const std::vector<double> zeros6(6, 0.0);
  const auto next = net.network_step(zeros6, zeros6);
  for (double v : next) CHECK(v == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("model validation rejects broken files") {
  const std::string base = R"(
[subsystem.1]
state_set  = ["[0, 1]"]
secret_set = ["[0, 0.5]"]
input_set  = ["[0, 0]"]
dynamics   = ["x1"]
output.1   = ["x1"]
[subsystem.1.certificate]
kappa       = "0.5*s"
rho_int     = "0"
rho_ext     = "s"
alpha_lower = "s"
alpha_upper = "s"
gamma_hat   = "s"
lipschitz   = "s"
)";
  CHECK_THROWS_WITH(parse_model(base + "[network]\nedges = [[1, 1]]\n"),
                    Catch::Matchers::ContainsSubstring("self-loop"));
  CHECK_THROWS_WITH(parse_model(base + "[network]\nedges = [[1, 2]]\n"),
                    Catch::Matchers::ContainsSubstring("unknown subsystem"));

  // secret set escaping the state set
  std::string bad = base;
  bad.replace(bad.find("[0, 0.5]"), 8, "[0, 2.0]");
  CHECK_THROWS_WITH(parse_model(bad + "[network]\nedges = []\n"),
                    Catch::Matchers::ContainsSubstring("subset of state_set"));

  // secret set covering everything
  std::string covered = base;
  covered.replace(covered.find("[0, 0.5]"), 8, "[0, 1.0]");
  CHECK_THROWS_WITH(parse_model(covered + "[network]\nedges = []\n"),
                    Catch::Matchers::ContainsSubstring("trivially violated"));

  // undeclared variable in the dynamics
  std::string unbound = base;
  unbound.replace(unbound.find("dynamics   = [\"x1\"]"), 19, "dynamics   = [\"w1\"]");
  CHECK_THROWS_WITH(parse_model(unbound + "[network]\nedges = []\n"),
                    Catch::Matchers::ContainsSubstring("w1 undeclared"));
}

TEST_CASE("certificates of the shipped models survive sampling") {
  for (const auto& net : {cascade(3), nonlinear6()}) {
    for (const auto& sub : net.subs) {
      const auto rep = validate_certificate(sub, 500, 42);
      INFO("subsystem " << sub.index << " worst margin " << rep.worst_margin);
      CHECK(rep.ok());
    }
  }
}

TEST_CASE("quadratic simulation functions pass or fail the sampler on merit") {
  auto net = cascade(2);
  // G(x, x') = (x - x')^2 on subsystem 1: bounds s^2 <= G <= s^2 and the
  // decrease G(f, f') = (0.1 dx)^2 = 0.01 G <= (1 - kappa) G hold with
  // kappa(s) = 0.99 s and quadratic envelopes
  SubsystemSpec sub = net.sub(1);
  sub.cert.g.kind = GFunction::Kind::Quadratic;
  sub.cert.g.P = {{1.0}};
  sub.cert.kappa = MonotoneFn::linear(0.99);
  sub.cert.rho_int = MonotoneFn::zero();
  sub.cert.rho_ext = MonotoneFn::power(2.0, 2.0);  // (du + 0.1 dx)^2 <= 2 du^2 + 0.02 dx^2
  sub.cert.alpha_lower = MonotoneFn::power(1.0, 2.0);
  sub.cert.alpha_upper = MonotoneFn::power(1.0, 2.0);
  sub.cert.gamma_hat = MonotoneFn::numeric(
      [](double s) { return s * s + 1.2 * s; }, "s^2 + 1.2 s");  // (a+b)^2 <= a^2 + b^2 + 2*0.6*b
  CHECK(validate_certificate(sub, 500, 42).ok());

  // an envelope that is too tight is refuted
  sub.cert.alpha_upper = MonotoneFn::power(0.5, 2.0);
  const auto rep = validate_certificate(sub, 500, 42);
  CHECK_FALSE(rep.ok());
  CHECK(rep.iss_bound_failures > 0);
}

TEST_CASE("a wrong certificate is rejected by sampling") {
  auto net = cascade(2);
  // claim a faster decrease than the dynamics provide
  net.subs[1].cert.kappa = MonotoneFn::linear(0.99);
  net.subs[1].cert.rho_int = MonotoneFn::linear(0.01);
  const auto rep = validate_certificate(net.sub(2), 500, 42);
  CHECK_FALSE(rep.ok());
  CHECK(rep.iss_decrease_failures > 0);
}

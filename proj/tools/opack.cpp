// Command-line driver: model ingestion, parameter design, symbolic model
// construction, composition, opacity verification and report export.
//
// Exit codes: 0 opaque, 1 not opaque, 2 infeasible or parse error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "opack/abstraction.hpp"
#include "opack/design.hpp"
#include "opack/model.hpp"
#include "opack/opacity.hpp"
#include "opack/pipeline.hpp"
#include "opack/relations.hpp"

namespace {

std::uint64_t env_seed() {
  const char* s = std::getenv("OPACK_SEED");
  return s ? std::strtoull(s, nullptr, 10) : 1u;
}

// All stages run sequentially; any positive cap is honored trivially, but a
// malformed value is still rejected.
void check_env_threads() {
  const char* s = std::getenv("OPACK_THREADS");
  if (!s) return;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || v < 1)
    throw opack::Error("OPACK_THREADS must be a positive integer");
}

opack::QuantTuple parse_tuple(const std::string& text, std::size_t blocks) {
  opack::QuantTuple q;
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(',', pos);
    const std::string part =
        next == std::string::npos ? text.substr(pos) : text.substr(pos, next - pos);
    vals.push_back(std::strtod(part.c_str(), nullptr));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (vals.size() < 3) throw opack::Error("tuple must be \"eta,theta,mu[,phi...]\"");
  q.eta = vals[0];
  q.theta = vals[1];
  q.mu = vals[2];
  for (std::size_t i = 3; i < vals.size(); ++i) q.phi.push_back(vals[i]);
  if (q.phi.empty()) q.phi.assign(blocks, 0.0);
  if (q.phi.size() == 1 && blocks > 1) q.phi.assign(blocks, q.phi[0]);
  return q;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw opack::Error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compositional opacity-preserving finite abstractions"};
  app.require_subcommand(1);

  std::string model_path, system_path, lhs_path, rhs_path, out_path, dot_dir;
  std::string notion_str = "init", tuple_str, delta_str;
  double precision = 0, delta = 0, delta_hat = 0, epsilon = 0, varpi = 0, vartheta = 0;
  double phi_fraction = 0.0, theta_fraction = 0.9;
  double eta_flag = -1;
  int subsystem = 1, samples = 1000;
  bool reachable_only = false;
  std::optional<double> transfer_eps;
  double transfer_flag = -1;

  auto* design_cmd = app.add_subcommand("design", "design local parameters from a model file");
  design_cmd->add_option("--model", model_path)->required();
  design_cmd->add_option("--precision", precision)->required();
  design_cmd->add_option("--notion", notion_str);
  design_cmd->add_option("--phi-fraction", phi_fraction);
  design_cmd->add_option("--theta-fraction", theta_fraction);
  design_cmd->add_option("--output", out_path);

  auto* abstract_cmd = app.add_subcommand("abstract", "build one subsystem's symbolic model");
  abstract_cmd->add_option("--model", model_path)->required();
  abstract_cmd->add_option("--subsystem", subsystem)->required();
  abstract_cmd->add_option("--q", tuple_str, "eta,theta,mu[,phi...]")->required();
  abstract_cmd->add_option("--output", out_path);

  auto* compose_cmd = app.add_subcommand("compose", "build and interconnect all symbolic models");
  compose_cmd->add_option("--model", model_path)->required();
  compose_cmd->add_option("--q", tuple_str, "uniform eta,theta,mu[,phi...]")->required();
  compose_cmd->add_option("--output", out_path);

  auto* verify_cmd = app.add_subcommand("verify", "verify opacity of a finite system");
  verify_cmd->add_option("--system", system_path)->required();
  verify_cmd->add_option("--notion", notion_str);
  verify_cmd->add_option("--delta", delta)->required();
  verify_cmd->add_option("--transfer", transfer_flag, "epsilon for the lifted bound");

  auto* vrel_cmd = app.add_subcommand("validate-relation",
                                      "maximal opacity-preserving simulation relation");
  vrel_cmd->add_option("--lhs", lhs_path)->required();
  vrel_cmd->add_option("--rhs", rhs_path)->required();
  vrel_cmd->add_option("--epsilon", epsilon)->required();
  vrel_cmd->add_option("--notion", notion_str);

  auto* vsopsf_cmd = app.add_subcommand("validate-sopsf",
                                        "sample the simulation-function clauses");
  vsopsf_cmd->add_option("--model", model_path)->required();
  vsopsf_cmd->add_option("--subsystem", subsystem)->required();
  vsopsf_cmd->add_option("--q", tuple_str)->required();
  vsopsf_cmd->add_option("--varpi", varpi)->required();
  vsopsf_cmd->add_option("--vartheta", vartheta)->required();
  vsopsf_cmd->add_option("--notion", notion_str);
  vsopsf_cmd->add_option("--samples", samples);

  auto* pipeline_cmd = app.add_subcommand("pipeline", "design, abstract, compose, verify, lift");
  pipeline_cmd->add_option("--model", model_path)->required();
  pipeline_cmd->add_option("--precision", precision)->required();
  pipeline_cmd->add_option("--notion", notion_str);
  pipeline_cmd->add_option("--delta-hat", delta_hat);
  pipeline_cmd->add_option("--eta", eta_flag, "uniform state quantization override");
  pipeline_cmd->add_option("--phi-fraction", phi_fraction);
  pipeline_cmd->add_option("--theta-fraction", theta_fraction);
  pipeline_cmd->add_option("--dot", dot_dir, "directory for DOT exports");
  pipeline_cmd->add_option("--output", out_path, "report path");
  pipeline_cmd->add_flag("--reachable-only", reachable_only);

  auto* dot_cmd = app.add_subcommand("export-dot", "render a finite system as DOT");
  dot_cmd->add_option("--system", system_path)->required();
  dot_cmd->add_option("--output", out_path);
  dot_cmd->add_flag("--reachable-only", reachable_only);

  CLI11_PARSE(app, argc, argv);

  try {
    check_env_threads();
    const opack::Notion notion = opack::notion_from_string(notion_str);

    if (design_cmd->parsed()) {
      const auto net = opack::load_model_file(model_path);
      opack::DesignOptions opt;
      opt.notion = notion;
      opt.phi_fraction = phi_fraction;
      opt.theta_fraction = theta_fraction;
      const auto design = opack::design_parameters(net, precision, opt);
      write_or_print(out_path, opack::to_json(design).dump(2) + "\n");
      return 0;
    }

    if (abstract_cmd->parsed()) {
      const auto net = opack::load_model_file(model_path);
      const auto& sub = net.sub(subsystem);
      const auto q = parse_tuple(tuple_str, sub.internal.size());
      std::map<int, double> etas;
      for (int i = 1; i <= net.size(); ++i) etas[i] = q.eta;
      const auto t = opack::build_abstraction(net, subsystem, q, etas);
      write_or_print(out_path, opack::to_json(t).dump(2) + "\n");
      return 0;
    }

    if (compose_cmd->parsed()) {
      const auto net = opack::load_model_file(model_path);
      std::map<int, double> etas;
      for (int i = 1; i <= net.size(); ++i) etas[i] = parse_tuple(tuple_str, 0).eta;
      std::vector<opack::FiniteSystem> parts;
      std::map<std::pair<int, int>, double> phi;
      for (int i = 1; i <= net.size(); ++i) {
        const auto q = parse_tuple(tuple_str, net.sub(i).internal.size());
        for (std::size_t b = 0; b < net.sub(i).internal.size(); ++b) {
          phi[{i, net.sub(i).internal[b].source}] = q.phi[b];
        }
        parts.push_back(opack::build_abstraction(net, i, q, etas));
      }
      const auto composed = opack::compose(parts, phi, net);
      write_or_print(out_path, opack::to_json(composed).dump(2) + "\n");
      return 0;
    }

    if (verify_cmd->parsed()) {
      const auto t = opack::load_system_file(system_path);
      const auto v = opack::verify_opacity(t, notion, delta);
      std::cout << opack::to_json(v).dump(2) << "\n";
      if (transfer_flag >= 0) transfer_eps = transfer_flag;
      if (transfer_eps) {
        std::cout << "lifted delta: " << opack::round12(opack::transfer_bound(delta, *transfer_eps))
                  << "\n";
      }
      return v.opaque ? 0 : 1;
    }

    if (vrel_cmd->parsed()) {
      const auto a = opack::load_system_file(lhs_path);
      const auto b = opack::load_system_file(rhs_path);
      const auto res = opack::max_relation(a, b, epsilon, notion);
      nlohmann::json j;
      j["ok"] = res.ok;
      j["pairs"] = res.relation.count();
      if (!res.ok && res.failure) {
        j["violated_clause"] = res.failure->clause;
        j["x"] = res.failure->x;
        j["x_hat"] = res.failure->xh;
      }
      std::cout << j.dump(2) << "\n";
      return res.ok ? 0 : 1;
    }

    if (vsopsf_cmd->parsed()) {
      const auto net = opack::load_model_file(model_path);
      const auto& sub = net.sub(subsystem);
      const auto q = parse_tuple(tuple_str, sub.internal.size());
      std::map<int, double> etas;
      for (int i = 1; i <= net.size(); ++i) etas[i] = q.eta;
      const auto abs = opack::build_abstraction(net, subsystem, q, etas);
      const auto rep = opack::validate_sopsf(sub, abs, varpi, vartheta, notion, samples,
                                             env_seed(), 1e-9, q.mu);
      nlohmann::json j;
      j["ok"] = rep.ok();
      j["samples"] = rep.samples;
      for (const auto& [clause, stat] : rep.clauses) {
        j["clauses"][clause] = {{"checked", stat.checked},
                                {"failed", stat.failed},
                                {"worst_margin", opack::round12(stat.worst_margin)}};
      }
      std::cout << j.dump(2) << "\n";
      return rep.ok() ? 0 : 1;
    }

    if (pipeline_cmd->parsed()) {
      opack::PipelineOptions opt;
      for (int i = 0; i < argc; ++i) {
        if (i) opt.command += ' ';
        opt.command += argv[i];
      }
      opt.notion = notion;
      opt.delta_hat = delta_hat;
      if (eta_flag >= 0) opt.eta_override = eta_flag;
      opt.design.phi_fraction = phi_fraction;
      opt.design.theta_fraction = theta_fraction;
      opt.dot_dir = dot_dir;
      opt.report_path = out_path;
      opt.reachable_only = reachable_only;
      const auto rep = opack::run_pipeline(model_path, precision, opt);
      std::cout << rep.json.dump(2) << "\n";
      for (const auto& [stage, ms] : rep.timings_ms)
        std::cerr << "timing " << stage << ": " << ms << " ms\n";
      if (rep.json.contains("error"))
        std::cerr << "error at stage " << rep.json["error"]["stage"].get<std::string>() << ": "
                  << rep.json["error"]["message"].get<std::string>() << "\n";
      return rep.exit_code;
    }

    if (dot_cmd->parsed()) {
      const auto t = opack::load_system_file(system_path);
      write_or_print(out_path, opack::to_dot(t, reachable_only));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

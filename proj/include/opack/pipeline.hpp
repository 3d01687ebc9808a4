#pragma once

#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "opack/abstraction.hpp"
#include "opack/design.hpp"
#include "opack/model.hpp"
#include "opack/opacity.hpp"
#include "opack/relations.hpp"

namespace opack {

inline nlohmann::json to_json(const DesignResult& d) {
  nlohmann::json j;
  j["notion"] = notion_name(d.notion);
  j["network_varpi"] = round12(d.network_varpi);
  j["epsilon"] = round12(d.epsilon);
  nlohmann::json subs = nlohmann::json::array();
  for (std::size_t k = 0; k < d.subs.size(); ++k) {
    const SubsystemDesign& s = d.subs[k];
    nlohmann::json e;
    e["subsystem"] = static_cast<int>(k) + 1;
    e["varpi"] = round12(s.varpi);
    e["vartheta"] = round12(s.vartheta);
    e["eta_max"] = round12(s.eta_max);
    e["eta"] = round12(s.eta);
    e["theta_min"] = round12(s.theta_min);
    e["theta"] = round12(s.theta);
    e["mu"] = round12(s.mu);
    if (s.mu_max)
      e["mu_max"] = round12(*s.mu_max);
    else
      e["mu_max"] = nullptr;
    subs.push_back(std::move(e));
  }
  j["subsystems"] = std::move(subs);
  nlohmann::json phis = nlohmann::json::array();
  for (const auto& [edge, value] : d.phi)
    phis.push_back({{"receiver", edge.first}, {"source", edge.second}, {"phi", round12(value)}});
  j["phi"] = std::move(phis);
  return j;
}

inline nlohmann::json to_json(const OpacityVerdict& v) {
  nlohmann::json j;
  j["notion"] = notion_name(v.notion);
  j["delta"] = round12(v.delta);
  j["opaque"] = v.opaque;
  j["trivially_violated"] = v.trivially_violated;
  j["beliefs_explored"] = v.pairs_explored;
  if (!v.opaque) {
    j["witness"] = v.witness;
    if (v.notion == Notion::Infinite) j["witness_k"] = v.witness_k;
  }
  return j;
}

struct PipelineOptions {
  Notion notion = Notion::Init;
  double delta_hat = 0.0;
  std::optional<double> eta_override;  // uniform eta for every subsystem
  DesignOptions design;
  std::string dot_dir;       // when set, per-subsystem and composed DOT files land here
  std::string report_path;   // when set, the JSON report is written here
  bool reachable_only = false;
  std::string command;       // echoed verbatim into the report
};

struct RunReport {
  nlohmann::json json;        // deterministic part
  std::map<std::string, double> timings_ms;  // reported separately, not part of the hashable report
  int exit_code = 0;          // 0 opaque, 1 not opaque, 2 infeasible / error
};

// design -> abstract -> compose -> verify -> transfer, with stage-tagged
// errors. Stages completed before a failure stay in the report.
inline RunReport run_pipeline(const std::string& model_path, double precision,
                              const PipelineOptions& opt) {
  using clock = std::chrono::steady_clock;
  RunReport rep;
  nlohmann::json& j = rep.json;
  j["schema"] = "opack-report-v1";
  j["command"] = opt.command;
  j["model"] = model_path;
  j["precision"] = round12(precision);
  j["notion"] = notion_name(opt.notion);
  j["delta_hat"] = round12(opt.delta_hat);

  auto timed = [&rep](const std::string& stage, auto&& fn) {
    const auto start = clock::now();
    auto done = [&] {
      rep.timings_ms[stage] =
          std::chrono::duration<double, std::milli>(clock::now() - start).count();
    };
    try {
      fn();
      done();
    } catch (...) {
      done();
      throw;
    }
  };

  std::string stage = "parse";
  try {
    NetworkSpec net;
    timed("parse", [&] {
      std::ifstream in(model_path);
      if (!in) throw Error("cannot open model file '" + model_path + "'");
      std::ostringstream buf;
      buf << in.rdbuf();
      j["model_hash"] = "fnv1a:" + hex64(fnv1a(buf.str()));
      net = parse_model(buf.str());
    });

    stage = "small_gain";
    timed("small_gain", [&] {
      const auto sg = check_small_gain(net);
      if (!sg.ok) {
        std::string cycle;
        for (std::size_t i = 0; i < sg.witness_cycle.size(); ++i) {
          if (i) cycle += " -> ";
          cycle += std::to_string(sg.witness_cycle[i]);
        }
        throw Error("small-gain condition violated on cycle " + cycle + " (gain product " +
                    std::to_string(sg.witness_product) + ")");
      }
      j["small_gain"] = "ok";
    });

    stage = "design";
    DesignResult design;
    timed("design", [&] {
      DesignOptions dopt = opt.design;
      dopt.notion = opt.notion;
      design = design_parameters(net, precision, find_sigma(net), dopt);
      if (opt.eta_override) {
        for (auto& s : design.subs) {
          if (*opt.eta_override > s.eta_max + 1e-12)
            throw Error("requested eta exceeds the admissible bound");
          s.eta = *opt.eta_override;
        }
      }
      j["design"] = to_json(design);
    });

    stage = "abstraction";
    std::vector<FiniteSystem> parts;
    timed("abstraction", [&] {
      std::map<int, double> etas;
      for (int i = 1; i <= net.size(); ++i) etas[i] = design.sub(i).eta;
      nlohmann::json sizes = nlohmann::json::array();
      for (int i = 1; i <= net.size(); ++i) {
        QuantTuple q;
        q.eta = design.sub(i).eta;
        q.theta = design.sub(i).theta;
        q.mu = design.sub(i).mu;
        q.phi = design.phi_vector(net, i);
        parts.push_back(build_abstraction(net, i, q, etas));
        sizes.push_back({{"subsystem", i},
                         {"states", parts.back().state_count()},
                         {"transitions", parts.back().transition_count()}});
      }
      j["abstractions"] = std::move(sizes);
    });

    stage = "composition";
    FiniteSystem composed;
    timed("composition", [&] {
      composed = compose(parts, design.phi, net);
      j["composed"] = {{"states", composed.state_count()},
                       {"transitions", composed.transition_count()}};
      if (!opt.dot_dir.empty()) {
        for (const auto& p : parts) {
          std::ofstream out(opt.dot_dir + "/" + p.name + ".dot");
          out << to_dot(p, opt.reachable_only);
        }
        std::ofstream out(opt.dot_dir + "/network.dot");
        out << to_dot(composed, opt.reachable_only);
      }
    });

    stage = "verification";
    OpacityVerdict verdict;
    timed("verification", [&] {
      verdict = verify_opacity(composed, opt.notion, opt.delta_hat);
      j["verdict"] = to_json(verdict);
    });

    stage = "transfer";
    timed("transfer", [&] {
      const double lifted = transfer_bound(opt.delta_hat, design.epsilon);
      j["transfer"] = {{"delta_hat", round12(opt.delta_hat)},
                       {"epsilon", round12(design.epsilon)},
                       {"delta", round12(lifted)}};
    });

    rep.exit_code = verdict.opaque ? 0 : 1;
  } catch (const std::exception& e) {
    j["error"] = {{"stage", stage}, {"message", e.what()}};
    rep.exit_code = 2;
  }

  if (!opt.report_path.empty()) {
    std::ofstream out(opt.report_path);
    out << rep.json.dump(2) << "\n";
  }
  return rep;
}

}  // namespace opack

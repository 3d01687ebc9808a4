#pragma once

// Seeded random finite systems for the verifier and relation test corpora.

#include <vector>

#include "opack/common.hpp"
#include "opack/finite_system.hpp"

namespace testgen {

struct SystemOptions {
  int max_states = 5;
  int max_inputs = 2;
  double output_lo = 0.0;
  double output_hi = 3.0;
  double output_step = 0.5;  // outputs snap to this grid so small deltas collide
  bool unique_payloads = false;
};

inline opack::FiniteSystem random_system(opack::Rng& rng, const SystemOptions& opt = {}) {
  opack::FiniteSystem t;
  const int ns = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.max_states - 1)));
  const int nu = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.max_inputs)));
  const int levels =
      static_cast<int>((opt.output_hi - opt.output_lo) / opt.output_step) + 1;
  for (int s = 0; s < ns; ++s) {
    const double out =
        opt.output_lo + opt.output_step * static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
    t.payloads.push_back(opt.unique_payloads ? std::vector<double>{static_cast<double>(s), out}
                                             : std::vector<double>{static_cast<double>(s)});
    t.outputs.push_back({out});
    t.initial.push_back(rng.below(2) == 0 ? 1 : 0);
    t.secret.push_back(rng.below(3) == 0 ? 1 : 0);
  }
  bool any_init = false;
  for (char c : t.initial) any_init = any_init || c;
  if (!any_init) t.initial[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(ns)))] = 1;
  for (int u = 0; u < nu; ++u) t.inputs.push_back({static_cast<double>(u)});
  t.output_blocks = {{0, 0, 1}};
  t.succ.assign(static_cast<std::size_t>(ns) * static_cast<std::size_t>(nu), {});
  for (int s = 0; s < ns; ++s) {
    for (int u = 0; u < nu; ++u) {
      const int fanout = 1 + static_cast<int>(rng.below(2));
      auto& slot = t.successors(s, u);
      for (int k = 0; k < fanout; ++k)
        slot.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(ns))));
      std::sort(slot.begin(), slot.end());
      slot.erase(std::unique(slot.begin(), slot.end()), slot.end());
    }
  }
  t.validate();
  return t;
}

}  // namespace testgen

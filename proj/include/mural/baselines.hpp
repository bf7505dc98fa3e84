#pragma once
// Ground truth and the passive yardstick.
//
// brute_force_optimum scans the whole class against exact losses: the
// minimax optimum h*, its value nu, every tied id, and the per-group
// floors nu_g = min_h L(h | g).  Everything that claims an "excess" is
// measured against this.
//
// run_passive labels
//   n_g = ceil((8 / eps^2) (2 d ln(13 / eps) + ln(4 G / delta)))
// fresh draws per group (delta split evenly across groups, agnostic
// uniform-convergence rate) and returns the empirical minimax ERM.  It
// pays full price for every draw; no structure, no adaptivity.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mural/estimation.hpp"
#include "mural/oracles.hpp"

namespace mural {

struct BruteForceResult {
  int best_id = -1;
  double nu = 0.0;
  std::vector<int> tied_ids;   // every id attaining nu (best_id is first)
  std::vector<double> nu_g;    // per-group best-in-class loss
};

inline BruteForceResult brute_force_optimum(const Instance& inst) {
  BruteForceResult out;
  out.nu_g.assign(inst.n_groups(), 1.0);
  std::vector<double> worst(inst.n_hypotheses(), 0.0);
  for (std::size_t h = 0; h < inst.n_hypotheses(); ++h) {
    for (std::size_t g = 0; g < inst.n_groups(); ++g) {
      const double loss = true_group_loss(inst, static_cast<int>(h), g);
      worst[h] = std::max(worst[h], loss);
      out.nu_g[g] = std::min(out.nu_g[g], loss);
    }
  }
  out.best_id = 0;
  for (std::size_t h = 1; h < inst.n_hypotheses(); ++h)
    if (worst[h] < worst[out.best_id]) out.best_id = static_cast<int>(h);
  out.nu = worst[out.best_id];
  // Exact arithmetic ties only; near-ties from float noise stay distinct.
  for (std::size_t h = 0; h < inst.n_hypotheses(); ++h)
    if (worst[h] == out.nu) out.tied_ids.push_back(static_cast<int>(h));
  return out;
}

struct PassiveResult {
  int output_h = -1;
  QueryLedger ledger;
  std::uint64_t n_per_group = 0;
};

inline std::uint64_t passive_sample_size(double eps, double delta, int d,
                                         std::size_t n_groups) {
  const double dd = static_cast<double>(d);
  const double n = (8.0 / (eps * eps)) *
                   (2.0 * dd * std::log(13.0 / eps) +
                    std::log(4.0 * static_cast<double>(n_groups) / delta));
  return static_cast<std::uint64_t>(std::ceil(n));
}

inline PassiveResult run_passive(const Instance& inst, double eps, double delta,
                                 std::uint64_t run_seed) {
  PassiveResult out;
  out.ledger = QueryLedger(inst.n_groups());
  out.n_per_group = passive_sample_size(eps, delta, inst.hclass.vc_dim, inst.n_groups());

  const Region everything = Region::full(inst.domain.size);
  std::vector<LabeledCounts> counts;
  counts.reserve(inst.n_groups());
  for (std::size_t g = 0; g < inst.n_groups(); ++g) {
    RngStream stream(derive_seed(run_seed, /*phase=*/0x9A55, g));
    counts.push_back(draw_labeled_counts(inst, g, everything, out.n_per_group, stream,
                                         out.ledger));
  }

  double best = 2.0;
  for (std::size_t h = 0; h < inst.n_hypotheses(); ++h) {
    double worst = 0.0;
    for (std::size_t g = 0; g < inst.n_groups(); ++g)
      worst = std::max(worst, empirical_loss(inst.hclass[h], counts[g]));
    if (worst < best) {  // strict: ties keep the lowest id
      best = worst;
      out.output_h = static_cast<int>(h);
    }
  }
  return out;
}

}  // namespace mural

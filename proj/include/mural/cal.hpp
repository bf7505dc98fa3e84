#pragma once
// Realizable single-group active learner (CAL).  Processes
//
//   n = ceil((4 / eps) (d ln(12 / eps) + ln(2 / delta)))
//
// unlabeled draws from the group's marginal.  A draw inside the current
// version space's disagreement region costs one label query and eliminates
// the inconsistent half; a draw outside it is labeled for free by the
// surviving consensus.  Against a group-realizable distribution the target
// labeling survives every elimination and the output errs at most eps with
// probability 1 - delta.

#include <cstdint>
#include <string>
#include <vector>

#include "mural/estimation.hpp"
#include "mural/oracles.hpp"
#include "mural/regions.hpp"

namespace mural {

struct CalResult {
  int output_h = -1;
  VersionSpace final_vs{};
  std::uint64_t draws = 0;
  std::uint64_t labels_used = 0;
  // Free labels inferred from consensus, kept for audit: each must match
  // the group's deterministic label wherever the group is realizable.
  std::vector<Sample> inferred;
};

inline std::uint64_t cal_sample_size(double eps, double delta, int d,
                                     double constant_scale = 1.0) {
  const double n = (4.0 / eps) *
                   (static_cast<double>(d) * std::log(12.0 / eps) + std::log(2.0 / delta));
  return static_cast<std::uint64_t>(std::ceil(constant_scale * n));
}

inline CalResult run_cal(const Instance& inst, std::size_t g, double eps, double delta,
                         RngStream& rng, QueryLedger& ledger,
                         double constant_scale = 1.0) {
  CalResult res;
  res.final_vs = VersionSpace::full(inst.n_hypotheses());
  Region dis = disagreement_region(inst.hclass, res.final_vs);

  const std::uint64_t n = cal_sample_size(eps, delta, inst.hclass.vc_dim, constant_scale);
  const Region everything = Region::full(inst.domain.size);
  const PointSampler sampler(inst, g, everything);

  for (std::uint64_t t = 0; t < n; ++t) {
    const std::size_t x = sampler.draw(rng);
    ledger.unlabeled_queries[g] += 1;
    ++res.draws;

    if (dis.contains(x)) {
      const std::int8_t y = label_query(inst, g, x, rng, ledger);
      ++res.labels_used;
      IndexSet next(inst.n_hypotheses());
      res.final_vs.bits.for_each([&](std::size_t h) {
        if (inst.hclass[h](x) == y) next.set(h);
      });
      // x sits in the disagreement region, so both labels have takers and
      // next is nonempty for either answer; this is a hard stop for set
      // bugs, not a reachable branch.
      if (next.none())
        throw std::runtime_error("run_cal: version space emptied; group " +
                                 std::to_string(g) + " is not realizable");
      if (next != res.final_vs.bits) {
        res.final_vs.bits = next;
        dis = disagreement_region(inst.hclass, res.final_vs);
      }
    } else {
      // Outside the disagreement region the survivors agree; adopt their
      // shared label without spending a query.
      const std::int8_t y = inst.hclass[res.final_vs.lowest_id()](x);
      res.inferred.push_back(Sample{x, g, y});
    }
  }

  res.output_h = res.final_vs.lowest_id();
  return res;
}

}  // namespace mural

#pragma once
// Sampling oracles and the query ledger.  Two oracles exist per group g:
//
//   U_g(S): a point drawn from D_g conditioned on the region S, or None
//           when P_{D_g}(S) = 0 (detected exactly from the finite pmf);
//   O_g(x): a label in {-1,+1}, +1 with probability eta_g(x).
//
// Label complexity is the number of O_g invocations, tracked per group in
// QueryLedger.  Every run owns a private ledger, so concurrent cells never
// contend; totals are merged only when reports are assembled.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mural/domain.hpp"
#include "mural/rng.hpp"

namespace mural {

struct QueryLedger {
  std::vector<std::uint64_t> label_queries;
  std::vector<std::uint64_t> unlabeled_queries;

  explicit QueryLedger(std::size_t n_groups = 0)
      : label_queries(n_groups, 0), unlabeled_queries(n_groups, 0) {}

  std::uint64_t total_labels() const {
    std::uint64_t s = 0;
    for (auto v : label_queries) s += v;
    return s;
  }

  std::uint64_t total_unlabeled() const {
    std::uint64_t s = 0;
    for (auto v : unlabeled_queries) s += v;
    return s;
  }

  void merge(const QueryLedger& o) {
    for (std::size_t g = 0; g < label_queries.size(); ++g) {
      label_queries[g] += o.label_queries[g];
      unlabeled_queries[g] += o.unlabeled_queries[g];
    }
  }
};

struct Sample {
  std::size_t point = 0;
  std::size_t group = 0;
  std::optional<std::int8_t> label;  // present iff O_g was invoked
};

// Per-point tallies of observed labels.  Equivalent to a sample list for
// every estimator here (losses are additive over points) and keeps the hot
// loops O(|X|) per hypothesis instead of O(#samples).
struct LabeledCounts {
  std::vector<std::uint64_t> pos, neg;
  std::uint64_t total = 0;

  explicit LabeledCounts(std::size_t n_points = 0) : pos(n_points, 0), neg(n_points, 0) {}

  void add(std::size_t x, std::int8_t label) {
    (label == 1 ? pos : neg)[x] += 1;
    ++total;
  }
};

// Inverse-CDF sampler for one group's marginal restricted to a region.
// Built once per sampling phase; draws are a binary search over the
// cumulative weights of region members.
class PointSampler {
 public:
  PointSampler(const Instance& inst, std::size_t g, const Region& region) {
    const auto& w = inst.groups[g].marginal;
    double acc = 0.0;
    region.bits.for_each([&](std::size_t x) {
      if (w[x] > 0.0) {
        acc += w[x];
        points_.push_back(x);
        cum_.push_back(acc);
      }
    });
    total_ = acc;
  }

  bool zero_mass() const { return points_.empty(); }
  double total_mass() const { return total_; }

  std::size_t draw(RngStream& rng) const {
    const double u = rng.uniform01() * total_;
    std::size_t lo = 0, hi = cum_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cum_[mid] > u)
        hi = mid;
      else
        lo = mid + 1;
    }
    return points_[lo];
  }

 private:
  std::vector<std::size_t> points_;
  std::vector<double> cum_;
  double total_ = 0.0;
};

// U_g(S).  Always counts as one unlabeled query, None included: the caller
// asked the oracle and the oracle answered.
inline std::optional<std::size_t> unlabeled_sample(const Instance& inst, std::size_t g,
                                                   const Region& region, RngStream& rng,
                                                   QueryLedger& ledger) {
  ledger.unlabeled_queries[g] += 1;
  PointSampler sampler(inst, g, region);
  if (sampler.zero_mass()) return std::nullopt;
  return sampler.draw(rng);
}

// O_g(x).  Labels are only defined where the group puts mass.
inline std::int8_t label_query(const Instance& inst, std::size_t g, std::size_t x,
                               RngStream& rng, QueryLedger& ledger) {
  if (!(inst.groups[g].marginal[x] > 0.0))
    throw ContractViolation("label_query: point " + std::to_string(x) +
                            " has zero mass under group " + std::to_string(g));
  ledger.label_queries[g] += 1;
  return rng.bernoulli(inst.groups[g].eta[x]) ? std::int8_t(1) : std::int8_t(-1);
}

// n labeled draws from U_g(S) + O_g.  A zero-mass region yields the empty
// set and charges nothing: the pmf is known exactly, so no probe is spent
// discovering emptiness (the empty set is what the estimator's L = 1
// convention exists for, and it always carries zero weight there).
inline std::vector<Sample> draw_labeled_set(const Instance& inst, std::size_t g,
                                            const Region& region, std::size_t n,
                                            RngStream& rng, QueryLedger& ledger) {
  std::vector<Sample> out;
  PointSampler sampler(inst, g, region);
  if (sampler.zero_mass() || n == 0) return out;
  out.reserve(n);
  const auto& eta = inst.groups[g].eta;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = sampler.draw(rng);
    const std::int8_t y = rng.bernoulli(eta[x]) ? std::int8_t(1) : std::int8_t(-1);
    out.push_back(Sample{x, g, y});
  }
  ledger.unlabeled_queries[g] += n;
  ledger.label_queries[g] += n;
  return out;
}

// Same draw sequence as draw_labeled_set (bit-identical RNG consumption and
// ledger effect), aggregated into per-point counts.
inline LabeledCounts draw_labeled_counts(const Instance& inst, std::size_t g,
                                         const Region& region, std::size_t n,
                                         RngStream& rng, QueryLedger& ledger) {
  LabeledCounts counts(inst.domain.size);
  PointSampler sampler(inst, g, region);
  if (sampler.zero_mass() || n == 0) return counts;
  const auto& eta = inst.groups[g].eta;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = sampler.draw(rng);
    counts.add(x, rng.bernoulli(eta[x]) ? std::int8_t(1) : std::int8_t(-1));
  }
  ledger.unlabeled_queries[g] += n;
  ledger.label_queries[g] += n;
  return counts;
}

// Unlabeled-only variant: same point stream, no O_g calls.  Used where a
// learner must draw per schedule but provably cannot use labels (singleton
// version spaces).
inline void draw_unlabeled_only(const Instance& inst, std::size_t g, const Region& region,
                                std::size_t n, RngStream& rng, QueryLedger& ledger) {
  PointSampler sampler(inst, g, region);
  if (sampler.zero_mass() || n == 0) return;
  for (std::size_t i = 0; i < n; ++i) (void)sampler.draw(rng);
  ledger.unlabeled_queries[g] += n;
}

}  // namespace mural

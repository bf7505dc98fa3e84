#pragma once
// Two-part loss estimation over a region split.  For a version space V
// with region R (its disagreement region in the learners) and group g:
//
//   Lhat(h | g) = P_g(R) * L_{S_in,g}(h) + P_g(R^c) * L_{S_out,g}(h_rep)
//
// where S_in,g / S_out,g are labeled samples drawn conditionally on R and
// R^c, and h_rep is the shared representative (lowest id in V).  All h in V
// agree with h_rep outside R, so the second term is common to the whole
// version space; it is computed once per group and reused bitwise.
//
// Convention: the empirical loss of an empty sample is 1.  An empty sample
// only ever arises from a zero-mass part, whose weight is exactly 0, so the
// convention never influences an estimate.
//
// gamma_bound is the deviation envelope Gamma_g(delta, R, m, m'):
//   P(R), P(R^c) > 0 :  P(R) * (1/m + sqrt((ln(8/delta) + d ln(2em/d)) / m))
//                         + sqrt(ln(4/delta) / (2 m'))
//   P(R^c) = 0       :  1/m + sqrt((ln(8/delta) + d ln(2em/d)) / m)
//   P(R)   = 0       :  sqrt(ln(4/delta) / (2 m'))

#include <algorithm>
#include <cmath>
#include <vector>

#include "mural/oracles.hpp"
#include "mural/regions.hpp"

namespace mural {

inline double empirical_loss(const Hypothesis& h, const std::vector<Sample>& samples) {
  if (samples.empty()) return 1.0;
  std::size_t errors = 0;
  for (const auto& s : samples)
    if (s.label && *s.label != h(s.point)) ++errors;
  return static_cast<double>(errors) / static_cast<double>(samples.size());
}

inline double empirical_loss(const Hypothesis& h, const LabeledCounts& counts) {
  if (counts.total == 0) return 1.0;
  std::uint64_t errors = 0;
  for (std::size_t x = 0; x < counts.pos.size(); ++x)
    errors += h.labels[x] == 1 ? counts.neg[x] : counts.pos[x];
  return static_cast<double>(errors) / static_cast<double>(counts.total);
}

namespace detail {
inline void require_member(const VersionSpace& vs, int h_id, const char* who) {
  if (h_id < 0 || static_cast<std::size_t>(h_id) >= vs.bits.universe() ||
      !vs.contains(static_cast<std::size_t>(h_id)))
    throw ContractViolation(std::string(who) + ": hypothesis " + std::to_string(h_id) +
                            " is not in the version space");
}
}  // namespace detail

template <class SampleSet>
double two_part_loss(const Instance& inst, std::size_t g, int h_id, const VersionSpace& vs,
                     const Region& region, const SampleSet& s_in, const SampleSet& s_out) {
  detail::require_member(vs, h_id, "two_part_loss");
  const int rep = vs.lowest_id();
  const double mass_in = region_mass(inst, g, region);
  const double mass_out = region_mass(inst, g, region.complement());
  const auto& h = inst.hclass[static_cast<std::size_t>(h_id)];
  const auto& h_rep = inst.hclass[static_cast<std::size_t>(rep)];
  return mass_in * empirical_loss(h, s_in) + mass_out * empirical_loss(h_rep, s_out);
}

// Per-group estimates for one hypothesis, plus the shared pieces, as a
// plain value for tests and traces.
struct TwoPartEstimate {
  std::vector<double> per_group;
  int representative = -1;
  double max_value = 0.0;
};

template <class SampleSet>
TwoPartEstimate max_loss_estimate(const Instance& inst, int h_id, const VersionSpace& vs,
                                  const Region& region, const std::vector<SampleSet>& s_in,
                                  const std::vector<SampleSet>& s_out) {
  TwoPartEstimate est;
  est.representative = vs.lowest_id();
  est.per_group.resize(inst.n_groups());
  for (std::size_t g = 0; g < inst.n_groups(); ++g) {
    est.per_group[g] = two_part_loss(inst, g, h_id, vs, region, s_in[g], s_out[g]);
    est.max_value = std::max(est.max_value, est.per_group[g]);
  }
  return est;
}

// Shared-representative evaluator for a whole version space: the h_rep
// term is computed once per group, so every member sees the identical
// double, and agreement outside the region is exact by construction.
class RegionEstimator {
 public:
  RegionEstimator(const Instance& inst, const VersionSpace& vs, const Region& region,
                  const std::vector<LabeledCounts>& s_in,
                  const std::vector<LabeledCounts>& s_out)
      : inst_(inst), vs_(vs), s_in_(s_in) {
    rep_ = vs.lowest_id();
    const auto& h_rep = inst.hclass[static_cast<std::size_t>(rep_)];
    mass_in_.resize(inst.n_groups());
    rep_term_.resize(inst.n_groups());
    for (std::size_t g = 0; g < inst.n_groups(); ++g) {
      mass_in_[g] = region_mass(inst, g, region);
      const double mass_out = region_mass(inst, g, region.complement());
      rep_term_[g] = mass_out * empirical_loss(h_rep, s_out[g]);
    }
  }

  int representative() const { return rep_; }

  double group_estimate(int h_id, std::size_t g) const {
    detail::require_member(vs_, h_id, "RegionEstimator");
    const auto& h = inst_.hclass[static_cast<std::size_t>(h_id)];
    return mass_in_[g] * empirical_loss(h, s_in_[g]) + rep_term_[g];
  }

  double max_estimate(int h_id) const {
    double worst = 0.0;
    for (std::size_t g = 0; g < inst_.n_groups(); ++g)
      worst = std::max(worst, group_estimate(h_id, g));
    return worst;
  }

 private:
  const Instance& inst_;
  const VersionSpace& vs_;
  const std::vector<LabeledCounts>& s_in_;
  std::vector<double> mass_in_;
  std::vector<double> rep_term_;
  int rep_ = -1;
};

inline double gamma_bound(double delta, double mass_region, double mass_complement, int d,
                          double m, double m_prime) {
  const bool has_region = mass_region > 0.0;
  const bool has_complement = mass_complement > 0.0;
  if (!has_region && !has_complement)
    throw ContractViolation("gamma_bound: both parts have zero mass");

  auto region_term = [&](double mass) {
    if (!(m > 0.0)) throw ContractViolation("gamma_bound: m must be positive");
    const double dd = static_cast<double>(d);
    return mass * (1.0 / m +
                   std::sqrt((std::log(8.0 / delta) + dd * std::log(2.0 * M_E * m / dd)) / m));
  };
  auto complement_term = [&]() {
    if (!(m_prime > 0.0)) throw ContractViolation("gamma_bound: m' must be positive");
    return std::sqrt(std::log(4.0 / delta) / (2.0 * m_prime));
  };

  if (!has_complement) return region_term(1.0);
  if (!has_region) return complement_term();
  return region_term(mass_region) + complement_term();
}

}  // namespace mural

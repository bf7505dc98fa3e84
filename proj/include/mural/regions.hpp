#pragma once
// Disagreement geometry: the region where a version space disagrees with
// itself, the per-group disagreement pseudo-metric rho_g, metric balls in
// hypothesis space, and the disagreement coefficient
//
//   theta_g = sup_{h in H} sup_{r >= 2 nu + eps} P_g(DIS(B_g(h, r))) / r.
//
// On a finite instance the sup is exact: for a fixed center the ball only
// changes at the distinct values of rho_g(h, .), and within a constant-ball
// interval the ratio is maximised at the left endpoint.  It therefore
// suffices to evaluate the ratio at r = 2 nu + eps and at every rho value
// at or above it.

#include <algorithm>
#include <vector>

#include "mural/domain.hpp"

namespace mural {

inline Region disagreement_region(const HypothesisClass& hclass, const VersionSpace& vs) {
  if (vs.bits.none()) throw ContractViolation("disagreement_region: empty version space");
  const std::size_t n = hclass.hypotheses.empty() ? 0 : hclass[0].labels.size();
  Region out = Region::empty(n);
  const int rep = vs.lowest_id();
  const auto& base = hclass[static_cast<std::size_t>(rep)].labels;
  vs.bits.for_each([&](std::size_t hid) {
    const auto& lab = hclass[hid].labels;
    for (std::size_t x = 0; x < n; ++x)
      if (lab[x] != base[x]) out.bits.set(x);
  });
  return out;
}

// rho_g(h, h') = P_{D_g}(h(x) != h'(x)).
inline double rho(const Instance& inst, std::size_t g, int h1, int h2) {
  const auto& a = inst.hclass[static_cast<std::size_t>(h1)].labels;
  const auto& b = inst.hclass[static_cast<std::size_t>(h2)].labels;
  const auto& w = inst.groups[g].marginal;
  double mass = 0.0;
  for (std::size_t x = 0; x < inst.domain.size; ++x)
    if (a[x] != b[x]) mass += w[x];
  return mass;
}

inline VersionSpace ball(const Instance& inst, std::size_t g, int center, double radius) {
  VersionSpace vs{IndexSet(inst.n_hypotheses())};
  for (std::size_t h = 0; h < inst.n_hypotheses(); ++h)
    if (rho(inst, g, center, static_cast<int>(h)) <= radius) vs.bits.set(h);
  return vs;
}

inline double disagreement_coefficient(const Instance& inst, std::size_t g, double nu,
                                       double eps) {
  const double r0 = 2.0 * nu + eps;
  if (!(r0 > 0.0))
    throw ContractViolation("disagreement_coefficient: 2*nu + eps must be positive");

  const std::size_t n_h = inst.n_hypotheses();
  const std::size_t n_x = inst.domain.size;
  const auto& w = inst.groups[g].marginal;
  double theta = 0.0;

  std::vector<std::pair<double, std::size_t>> dist(n_h);
  // has_pos/has_neg track the labels present among ball members per point;
  // a point joins the disagreement region when it first sees both.
  std::vector<std::uint8_t> has_pos(n_x), has_neg(n_x);

  for (std::size_t center = 0; center < n_h; ++center) {
    for (std::size_t h = 0; h < n_h; ++h)
      dist[h] = {rho(inst, g, static_cast<int>(center), static_cast<int>(h)), h};
    std::sort(dist.begin(), dist.end());

    std::fill(has_pos.begin(), has_pos.end(), 0);
    std::fill(has_neg.begin(), has_neg.end(), 0);
    double dis_mass = 0.0;
    std::size_t k = 0;

    auto absorb_through = [&](double radius) {
      for (; k < n_h && dist[k].first <= radius; ++k) {
        const auto& lab = inst.hclass[dist[k].second].labels;
        for (std::size_t x = 0; x < n_x; ++x) {
          auto& seen = lab[x] == 1 ? has_pos[x] : has_neg[x];
          if (!seen) {
            seen = 1;
            if (has_pos[x] && has_neg[x]) dis_mass += w[x];
          }
        }
      }
    };

    absorb_through(r0);
    theta = std::max(theta, dis_mass / r0);
    while (k < n_h) {
      const double r = dist[k].first;
      absorb_through(r);
      theta = std::max(theta, dis_mass / r);
    }
  }
  return theta;
}

inline double disagreement_coefficient_max(const Instance& inst, double nu, double eps) {
  double theta = 0.0;
  for (std::size_t g = 0; g < inst.n_groups(); ++g)
    theta = std::max(theta, disagreement_coefficient(inst, g, nu, eps));
  return theta;
}

}  // namespace mural

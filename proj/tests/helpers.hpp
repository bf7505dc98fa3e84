#pragma once
// Shared test utilities.  Rat gives exact rational arithmetic so expected
// values are derived independently of the library's double pipeline; the
// hand-rolled instance builders avoid depending on the generators under
// test.

#include <cassert>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mural/domain.hpp"
#include "mural/rng.hpp"

namespace testutil {

struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rat() = default;
  Rat(std::int64_t n, std::int64_t d = 1) : num(n), den(d) { normalize(); }

  void normalize() {
    assert(den != 0);
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  Rat operator+(const Rat& o) const { return Rat(num * o.den + o.num * den, den * o.den); }
  Rat operator-(const Rat& o) const { return Rat(num * o.den - o.num * den, den * o.den); }
  Rat operator*(const Rat& o) const { return Rat(num * o.num, den * o.den); }
  Rat operator/(const Rat& o) const { return Rat(num * o.den, den * o.num); }
  bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Rat& o) const { return !(*this == o); }
  bool operator<(const Rat& o) const { return num * o.den < o.num * den; }
  bool operator<=(const Rat& o) const { return num * o.den <= o.num * den; }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// Rational description of an instance, for exact expected-value derivation.
struct RatInstance {
  std::vector<std::vector<Rat>> marginal;  // [group][point]
  std::vector<std::vector<Rat>> eta;       // [group][point]
  std::vector<std::vector<std::int8_t>> labels;

  Rat point_error(std::size_t g, std::size_t h, std::size_t x) const {
    return labels[h][x] == 1 ? Rat(1) - eta[g][x] : eta[g][x];
  }

  Rat group_loss(std::size_t g, std::size_t h) const {
    Rat loss(0);
    for (std::size_t x = 0; x < marginal[g].size(); ++x)
      loss = loss + marginal[g][x] * point_error(g, h, x);
    return loss;
  }

  Rat max_loss(std::size_t h) const {
    Rat worst(0);
    for (std::size_t g = 0; g < marginal.size(); ++g)
      worst = rat_max(worst, group_loss(g, h));
    return worst;
  }

  // Conditional loss on a region (point subset), None if zero mass.
  Rat conditional_loss(std::size_t g, std::size_t h,
                       const std::vector<std::size_t>& region) const {
    Rat mass(0), loss(0);
    for (auto x : region) {
      mass = mass + marginal[g][x];
      loss = loss + marginal[g][x] * point_error(g, h, x);
    }
    assert(mass != Rat(0));
    return loss / mass;
  }

  mural::Instance to_instance(int vc_dim) const {
    mural::Instance inst;
    inst.domain.size = marginal[0].size();
    for (std::size_t g = 0; g < marginal.size(); ++g) {
      mural::GroupDistribution gd;
      for (std::size_t x = 0; x < marginal[g].size(); ++x) {
        gd.marginal.push_back(marginal[g][x].value());
        gd.eta.push_back(eta[g][x].value());
      }
      inst.groups.push_back(std::move(gd));
    }
    for (std::size_t h = 0; h < labels.size(); ++h)
      inst.hclass.hypotheses.push_back(mural::Hypothesis{static_cast<int>(h), labels[h]});
    inst.hclass.vc_dim = vc_dim;
    return inst;
  }
};

// The four-point two-group gadget, in exact form.  Points: a, b, c, d.
// h0 labels everything +1; h1 flips a and b, so DIS = {a, b}.
//   group 1: mass 1/3 on a, 2/3 on c;  eta(a) = 3/4, eta(c) = 1
//   group 2: mass 1/2 on b, 1/2 on d;  eta(b) = 1/3, eta(d) = 5/6
// Derived exactly below and frozen in the tests:
//   L(h0|1) = 1/12   L(h0|2) = 5/12   Lmax(h0) = 5/12
//   L(h1|1) = 1/4    L(h1|2) = 1/4    Lmax(h1) = 1/4    margin = 1/6
//   DIS-conditional losses: h0 -> 1/4, 2/3 (max 2/3); h1 -> 3/4, 1/3
//   (max 3/4), so the DIS-restricted surrogate prefers h0, the truly
//   worse hypothesis.
inline RatInstance example1_rational() {
  RatInstance ri;
  ri.marginal = {{Rat(1, 3), Rat(0), Rat(2, 3), Rat(0)},
                 {Rat(0), Rat(1, 2), Rat(0), Rat(1, 2)}};
  ri.eta = {{Rat(3, 4), Rat(1, 2), Rat(1), Rat(1, 2)},
            {Rat(1, 2), Rat(1, 3), Rat(1, 2), Rat(5, 6)}};
  ri.labels = {{1, 1, 1, 1}, {-1, -1, 1, 1}};
  return ri;
}

// Small random instances for property tests, built with plain rejection of
// degeneracy and none of the library's generator code.
inline mural::Instance random_test_instance(std::size_t n_points, std::size_t n_hyp,
                                            std::size_t n_groups, std::uint64_t seed) {
  mural::RngStream rng(seed);
  mural::Instance inst;
  inst.domain.size = n_points;
  for (std::size_t g = 0; g < n_groups; ++g) {
    mural::GroupDistribution gd;
    double sum = 0.0;
    for (std::size_t x = 0; x < n_points; ++x) {
      const double w = 0.05 + rng.uniform01();
      gd.marginal.push_back(w);
      sum += w;
    }
    for (auto& w : gd.marginal) w /= sum;
    for (std::size_t x = 0; x < n_points; ++x) gd.eta.push_back(rng.uniform01());
    inst.groups.push_back(std::move(gd));
  }
  std::vector<std::vector<std::int8_t>> labelings;
  while (labelings.size() < n_hyp) {
    std::vector<std::int8_t> lab;
    for (std::size_t x = 0; x < n_points; ++x)
      lab.push_back(rng.bernoulli(0.5) ? std::int8_t(1) : std::int8_t(-1));
    bool dup = false;
    for (const auto& other : labelings)
      if (other == lab) dup = true;
    if (!dup) labelings.push_back(std::move(lab));
  }
  inst.hclass = mural::make_hypothesis_class(std::move(labelings));
  return inst;
}

}  // namespace testutil

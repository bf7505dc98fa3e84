#pragma once
// Core value types: a finite point set, per-group distributions (marginal
// pmf over points plus the conditional positive-label rate eta), and a
// finite class of {-1,+1} labelings.  Instances are immutable once built;
// every learner, estimator, and diagnostic operates on const references.
//
// Loss conventions used throughout:
//   err(h, x)     = P(y != h(x) | x) = eta(x) if h(x) = -1, else 1 - eta(x)
//   L(h | g)      = sum_x w_g(x) * err(h, x)          (true group loss)
//   Lmax(h)       = max_g L(h | g)                     (worst-group loss)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mural/bitset.hpp"

namespace mural {

// Thrown when a caller breaks an interface contract (querying a zero-mass
// point, estimating a hypothesis outside its version space, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct FiniteDomain {
  std::size_t size = 0;
};

struct GroupDistribution {
  std::vector<double> marginal;  // pmf over points, sums to 1
  std::vector<double> eta;       // P(y = +1 | x), entries in [0,1]
};

struct Hypothesis {
  int id = -1;
  std::vector<std::int8_t> labels;  // entries in {-1,+1}

  std::int8_t operator()(std::size_t x) const { return labels[x]; }
};

struct HypothesisClass {
  std::vector<Hypothesis> hypotheses;  // ids dense, hypotheses[i].id == i
  int vc_dim = 1;

  std::size_t size() const { return hypotheses.size(); }
  const Hypothesis& operator[](std::size_t i) const { return hypotheses[i]; }
};

// Subset of domain points.
struct Region {
  IndexSet bits;

  static Region empty(std::size_t n) { return Region{IndexSet(n)}; }
  static Region full(std::size_t n) { return Region{IndexSet::full(n)}; }
  bool contains(std::size_t x) const { return bits.test(x); }
  Region complement() const { return Region{bits.complement()}; }
  std::size_t count() const { return bits.count(); }
};

// Subset of hypothesis ids.
struct VersionSpace {
  IndexSet bits;

  static VersionSpace full(std::size_t n) { return VersionSpace{IndexSet::full(n)}; }
  bool contains(std::size_t h) const { return bits.test(h); }
  std::size_t count() const { return bits.count(); }

  // Dense-id convention makes "lowest surviving id" the canonical
  // representative wherever a shared tie-break is needed.
  int lowest_id() const {
    int found = -1;
    bits.for_each([&](std::size_t i) {
      if (found < 0) found = static_cast<int>(i);
    });
    if (found < 0) throw ContractViolation("version space is empty");
    return found;
  }
};

struct Instance {
  FiniteDomain domain;
  std::vector<GroupDistribution> groups;
  HypothesisClass hclass;

  std::size_t n_points() const { return domain.size; }
  std::size_t n_groups() const { return groups.size(); }
  std::size_t n_hypotheses() const { return hclass.size(); }
};

// Marginal sums may accumulate rounding across |X| additions; anything
// beyond this slack is a construction bug, not noise.
inline constexpr double kMarginalSumTol = 1e-12;

inline void validate(const Instance& inst) {
  const std::size_t n = inst.domain.size;
  if (n == 0) throw std::invalid_argument("instance: empty domain");
  if (inst.groups.empty()) throw std::invalid_argument("instance: no groups");
  if (inst.hclass.hypotheses.empty())
    throw std::invalid_argument("instance: empty hypothesis class");
  if (inst.hclass.vc_dim < 1)
    throw std::invalid_argument("instance: vc_dim must be >= 1");

  for (std::size_t g = 0; g < inst.groups.size(); ++g) {
    const auto& gd = inst.groups[g];
    if (gd.marginal.size() != n || gd.eta.size() != n)
      throw std::invalid_argument("instance: group " + std::to_string(g) +
                                  " has wrong-sized marginal or eta");
    double sum = 0.0;
    for (double w : gd.marginal) {
      if (!(w >= 0.0))
        throw std::invalid_argument("instance: group " + std::to_string(g) +
                                    " has a negative marginal weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kMarginalSumTol)
      throw std::invalid_argument("instance: group " + std::to_string(g) +
                                  " marginal sums to " + std::to_string(sum));
    for (double e : gd.eta)
      if (!(e >= 0.0 && e <= 1.0))
        throw std::invalid_argument("instance: group " + std::to_string(g) +
                                    " has eta outside [0,1]");
  }

  for (std::size_t i = 0; i < inst.hclass.size(); ++i) {
    const auto& h = inst.hclass[i];
    if (h.id != static_cast<int>(i))
      throw std::invalid_argument("instance: hypothesis ids must be dense");
    if (h.labels.size() != n)
      throw std::invalid_argument("instance: hypothesis " + std::to_string(i) +
                                  " has wrong label count");
    for (auto l : h.labels)
      if (l != 1 && l != -1)
        throw std::invalid_argument("instance: labels must be +1 or -1");
    for (std::size_t j = 0; j < i; ++j)
      if (inst.hclass[j].labels == h.labels)
        throw std::invalid_argument("instance: duplicate label vectors " +
                                    std::to_string(j) + " and " + std::to_string(i));
  }
}

// Builds a class from raw label vectors: collapses duplicate vectors to one
// id (keeping first occurrence order) and defaults the VC dimension to
// ceil(log2 |H|), the generic finite-class bound.  Structured generators
// pass their exact dimension instead.
inline HypothesisClass make_hypothesis_class(std::vector<std::vector<std::int8_t>> labelings,
                                             int vc_dim = 0) {
  HypothesisClass hc;
  for (auto& lab : labelings) {
    bool dup = false;
    for (const auto& h : hc.hypotheses)
      if (h.labels == lab) {
        dup = true;
        break;
      }
    if (dup) continue;
    Hypothesis h;
    h.id = static_cast<int>(hc.hypotheses.size());
    h.labels = std::move(lab);
    hc.hypotheses.push_back(std::move(h));
  }
  if (vc_dim > 0) {
    hc.vc_dim = vc_dim;
  } else {
    int d = 1;
    while ((std::size_t(1) << d) < hc.hypotheses.size()) ++d;
    hc.vc_dim = std::max(1, d);
  }
  return hc;
}

inline double point_error(const Instance& inst, std::size_t g, const Hypothesis& h,
                          std::size_t x) {
  const double eta = inst.groups[g].eta[x];
  return h(x) == 1 ? 1.0 - eta : eta;
}

inline double true_group_loss(const Instance& inst, const Hypothesis& h, std::size_t g) {
  const auto& gd = inst.groups[g];
  double loss = 0.0;
  for (std::size_t x = 0; x < inst.domain.size; ++x)
    loss += gd.marginal[x] * (h(x) == 1 ? 1.0 - gd.eta[x] : gd.eta[x]);
  return loss;
}

inline double true_group_loss(const Instance& inst, int h_id, std::size_t g) {
  return true_group_loss(inst, inst.hclass[static_cast<std::size_t>(h_id)], g);
}

inline double true_max_loss(const Instance& inst, const Hypothesis& h) {
  double worst = 0.0;
  for (std::size_t g = 0; g < inst.groups.size(); ++g)
    worst = std::max(worst, true_group_loss(inst, h, g));
  return worst;
}

inline double true_max_loss(const Instance& inst, int h_id) {
  return true_max_loss(inst, inst.hclass[static_cast<std::size_t>(h_id)]);
}

inline double region_mass(const Instance& inst, std::size_t g, const Region& region) {
  const auto& w = inst.groups[g].marginal;
  double mass = 0.0;
  region.bits.for_each([&](std::size_t x) { mass += w[x]; });
  return mass;
}

// ----- JSON wire format ---------------------------------------------------
// {"domain_size": n,
//  "groups": [{"marginal": [...], "eta": [...]}, ...],
//  "hypotheses": [[+1,-1,...], ...],
//  "vc_dim": d}

inline nlohmann::json to_json(const Instance& inst) {
  nlohmann::json j;
  j["domain_size"] = inst.domain.size;
  j["groups"] = nlohmann::json::array();
  for (const auto& g : inst.groups)
    j["groups"].push_back({{"marginal", g.marginal}, {"eta", g.eta}});
  j["hypotheses"] = nlohmann::json::array();
  for (const auto& h : inst.hclass.hypotheses) {
    nlohmann::json labels = nlohmann::json::array();
    for (auto l : h.labels) labels.push_back(static_cast<int>(l));
    j["hypotheses"].push_back(std::move(labels));
  }
  j["vc_dim"] = inst.hclass.vc_dim;
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  inst.domain.size = j.at("domain_size").get<std::size_t>();
  for (const auto& g : j.at("groups")) {
    GroupDistribution gd;
    gd.marginal = g.at("marginal").get<std::vector<double>>();
    gd.eta = g.at("eta").get<std::vector<double>>();
    inst.groups.push_back(std::move(gd));
  }
  std::vector<std::vector<std::int8_t>> labelings;
  for (const auto& hl : j.at("hypotheses")) {
    std::vector<std::int8_t> lab;
    for (const auto& v : hl) lab.push_back(static_cast<std::int8_t>(v.get<int>()));
    labelings.push_back(std::move(lab));
  }
  // The wire format is explicit: duplicate vectors are rejected by
  // validation rather than silently collapsed.
  for (std::size_t i = 0; i < labelings.size(); ++i) {
    Hypothesis h;
    h.id = static_cast<int>(i);
    h.labels = labelings[i];
    inst.hclass.hypotheses.push_back(std::move(h));
  }
  inst.hclass.vc_dim = j.at("vc_dim").get<int>();
  validate(inst);
  return inst;
}

}  // namespace mural

#pragma once
// Iterative disagreement-based learner for the agnostic multi-group
// objective.  Runs I = ceil(log2(1/eps)) halving rounds; round i targets
// precision eps_i = eps * 2^(I-i) and keeps every hypothesis whose
// estimated worst-group loss is within eps_i / 4 of the round's ERM.  A
// final estimation round at precision eps picks the output from the last
// version space.
//
// Round i, with R_i the version space's disagreement region and
// m_i = max_g P_g(R_i), draws per group
//
//   n_in  = ceil(c * 1024 (m_i / eps_i)^2 (2 d ln(64/eps) + ln(8 G I / delta)))
//   n_out = ceil(c * 128 ln(4 G I / delta) / eps_i^2)
//
// conditioned on R_i and its complement.  (The in-region log keeps the
// final-precision eps/8 radius in its argument for every round; rounds
// before the last oversample slightly.)  c = 1 gives the analysed
// constants; c < 1 deflates every sample size for cheap smoke runs and
// voids the guarantees.
//
// Singleton version spaces are a special case: nothing remains to compare,
// so rounds draw their unlabeled samples per schedule but skip every label
// query; a run whose class is (or becomes) a single hypothesis spends no
// labels from that point on.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mural/estimation.hpp"
#include "mural/oracles.hpp"
#include "mural/regions.hpp"

namespace mural {

struct AgnosticConfig {
  double eps = 0.1;
  double delta = 0.1;
  double constant_scale = 1.0;       // c in (0, 1]
  std::optional<int> d_override;     // replaces the instance's VC dimension
};

struct IterationTrace {
  int iter = 0;             // 1-based; the final estimation round is I+1
  bool final_round = false;
  double eps_i = 0.0;       // eps * 2^(I-i)
  double m_i = 0.0;         // max_g P_g(R_i)
  std::vector<double> region_mass;            // per group
  std::vector<std::uint64_t> n_in, n_out;     // scheduled draw counts
  std::vector<std::uint64_t> labels_in, labels_out;  // labels actually charged
  int erm_id = -1;
  double erm_estimate = 0.0;
  double threshold = 0.0;   // erm_estimate + eps_i / 4 (elimination rounds)
  Region region{};
  VersionSpace survivors{};  // version space after the round
  int hstar_survived = -1;   // unknown until check_lemma_invariants fills it
};

struct AgnosticResult {
  int output_h = -1;
  int iterations = 0;  // I
  QueryLedger ledger{};
  std::vector<IterationTrace> traces;
};

// Carries the per-round evidence out of a run that had to stop.
class AgnosticError : public std::runtime_error {
 public:
  AgnosticError(const std::string& what, std::vector<IterationTrace> traces)
      : std::runtime_error(what), traces_(std::move(traces)) {}
  const std::vector<IterationTrace>& traces() const { return traces_; }

 private:
  std::vector<IterationTrace> traces_;
};

inline int agnostic_iteration_count(double eps) {
  if (eps >= 1.0) return 0;
  return static_cast<int>(std::ceil(std::log2(1.0 / eps) - 1e-12));
}

namespace detail {
inline std::uint64_t ceil_count(double v) {
  if (v <= 0.0) return 0;
  return static_cast<std::uint64_t>(std::ceil(v));
}
}  // namespace detail

inline AgnosticResult run_agnostic(const Instance& inst, const AgnosticConfig& cfg,
                                   std::uint64_t run_seed) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("run_agnostic: eps must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw std::invalid_argument("run_agnostic: delta must be in (0,1)");
  if (!(cfg.constant_scale > 0.0 && cfg.constant_scale <= 1.0))
    throw std::invalid_argument("run_agnostic: constant_scale must be in (0,1]");

  const std::size_t G = inst.n_groups();
  const int d = cfg.d_override.value_or(inst.hclass.vc_dim);
  const int I = agnostic_iteration_count(cfg.eps);
  const double i_log = static_cast<double>(std::max(I, 1));
  const double log_in =
      2.0 * static_cast<double>(d) * std::max(0.0, std::log(64.0 / cfg.eps)) +
      std::log(8.0 * static_cast<double>(G) * i_log / cfg.delta);
  const double log_out = std::log(4.0 * static_cast<double>(G) * i_log / cfg.delta);

  AgnosticResult res;
  res.iterations = I;
  res.ledger = QueryLedger(G);
  VersionSpace vs = VersionSpace::full(inst.n_hypotheses());

  for (int i = 1; i <= I + 1; ++i) {
    IterationTrace tr;
    tr.iter = i;
    tr.final_round = i == I + 1;
    tr.eps_i = tr.final_round ? cfg.eps : cfg.eps * std::pow(2.0, I - i);

    tr.region = disagreement_region(inst.hclass, vs);
    tr.region_mass.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
      tr.region_mass[g] = region_mass(inst, g, tr.region);
      tr.m_i = std::max(tr.m_i, tr.region_mass[g]);
    }

    const double ratio = tr.m_i / tr.eps_i;
    const std::uint64_t n_in =
        detail::ceil_count(cfg.constant_scale * 1024.0 * ratio * ratio * log_in);
    const std::uint64_t n_out =
        detail::ceil_count(cfg.constant_scale * 128.0 * log_out / (tr.eps_i * tr.eps_i));
    tr.n_in.assign(G, n_in);
    tr.n_out.assign(G, n_out);
    tr.labels_in.assign(G, 0);
    tr.labels_out.assign(G, 0);

    const Region comp = tr.region.complement();
    const bool singleton = vs.count() == 1;
    std::vector<LabeledCounts> s_in, s_out;
    for (std::size_t g = 0; g < G; ++g) {
      RngStream in_rng(derive_seed(run_seed, 0x10000u + 4u * i, g));
      RngStream out_rng(derive_seed(run_seed, 0x10000u + 4u * i + 1u, g));
      if (singleton) {
        draw_unlabeled_only(inst, g, tr.region, n_in, in_rng, res.ledger);
        draw_unlabeled_only(inst, g, comp, n_out, out_rng, res.ledger);
      } else {
        s_in.push_back(draw_labeled_counts(inst, g, tr.region, n_in, in_rng, res.ledger));
        s_out.push_back(draw_labeled_counts(inst, g, comp, n_out, out_rng, res.ledger));
        tr.labels_in[g] = s_in.back().total;
        tr.labels_out[g] = s_out.back().total;
      }
    }

    if (singleton) {
      tr.erm_id = vs.lowest_id();
      tr.survivors = vs;
      res.traces.push_back(std::move(tr));
      if (i == I + 1) res.output_h = res.traces.back().erm_id;
      continue;
    }

    const RegionEstimator est(inst, vs, tr.region, s_in, s_out);
    double best = 2.0;
    int erm = -1;
    vs.bits.for_each([&](std::size_t h) {
      const double v = est.max_estimate(static_cast<int>(h));
      if (v < best) {
        best = v;
        erm = static_cast<int>(h);
      }
    });
    tr.erm_id = erm;
    tr.erm_estimate = best;

    if (!tr.final_round) {
      tr.threshold = best + tr.eps_i / 4.0;
      VersionSpace next{IndexSet(inst.n_hypotheses())};
      vs.bits.for_each([&](std::size_t h) {
        if (est.max_estimate(static_cast<int>(h)) <= tr.threshold) next.bits.set(h);
      });
      if (next.bits.none()) {
        // Unreachable in exact arithmetic (the ERM passes its own
        // threshold); kept as a hard stop for NaN-poisoned estimates.
        res.traces.push_back(std::move(tr));
        throw AgnosticError("run_agnostic: version space emptied at iteration " +
                                std::to_string(i),
                            std::move(res.traces));
      }
      vs = next;
      tr.survivors = vs;
    } else {
      tr.survivors = vs;
      res.output_h = erm;
    }
    res.traces.push_back(std::move(tr));
  }
  return res;
}

// ----- invariant audit ------------------------------------------------------

struct LemmaCheck {
  struct Round {
    int iter = 0;
    bool hstar_survived = false;
    bool within_bound = false;  // every survivor's true excess <= bound
    double bound = 0.0;
    double max_excess = 0.0;
  };
  std::vector<Round> rounds;
  bool hstar_survived_all = true;  // optimum outlives every elimination
  bool excess_bounds_hold = true;  // survivor excess within 2^(I-i) eps
};

// Audits a finished run against exact losses: the canonical optimum
// (lowest-id minimizer of the true worst-group loss) must survive every
// elimination round, and after round i every survivor must sit within
// 2^(I-i) * eps of nu.  Fills the hstar_survived trace fields as a side
// effect.
inline LemmaCheck check_lemma_invariants(const Instance& inst, AgnosticResult& result,
                                         int hstar, double eps) {
  LemmaCheck out;
  const double nu = true_max_loss(inst, hstar);
  const int I = result.iterations;
  for (auto& tr : result.traces) {
    if (tr.final_round) break;
    LemmaCheck::Round row;
    row.iter = tr.iter;
    row.bound = eps * std::pow(2.0, I - tr.iter);
    row.hstar_survived = tr.survivors.contains(static_cast<std::size_t>(hstar));
    tr.hstar_survived = row.hstar_survived ? 1 : 0;
    row.max_excess = 0.0;
    tr.survivors.bits.for_each([&](std::size_t h) {
      row.max_excess =
          std::max(row.max_excess, true_max_loss(inst, static_cast<int>(h)) - nu);
    });
    row.within_bound = row.max_excess <= row.bound + 1e-12;
    out.hstar_survived_all = out.hstar_survived_all && row.hstar_survived;
    out.excess_bounds_hold = out.excess_bounds_hold && row.within_bound;
    out.rounds.push_back(row);
  }
  return out;
}

}  // namespace mural

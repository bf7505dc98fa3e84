#pragma once
// Per-run reports.  One RunReport captures everything a single
// (scenario, algorithm, eps, seed) cell produced: the chosen hypothesis,
// its exact excess over the brute-force optimum, the full query ledger,
// disagreement-coefficient diagnostics, and an algorithm-specific trace
// payload.  Reports serialize to JSON (nlohmann keeps object keys sorted,
// so identical runs dump to identical bytes) and to one CSV row.
//
// Structural invariants are enforced at assembly time and again by the
// verify path: the excess of an exactly-scored output can never fall below
// zero (tolerance -1e-12), and a trace's label accounting must reproduce
// the ledger.  Violating either is a contract failure, never a statistic.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mural/agnostic.hpp"
#include "mural/baselines.hpp"
#include "mural/reduction.hpp"
#include "mural/regions.hpp"

namespace mural {

// Shortest round-trip decimal form; keeps CSV cells both exact and tidy.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct ThetaDiagnostic {
  std::vector<double> per_group;
  double max_value = 0.0;
  double radius_floor = 0.0;  // 2 nu + eps
};

inline ThetaDiagnostic theta_diagnostic(const Instance& inst, double nu, double eps) {
  ThetaDiagnostic out;
  out.radius_floor = 2.0 * nu + eps;
  for (std::size_t g = 0; g < inst.n_groups(); ++g) {
    out.per_group.push_back(disagreement_coefficient(inst, g, nu, eps));
    out.max_value = std::max(out.max_value, out.per_group.back());
  }
  return out;
}

struct RunConfigEcho {
  std::string label;
  nlohmann::json scenario;
  double eps = 0.0;
  double delta = 0.0;
  double constant_scale = 1.0;
  std::uint64_t seed = 0;
};

struct RunReport {
  std::string algorithm;    // agnostic | group_realizable | approximation | passive
  std::string subroutine;   // per-group learner inside the reduction family
  RunConfigEcho config;
  int output_h = -1;
  double true_loss = 0.0;   // exact worst-group loss of the output
  double nu = 0.0;
  double excess = 0.0;
  std::vector<double> nu_g;
  std::vector<int> tied_optima;
  std::vector<std::uint64_t> labels_per_group, unlabeled_per_group;
  std::uint64_t total_labels = 0, total_unlabeled = 0;
  ThetaDiagnostic theta;
  nlohmann::json traces;    // algorithm-specific audit payload
  double runtime_ms = 0.0;
};

// ----- trace payloads -------------------------------------------------------

inline nlohmann::json traces_to_json(const std::vector<IterationTrace>& traces) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& tr : traces) {
    nlohmann::json j;
    j["iter"] = tr.iter;
    j["final_round"] = tr.final_round;
    j["eps_i"] = tr.eps_i;
    j["m_i"] = tr.m_i;
    j["region"] = tr.region.bits.to_indices();
    j["region_mass"] = tr.region_mass;
    j["n_in"] = tr.n_in;
    j["n_out"] = tr.n_out;
    j["labels_in"] = tr.labels_in;
    j["labels_out"] = tr.labels_out;
    j["erm_id"] = tr.erm_id;
    j["erm_estimate"] = tr.erm_estimate;
    if (!tr.final_round) j["threshold"] = tr.threshold;
    j["survivors"] = tr.survivors.bits.to_indices();
    if (tr.hstar_survived >= 0) j["hstar_survived"] = tr.hstar_survived == 1;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline nlohmann::json traces_to_json(const ReductionResult& res) {
  nlohmann::json j;
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : res.fits) {
    fits.push_back({{"group", f.group},
                    {"h_id", f.h_id},
                    {"subroutine", f.subroutine},
                    {"labels_used", f.labels_used},
                    {"draws", f.draws}});
  }
  j["fits"] = std::move(fits);
  j["relabel_draws_per_group"] = res.relabel_draws_per_group;
  return j;
}

// ----- assembly and checks --------------------------------------------------

namespace detail {
inline void check_structure(const RunReport& r) {
  if (r.excess < -1e-12)
    throw ContractViolation("report: excess " + fmt_double(r.excess) +
                            " below zero; loss oracle and optimum disagree");
  std::uint64_t labels = 0, unlabeled = 0;
  for (auto v : r.labels_per_group) labels += v;
  for (auto v : r.unlabeled_per_group) unlabeled += v;
  if (labels != r.total_labels || unlabeled != r.total_unlabeled)
    throw ContractViolation("report: ledger totals do not match per-group sums");
  // Whatever shape the trace payload takes, it must account for every
  // charged label.  Iterative runs carry per-round in/out counts; the
  // reduction family carries per-group fits (relabeling is free).
  std::uint64_t traced = 0;
  bool traceable = false;
  if (r.traces.is_array()) {
    traceable = true;
    for (const auto& tr : r.traces) {
      for (const auto& v : tr.at("labels_in")) traced += v.get<std::uint64_t>();
      for (const auto& v : tr.at("labels_out")) traced += v.get<std::uint64_t>();
    }
  } else if (r.traces.is_object() && r.traces.contains("fits")) {
    traceable = true;
    for (const auto& f : r.traces.at("fits"))
      traced += f.at("labels_used").get<std::uint64_t>();
  }
  if (traceable && traced != r.total_labels)
    throw ContractViolation("report: trace labels " + std::to_string(traced) +
                            " != ledger labels " + std::to_string(r.total_labels));
}
}  // namespace detail

inline RunReport make_report(const Instance& inst, const BruteForceResult& truth,
                             const std::string& algorithm, const RunConfigEcho& config,
                             int output_h, const QueryLedger& ledger,
                             const ThetaDiagnostic& theta, nlohmann::json traces,
                             const std::string& subroutine, double runtime_ms) {
  RunReport r;
  r.algorithm = algorithm;
  r.subroutine = subroutine;
  r.config = config;
  r.output_h = output_h;
  r.true_loss = true_max_loss(inst, output_h);
  r.nu = truth.nu;
  r.excess = r.true_loss - truth.nu;
  r.nu_g = truth.nu_g;
  r.tied_optima = truth.tied_ids;
  r.labels_per_group = ledger.label_queries;
  r.unlabeled_per_group = ledger.unlabeled_queries;
  r.total_labels = ledger.total_labels();
  r.total_unlabeled = ledger.total_unlabeled();
  r.theta = theta;
  r.traces = std::move(traces);
  r.runtime_ms = runtime_ms;
  detail::check_structure(r);
  return r;
}

// ----- serialization --------------------------------------------------------

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["algorithm"] = r.algorithm;
  if (!r.subroutine.empty()) j["subroutine"] = r.subroutine;
  j["config"] = {{"label", r.config.label},
                 {"scenario", r.config.scenario},
                 {"eps", r.config.eps},
                 {"delta", r.config.delta},
                 {"constant_scale", r.config.constant_scale},
                 {"seed", r.config.seed}};
  j["output_h"] = r.output_h;
  j["true_max_loss"] = r.true_loss;
  j["nu"] = r.nu;
  j["excess"] = r.excess;
  j["nu_g"] = r.nu_g;
  j["tied_optima"] = r.tied_optima;
  j["ledger"] = {{"labels_per_group", r.labels_per_group},
                 {"unlabeled_per_group", r.unlabeled_per_group},
                 {"total_labels", r.total_labels},
                 {"total_unlabeled", r.total_unlabeled}};
  j["theta"] = {{"per_group", r.theta.per_group},
                {"max", r.theta.max_value},
                {"radius_floor", r.theta.radius_floor}};
  j["traces"] = r.traces;
  j["runtime_ms"] = r.runtime_ms;
  return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.subroutine = j.value("subroutine", std::string{});
  const auto& c = j.at("config");
  r.config.label = c.at("label").get<std::string>();
  r.config.scenario = c.at("scenario");
  r.config.eps = c.at("eps").get<double>();
  r.config.delta = c.at("delta").get<double>();
  r.config.constant_scale = c.at("constant_scale").get<double>();
  r.config.seed = c.at("seed").get<std::uint64_t>();
  r.output_h = j.at("output_h").get<int>();
  r.true_loss = j.at("true_max_loss").get<double>();
  r.nu = j.at("nu").get<double>();
  r.excess = j.at("excess").get<double>();
  r.nu_g = j.at("nu_g").get<std::vector<double>>();
  r.tied_optima = j.at("tied_optima").get<std::vector<int>>();
  const auto& l = j.at("ledger");
  r.labels_per_group = l.at("labels_per_group").get<std::vector<std::uint64_t>>();
  r.unlabeled_per_group = l.at("unlabeled_per_group").get<std::vector<std::uint64_t>>();
  r.total_labels = l.at("total_labels").get<std::uint64_t>();
  r.total_unlabeled = l.at("total_unlabeled").get<std::uint64_t>();
  const auto& t = j.at("theta");
  r.theta.per_group = t.at("per_group").get<std::vector<double>>();
  r.theta.max_value = t.at("max").get<double>();
  r.theta.radius_floor = t.at("radius_floor").get<double>();
  r.traces = j.at("traces");
  r.runtime_ms = j.value("runtime_ms", 0.0);
  return r;
}

// The report minus its timing: the determinism contract is byte equality
// of this form.
inline std::string canonical_dump(const RunReport& r) {
  nlohmann::json j = to_json(r);
  j.erase("runtime_ms");
  return j.dump();
}

inline const char* kCsvHeader =
    "scenario,algorithm,eps,seed,excess,total_labels,per_group_labels,theta_max,"
    "runtime_ms";

inline std::string csv_row(const RunReport& r) {
  std::string per_group;
  for (std::size_t g = 0; g < r.labels_per_group.size(); ++g) {
    if (g) per_group += ';';
    per_group += std::to_string(r.labels_per_group[g]);
  }
  std::string row;
  row += r.config.label;
  row += ',';
  row += r.algorithm;
  row += ',';
  row += fmt_double(r.config.eps);
  row += ',';
  row += std::to_string(r.config.seed);
  row += ',';
  row += fmt_double(r.excess);
  row += ',';
  row += std::to_string(r.total_labels);
  row += ',';
  row += per_group;
  row += ',';
  row += fmt_double(r.theta.max_value);
  row += ',';
  row += fmt_double(r.runtime_ms);
  return row;
}

// ----- label-complexity predictor -------------------------------------------

// Scaling shape of the iterative learner's label count at precision eps:
//
//   G theta^2 (d log2(1/eps) + ln(1/delta)) log2(1/eps)
//     + G ln(1/delta) log2(1/eps) / eps^2
//
// The absolute constants are astronomically conservative, so the raw
// expression is not a point prediction; measured ledgers are expected to
// fit alpha + beta * predictor across an eps sweep instead.
inline double label_complexity_predictor(std::size_t n_groups, double theta_max, int d,
                                         double eps, double delta) {
  const double G = static_cast<double>(n_groups);
  const double log_eps = std::max(1.0, std::log2(1.0 / eps));
  const double log_delta = std::log(1.0 / delta);
  return G * theta_max * theta_max *
             (static_cast<double>(d) * log_eps + log_delta) * log_eps +
         G * log_delta * log_eps / (eps * eps);
}

// Least-squares fit of observed = alpha + beta * predicted, reported with
// its R^2.  Small helper for the scaling acceptance check and the README
// tables; not a statistics library.
struct AffineFit {
  double alpha = 0.0;
  double beta = 0.0;
  double r_squared = 0.0;
};

inline AffineFit affine_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("affine_fit: need matching samples, at least two");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("affine_fit: degenerate predictor");
  AffineFit fit;
  fit.beta = (n * sxy - sx * sy) / denom;
  fit.alpha = (sy - fit.beta * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = fit.alpha + fit.beta * x[i];
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

}  // namespace mural

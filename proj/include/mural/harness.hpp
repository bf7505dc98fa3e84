#pragma once
// Experiment harness: turns a JSON sweep config into per-run report files
// plus one aggregate CSV, and backs the CLI verbs (run / compare / verify /
// gen).  Everything here is deliberately boring glue; the statistical
// content lives in the learners and in report.hpp.
//
// Contract points worth stating once:
//   * A config is validated in full, instances included, before anything
//     touches the output directory.  A bad config never leaves partial
//     outputs behind.
//   * Config errors carry a position: a line for JSON syntax, an
//     "experiments[i].field" anchor for semantic problems.
//   * Report files are written atomically (temp + rename) so a killed
//     sweep leaves only whole files.
//   * Identical configs produce byte-identical reports and CSV rows up to
//     the timing fields; the worker pool only changes wall-clock numbers,
//     never results.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "mural/report.hpp"
#include "mural/scenarios.hpp"

namespace mural {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ----- config ----------------------------------------------------------------

inline const std::set<std::string>& known_algorithms() {
  static const std::set<std::string> k{"agnostic", "group_realizable", "approximation",
                                       "passive"};
  return k;
}

struct ExperimentSpec {
  std::string label;
  nlohmann::json scenario;
  std::vector<std::string> algorithms;
  std::vector<double> eps_values;
  double delta = 0.1;
  double constant_scale = 1.0;
  std::vector<std::uint64_t> seeds;
};

struct ExperimentConfig {
  std::vector<ExperimentSpec> experiments;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col_of(const std::string& text,
                                                       std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// nlohmann prefixes its message with an exception id and its own
// line/column; keep only the human-readable tail since we anchor the
// position ourselves.
inline std::string parse_error_detail(const nlohmann::json::parse_error& e) {
  const std::string what = e.what();
  const auto col = what.find("column ");
  if (col != std::string::npos) {
    const auto pos = what.find(": ", col);
    if (pos != std::string::npos) return what.substr(pos + 2);
  }
  return what;
}

template <class T>
T require(const nlohmann::json& j, const std::string& key, const std::string& anchor) {
  if (!j.contains(key)) throw ConfigError(anchor + ": missing required key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(anchor + "." + key + ": " + e.what());
  }
}

}  // namespace detail

// Accepts either a scalar or a list for "eps", and either a list or a
// count for "seeds" (a count n means seeds 0..n-1).
inline ExperimentConfig parse_experiment_config(const std::string& text,
                                                const std::string& filename) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_col_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(filename + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": invalid JSON: " + detail::parse_error_detail(e));
  }

  if (!root.is_object() || !root.contains("experiments") ||
      !root.at("experiments").is_array() || root.at("experiments").empty())
    throw ConfigError(filename + ": top level must be {\"experiments\": [...]} with at "
                      "least one entry");

  ExperimentConfig cfg;
  std::set<std::string> labels_seen;
  const auto& arr = root.at("experiments");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string anchor = filename + ": experiments[" + std::to_string(i) + "]";
    const auto& e = arr[i];
    if (!e.is_object()) throw ConfigError(anchor + ": must be an object");

    ExperimentSpec spec;
    spec.label = detail::require<std::string>(e, "label", anchor);
    if (spec.label.empty()) throw ConfigError(anchor + ".label: must be non-empty");
    if (!labels_seen.insert(spec.label).second)
      throw ConfigError(anchor + ".label: duplicate label \"" + spec.label + "\"");

    if (!e.contains("scenario") || !e.at("scenario").is_object())
      throw ConfigError(anchor + ".scenario: missing or not an object");
    spec.scenario = e.at("scenario");

    spec.algorithms = detail::require<std::vector<std::string>>(e, "algorithms", anchor);
    if (spec.algorithms.empty())
      throw ConfigError(anchor + ".algorithms: must list at least one algorithm");
    for (const auto& a : spec.algorithms)
      if (!known_algorithms().count(a))
        throw ConfigError(anchor + ".algorithms: unknown algorithm \"" + a + "\"");

    if (!e.contains("eps")) throw ConfigError(anchor + ": missing required key \"eps\"");
    if (e.at("eps").is_array())
      spec.eps_values = e.at("eps").get<std::vector<double>>();
    else
      spec.eps_values.push_back(e.at("eps").get<double>());
    if (spec.eps_values.empty()) throw ConfigError(anchor + ".eps: must be non-empty");
    for (double v : spec.eps_values)
      if (!(v > 0.0)) throw ConfigError(anchor + ".eps: values must be positive");

    spec.delta = e.value("delta", 0.1);
    if (!(spec.delta > 0.0 && spec.delta < 1.0))
      throw ConfigError(anchor + ".delta: must lie in (0,1)");
    spec.constant_scale = e.value("constant_scale", 1.0);
    if (!(spec.constant_scale > 0.0 && spec.constant_scale <= 1.0))
      throw ConfigError(anchor + ".constant_scale: must lie in (0,1]");

    if (!e.contains("seeds")) throw ConfigError(anchor + ": missing required key \"seeds\"");
    if (e.at("seeds").is_array())
      spec.seeds = e.at("seeds").get<std::vector<std::uint64_t>>();
    else {
      const auto n = e.at("seeds").get<std::int64_t>();
      if (n <= 0) throw ConfigError(anchor + ".seeds: count must be positive");
      for (std::int64_t s = 0; s < n; ++s) spec.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (spec.seeds.empty()) throw ConfigError(anchor + ".seeds: must be non-empty");

    cfg.experiments.push_back(std::move(spec));
  }
  return cfg;
}

// ----- prepared work ----------------------------------------------------------

struct PreparedExperiment {
  ExperimentSpec spec;
  Instance instance;
  BruteForceResult truth;
  std::map<double, ThetaDiagnostic> theta_by_eps;
};

// Builds every instance and ground truth up front; all config problems
// (including scenario construction failures and algorithm/scenario
// incompatibilities) surface here, before any output exists.
inline std::vector<PreparedExperiment> prepare_experiments(const ExperimentConfig& cfg,
                                                           const std::string& filename) {
  std::vector<PreparedExperiment> out;
  for (std::size_t i = 0; i < cfg.experiments.size(); ++i) {
    const std::string anchor = filename + ": experiments[" + std::to_string(i) + "]";
    PreparedExperiment prep;
    prep.spec = cfg.experiments[i];
    try {
      prep.instance = scenario_from_json(prep.spec.scenario);
    } catch (const std::exception& e) {
      throw ConfigError(anchor + ".scenario: " + e.what());
    }
    prep.truth = brute_force_optimum(prep.instance);

    // The per-group CAL variant assumes each group can be fit exactly; a
    // scenario with any positive group floor breaks that promise silently,
    // so refuse it at config time.
    const bool wants_gr =
        std::count(prep.spec.algorithms.begin(), prep.spec.algorithms.end(),
                   std::string("group_realizable")) > 0;
    if (wants_gr) {
      for (std::size_t g = 0; g < prep.truth.nu_g.size(); ++g)
        if (prep.truth.nu_g[g] > 1e-12)
          throw ConfigError(anchor + ".algorithms: group_realizable requires every "
                            "per-group noise floor to be zero, but group " +
                            std::to_string(g) + " has floor " +
                            fmt_double(prep.truth.nu_g[g]));
    }

    for (double eps : prep.spec.eps_values)
      prep.theta_by_eps.emplace(eps, theta_diagnostic(prep.instance, prep.truth.nu, eps));
    out.push_back(std::move(prep));
  }
  return out;
}

// ----- running one cell -------------------------------------------------------

inline RunReport run_cell(const PreparedExperiment& prep, const std::string& algorithm,
                          double eps, std::uint64_t seed) {
  RunConfigEcho echo;
  echo.label = prep.spec.label;
  echo.scenario = prep.spec.scenario;
  echo.eps = eps;
  echo.delta = prep.spec.delta;
  echo.constant_scale = prep.spec.constant_scale;
  echo.seed = seed;

  const auto& theta = prep.theta_by_eps.at(eps);
  const auto t0 = std::chrono::steady_clock::now();
  int output_h = -1;
  QueryLedger ledger(prep.instance.n_groups());
  nlohmann::json traces;
  std::string subroutine;

  if (algorithm == "agnostic") {
    AgnosticConfig cfg{eps, prep.spec.delta, prep.spec.constant_scale, std::nullopt};
    AgnosticResult res = run_agnostic(prep.instance, cfg, seed);
    check_lemma_invariants(prep.instance, res, prep.truth.best_id, eps);
    output_h = res.output_h;
    ledger = res.ledger;
    traces = traces_to_json(res.traces);
  } else if (algorithm == "group_realizable") {
    ReductionConfig cfg{eps, prep.spec.delta, prep.spec.constant_scale};
    ReductionResult res = run_group_realizable(prep.instance, cfg, seed);
    output_h = res.output_h;
    ledger = res.ledger;
    traces = traces_to_json(res);
    subroutine = "cal";
  } else if (algorithm == "approximation") {
    ReductionConfig cfg{eps, prep.spec.delta, prep.spec.constant_scale};
    ReductionResult res = run_approximation(prep.instance, cfg, seed);
    output_h = res.output_h;
    ledger = res.ledger;
    traces = traces_to_json(res);
    subroutine = "agnostic_dbal";
  } else if (algorithm == "passive") {
    PassiveResult res = run_passive(prep.instance, eps, prep.spec.delta, seed);
    output_h = res.output_h;
    ledger = res.ledger;
    traces = nlohmann::json{{"n_per_group", res.n_per_group}};
  } else {
    throw std::invalid_argument("run_cell: unknown algorithm " + algorithm);
  }

  const auto t1 = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return make_report(prep.instance, prep.truth, algorithm, echo, output_h, ledger, theta,
                     std::move(traces), subroutine, ms);
}

// ----- file plumbing ----------------------------------------------------------

inline std::string sanitize_component(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.')
      c = '-';
  return out;
}

inline std::string report_filename(const RunReport& r) {
  return sanitize_component(r.config.label) + "__" + r.algorithm + "__eps" +
         sanitize_component(fmt_double(r.config.eps)) + "__seed" +
         std::to_string(r.config.seed) + ".json";
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& body) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << body;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ----- guarantee classification -------------------------------------------------

// At full constants every algorithm carries a high-probability promise; a
// run that lands outside it is a statistical miss worth flagging (and a
// hard failure under --strict).  Scaled-down constants void the promise,
// so those runs are never classified.
inline bool guarantee_applies(const RunReport& r) { return r.config.constant_scale == 1.0; }

inline double guarantee_bound(const RunReport& r) {
  if (r.algorithm == "approximation") {
    double worst = 0.0;
    for (double v : r.nu_g) worst = std::max(worst, v);
    return 2.0 * worst + r.config.eps;
  }
  return r.config.eps;
}

inline bool guarantee_miss(const RunReport& r) {
  return guarantee_applies(r) && r.excess > guarantee_bound(r) + 1e-12;
}

// ----- run verb -----------------------------------------------------------------

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;  // 0: MURAL_JOBS env, else 1
  bool strict = false;
  std::uint64_t seed_offset = 0;
};

namespace detail {

struct Cell {
  const PreparedExperiment* prep = nullptr;
  std::string algorithm;
  double eps = 0.0;
  std::uint64_t seed = 0;
};

inline int resolve_jobs(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("MURAL_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

}  // namespace detail

inline int cli_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<PreparedExperiment> prepared;
  try {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in) throw ConfigError(opt.config_path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    const ExperimentConfig cfg = parse_experiment_config(buf.str(), opt.config_path);
    prepared = prepare_experiments(cfg, opt.config_path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<detail::Cell> cells;
  for (const auto& prep : prepared)
    for (const auto& alg : prep.spec.algorithms)
      for (double eps : prep.spec.eps_values)
        for (std::uint64_t seed : prep.spec.seeds)
          cells.push_back({&prep, alg, eps, seed + opt.seed_offset});

  std::filesystem::create_directories(opt.out_dir);

  const int jobs = detail::resolve_jobs(opt.jobs);
  std::vector<RunReport> reports(cells.size());
  std::vector<std::string> failures(cells.size());
  std::vector<char> completed(cells.size(), 0);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      const auto& cell = cells[i];
      try {
        RunReport r = run_cell(*cell.prep, cell.algorithm, cell.eps, cell.seed);
        write_file_atomic(std::filesystem::path(opt.out_dir) / report_filename(r),
                          to_json(r).dump(2) + "\n");
        reports[i] = std::move(r);
        completed[i] = 1;
      } catch (const std::exception& e) {
        failures[i] = cell.prep->spec.label + "/" + cell.algorithm + "/eps" +
                      fmt_double(cell.eps) + "/seed" + std::to_string(cell.seed) + ": " +
                      e.what();
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Aggregate CSV over completed runs, sorted so row order never depends
  // on scheduling.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (completed[i]) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = reports[a];
    const auto& rb = reports[b];
    return std::tie(ra.config.label, ra.algorithm, ra.config.eps, ra.config.seed) <
           std::tie(rb.config.label, rb.algorithm, rb.config.eps, rb.config.seed);
  });
  std::string csv = std::string(kCsvHeader) + "\n";
  for (std::size_t i : order) csv += csv_row(reports[i]) + "\n";
  write_file_atomic(std::filesystem::path(opt.out_dir) / "runs.csv", csv);

  std::size_t misses = 0;
  for (std::size_t i : order) {
    if (guarantee_miss(reports[i])) {
      ++misses;
      err << "warning: " << report_filename(reports[i]) << ": excess "
          << fmt_double(reports[i].excess) << " exceeds guarantee "
          << fmt_double(guarantee_bound(reports[i])) << "\n";
    }
  }

  std::size_t failed = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!completed[i] && !failures[i].empty()) {
      ++failed;
      err << "error: " << failures[i] << "\n";
    }
  }

  out << order.size() << " runs completed, " << misses << " guarantee misses, " << failed
      << " failures\n";
  if (failed > 0) return 1;
  if (opt.strict && misses > 0) return 1;
  return 0;
}

// ----- compare verb --------------------------------------------------------------

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct ReportSet {
  std::string name;  // directory basename
  // (label, eps, seed) -> report; one algorithm per key or the set is
  // ambiguous for pairing.
  std::map<std::tuple<std::string, double, std::uint64_t>, RunReport> by_key;
};

inline ReportSet load_report_set(const std::string& dir) {
  ReportSet set;
  set.name = std::filesystem::path(dir).filename().string();
  if (set.name.empty()) set.name = dir;
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error(dir + ": not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ": " + e.what());
    }
    RunReport r = report_from_json(j);
    const auto key = std::make_tuple(r.config.label, r.config.eps, r.config.seed);
    if (!set.by_key.emplace(key, std::move(r)).second)
      throw std::runtime_error(dir + ": multiple reports for (" + std::get<0>(key) +
                               ", eps " + fmt_double(std::get<1>(key)) + ", seed " +
                               std::to_string(std::get<2>(key)) +
                               "); compare needs one algorithm per set");
  }
  if (set.by_key.empty()) throw std::runtime_error(dir + ": no report files");
  return set;
}

}  // namespace detail

// Pairs the first set against each other set on (label, eps, seed) and
// emits per-(label, eps) medians: labels on both sides, the per-pair
// baseline/candidate label ratio, and mean excesses.  Missing pairs are
// an error; partially overlapping sweeps do not silently compare.
inline int cli_compare(const std::vector<std::string>& dirs, const std::string& out_csv,
                       std::ostream& out, std::ostream& err) {
  if (dirs.size() < 2) {
    err << "error: compare needs at least two report directories\n";
    return 2;
  }
  std::vector<detail::ReportSet> sets;
  try {
    for (const auto& d : dirs) sets.push_back(detail::load_report_set(d));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  std::vector<std::string> missing;
  for (std::size_t k = 1; k < sets.size(); ++k) {
    for (const auto& [key, r] : sets[0].by_key)
      if (!sets[k].by_key.count(key))
        missing.push_back(sets[k].name + " lacks (" + std::get<0>(key) + ", eps " +
                          fmt_double(std::get<1>(key)) + ", seed " +
                          std::to_string(std::get<2>(key)) + ")");
    for (const auto& [key, r] : sets[k].by_key)
      if (!sets[0].by_key.count(key))
        missing.push_back(sets[0].name + " lacks (" + std::get<0>(key) + ", eps " +
                          fmt_double(std::get<1>(key)) + ", seed " +
                          std::to_string(std::get<2>(key)) + ")");
  }
  if (!missing.empty()) {
    const std::size_t show = std::min<std::size_t>(missing.size(), 10);
    for (std::size_t i = 0; i < show; ++i) err << "error: unpaired run: " << missing[i] << "\n";
    if (missing.size() > show)
      err << "error: ... and " << missing.size() - show << " more unpaired runs\n";
    return 1;
  }

  std::string csv =
      "scenario,eps,baseline_set,baseline_algorithm,candidate_set,candidate_algorithm,"
      "pairs,median_labels_baseline,median_labels_candidate,median_label_ratio,"
      "mean_excess_baseline,mean_excess_candidate\n";

  for (std::size_t k = 1; k < sets.size(); ++k) {
    // Group the paired runs by (label, eps).
    std::map<std::pair<std::string, double>,
             std::vector<std::pair<const RunReport*, const RunReport*>>>
        groups;
    for (const auto& [key, base] : sets[0].by_key) {
      const RunReport& cand = sets[k].by_key.at(key);
      groups[{std::get<0>(key), std::get<1>(key)}].push_back({&base, &cand});
    }
    for (const auto& [gk, pairs] : groups) {
      std::vector<double> lb, lc, ratio;
      double eb = 0.0, ec = 0.0;
      std::set<std::string> alg_b, alg_c;
      for (const auto& [b, c] : pairs) {
        lb.push_back(static_cast<double>(b->total_labels));
        lc.push_back(static_cast<double>(c->total_labels));
        ratio.push_back(c->total_labels == 0
                            ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(b->total_labels) /
                                  static_cast<double>(c->total_labels));
        eb += b->excess;
        ec += c->excess;
        alg_b.insert(b->algorithm);
        alg_c.insert(c->algorithm);
      }
      const double n = static_cast<double>(pairs.size());
      csv += gk.first + "," + fmt_double(gk.second) + "," + sets[0].name + "," +
             (alg_b.size() == 1 ? *alg_b.begin() : std::string("mixed")) + "," +
             sets[k].name + "," +
             (alg_c.size() == 1 ? *alg_c.begin() : std::string("mixed")) + "," +
             std::to_string(pairs.size()) + "," + fmt_double(detail::median(lb)) + "," +
             fmt_double(detail::median(lc)) + "," + fmt_double(detail::median(ratio)) +
             "," + fmt_double(eb / n) + "," + fmt_double(ec / n) + "\n";
    }
  }

  if (out_csv.empty())
    out << csv;
  else
    write_file_atomic(out_csv, csv);
  return 0;
}

// ----- verify verb ----------------------------------------------------------------

// Rebuilds each report's instance from its own config echo and recomputes
// everything recomputable: the output's exact loss, the optimum, the
// excess, the floors, the disagreement diagnostics, and the ledger / trace
// accounting.  Agreement tolerance is 1e-12; these are exact quantities,
// not estimates.
inline int cli_verify(const std::string& dir, std::ostream& out, std::ostream& err) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(dir)) {
    files.push_back(dir);
  } else {
    err << "error: " << dir << ": no such file or directory\n";
    return 2;
  }
  if (files.empty()) {
    err << "error: " << dir << ": no report files\n";
    return 2;
  }

  // Instances and optima are shared across seeds; key the cache on the
  // scenario echo itself.
  std::map<std::string, std::pair<Instance, BruteForceResult>> cache;

  std::size_t bad = 0;
  for (const auto& path : files) {
    std::string reason;
    try {
      std::ifstream in(path, std::ios::binary);
      nlohmann::json j;
      in >> j;
      const RunReport r = report_from_json(j);

      const std::string key = r.config.scenario.dump();
      auto it = cache.find(key);
      if (it == cache.end()) {
        Instance inst = scenario_from_json(r.config.scenario);
        BruteForceResult truth = brute_force_optimum(inst);
        it = cache.emplace(key, std::make_pair(std::move(inst), std::move(truth))).first;
      }
      const Instance& inst = it->second.first;
      const BruteForceResult& truth = it->second.second;

      auto check = [&](bool ok, const std::string& what) {
        if (!ok && reason.empty()) reason = what;
      };
      auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };

      check(r.output_h >= 0 && r.output_h < static_cast<int>(inst.n_hypotheses()),
            "output_h out of range");
      if (reason.empty()) {
        const double loss = true_max_loss(inst, r.output_h);
        check(close(loss, r.true_loss), "true_max_loss mismatch: recomputed " +
                                            fmt_double(loss) + " vs reported " +
                                            fmt_double(r.true_loss));
        check(close(truth.nu, r.nu), "nu mismatch");
        check(close(r.excess, loss - truth.nu), "excess does not equal loss - nu");
        check(r.excess >= -1e-12, "negative excess");
        check(r.nu_g.size() == truth.nu_g.size(), "nu_g size mismatch");
        for (std::size_t g = 0; reason.empty() && g < truth.nu_g.size(); ++g)
          check(close(r.nu_g[g], truth.nu_g[g]), "nu_g mismatch");

        const ThetaDiagnostic theta = theta_diagnostic(inst, truth.nu, r.config.eps);
        check(close(theta.max_value, r.theta.max_value), "theta mismatch");

        // Re-run the ledger / trace accounting on the parsed report.
        try {
          detail::check_structure(r);
        } catch (const std::exception& e) {
          check(false, e.what());
        }
      }
    } catch (const std::exception& e) {
      reason = e.what();
    }
    if (reason.empty()) {
      out << "ok " << path.filename().string() << "\n";
    } else {
      ++bad;
      err << "FAIL " << path.filename().string() << ": " << reason << "\n";
    }
  }
  out << files.size() - bad << " ok, " << bad << " failed\n";
  return bad == 0 ? 0 : 1;
}

// ----- gen verb --------------------------------------------------------------------

// Materializes each experiment's instance as <label>.instance.json so the
// exact distributions behind a sweep can be inspected or reused.
inline int cli_gen(const std::string& config_path, const std::string& out_dir,
                   std::ostream& out, std::ostream& err) {
  std::vector<PreparedExperiment> prepared;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError(config_path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    const ExperimentConfig cfg = parse_experiment_config(buf.str(), config_path);
    prepared = prepare_experiments(cfg, config_path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  std::filesystem::create_directories(out_dir);
  for (const auto& prep : prepared) {
    const auto path = std::filesystem::path(out_dir) /
                      (sanitize_component(prep.spec.label) + ".instance.json");
    write_file_atomic(path, to_json(prep.instance).dump(2) + "\n");
    out << path.filename().string() << ": " << prep.instance.n_points() << " points, "
        << prep.instance.n_groups() << " groups, " << prep.instance.n_hypotheses()
        << " hypotheses, nu " << fmt_double(prep.truth.nu) << "\n";
  }
  return 0;
}

}  // namespace mural

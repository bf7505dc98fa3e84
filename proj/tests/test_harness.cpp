#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "mural/harness.hpp"

using namespace mural;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;

  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("mural-harness-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t count_json_files(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") ++n;
  return n;
}

// Cheap sweep: scaled-down constants keep label counts in the thousands.
const char* kSmallSweep = R"({"experiments": [
  {"label": "gadget", "scenario": {"name": "example1_extended"},
   "algorithms": ["agnostic", "passive"], "eps": [0.2], "delta": 0.1,
   "constant_scale": 0.05, "seeds": 5}
]})";

std::string canonical_report(const fs::path& file) {
  nlohmann::json j = nlohmann::json::parse(read_text(file));
  j.erase("runtime_ms");
  return j.dump();
}

}  // namespace

TEST_CASE("config parsing accepts scalar and list forms", "[harness]") {
  const auto cfg = parse_experiment_config(
      R"({"experiments": [
        {"label": "a", "scenario": {"name": "example1"}, "algorithms": ["passive"],
         "eps": 0.25, "seeds": 3},
        {"label": "b", "scenario": {"name": "example1"}, "algorithms": ["agnostic"],
         "eps": [0.5, 0.1], "delta": 0.05, "constant_scale": 0.5, "seeds": [7, 9]}
      ]})",
      "inline");
  REQUIRE(cfg.experiments.size() == 2);
  CHECK(cfg.experiments[0].eps_values == std::vector<double>{0.25});
  CHECK(cfg.experiments[0].seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(cfg.experiments[0].delta == 0.1);            // default
  CHECK(cfg.experiments[0].constant_scale == 1.0);   // default
  CHECK(cfg.experiments[1].eps_values == std::vector<double>{0.5, 0.1});
  CHECK(cfg.experiments[1].seeds == std::vector<std::uint64_t>{7, 9});
  CHECK(cfg.experiments[1].delta == 0.05);
}

TEST_CASE("config errors carry a position", "[harness]") {
  SECTION("syntax errors name the line") {
    const std::string text = "{\n \"experiments\": [\n  {\"label\": oops}\n ]\n}";
    try {
      parse_experiment_config(text, "cfg.json");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("cfg.json:3:") != std::string::npos);
    }
  }
  SECTION("semantic errors name the experiment and field") {
    auto expect_anchor = [](const std::string& body, const std::string& anchor) {
      try {
        parse_experiment_config(body, "cfg.json");
        FAIL("expected ConfigError for " + anchor);
      } catch (const ConfigError& e) {
        INFO(e.what());
        CHECK(std::string(e.what()).find(anchor) != std::string::npos);
      }
    };
    expect_anchor(R"({"experiments": [{"scenario": {"name": "example1"},
                      "algorithms": ["passive"], "eps": 0.1, "seeds": 1}]})",
                  "experiments[0]");
    expect_anchor(R"({"experiments": [{"label": "x", "scenario": {"name": "example1"},
                      "algorithms": ["frobnicate"], "eps": 0.1, "seeds": 1}]})",
                  "experiments[0].algorithms");
    expect_anchor(R"({"experiments": [{"label": "x", "scenario": {"name": "example1"},
                      "algorithms": ["passive"], "eps": -0.1, "seeds": 1}]})",
                  "experiments[0].eps");
    expect_anchor(R"({"experiments": [
        {"label": "x", "scenario": {"name": "example1"}, "algorithms": ["passive"],
         "eps": 0.1, "seeds": 1},
        {"label": "x", "scenario": {"name": "example1"}, "algorithms": ["passive"],
         "eps": 0.1, "seeds": 1}]})",
                  "experiments[1].label");
  }
}

TEST_CASE("incompatible algorithm and scenario is a config error", "[harness]") {
  // The gadget has positive per-group floors, so the exact-fit variant
  // must be refused before anything runs.
  const auto cfg = parse_experiment_config(
      R"({"experiments": [{"label": "noisy", "scenario": {"name": "example1"},
          "algorithms": ["group_realizable"], "eps": 0.3, "seeds": 1}]})",
      "cfg.json");
  try {
    prepare_experiments(cfg, "cfg.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("experiments[0]") != std::string::npos);
    CHECK(what.find("group_realizable") != std::string::npos);
  }

  // Unknown scenario fields surface with the same anchor.
  const auto bad_scn = parse_experiment_config(
      R"({"experiments": [{"label": "x", "scenario": {"name": "nonesuch"},
          "algorithms": ["passive"], "eps": 0.3, "seeds": 1}]})",
      "cfg.json");
  CHECK_THROWS_AS(prepare_experiments(bad_scn, "cfg.json"), ConfigError);
}

TEST_CASE("run writes one report per cell plus the aggregate CSV", "[harness]") {
  TempDir dir;
  write_text(dir / "cfg.json", kSmallSweep);
  RunOptions opt;
  opt.config_path = (dir / "cfg.json").string();
  opt.out_dir = (dir / "out").string();

  std::ostringstream out, err;
  REQUIRE(cli_run(opt, out, err) == 0);
  INFO(err.str());

  // 2 algorithms x 1 eps x 5 seeds.
  CHECK(count_json_files(dir / "out") == 10);
  REQUIRE(fs::exists(dir / "out" / "runs.csv"));
  const std::string csv = read_text(dir / "out" / "runs.csv");
  std::size_t rows = 0;
  for (char c : csv) rows += c == '\n';
  CHECK(rows == 11);  // header + 10 runs
  CHECK(csv.rfind("scenario,algorithm,eps,seed,excess,total_labels,per_group_labels,"
                  "theta_max,runtime_ms\n",
                  0) == 0);
  CHECK(out.str().find("10 runs completed") != std::string::npos);

  SECTION("reports round-trip through their own serialization") {
    const fs::path one = dir / "out" / "gadget__agnostic__eps0.2__seed0.json";
    REQUIRE(fs::exists(one));
    const nlohmann::json j = nlohmann::json::parse(read_text(one));
    const RunReport r = report_from_json(j);
    CHECK(to_json(r).dump(2) + "\n" == read_text(one));
    CHECK(r.algorithm == "agnostic");
    CHECK(r.config.eps == 0.2);
    CHECK(r.total_labels > 0);
    CHECK(r.traces.is_array());
  }

  SECTION("verify accepts everything the run just wrote") {
    std::ostringstream vout, verr;
    CHECK(cli_verify(opt.out_dir, vout, verr) == 0);
    CHECK(verr.str().empty());
    CHECK(vout.str().find("10 ok, 0 failed") != std::string::npos);
  }

  SECTION("verify rejects a tampered excess") {
    const fs::path victim = dir / "out" / "gadget__passive__eps0.2__seed3.json";
    nlohmann::json j = nlohmann::json::parse(read_text(victim));
    j["excess"] = j["excess"].get<double>() + 0.5;
    write_text(victim, j.dump(2) + "\n");
    std::ostringstream vout, verr;
    CHECK(cli_verify(opt.out_dir, vout, verr) == 1);
    CHECK(verr.str().find("FAIL gadget__passive__eps0.2__seed3.json") != std::string::npos);
  }

  SECTION("verify rejects a tampered ledger") {
    const fs::path victim = dir / "out" / "gadget__agnostic__eps0.2__seed1.json";
    nlohmann::json j = nlohmann::json::parse(read_text(victim));
    j["ledger"]["total_labels"] = j["ledger"]["total_labels"].get<std::uint64_t>() + 1;
    write_text(victim, j.dump(2) + "\n");
    std::ostringstream vout, verr;
    CHECK(cli_verify(opt.out_dir, vout, verr) == 1);
    CHECK(verr.str().find("FAIL gadget__agnostic__eps0.2__seed1.json") != std::string::npos);
  }
}

TEST_CASE("invalid configs leave no partial outputs", "[harness]") {
  TempDir dir;
  write_text(dir / "cfg.json", "{\n \"experiments\": [\n  {\"label\": }\n ]\n}");
  RunOptions opt;
  opt.config_path = (dir / "cfg.json").string();
  opt.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  CHECK(cli_run(opt, out, err) == 2);
  CHECK(err.str().find("cfg.json:3:") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));

  // Same promise for semantic failures in a later experiment: the first
  // entry alone would be runnable, but nothing may be written.
  write_text(dir / "cfg.json", R"({"experiments": [
    {"label": "ok", "scenario": {"name": "example1"}, "algorithms": ["passive"],
     "eps": 0.25, "constant_scale": 0.05, "seeds": 1},
    {"label": "broken", "scenario": {"name": "example1"},
     "algorithms": ["group_realizable"], "eps": 0.25, "seeds": 1}]})");
  std::ostringstream out2, err2;
  CHECK(cli_run(opt, out2, err2) == 2);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("identical configs produce identical reports up to timing", "[harness]") {
  TempDir dir;
  write_text(dir / "cfg.json", kSmallSweep);
  RunOptions opt;
  opt.config_path = (dir / "cfg.json").string();

  std::ostringstream sink;
  opt.out_dir = (dir / "one").string();
  REQUIRE(cli_run(opt, sink, sink) == 0);
  opt.out_dir = (dir / "two").string();
  REQUIRE(cli_run(opt, sink, sink) == 0);

  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "one")) {
    if (e.path().extension() != ".json") continue;
    const fs::path twin = dir / "two" / e.path().filename();
    REQUIRE(fs::exists(twin));
    CHECK(canonical_report(e.path()) == canonical_report(twin));
    ++compared;
  }
  CHECK(compared == 10);

  // CSV rows match once the trailing runtime column is dropped.
  auto strip_runtime = [](const std::string& csv) {
    std::string out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  CHECK(strip_runtime(read_text(dir / "one" / "runs.csv")) ==
        strip_runtime(read_text(dir / "two" / "runs.csv")));
}

TEST_CASE("seed offset shifts every configured seed", "[harness]") {
  TempDir dir;
  write_text(dir / "cfg.json", R"({"experiments": [
    {"label": "gadget", "scenario": {"name": "example1_extended"},
     "algorithms": ["passive"], "eps": 0.25, "constant_scale": 0.05, "seeds": 2}]})");
  RunOptions opt;
  opt.config_path = (dir / "cfg.json").string();
  opt.out_dir = (dir / "out").string();
  opt.seed_offset = 40;
  std::ostringstream sink;
  REQUIRE(cli_run(opt, sink, sink) == 0);
  CHECK(fs::exists(dir / "out" / "gadget__passive__eps0.25__seed40.json"));
  CHECK(fs::exists(dir / "out" / "gadget__passive__eps0.25__seed41.json"));
  CHECK_FALSE(fs::exists(dir / "out" / "gadget__passive__eps0.25__seed0.json"));
}

TEST_CASE("worker pool does not change results", "[harness]") {
  TempDir dir;
  write_text(dir / "cfg.json", kSmallSweep);
  RunOptions opt;
  opt.config_path = (dir / "cfg.json").string();
  std::ostringstream sink;

  opt.out_dir = (dir / "serial").string();
  opt.jobs = 1;
  REQUIRE(cli_run(opt, sink, sink) == 0);
  opt.out_dir = (dir / "pool").string();
  opt.jobs = 4;
  REQUIRE(cli_run(opt, sink, sink) == 0);

  for (const auto& e : fs::directory_iterator(dir / "serial")) {
    if (e.path().extension() != ".json") continue;
    CHECK(canonical_report(e.path()) ==
          canonical_report(dir / "pool" / e.path().filename()));
  }
}

TEST_CASE("guarantee classification", "[harness]") {
  RunReport r;
  r.algorithm = "agnostic";
  r.config.eps = 0.1;
  r.config.constant_scale = 1.0;
  r.nu_g = {0.05, 0.2};
  r.excess = 0.1;
  CHECK_FALSE(guarantee_miss(r));  // exactly at the bound is a pass
  r.excess = 0.100001;
  CHECK(guarantee_miss(r));
  r.config.constant_scale = 0.5;  // scaled constants void the promise
  CHECK_FALSE(guarantee_miss(r));

  // The approximation variant is only promised nu + 2 max_g nu_g + eps.
  r.algorithm = "approximation";
  r.config.constant_scale = 1.0;
  r.excess = 0.45;
  CHECK_FALSE(guarantee_miss(r));  // bound is 2 * 0.2 + 0.1 = 0.5
  r.excess = 0.51;
  CHECK(guarantee_miss(r));
}

TEST_CASE("compare pairs report sets and medians label ratios", "[harness]") {
  TempDir dir;
  write_text(dir / "a.json", R"({"experiments": [
    {"label": "gadget", "scenario": {"name": "example1_extended"},
     "algorithms": ["agnostic"], "eps": 0.2, "constant_scale": 0.05, "seeds": 3}]})");
  write_text(dir / "p.json", R"({"experiments": [
    {"label": "gadget", "scenario": {"name": "example1_extended"},
     "algorithms": ["passive"], "eps": 0.2, "constant_scale": 0.05, "seeds": 3}]})");

  RunOptions opt;
  std::ostringstream sink;
  opt.config_path = (dir / "a.json").string();
  opt.out_dir = (dir / "active").string();
  REQUIRE(cli_run(opt, sink, sink) == 0);
  opt.config_path = (dir / "p.json").string();
  opt.out_dir = (dir / "passive").string();
  REQUIRE(cli_run(opt, sink, sink) == 0);

  SECTION("clean pairing emits one row per (scenario, eps)") {
    std::ostringstream out, err;
    REQUIRE(cli_compare({(dir / "active").string(), (dir / "passive").string()},
                        (dir / "cmp.csv").string(), out, err) == 0);
    const std::string csv = read_text(dir / "cmp.csv");
    INFO(csv);
    std::istringstream lines(csv);
    std::string header, row, extra;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row));
    CHECK_FALSE(std::getline(lines, extra));
    CHECK(row.rfind("gadget,0.2,active,agnostic,passive,passive,3,", 0) == 0);

    // The ratio column must equal the per-pair median recomputed from the
    // reports themselves.
    auto labels = [&](const fs::path& d) {
      std::map<std::uint64_t, double> by_seed;
      for (const auto& e : fs::directory_iterator(d)) {
        if (e.path().extension() != ".json") continue;
        const auto j = nlohmann::json::parse(read_text(e.path()));
        by_seed[j["config"]["seed"].get<std::uint64_t>()] =
            j["ledger"]["total_labels"].get<double>();
      }
      return by_seed;
    };
    const auto la = labels(dir / "active"), lp = labels(dir / "passive");
    std::vector<double> ratios;
    for (const auto& [seed, v] : la) ratios.push_back(v / lp.at(seed));
    std::sort(ratios.begin(), ratios.end());
    const double want = ratios[ratios.size() / 2];
    std::istringstream cells(row);
    std::string cell;
    for (int i = 0; i < 10; ++i) std::getline(cells, cell, ',');
    CHECK(std::stod(cell) == Catch::Approx(want).epsilon(1e-12));
  }

  SECTION("missing pairs are an error, not a silent skip") {
    fs::remove(dir / "passive" / "gadget__passive__eps0.2__seed1.json");
    std::ostringstream out, err;
    CHECK(cli_compare({(dir / "active").string(), (dir / "passive").string()}, "", out,
                      err) == 1);
    CHECK(err.str().find("unpaired") != std::string::npos);
    CHECK(err.str().find("seed 1") != std::string::npos);
  }

  SECTION("fewer than two sets is a usage error") {
    std::ostringstream out, err;
    CHECK(cli_compare({(dir / "active").string()}, "", out, err) == 2);
  }
}

TEST_CASE("gen materializes runnable instances", "[harness]") {
  TempDir dir;
  write_text(dir / "cfg.json", R"({"experiments": [
    {"label": "ramp", "scenario": {"name": "threshold", "n_points": 24, "groups": 2,
     "seed": 3, "noise": {"kind": "group_realizable", "offsets": [-0.1, 0.1]}},
     "algorithms": ["group_realizable"], "eps": 0.25, "seeds": 1}]})");
  std::ostringstream out, err;
  REQUIRE(cli_gen((dir / "cfg.json").string(), (dir / "inst").string(), out, err) == 0);
  const fs::path file = dir / "inst" / "ramp.instance.json";
  REQUIRE(fs::exists(file));
  const Instance inst = instance_from_json(nlohmann::json::parse(read_text(file)));
  validate(inst);
  CHECK(inst.n_points() == 24);
  CHECK(inst.n_groups() == 2);
  CHECK(inst.n_hypotheses() == 25);
  CHECK(out.str().find("ramp.instance.json") != std::string::npos);
}

TEST_CASE("label complexity predictor and affine fit", "[harness]") {
  // More precision, more groups, bigger theta: never cheaper.
  const double base = label_complexity_predictor(2, 2.0, 1, 0.1, 0.1);
  CHECK(base > 0.0);
  CHECK(label_complexity_predictor(2, 2.0, 1, 0.05, 0.1) > base);
  CHECK(label_complexity_predictor(4, 2.0, 1, 0.1, 0.1) > base);
  CHECK(label_complexity_predictor(2, 4.0, 1, 0.1, 0.1) > base);

  // Exact affine data is recovered exactly.
  std::vector<double> x{1.0, 2.0, 4.0, 8.0}, y;
  for (double v : x) y.push_back(3.0 + 0.5 * v);
  const AffineFit fit = affine_fit(x, y);
  CHECK(fit.alpha == Catch::Approx(3.0).margin(1e-9));
  CHECK(fit.beta == Catch::Approx(0.5).margin(1e-9));
  CHECK(fit.r_squared == Catch::Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(affine_fit({1.0}, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(affine_fit({1.0, 1.0}, {2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("installed binary drives the same flow", "[harness][cli]") {
  const char* cli = std::getenv("MURAL_CLI");
  if (cli == nullptr) {
    SUCCEED("MURAL_CLI not set; binary end-to-end runs under ctest");
    return;
  }
  TempDir dir;
  write_text(dir / "cfg.json", kSmallSweep);
  auto shell = [&](const std::string& args) {
    const std::string cmd = std::string("\"") + cli + "\" " + args + " >" +
                            (dir / "stdout.txt").string() + " 2>" +
                            (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };

  REQUIRE(shell("run --config " + (dir / "cfg.json").string() + " --out " +
                (dir / "out").string()) == 0);
  CHECK(count_json_files(dir / "out") == 10);
  CHECK(fs::exists(dir / "out" / "runs.csv"));

  CHECK(shell("verify --out " + (dir / "out").string()) == 0);
  CHECK(read_text(dir / "stdout.txt").find("10 ok, 0 failed") != std::string::npos);

  CHECK(shell("gen --config " + (dir / "cfg.json").string() + " --out " +
              (dir / "inst").string()) == 0);
  CHECK(fs::exists(dir / "inst" / "gadget.instance.json"));

  write_text(dir / "bad.json", "{\"experiments\": [}");
  CHECK(shell("run --config " + (dir / "bad.json").string() + " --out " +
              (dir / "never").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "never"));
  CHECK(read_text(dir / "stderr.txt").find("bad.json:1:") != std::string::npos);
}

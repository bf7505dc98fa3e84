// Command-line front end.  Four verbs:
//
//   run      execute a sweep config, write per-run reports plus runs.csv
//   compare  pair two or more report directories on (scenario, eps, seed)
//   verify   recompute every exact quantity a report claims
//   gen      materialize the instances a config would run on
//
// All statistical and bookkeeping logic lives in the headers; this file
// only maps flags onto the harness entry points.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mural/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"simulation lab for multi-group active learners"};
  app.require_subcommand(1);

  mural::RunOptions run_opt;
  auto* run = app.add_subcommand("run", "execute a sweep config");
  run->add_option("--config", run_opt.config_path, "sweep config JSON")->required();
  run->add_option("--out", run_opt.out_dir, "report output directory")->required();
  run->add_option("--jobs", run_opt.jobs, "worker threads (default: MURAL_JOBS or 1)");
  run->add_option("--seed-offset", run_opt.seed_offset, "added to every configured seed");
  run->add_flag("--strict", run_opt.strict, "exit nonzero on any guarantee miss");

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "pair report sets run for run");
  compare->add_option("dirs", compare_dirs, "report directories (first is the baseline)")
      ->expected(2, -1);
  compare->add_option("--out", compare_out, "write the comparison CSV here (default: stdout)");

  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "recompute reported quantities");
  verify->add_option("--out", verify_dir, "report directory (or single report) to check")
      ->required();

  std::string gen_config, gen_out;
  auto* gen = app.add_subcommand("gen", "write each experiment's instance JSON");
  gen->add_option("--config", gen_config, "sweep config JSON")->required();
  gen->add_option("--out", gen_out, "instance output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return mural::cli_run(run_opt, std::cout, std::cerr);
  if (compare->parsed())
    return mural::cli_compare(compare_dirs, compare_out, std::cout, std::cerr);
  if (verify->parsed()) return mural::cli_verify(verify_dir, std::cout, std::cerr);
  if (gen->parsed()) return mural::cli_gen(gen_config, gen_out, std::cout, std::cerr);
  return 2;
}

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfm/backtest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DDPG portfolio backtesting engine"};
  app.require_subcommand(1);
  app.fallthrough();  // accept global options after the subcommand name

  std::string config_path;
  std::string out_dir;
  std::string checkpoint = "";
  long long seed = -1;
  std::vector<std::string> overrides;
  bool cost = false, no_cost = false;

  app.add_option("--config", config_path, "TOML config file");
  app.add_option("--seed", seed, "master RNG seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides,
                 "override any config value as section.key=value");
  app.add_flag("--cost", cost, "enable transaction costs");
  app.add_flag("--no-cost", no_cost, "disable transaction costs");

  auto* ingest = app.add_subcommand("ingest", "parse CSVs into a panel cache");
  auto* train = app.add_subcommand("train", "train the DDPG agent");
  auto* backtest = app.add_subcommand("backtest", "greedy-policy rollout");
  auto* compare = app.add_subcommand("compare", "DDPG vs the seven baselines");
  auto* report = app.add_subcommand("report", "metrics from equity-curve CSVs");

  backtest->add_option("--checkpoint", checkpoint, "agent checkpoint path");
  compare->add_option("--checkpoint", checkpoint, "agent checkpoint path");
  std::vector<std::string> curve_files;
  report->add_option("curves", curve_files, "equity curve CSV files");

  CLI11_PARSE(app, argc, argv);

  try {
    auto all_overrides = overrides;
    if (seed >= 0) all_overrides.push_back("run.seed=" + std::to_string(seed));
    if (!out_dir.empty()) all_overrides.push_back("run.out_dir=" + out_dir);
    if (cost) all_overrides.push_back("env.cost_enabled=true");
    if (no_cost) all_overrides.push_back("env.cost_enabled=false");

    pfm::RunConfig run = pfm::load_run_config(config_path, all_overrides);
    if (checkpoint.empty()) checkpoint = run.out_dir + "/checkpoint.json";

    if (ingest->parsed()) {
      pfm::cmd_ingest(run);
    } else if (train->parsed()) {
      pfm::cmd_train(run);
    } else if (backtest->parsed()) {
      pfm::cmd_backtest(run, checkpoint);
    } else if (compare->parsed()) {
      pfm::cmd_compare(run, checkpoint);
    } else if (report->parsed()) {
      pfm::cmd_report(curve_files, run.out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

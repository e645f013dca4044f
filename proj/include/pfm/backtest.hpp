#pragma once

#include <map>
#include <string>
#include <vector>

#include "pfm/baselines.hpp"
#include "pfm/ddpg.hpp"
#include "pfm/market_env.hpp"
#include "pfm/metrics.hpp"

namespace pfm {

/// Minimal TOML subset: [section] headers, key = value pairs, '#' comments,
/// quoted strings, numbers, booleans, and flat string arrays. Keys are
/// flattened to "section.key".
std::map<std::string, std::string> parse_config_text(const std::string& text);

struct RunConfig {
  std::string data_dir;
  std::vector<std::string> tickers;
  std::string train_start = "1999-07-01";
  std::string train_end = "2016-07-01";
  std::string backtest_start;  // empty = full panel span
  std::string backtest_end;
  EnvConfig env;
  TrainConfig train;
  BaselineParams baselines;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
};

/// Load a config file and apply --set key=value overrides (applied last).
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides);
RunConfig run_config_from_map(const std::map<std::string, std::string>& kv);

/// Roll one strategy over [start_t, end_t] through the shared environment.
/// The returned curve has end_t - start_t + 1 points; total_cost, when
/// given, accumulates the transaction costs paid.
EquityCurve run_strategy(const AlignedPanel& panel, const EnvConfig& env_config,
                         Strategy& strategy, int start_t, int end_t,
                         double* total_cost = nullptr);

/// Greedy (no-noise) DDPG policy as a strategy; also reports the mean
/// executed weight per asset when asked.
class AgentStrategy : public Strategy {
 public:
  explicit AgentStrategy(DdpgAgent& agent) : agent_(&agent) {}
  std::optional<ActionWeights> target_weights(const MarketEnv& env) override;
  Eigen::VectorXd mean_weights() const;

 private:
  DdpgAgent* agent_;
  Eigen::VectorXd weight_sum_;
  long long calls_ = 0;
};

// Panel cache (versioned JSON).
std::string panel_to_json(const AlignedPanel& panel);
AlignedPanel panel_from_json(const std::string& text);

/// Self-contained SVG overlay of equity curves, optional log-scale y axis.
std::string curves_to_svg(
    const std::vector<std::pair<std::string, EquityCurve>>& curves,
    bool log_scale = false);

std::string sha256_hex(const std::string& bytes);

/// Records every emitted file with its content hash; written alongside the
/// artifacts as manifest.json. Wall-clock timings live only here, so all
/// other outputs stay byte-deterministic.
class RunManifest {
 public:
  explicit RunManifest(std::string out_dir);
  void write_file(const std::string& name, const std::string& contents);
  void add_timing(const std::string& label, double seconds);
  void set_config_echo(const std::string& text);
  void save() const;  // writes <out_dir>/manifest.json

 private:
  std::string out_dir_;
  std::vector<std::pair<std::string, std::string>> files_;  // name -> sha256
  std::vector<std::pair<std::string, double>> timings_;
  std::string config_echo_;
};

// Date range -> panel indices (first index with date >= start, last <= end).
std::pair<int, int> panel_range(const AlignedPanel& panel,
                                const std::string& start,
                                const std::string& end);

// CLI command bodies; each returns the paths it wrote via the manifest.
void cmd_ingest(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_backtest(const RunConfig& config, const std::string& checkpoint_path);
void cmd_compare(const RunConfig& config, const std::string& checkpoint_path);
void cmd_report(const std::vector<std::string>& curve_files,
                const std::string& out_dir);

}  // namespace pfm

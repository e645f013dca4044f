#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pfm/backtest.hpp"
#include "test_util.hpp"

using namespace pfm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Synthetic two-ticker data directory with `days` rows of drifting prices.
fs::path write_data_dir(const std::string& tag, int days) {
  fs::path dir = fs::temp_directory_path() / ("pfm_test_" + tag);
  fs::create_directories(dir);
  pfm::Rng rng(2024);
  for (int j = 0; j < 2; ++j) {
    std::ofstream out(dir / (std::string("T") + std::to_string(j) + ".csv"));
    out << "Date,Open,High,Low,Close,Adj Close,Volume\n";
    double p = 50.0 + 25.0 * j;
    int base = days_from_date("2015-01-05");
    for (int t = 0; t < days; ++t) {
      out << date_from_days(base + t) << ",1,1,1,1," << p << ",1000\n";
      p *= 1.0 + 0.02 * (rng.uniform() - 0.48);
    }
  }
  return dir;
}

RunConfig small_run(const fs::path& data_dir, const fs::path& out_dir) {
  RunConfig cfg;
  cfg.data_dir = data_dir.string();
  cfg.tickers = {"T0", "T1"};
  cfg.train_start = "2015-01-05";
  cfg.train_end = "2015-06-30";
  cfg.out_dir = out_dir.string();
  cfg.seed = 42;
  cfg.train.seed = 42;
  cfg.train.epochs = 1;
  cfg.train.batch = 16;
  cfg.train.update_every = 8;
  cfg.env.normalize_obs = true;
  cfg.env.reward_scale = 1e-5;
  cfg.baselines.up_samples = 500;
  return cfg;
}

}  // namespace

TEST_CASE("parse_config_text subset") {
  auto kv = parse_config_text(
      "# top comment\n"
      "[data]\n"
      "dir = \"data/raw\"  # trailing comment\n"
      "tickers = [\"AAPL\", \"MSFT\"]\n"
      "[env]\n"
      "initial_cash = 1000000\n"
      "cost_enabled = true\n"
      "[run]\n"
      "note = \"has # inside\"\n");
  CHECK(kv.at("data.dir") == "\"data/raw\"");
  CHECK(kv.at("env.initial_cash") == "1000000");
  CHECK(kv.at("env.cost_enabled") == "true");
  CHECK(kv.at("run.note") == "\"has # inside\"");

  CHECK_THROWS_AS(parse_config_text("[broken\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_config_text("no equals sign\n"), std::runtime_error);
}

TEST_CASE("run_config_from_map fills defaults and overrides") {
  auto cfg = run_config_from_map(parse_config_text(
      "[data]\n"
      "dir = \"d\"\n"
      "tickers = [\"A\", \"B\"]\n"
      "[train]\n"
      "gamma = 0.5\n"
      "[run]\n"
      "seed = 7\n"));
  CHECK(cfg.data_dir == "d");
  REQUIRE(cfg.tickers.size() == 2);
  CHECK(cfg.tickers[1] == "B");
  CHECK(cfg.train.gamma == 0.5);
  CHECK(cfg.train.tau == 0.09);       // default kept
  CHECK(cfg.env.cost_per_share == 0.001);
  CHECK(cfg.seed == 7);
  CHECK(cfg.train.seed == 7);         // run seed feeds training
}

TEST_CASE("panel json round trip is exact") {
  auto panel = pfm_test::drift_panel(20);
  auto back = panel_from_json(panel_to_json(panel));
  CHECK(back.dates == panel.dates);
  CHECK(back.tickers == panel.tickers);
  CHECK((back.prices - panel.prices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.rsi2 - panel.rsi2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.log_return - panel.log_return).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(panel_from_json("{\"version\":\"bogus\"}"),
                  std::runtime_error);
}

TEST_CASE("panel_range clamps to the panel") {
  auto panel = pfm_test::drift_panel(10);  // dates from 2000-01-03
  auto [lo, hi] = panel_range(panel, "2000-01-05", "2000-01-08");
  CHECK(panel.dates[static_cast<std::size_t>(lo)] == "2000-01-05");
  CHECK(panel.dates[static_cast<std::size_t>(hi)] == "2000-01-08");
  auto [a, b] = panel_range(panel, "", "");
  CHECK(a == 0);
  CHECK(b == 9);
  CHECK_THROWS_AS(panel_range(panel, "2030-01-01", "2030-02-01"),
                  std::runtime_error);
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("curves_to_svg emits one polyline per curve") {
  auto panel = pfm_test::drift_panel(15);
  EquityCurve c;
  for (int t = 0; t < 15; ++t) {
    c.dates.push_back(panel.dates[static_cast<std::size_t>(t)]);
    c.values.push_back(1e6 * (1.0 + 0.01 * t));
  }
  auto svg = curves_to_svg({{"one", c}, {"two", c}});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("one") != std::string::npos);
  std::size_t count = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++count;
    ++pos;
  }
  CHECK(count >= 2);
}

TEST_CASE("run_strategy emits a dated curve and accumulates cost") {
  auto panel = pfm_test::drift_panel(50);
  BaselineParams params;
  auto crp = make_strategy(StrategyKind::Crp, 2, params, 1);
  double cost = 0.0;
  EnvConfig cfg;
  auto curve = run_strategy(panel, cfg, *crp, 1, 48, &cost);
  CHECK(curve.values.size() == 48);
  CHECK(curve.dates.size() == curve.values.size());
  CHECK(curve.dates.front() == panel.dates[1]);
  CHECK(curve.values.front() == doctest::Approx(1e6));
  CHECK(cost > 0.0);
}

TEST_CASE("ingest, train, backtest, compare pipeline") {
  auto data_dir = write_data_dir("pipeline", 160);
  fs::path out_dir = fs::temp_directory_path() / "pfm_test_pipeline_out";
  fs::remove_all(out_dir);
  auto cfg = small_run(data_dir, out_dir);

  cmd_ingest(cfg);
  CHECK(fs::exists(out_dir / "panel.json"));
  auto panel = panel_from_json(slurp(out_dir / "panel.json"));
  CHECK(panel.assets() == 2);
  CHECK(panel.rows() == 160);

  cmd_train(cfg);
  CHECK(fs::exists(out_dir / "checkpoint.json"));
  CHECK(fs::exists(out_dir / "train_log.csv"));

  cmd_backtest(cfg, (out_dir / "checkpoint.json").string());
  auto curve = curve_from_csv(slurp(out_dir / "ddpg_curve.csv"));
  CHECK(curve.values.size() > 10);
  CHECK(curve.values.front() == doctest::Approx(1e6));

  cmd_compare(cfg, (out_dir / "checkpoint.json").string());
  auto report = slurp(out_dir / "report.csv");
  for (const char* name :
       {"ANTICOR", "BAH", "CRP", "EG", "OLMAR", "PAMR", "UP", "DDPG"}) {
    CHECK(report.find(name) != std::string::npos);
  }
  CHECK(fs::exists(out_dir / "compare.svg"));
  CHECK(fs::exists(out_dir / "curves.csv"));
  CHECK(fs::exists(out_dir / "manifest.json"));

  // manifest hashes match the bytes on disk
  auto manifest = slurp(out_dir / "manifest.json");
  CHECK(manifest.find(sha256_hex(report)) != std::string::npos);

  fs::remove_all(out_dir);
  fs::remove_all(data_dir);
}

TEST_CASE("ingest reports a missing ticker by name") {
  auto data_dir = write_data_dir("missing", 20);
  fs::path out_dir = fs::temp_directory_path() / "pfm_test_missing_out";
  auto cfg = small_run(data_dir, out_dir);
  cfg.tickers = {"T0", "NOPE"};
  CHECK_THROWS_WITH_AS(cmd_ingest(cfg), doctest::Contains("NOPE"),
                       std::runtime_error);
  fs::remove_all(out_dir);
  fs::remove_all(data_dir);
}

TEST_CASE("backtest rejects a checkpoint with mismatched asset count") {
  auto data_dir = write_data_dir("mismatch", 40);
  fs::path out_dir = fs::temp_directory_path() / "pfm_test_mismatch_out";
  fs::remove_all(out_dir);
  auto cfg = small_run(data_dir, out_dir);
  cmd_ingest(cfg);

  TrainConfig tc;
  tc.seed = 1;
  DdpgAgent wrong(3, tc);  // panel has 2 assets
  fs::path ckpt = out_dir / "wrong.json";
  std::ofstream(ckpt) << wrong.save_checkpoint();
  CHECK_THROWS_AS(cmd_backtest(cfg, ckpt.string()), std::runtime_error);
  fs::remove_all(out_dir);
  fs::remove_all(data_dir);
}

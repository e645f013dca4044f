#include "pfm/backtest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

namespace pfm {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double to_double(const std::map<std::string, std::string>& kv,
                 const std::string& key, double fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

long long to_int(const std::map<std::string, std::string>& kv,
                 const std::string& key, long long fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stoll(it->second);
}

bool to_bool(const std::map<std::string, std::string>& kv,
             const std::string& key, bool fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw std::runtime_error("config: '" + key + "' must be true or false");
}

std::string to_string_value(const std::map<std::string, std::string>& kv,
                            const std::string& key, std::string fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? std::move(fallback) : strip_quotes(it->second);
}

std::vector<std::string> to_string_list(
    const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  std::vector<std::string> out;
  if (it == kv.end()) return out;
  std::string body = trim(it->second);
  if (!body.empty() && body.front() == '[') body = body.substr(1);
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::stringstream ss(body);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = strip_quotes(trim(cell));
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) {
      // keep '#' inside quoted strings
      bool in_quote = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quote = !in_quote;
        if (line[i] == '#' && !in_quote) {
          line = line.substr(0, i);
          break;
        }
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

RunConfig run_config_from_map(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  c.data_dir = to_string_value(kv, "data.dir", "");
  c.tickers = to_string_list(kv, "data.tickers");
  c.train_start = to_string_value(kv, "data.train_start", c.train_start);
  c.train_end = to_string_value(kv, "data.train_end", c.train_end);
  c.backtest_start = to_string_value(kv, "data.backtest_start", "");
  c.backtest_end = to_string_value(kv, "data.backtest_end", "");

  c.env.initial_cash = to_double(kv, "env.initial_cash", c.env.initial_cash);
  c.env.cost_per_share = to_double(kv, "env.cost_per_share", c.env.cost_per_share);
  c.env.cost_enabled = to_bool(kv, "env.cost_enabled", c.env.cost_enabled);
  c.env.normalize_obs = to_bool(kv, "env.normalize_obs", c.env.normalize_obs);
  c.env.reward_scale = to_double(kv, "env.reward_scale", c.env.reward_scale);

  c.train.gamma = to_double(kv, "train.gamma", c.train.gamma);
  c.train.tau = to_double(kv, "train.tau", c.train.tau);
  c.train.batch = static_cast<int>(to_int(kv, "train.batch", c.train.batch));
  c.train.buffer_capacity = static_cast<std::size_t>(
      to_int(kv, "train.buffer_capacity",
             static_cast<long long>(c.train.buffer_capacity)));
  c.train.actor_lr = to_double(kv, "train.actor_lr", c.train.actor_lr);
  c.train.critic_lr = to_double(kv, "train.critic_lr", c.train.critic_lr);
  c.train.epochs = static_cast<int>(to_int(kv, "train.epochs", c.train.epochs));
  c.train.update_every =
      static_cast<int>(to_int(kv, "train.update_every", c.train.update_every));
  c.train.ou_theta = to_double(kv, "train.ou_theta", c.train.ou_theta);
  c.train.ou_mu = to_double(kv, "train.ou_mu", c.train.ou_mu);
  c.train.ou_sigma = to_double(kv, "train.ou_sigma", c.train.ou_sigma);
  c.train.ou_dt = to_double(kv, "train.ou_dt", c.train.ou_dt);

  c.baselines.eg_eta = to_double(kv, "baselines.eg.eta", c.baselines.eg_eta);
  c.baselines.olmar_epsilon =
      to_double(kv, "baselines.olmar.epsilon", c.baselines.olmar_epsilon);
  c.baselines.olmar_window = static_cast<int>(
      to_int(kv, "baselines.olmar.window", c.baselines.olmar_window));
  c.baselines.pamr_epsilon =
      to_double(kv, "baselines.pamr.epsilon", c.baselines.pamr_epsilon);
  c.baselines.up_samples = static_cast<int>(
      to_int(kv, "baselines.up.samples", c.baselines.up_samples));
  c.baselines.anticor_window = static_cast<int>(
      to_int(kv, "baselines.anticor.window", c.baselines.anticor_window));

  c.seed = static_cast<std::uint64_t>(
      to_int(kv, "run.seed", static_cast<long long>(c.seed)));
  c.out_dir = to_string_value(kv, "run.out_dir", c.out_dir);
  c.train.seed = c.seed;
  return c;
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides) {
  auto kv = path.empty() ? std::map<std::string, std::string>{}
                         : parse_config_text(read_file(path));
  for (const std::string& o : overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("override must be key=value: " + o);
    }
    kv[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
  }
  return run_config_from_map(kv);
}

EquityCurve run_strategy(const AlignedPanel& panel, const EnvConfig& env_config,
                         Strategy& strategy, int start_t, int end_t,
                         double* total_cost) {
  if (start_t < 1 || end_t <= start_t || end_t > panel.rows() - 1) {
    throw std::invalid_argument("run_strategy: bad range");
  }
  MarketEnv env(panel, env_config);
  env.reset(start_t);

  EquityCurve curve;
  curve.dates.push_back(panel.dates[static_cast<std::size_t>(start_t)]);
  curve.values.push_back(env.state().value);
  double cost = 0.0;
  for (int t = start_t; t < end_t; ++t) {
    auto action = strategy.target_weights(env);
    StepResult sr = env.step(action);
    cost += sr.cost_paid;
    curve.dates.push_back(panel.dates[static_cast<std::size_t>(t + 1)]);
    curve.values.push_back(env.state().value);
  }
  if (total_cost) *total_cost = cost;
  return curve;
}

std::optional<ActionWeights> AgentStrategy::target_weights(const MarketEnv& env) {
  if (env.obs_dim() != agent_->obs_dim()) {
    throw std::runtime_error("agent/panel dimension mismatch: observation " +
                             std::to_string(env.obs_dim()) + " vs " +
                             std::to_string(agent_->obs_dim()));
  }
  Eigen::VectorXd w = agent_->greedy_weights(env.observation());
  if (weight_sum_.size() == 0) weight_sum_ = Eigen::VectorXd::Zero(w.size());
  weight_sum_ += w;
  ++calls_;
  return make_weights(w);
}

Eigen::VectorXd AgentStrategy::mean_weights() const {
  if (calls_ == 0) return weight_sum_;
  return weight_sum_ / static_cast<double>(calls_);
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols =
      rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index jj = 0; jj < cols; ++jj) {
      m(i, jj) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(jj));
    }
  }
  return m;
}

}  // namespace

std::string panel_to_json(const AlignedPanel& panel) {
  nlohmann::json j;
  j["format"] = "pfm-panel-1";
  j["tickers"] = panel.tickers;
  j["dates"] = panel.dates;
  j["prices"] = matrix_to_json(panel.prices);
  j["rsi2"] = matrix_to_json(panel.rsi2);
  j["simple_return"] = matrix_to_json(panel.simple_return);
  j["log_return"] = matrix_to_json(panel.log_return);
  return j.dump();
}

AlignedPanel panel_from_json(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("format") || j.at("format") != "pfm-panel-1") {
      throw std::runtime_error("panel cache: unknown format");
    }
    AlignedPanel panel;
    panel.tickers = j.at("tickers").get<std::vector<std::string>>();
    panel.dates = j.at("dates").get<std::vector<std::string>>();
    panel.prices = matrix_from_json(j.at("prices"));
    panel.rsi2 = matrix_from_json(j.at("rsi2"));
    panel.simple_return = matrix_from_json(j.at("simple_return"));
    panel.log_return = matrix_from_json(j.at("log_return"));
    return panel;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("panel cache: malformed: ") +
                             e.what());
  }
}

std::string curves_to_svg(
    const std::vector<std::pair<std::string, EquityCurve>>& curves,
    bool log_scale) {
  const int width = 960, height = 540;
  const int ml = 70, mr = 180, mt = 20, mb = 40;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  double vmin = 1e300, vmax = -1e300;
  std::size_t n = 0;
  for (const auto& [name, curve] : curves) {
    n = std::max(n, curve.values.size());
    for (double v : curve.values) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  if (curves.empty() || n < 2) throw std::invalid_argument("svg: no data");
  auto y_of = [&](double v) {
    double a = log_scale ? std::log10(v) : v;
    double lo = log_scale ? std::log10(vmin) : vmin;
    double hi = log_scale ? std::log10(vmax) : vmax;
    if (hi <= lo) hi = lo + 1.0;
    return mt + (height - mt - mb) * (1.0 - (a - lo) / (hi - lo));
  };

  std::ostringstream os;
  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                ml, mt, ml, height - mb);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                ml, height - mb, width - mr, height - mb);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\">%.6g</text>\n", 4,
                mt + 12, vmax);
  os << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\">%.6g</text>\n", 4,
                height - mb, vmin);
  os << buf;

  int color = 0;
  for (const auto& [name, curve] : curves) {
    os << "<polyline fill=\"none\" stroke=\"" << palette[color % 8]
       << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
      const double x =
          ml + (width - ml - mr) * static_cast<double>(i) /
                   static_cast<double>(n - 1);
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x, y_of(curve.values[i]));
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                  width - mr + 10, mt + 16 * (color + 1), palette[color % 8],
                  name.c_str());
    os << buf;
    ++color;
  }
  // first/last dates on the x axis
  const auto& dates = curves.front().second.dates;
  if (!dates.empty()) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\">%s</text>\n", ml,
                  height - mb + 16, dates.front().c_str());
    os << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"end\">%s</text>\n",
                  width - mr, height - mb + 16, dates.back().c_str());
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

RunManifest::RunManifest(std::string out_dir) : out_dir_(std::move(out_dir)) {
  fs::create_directories(out_dir_);
}

void RunManifest::write_file(const std::string& name,
                             const std::string& contents) {
  const fs::path path = fs::path(out_dir_) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  files_.emplace_back(name, sha256_hex(contents));
}

void RunManifest::add_timing(const std::string& label, double seconds) {
  timings_.emplace_back(label, seconds);
}

void RunManifest::set_config_echo(const std::string& text) {
  config_echo_ = text;
}

void RunManifest::save() const {
  nlohmann::json j;
  j["format"] = "pfm-manifest-1";
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, hash] : files_) {
    files.push_back({{"path", name}, {"sha256", hash}});
  }
  j["files"] = files;
  nlohmann::json timings = nlohmann::json::object();
  for (const auto& [label, secs] : timings_) timings[label] = secs;
  j["timings"] = timings;
  j["config"] = config_echo_;
  std::ofstream out(fs::path(out_dir_) / "manifest.json", std::ios::binary);
  out << j.dump(2);
}

std::pair<int, int> panel_range(const AlignedPanel& panel,
                                const std::string& start,
                                const std::string& end) {
  int lo = 0, hi = panel.rows() - 1;
  if (!start.empty()) {
    auto it = std::lower_bound(panel.dates.begin(), panel.dates.end(), start);
    lo = static_cast<int>(it - panel.dates.begin());
  }
  if (!end.empty()) {
    auto it = std::upper_bound(panel.dates.begin(), panel.dates.end(), end);
    hi = static_cast<int>(it - panel.dates.begin()) - 1;
  }
  if (lo >= hi) {
    throw std::runtime_error("date range [" + start + "," + end +
                             "] selects fewer than two panel rows");
  }
  return {lo, hi};
}

namespace {

std::string config_echo(const RunConfig& c) {
  nlohmann::json j;
  j["data"] = {{"dir", c.data_dir},
               {"tickers", c.tickers},
               {"train_start", c.train_start},
               {"train_end", c.train_end},
               {"backtest_start", c.backtest_start},
               {"backtest_end", c.backtest_end}};
  j["env"] = {{"initial_cash", c.env.initial_cash},
              {"cost_per_share", c.env.cost_per_share},
              {"cost_enabled", c.env.cost_enabled},
              {"normalize_obs", c.env.normalize_obs},
              {"reward_scale", c.env.reward_scale}};
  j["train"] = {{"gamma", c.train.gamma},       {"tau", c.train.tau},
                {"batch", c.train.batch},       {"actor_lr", c.train.actor_lr},
                {"critic_lr", c.train.critic_lr}, {"epochs", c.train.epochs},
                {"update_every", c.train.update_every}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j.dump();
}

AlignedPanel load_panel_cache(const RunConfig& config) {
  const std::string path = config.out_dir + "/panel.json";
  if (!fs::exists(path)) {
    throw std::runtime_error("panel cache not found: " + path +
                             " (run 'ingest' first)");
  }
  return panel_from_json(read_file(path));
}

std::pair<int, int> clamp_backtest_range(const AlignedPanel& panel,
                                         const RunConfig& config) {
  auto [lo, hi] = panel_range(panel, config.backtest_start, config.backtest_end);
  lo = std::max(lo, 1);  // the observation needs the previous day
  if (hi <= lo) throw std::runtime_error("backtest range too short");
  return {lo, hi};
}

}  // namespace

void cmd_ingest(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  if (config.tickers.empty()) throw std::runtime_error("no tickers configured");
  std::vector<AssetSeries> series;
  std::size_t skipped = 0;
  for (const std::string& ticker : config.tickers) {
    const std::string path = config.data_dir + "/" + ticker + ".csv";
    if (!fs::exists(path)) {
      throw std::runtime_error("missing data file for ticker '" + ticker +
                               "': " + path);
    }
    series.push_back(parse_csv(read_file(path), ticker));
    skipped += series.back().skipped_rows;
  }
  AlignedPanel panel = align_panel(series);

  RunManifest manifest(config.out_dir);
  manifest.set_config_echo(config_echo(config));
  manifest.write_file("panel.json", panel_to_json(panel));
  manifest.add_timing("ingest",
                      std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count());
  manifest.save();

  std::cout << "ingest: T=" << panel.rows() << " M=" << panel.assets()
            << " dropped_rows=" << skipped << " span=" << panel.dates.front()
            << ".." << panel.dates.back() << "\n";
}

void cmd_train(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  AlignedPanel panel = load_panel_cache(config);
  auto [lo, hi] = panel_range(panel, config.train_start, config.train_end);
  lo = std::max(lo, 1);

  DdpgAgent agent(panel.assets(), config.train);
  TrainLog log = agent.train(panel, config.env, lo, hi);

  RunManifest manifest(config.out_dir);
  manifest.set_config_echo(config_echo(config));
  manifest.write_file("checkpoint.json", agent.save_checkpoint());
  manifest.write_file("train_log.csv", log.to_csv());
  manifest.add_timing("train",
                      std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count());
  manifest.save();

  std::cout << "train: epochs=" << config.train.epochs << " steps/epoch="
            << (hi - lo) << " range=" << panel.dates[static_cast<std::size_t>(lo)]
            << ".." << panel.dates[static_cast<std::size_t>(hi)] << "\n";
}

void cmd_backtest(const RunConfig& config, const std::string& checkpoint_path) {
  const auto t0 = std::chrono::steady_clock::now();
  AlignedPanel panel = load_panel_cache(config);
  DdpgAgent agent = DdpgAgent::load_checkpoint(read_file(checkpoint_path));
  if (agent.assets() != panel.assets()) {
    throw std::runtime_error("checkpoint/panel mismatch: checkpoint has " +
                             std::to_string(agent.assets()) + " assets, panel " +
                             std::to_string(panel.assets()));
  }
  auto [lo, hi] = clamp_backtest_range(panel, config);

  AgentStrategy strategy(agent);
  double total_cost = 0.0;
  EquityCurve curve =
      run_strategy(panel, config.env, strategy, lo, hi, &total_cost);

  RunManifest manifest(config.out_dir);
  manifest.set_config_echo(config_echo(config));
  manifest.write_file("ddpg_curve.csv", curve_to_csv(curve));
  manifest.add_timing("backtest",
                      std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count());
  manifest.save();

  std::cout << "backtest: final_value=" << curve.values.back()
            << " total_cost=" << total_cost << " days=" << curve.values.size()
            << "\n";
}

void cmd_compare(const RunConfig& config, const std::string& checkpoint_path) {
  const auto t0 = std::chrono::steady_clock::now();
  AlignedPanel panel = load_panel_cache(config);
  DdpgAgent agent = DdpgAgent::load_checkpoint(read_file(checkpoint_path));
  if (agent.assets() != panel.assets()) {
    throw std::runtime_error("checkpoint/panel mismatch");
  }
  auto [lo, hi] = clamp_backtest_range(panel, config);

  std::vector<std::pair<std::string, EquityCurve>> curves;
  for (StrategyKind kind : all_strategy_kinds()) {
    const std::string name = strategy_name(kind);
    try {
      auto strategy = make_strategy(kind, panel.assets(), config.baselines,
                                    Rng(config.seed).substream(name).next_u64());
      curves.emplace_back(name,
                          run_strategy(panel, config.env, *strategy, lo, hi));
    } catch (const std::exception& e) {
      std::cerr << name << " failed: " << e.what() << "\n";
      curves.emplace_back(name, EquityCurve{});  // marked row in the report
    }
  }
  AgentStrategy ddpg(agent);
  curves.emplace_back("DDPG", run_strategy(panel, config.env, ddpg, lo, hi));

  MetricsReport report = build_report(curves);

  // combined curve table, one column per strategy
  std::string combined = "date";
  for (const auto& [name, curve] : curves) combined += "," + name;
  combined += "\n";
  const auto& ref = curves.back().second;
  char buf[64];
  for (std::size_t i = 0; i < ref.dates.size(); ++i) {
    combined += ref.dates[i];
    for (const auto& [name, curve] : curves) {
      if (i < curve.values.size()) {
        std::snprintf(buf, sizeof(buf), ",%.17g", curve.values[i]);
        combined += buf;
      } else {
        combined += ",";
      }
    }
    combined += "\n";
  }

  RunManifest manifest(config.out_dir);
  manifest.set_config_echo(config_echo(config));
  manifest.write_file("report.csv", report_to_csv(report));
  manifest.write_file("report.txt", report_to_text(report));
  manifest.write_file("curves.csv", combined);
  std::vector<std::pair<std::string, EquityCurve>> plottable;
  for (const auto& c : curves) {
    if (c.second.values.size() >= 2) plottable.push_back(c);
  }
  manifest.write_file("compare.svg", curves_to_svg(plottable, true));
  manifest.add_timing("compare",
                      std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count());
  manifest.save();

  std::cout << report_to_text(report);
}

void cmd_report(const std::vector<std::string>& curve_files,
                const std::string& out_dir) {
  std::vector<std::pair<std::string, EquityCurve>> curves;
  for (const std::string& path : curve_files) {
    curves.emplace_back(fs::path(path).stem().string(),
                        curve_from_csv(read_file(path)));
  }
  MetricsReport report = build_report(curves);
  RunManifest manifest(out_dir);
  manifest.write_file("report.csv", report_to_csv(report));
  manifest.write_file("report.txt", report_to_text(report));
  manifest.save();
  std::cout << report_to_text(report);
}

}  // namespace pfm

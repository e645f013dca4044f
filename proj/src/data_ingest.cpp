#include "pfm/data_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace pfm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, std::size_t line_no,
                    const std::string& col) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": unparsable " + col + " value '" + cell + "'");
  }
  if (pos != cell.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": unparsable " + col + " value '" + cell + "'");
  }
  return v;
}

}  // namespace

bool valid_date(const std::string& iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(iso[i]))) return false;
  }
  int m = std::stoi(iso.substr(5, 2));
  int d = std::stoi(iso.substr(8, 2));
  return m >= 1 && m <= 12 && d >= 1 && d <= 31;
}

// Howard Hinnant's civil-date algorithms.
int days_from_date(const std::string& iso) {
  if (!valid_date(iso)) throw std::runtime_error("invalid date '" + iso + "'");
  int y = std::stoi(iso.substr(0, 4));
  unsigned m = static_cast<unsigned>(std::stoi(iso.substr(5, 2)));
  unsigned d = static_cast<unsigned>(std::stoi(iso.substr(8, 2)));
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

std::string date_from_days(int serial) {
  int z = serial + 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y + (m <= 2), m, d);
  return buf;
}

AssetSeries parse_csv(const std::string& text, const std::string& ticker) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) {
    throw std::runtime_error("empty CSV for '" + ticker + "'");
  }

  auto header = split_csv_line(line);
  std::unordered_map<std::string, int> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    col[trim(header[i])] = static_cast<int>(i);
  }
  for (const char* required : {"Date", "Adj Close"}) {
    if (!col.count(required)) {
      throw std::runtime_error("CSV for '" + ticker +
                               "' is missing required column '" + required +
                               "'");
    }
  }
  auto idx = [&](const char* name) {
    auto it = col.find(name);
    return it == col.end() ? -1 : it->second;
  };
  const int c_date = idx("Date"), c_open = idx("Open"), c_high = idx("High"),
            c_low = idx("Low"), c_close = idx("Close"),
            c_adj = idx("Adj Close"), c_vol = idx("Volume");

  AssetSeries series;
  series.ticker = ticker;
  std::size_t line_no = 1;
  while (std::getline(ss, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);

    auto cell = [&](int c) -> std::string {
      if (c < 0 || c >= static_cast<int>(cells.size())) return "";
      return trim(cells[static_cast<std::size_t>(c)]);
    };

    bool has_empty = false;
    for (int c : {c_date, c_open, c_high, c_low, c_close, c_adj, c_vol}) {
      if (c >= 0 && cell(c).empty()) has_empty = true;
    }
    // Yahoo marks missing entries as "null" as well.
    for (int c : {c_open, c_high, c_low, c_close, c_adj, c_vol}) {
      if (c >= 0 && cell(c) == "null") has_empty = true;
    }
    if (has_empty) {
      ++series.skipped_rows;
      continue;
    }

    Bar bar;
    bar.date = cell(c_date);
    if (!valid_date(bar.date)) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": unparsable date '" + bar.date + "'");
    }
    if (c_open >= 0) bar.open = parse_number(cell(c_open), line_no, "Open");
    if (c_high >= 0) bar.high = parse_number(cell(c_high), line_no, "High");
    if (c_low >= 0) bar.low = parse_number(cell(c_low), line_no, "Low");
    if (c_close >= 0) bar.close = parse_number(cell(c_close), line_no, "Close");
    bar.adj_close = parse_number(cell(c_adj), line_no, "Adj Close");
    if (c_vol >= 0) bar.volume = parse_number(cell(c_vol), line_no, "Volume");
    if (!(bar.adj_close > 0.0)) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": non-positive Adj Close");
    }
    series.bars.push_back(std::move(bar));
  }

  std::sort(series.bars.begin(), series.bars.end(),
            [](const Bar& a, const Bar& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < series.bars.size(); ++i) {
    if (series.bars[i].date == series.bars[i - 1].date) {
      throw std::runtime_error("duplicate date " + series.bars[i].date +
                               " in series '" + ticker + "'");
    }
  }
  return series;
}

AlignedPanel align_panel(const std::vector<AssetSeries>& series) {
  if (series.empty()) throw std::runtime_error("align_panel: no series");
  for (const auto& s : series) {
    if (s.bars.empty()) {
      throw std::runtime_error("align_panel: series '" + s.ticker +
                               "' is empty");
    }
  }

  // Intersect dates, keeping chronological order from the first series.
  std::vector<std::string> common;
  for (const auto& bar : series[0].bars) common.push_back(bar.date);
  for (std::size_t k = 1; k < series.size(); ++k) {
    std::unordered_set<std::string> have;
    for (const auto& bar : series[k].bars) have.insert(bar.date);
    std::erase_if(common, [&](const std::string& d) { return !have.count(d); });
  }

  if (common.size() < 2) {
    std::string msg = "align_panel: common dates " +
                      std::to_string(common.size()) + " < 2; ranges:";
    for (const auto& s : series) {
      msg += " " + s.ticker + "[" + s.bars.front().date + ".." +
             s.bars.back().date + "]";
    }
    throw std::runtime_error(msg);
  }

  const int T = static_cast<int>(common.size());
  const int M = static_cast<int>(series.size());
  AlignedPanel panel;
  panel.dates = common;
  panel.prices.resize(T, M);
  for (int j = 0; j < M; ++j) {
    panel.tickers.push_back(series[static_cast<std::size_t>(j)].ticker);
    std::unordered_map<std::string, double> by_date;
    for (const auto& bar : series[static_cast<std::size_t>(j)].bars) {
      by_date[bar.date] = bar.adj_close;
    }
    for (int t = 0; t < T; ++t) {
      panel.prices(t, j) = by_date.at(common[static_cast<std::size_t>(t)]);
    }
  }

  compute_returns(panel);
  if (T >= 3) {
    compute_rsi2(panel);
  } else {
    panel.rsi2 = Eigen::MatrixXd::Constant(T, M, 50.0);
  }
  return panel;
}

void compute_returns(AlignedPanel& panel) {
  const int T = panel.rows(), M = panel.assets();
  if (T < 2) throw std::runtime_error("compute_returns: need T >= 2");
  panel.simple_return = Eigen::MatrixXd::Zero(T, M);
  panel.log_return = Eigen::MatrixXd::Zero(T, M);
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < M; ++j) {
      const double ratio = panel.prices(t, j) / panel.prices(t - 1, j);
      panel.simple_return(t, j) = ratio - 1.0;
      panel.log_return(t, j) = std::log(ratio);
    }
  }
}

void compute_rsi2(AlignedPanel& panel) {
  const int T = panel.rows(), M = panel.assets();
  if (T < 3) throw std::runtime_error("compute_rsi2: need T >= 3");
  constexpr int period = 2;
  panel.rsi2 = Eigen::MatrixXd::Constant(T, M, 50.0);
  for (int j = 0; j < M; ++j) {
    // Seed Wilder averages with the simple mean of the first two changes.
    double avg_gain = 0.0, avg_loss = 0.0;
    for (int t = 1; t <= period; ++t) {
      const double d = panel.prices(t, j) - panel.prices(t - 1, j);
      avg_gain += std::max(d, 0.0) / period;
      avg_loss += std::max(-d, 0.0) / period;
    }
    for (int t = period; t < T; ++t) {
      if (t > period) {
        const double d = panel.prices(t, j) - panel.prices(t - 1, j);
        avg_gain = (avg_gain * (period - 1) + std::max(d, 0.0)) / period;
        avg_loss = (avg_loss * (period - 1) + std::max(-d, 0.0)) / period;
      }
      double rsi;
      if (avg_loss == 0.0 && avg_gain == 0.0) {
        rsi = 50.0;
      } else if (avg_loss == 0.0) {
        rsi = 100.0;
      } else {
        rsi = 100.0 - 100.0 / (1.0 + avg_gain / avg_loss);
      }
      panel.rsi2(t, j) = rsi;
    }
  }
}

}  // namespace pfm

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pfm {

/// One daily OHLCV row. Prices are in currency units, adj_close > 0.
struct Bar {
  std::string date;  // ISO-8601 YYYY-MM-DD
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double adj_close = 0.0;
  double volume = 0.0;
};

struct AssetSeries {
  std::string ticker;
  std::vector<Bar> bars;        // chronologically sorted, unique dates
  std::size_t skipped_rows = 0; // rows dropped for empty fields
};

/// Date-aligned adjusted closes plus derived features for M assets.
/// All matrices are T x M with no gaps; a date missing for any asset is
/// dropped for all of them.
struct AlignedPanel {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;
  Eigen::MatrixXd rsi2;
  Eigen::MatrixXd simple_return;
  Eigen::MatrixXd log_return;

  int rows() const { return static_cast<int>(prices.rows()); }
  int assets() const { return static_cast<int>(prices.cols()); }
};

/// Parse Yahoo-Finance CSV text (header: Date,Open,High,Low,Close,Adj
/// Close,Volume). Rows with any empty field are skipped and counted.
/// Throws on a missing required column or an unparsable non-empty field.
AssetSeries parse_csv(const std::string& text, const std::string& ticker = "");

/// Intersect dates across series and compute all features. Requires T >= 2
/// after alignment; throws with per-ticker ranges if the intersection is
/// empty or too short.
AlignedPanel align_panel(const std::vector<AssetSeries>& series);

/// Fill simple_return / log_return. Row 0 is 0 by convention.
void compute_returns(AlignedPanel& panel);

/// Fill rsi2 using Wilder smoothing with period 2. Rows before the first
/// computable index carry the neutral value 50.
void compute_rsi2(AlignedPanel& panel);

// Civil-date helpers for synthetic panels and range checks.
int days_from_date(const std::string& iso);
std::string date_from_days(int serial);
bool valid_date(const std::string& iso);

}  // namespace pfm

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pfm {

/// Dated sequence of portfolio values; values > 0, dates strictly increasing.
struct EquityCurve {
  std::vector<std::string> dates;
  std::vector<double> values;
};

/// Compound annual return rate: (EV/BV)^(1/n) - 1 with n in 252-day years.
double carr(const std::vector<double>& values,
            double trading_days_per_year = 252.0);

struct SharpeResult {
  double daily = 0.0;
  double annualized = 0.0;
};

/// Sharpe ratio of daily simple returns against a constant risk-free rate.
/// Sample (n-1) standard deviation; throws on zero variance.
SharpeResult sharpe(const std::vector<double>& values, double risk_free = 0.0,
                    double annualization = 15.874507866387544 /* sqrt(252) */);

/// Maximum drawdown with the trough denominator: max (V_t1 - V_t2) / V_t2
/// over t2 > t1. Single pass over the running peak; can exceed 1.
double mdd_trough(const std::vector<double>& values);

/// Conventional peak-denominator drawdown: max (V_t1 - V_t2) / V_t1.
double mdd_peak(const std::vector<double>& values);

struct MetricsRow {
  std::string name;
  std::optional<double> carr;
  std::optional<SharpeResult> sr;
  std::optional<double> mdd;       // trough denominator
  std::optional<double> mdd_peak;  // conventional, extra column
  std::string error;               // non-empty when a metric failed
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
};

/// One row per named curve, input order preserved. Per-row metric failures
/// are marked in the row instead of aborting the table.
MetricsReport build_report(
    const std::vector<std::pair<std::string, EquityCurve>>& curves);

std::string report_to_csv(const MetricsReport& report);
std::string report_to_text(const MetricsReport& report);

std::string curve_to_csv(const EquityCurve& curve);
EquityCurve curve_from_csv(const std::string& text);

}  // namespace pfm

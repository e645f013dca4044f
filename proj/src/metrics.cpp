#include "pfm/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pfm {

double carr(const std::vector<double>& values, double trading_days_per_year) {
  if (values.size() < 2) throw std::invalid_argument("carr: need >= 2 points");
  for (double v : values) {
    if (!(v > 0.0)) throw std::invalid_argument("carr: values must be > 0");
  }
  const double years =
      static_cast<double>(values.size() - 1) / trading_days_per_year;
  if (years <= 0.0) throw std::invalid_argument("carr: zero horizon");
  return std::pow(values.back() / values.front(), 1.0 / years) - 1.0;
}

SharpeResult sharpe(const std::vector<double>& values, double risk_free,
                    double annualization) {
  if (values.size() < 3) throw std::invalid_argument("sharpe: need >= 3 points");
  const std::size_t n = values.size() - 1;
  std::vector<double> excess(n);
  for (std::size_t t = 0; t < n; ++t) {
    excess[t] = values[t + 1] / values[t] - 1.0 - risk_free;
  }
  double mean = 0.0;
  for (double r : excess) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : excess) var += (r - mean) * (r - mean);
  var /= static_cast<double>(n - 1);
  if (var <= 0.0) throw std::invalid_argument("sharpe: zero return variance");
  SharpeResult out;
  out.daily = mean / std::sqrt(var);
  out.annualized = out.daily * annualization;
  return out;
}

double mdd_trough(const std::vector<double>& values) {
  double peak = values.empty() ? 0.0 : values.front();
  double worst = 0.0;
  for (double v : values) {
    if (v > peak) peak = v;
    const double dd = (peak - v) / v;
    if (dd > worst) worst = dd;
  }
  return worst;
}

double mdd_peak(const std::vector<double>& values) {
  double peak = values.empty() ? 0.0 : values.front();
  double worst = 0.0;
  for (double v : values) {
    if (v > peak) peak = v;
    const double dd = (peak - v) / peak;
    if (dd > worst) worst = dd;
  }
  return worst;
}

MetricsReport build_report(
    const std::vector<std::pair<std::string, EquityCurve>>& curves) {
  MetricsReport report;
  for (const auto& [name, curve] : curves) {
    MetricsRow row;
    row.name = name;
    try {
      row.carr = carr(curve.values);
      row.mdd = mdd_trough(curve.values);
      row.mdd_peak = mdd_peak(curve.values);
      row.sr = sharpe(curve.values);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string report_to_csv(const MetricsReport& report) {
  std::string out = "strategy,carr,sr_daily,sr_annualized,mdd,mdd_peak,error\n";
  for (const auto& row : report.rows) {
    out += row.name + ",";
    out += (row.carr ? fmt(*row.carr) : "") + std::string(",");
    out += (row.sr ? fmt(row.sr->daily) : "") + std::string(",");
    out += (row.sr ? fmt(row.sr->annualized) : "") + std::string(",");
    out += (row.mdd ? fmt(*row.mdd) : "") + std::string(",");
    out += (row.mdd_peak ? fmt(*row.mdd_peak) : "") + std::string(",");
    out += row.error + "\n";
  }
  return out;
}

std::string report_to_text(const MetricsReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s %10s %10s\n",
                "strategy", "CARR", "SR(d)", "SR(ann)", "MDD", "MDD(peak)");
  os << line;
  for (const auto& row : report.rows) {
    if (!row.error.empty()) {
      std::snprintf(line, sizeof(line), "%-10s %s\n", row.name.c_str(),
                    ("error: " + row.error).c_str());
      os << line;
      continue;
    }
    std::snprintf(line, sizeof(line), "%-10s %9.2f%% %10.4f %10.4f %10.4f %10.4f\n",
                  row.name.c_str(), 100.0 * *row.carr,
                  row.sr ? row.sr->daily : 0.0,
                  row.sr ? row.sr->annualized : 0.0, *row.mdd, *row.mdd_peak);
    os << line;
  }
  return os.str();
}

std::string curve_to_csv(const EquityCurve& curve) {
  std::string out = "date,value\n";
  char buf[80];
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g\n", curve.dates[i].c_str(),
                  curve.values[i]);
    out += buf;
  }
  return out;
}

EquityCurve curve_from_csv(const std::string& text) {
  EquityCurve curve;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("curve CSV: malformed line '" + line + "'");
    }
    curve.dates.push_back(line.substr(0, comma));
    curve.values.push_back(std::stod(line.substr(comma + 1)));
  }
  return curve;
}

}  // namespace pfm

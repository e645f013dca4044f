#include <doctest.h>

#include <cmath>
#include <vector>

#include "pfm/data_ingest.hpp"
#include "pfm/metrics.hpp"
#include "pfm/rng.hpp"

using namespace pfm;

TEST_CASE("carr closed forms") {
  // doubles over exactly one 252-day year (253 points, 252 returns)
  std::vector<double> v(253);
  for (int i = 0; i < 253; ++i) v[static_cast<std::size_t>(i)] = 100.0 * std::pow(2.0, i / 252.0);
  CHECK(carr(v) == doctest::Approx(1.0));

  // flat curve has zero growth
  CHECK(carr(std::vector<double>(10, 42.0)) == doctest::Approx(0.0));

  // two half-years at +21% total = (1.21)^(1) - 1 over 252 returns
  std::vector<double> w(253);
  for (int i = 0; i < 253; ++i) w[static_cast<std::size_t>(i)] = 50.0 * std::pow(1.21, i / 252.0);
  CHECK(carr(w) == doctest::Approx(0.21));

  CHECK_THROWS_AS(carr({100.0}), std::invalid_argument);
  CHECK_THROWS_AS(carr({100.0, -5.0}), std::invalid_argument);
}

TEST_CASE("sharpe on alternating returns") {
  // daily returns alternate +1% / -1%: mean ~ 0, well-defined sample sd
  std::vector<double> v{100};
  for (int i = 0; i < 10; ++i) {
    v.push_back(v.back() * (i % 2 == 0 ? 1.01 : 0.99));
  }
  // oracle computed from the definition
  std::vector<double> rets;
  for (std::size_t i = 1; i < v.size(); ++i) rets.push_back(v[i] / v[i - 1] - 1.0);
  double mean = 0.0;
  for (double r : rets) mean += r;
  mean /= static_cast<double>(rets.size());
  double var = 0.0;
  for (double r : rets) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rets.size() - 1);
  auto sr = sharpe(v);
  CHECK(sr.daily == doctest::Approx(mean / std::sqrt(var)));
  CHECK(sr.annualized == doctest::Approx(sr.daily * std::sqrt(252.0)));
}

TEST_CASE("sharpe subtracts the risk-free rate") {
  std::vector<double> v{100};
  for (int i = 0; i < 20; ++i) v.push_back(v.back() * (i % 2 == 0 ? 1.02 : 1.01));
  auto base = sharpe(v, 0.0);
  auto shifted = sharpe(v, 0.01);
  CHECK(shifted.daily < base.daily);
}

TEST_CASE("sharpe throws on zero variance") {
  std::vector<double> flat(10, 100.0);
  CHECK_THROWS_AS(sharpe(flat), std::invalid_argument);
  std::vector<double> steady{100};
  for (int i = 0; i < 9; ++i) steady.push_back(steady.back() * 1.01);
  CHECK_THROWS_AS(sharpe(steady), std::invalid_argument);
}

TEST_CASE("mdd closed forms") {
  // peak 120, trough 90: trough denom (120-90)/90, peak denom (120-90)/120
  std::vector<double> v{100, 120, 90, 110};
  CHECK(mdd_trough(v) == doctest::Approx(30.0 / 90.0));
  CHECK(mdd_peak(v) == doctest::Approx(30.0 / 120.0));

  CHECK(mdd_trough({100, 110, 121}) == 0.0);  // monotone rise
  CHECK(mdd_trough({100, 40}) == doctest::Approx(1.5));  // can exceed 1
  CHECK(mdd_peak({100, 40}) == doctest::Approx(0.6));
}

TEST_CASE("mdd matches the quadratic brute force on random curves") {
  pfm::Rng rng(99);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> v{100.0};
    for (int i = 0; i < 400; ++i) {
      v.push_back(v.back() * (1.0 + 0.04 * (rng.uniform() - 0.5)));
    }
    double brute_trough = 0.0, brute_peak = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        brute_trough = std::max(brute_trough, (v[i] - v[j]) / v[j]);
        brute_peak = std::max(brute_peak, (v[i] - v[j]) / v[i]);
      }
    }
    CHECK(mdd_trough(v) == brute_trough);
    CHECK(mdd_peak(v) == brute_peak);
  }
}

TEST_CASE("build_report marks zero-variance rows without dropping carr/mdd") {
  EquityCurve good;
  EquityCurve flat;
  for (int i = 0; i < 5; ++i) {
    good.dates.push_back("2020-01-0" + std::to_string(i + 1));
    flat.dates.push_back(good.dates.back());
    good.values.push_back(100.0 + 7.0 * (i % 2));
    flat.values.push_back(100.0);
  }
  auto report = build_report({{"good", good}, {"flat", flat}});
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].name == "good");
  CHECK(report.rows[0].error.empty());
  CHECK(report.rows[0].sr.has_value());
  CHECK(report.rows[1].name == "flat");
  CHECK(!report.rows[1].error.empty());
  CHECK(!report.rows[1].sr.has_value());
  CHECK(report.rows[1].carr.has_value());
  CHECK(report.rows[1].mdd.has_value());

  auto csv = report_to_csv(report);
  CHECK(csv.find("good") != std::string::npos);
  CHECK(csv.find("flat") != std::string::npos);
  auto text = report_to_text(report);
  CHECK(text.find("good") != std::string::npos);
}

TEST_CASE("curve csv round trip is exact") {
  EquityCurve curve;
  pfm::Rng rng(3);
  double v = 1e6;
  for (int i = 0; i < 50; ++i) {
    curve.dates.push_back(date_from_days(days_from_date("2010-01-04") + i));
    curve.values.push_back(v);
    v *= 1.0 + 0.01 * (rng.uniform() - 0.5);
  }
  auto back = curve_from_csv(curve_to_csv(curve));
  REQUIRE(back.values.size() == curve.values.size());
  CHECK(back.dates == curve.dates);
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    CHECK(back.values[i] == curve.values[i]);  // bit exact via %.17g
  }
}

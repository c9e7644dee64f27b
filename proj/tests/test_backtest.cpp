#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "factorlab/backtest.h"
#include "factorlab/common.h"

using namespace factorlab;
namespace fs = std::filesystem;

namespace {

std::vector<double> RandomReturns(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0005, 0.02);
  std::vector<double> r(n);
  for (double& v : r) {
    v = step(rng);
  }
  return r;
}

double BruteForceDrawdown(const std::vector<double>& curve) {
  double worst = 0.0;
  for (std::size_t peak = 0; peak < curve.size(); ++peak) {
    for (std::size_t trough = peak; trough < curve.size(); ++trough) {
      worst = std::min(worst, curve[trough] - curve[peak]);
    }
  }
  // A curve can also draw down from the flat starting point.
  for (double v : curve) {
    worst = std::min(worst, v);
  }
  return worst;
}

}  // namespace

TEST_CASE("always-long at zero cost is bit-identical to buy and hold") {
  const auto returns = RandomReturns(500, 3);
  const std::vector<int> predictions(returns.size(), 1);
  const BacktestReport report = RunStrategy(predictions, returns);
  const auto benchmark = BuyAndHold(returns);
  REQUIRE(report.strategy_curve.size() == benchmark.size());
  for (std::size_t t = 0; t < benchmark.size(); ++t) {
    // Exact double equality, including signed zeros.
    CHECK(std::memcmp(&report.strategy_curve[t], &benchmark[t],
                      sizeof(double)) == 0);
    CHECK(report.strategy_returns[t] == returns[t]);
  }
  CHECK(report.total_log_return == report.benchmark_log_return);
}

TEST_CASE("always-short mirrors the benchmark returns") {
  const auto returns = RandomReturns(200, 5);
  const std::vector<int> predictions(returns.size(), 0);
  const BacktestReport report = RunStrategy(predictions, returns);
  for (std::size_t t = 0; t < returns.size(); ++t) {
    CHECK(report.position[t] == -1);
    CHECK(report.strategy_returns[t] == -returns[t]);
  }
}

TEST_CASE("perfect foresight earns the absolute returns") {
  const auto returns = RandomReturns(400, 7);
  std::vector<int> predictions(returns.size());
  for (std::size_t t = 0; t < returns.size(); ++t) {
    predictions[t] = returns[t] > 0.0 ? 1 : 0;
  }
  const BacktestReport report = RunStrategy(predictions, returns);
  double cumulative = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    CHECK(report.strategy_returns[t] ==
          doctest::Approx(std::fabs(returns[t])).epsilon(1e-12));
    cumulative += std::fabs(returns[t]);
  }
  CHECK(report.total_log_return == doctest::Approx(cumulative).epsilon(1e-12));
  CHECK(report.max_drawdown == doctest::Approx(0.0));
}

TEST_CASE("hand-worked two-day example") {
  const std::vector<double> returns = {0.1, -0.1};
  const BacktestReport report = RunStrategy({1, 1}, returns);
  CHECK(report.strategy_curve[0] == doctest::Approx(0.1));
  CHECK(report.strategy_curve[1] == doctest::Approx(0.0));
  CHECK(report.max_drawdown == doctest::Approx(-0.1));

  // Long then short captures both moves.
  const BacktestReport flip = RunStrategy({1, 0}, returns);
  CHECK(flip.strategy_curve[1] == doctest::Approx(0.2));
}

TEST_CASE("exponentiating the curve recovers the price ratio") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> step(0.0, 0.01);
  std::vector<double> prices = {100.0};
  for (int i = 0; i < 250; ++i) {
    prices.push_back(prices.back() * std::exp(step(rng)));
  }
  std::vector<double> returns;
  for (std::size_t t = 1; t < prices.size(); ++t) {
    returns.push_back(std::log(prices[t] / prices[t - 1]));
  }
  const auto curve = BuyAndHold(returns);
  CHECK(std::exp(curve.back()) ==
        doctest::Approx(prices.back() / prices.front()).epsilon(1e-9));
}

TEST_CASE("transaction costs are charged per side on position changes") {
  const std::vector<double> returns = {0.01, 0.01, 0.01, 0.01};
  // Positions: +1, -1, -1, +1 -> entry at t=0 is free (no previous
  // position change is modeled as starting flat: one side to enter).
  const BacktestReport costless = RunStrategy({1, 0, 0, 1}, returns);
  const BacktestReport costed = RunStrategy({1, 0, 0, 1}, returns, 10.0);
  const double per_side = 10.0 / 10000.0;
  // Entering at t=0 costs one side; each flip costs two sides.
  const double expected_total_cost = per_side * (1 + 2 + 0 + 2);
  double diff = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    diff += costless.strategy_returns[t] - costed.strategy_returns[t];
  }
  CHECK(diff == doctest::Approx(expected_total_cost).epsilon(1e-12));
  // Costs only ever reduce the curve.
  for (std::size_t t = 0; t < returns.size(); ++t) {
    CHECK(costed.strategy_curve[t] <= costless.strategy_curve[t] + 1e-15);
  }
}

TEST_CASE("max drawdown matches the brute-force pairwise scan") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto returns = RandomReturns(300, 100 + seed);
    const auto curve = BuyAndHold(returns);
    CHECK(MaxDrawdown(curve) ==
          doctest::Approx(BruteForceDrawdown(curve)).epsilon(1e-12));
    CHECK(MaxDrawdown(curve) <= 0.0);
  }
  CHECK(MaxDrawdown({1.0, 2.0, 3.0}) == doctest::Approx(0.0));
  CHECK(MaxDrawdown({0.5, -0.25, 0.1}) == doctest::Approx(-0.75));
}

TEST_CASE("single-factor backtest follows the oriented median rule") {
  // Factor equals the forward return itself: positive IC, positions should
  // capture the sign of each move on the evaluation window.
  const auto returns = RandomReturns(300, 13);
  const std::vector<double> factor = returns;
  const std::size_t train_end = 200;
  const BacktestReport report =
      SingleFactorBacktest(factor, returns, train_end);
  CHECK(report.position.size() == returns.size() - train_end);
  // Strategy on the evaluation window should comfortably beat the benchmark.
  CHECK(report.total_log_return > report.benchmark_log_return);

  // Flipping the factor sign flips the estimated IC and leaves the
  // positions unchanged (anti-monotone factor, negative orientation).
  std::vector<double> flipped = factor;
  for (double& v : flipped) {
    v = -v;
  }
  const BacktestReport mirrored =
      SingleFactorBacktest(flipped, returns, train_end);
  for (std::size_t t = 0; t < report.position.size(); ++t) {
    CHECK(mirrored.position[t] == report.position[t]);
  }

  CHECK_THROWS_AS(SingleFactorBacktest(factor, returns, 2), ConfigError);
  CHECK_THROWS_AS(SingleFactorBacktest(factor, returns, returns.size()),
                  ConfigError);
  // A constant factor has no defined rank correlation.
  CHECK_THROWS_AS(SingleFactorBacktest(
                      std::vector<double>(returns.size(), 1.0), returns, 200),
                  DataError);
}

TEST_CASE("length mismatches are rejected") {
  CHECK_THROWS_AS(RunStrategy({1, 0}, {0.1}), DataError);
  CHECK_THROWS_AS(RunStrategy({}, {}), DataError);
}

TEST_CASE("report file layout") {
  const auto returns = RandomReturns(5, 17);
  BacktestReport report = RunStrategy({1, 0, 1, 1, 0}, returns);
  for (std::size_t t = 0; t < 5; ++t) {
    report.dates.push_back(static_cast<Date>(19500 + t));
  }
  const std::string path =
      (fs::temp_directory_path() / "factorlab_equity.csv").string();
  WriteBacktestReport(report, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "date,position,strategy_return,strategy_curve,benchmark_curve");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    rows += line.empty() ? 0 : 1;
  }
  CHECK(rows == 5);
  std::remove(path.c_str());
}

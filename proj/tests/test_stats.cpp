#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "factorlab/stats.h"

using namespace factorlab;

namespace {

// Reference Pearson written independently of the library implementation.
double OraclePearson(const std::vector<double>& x,
                     const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// O(n^2) rank with average ties.
std::vector<double> OracleRanks(const std::vector<double>& values) {
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double below = 0.0;
    double equal = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (values[j] < values[i]) {
        below += 1.0;
      } else if (values[j] == values[i]) {
        equal += 1.0;
      }
    }
    ranks[i] = below + (equal + 1.0) / 2.0;
  }
  return ranks;
}

}  // namespace

TEST_CASE("mean and stdev basics") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(Mean(v) == doctest::Approx(2.5));
  CHECK(Stdev(v, 0) == doctest::Approx(std::sqrt(1.25)));
  CHECK(Stdev(v, 1) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("rank average ties matches counting oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dist(0, 9);  // force ties
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> values(40);
    for (double& v : values) {
      v = dist(rng);
    }
    const auto fast = RankAverageTies(values);
    const auto slow = OracleRanks(values);
    for (std::size_t i = 0; i < values.size(); ++i) {
      CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("explicit tie ranks") {
  const std::vector<double> values = {3.0, 1.0, 3.0, 2.0};
  const auto ranks = RankAverageTies(values);
  CHECK(ranks[0] == doctest::Approx(3.5));
  CHECK(ranks[1] == doctest::Approx(1.0));
  CHECK(ranks[2] == doctest::Approx(3.5));
  CHECK(ranks[3] == doctest::Approx(2.0));
}

TEST_CASE("pearson matches oracle and handles degenerate input") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(30);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = dist(rng);
      y[i] = dist(rng);
    }
    const auto r = PearsonCorrelation(x, y);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(OraclePearson(x, y)).epsilon(1e-12));
  }
  CHECK_FALSE(PearsonCorrelation({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}).has_value());
  CHECK(*PearsonCorrelation({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}) ==
        doctest::Approx(1.0));
}

TEST_CASE("spearman equals rank-then-pearson on 1000 random pairs") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> len_dist(3, 200);
  std::uniform_int_distribution<int> value_dist(-20, 20);  // plenty of ties
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = len_dist(rng);
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = value_dist(rng);
      y[i] = value_dist(rng) + 0.5 * x[i];
    }
    const auto spearman = SpearmanCorrelation(x, y);
    const auto rx = OracleRanks(x);
    const auto ry = OracleRanks(y);
    const bool cx = std::all_of(rx.begin(), rx.end(),
                                [&](double v) { return v == rx[0]; });
    const bool cy = std::all_of(ry.begin(), ry.end(),
                                [&](double v) { return v == ry[0]; });
    if (cx || cy) {
      CHECK_FALSE(spearman.has_value());
      continue;
    }
    REQUIRE(spearman.has_value());
    CHECK(*spearman ==
          doctest::Approx(OraclePearson(rx, ry)).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("spearman is invariant under monotone transforms") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  std::vector<double> x(80);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = dist(rng);
    y[i] = dist(rng) + x[i];
  }
  std::vector<double> tx = x;
  for (double& v : tx) {
    v = std::exp(3.0 * v) + 7.0;  // strictly increasing
  }
  CHECK(*SpearmanCorrelation(tx, y) ==
        doctest::Approx(*SpearmanCorrelation(x, y)).epsilon(1e-12));
}

TEST_CASE("pairwise-complete pearson skips missing rows") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> x = {1.0, nan, 2.0, 3.0, 4.0};
  const std::vector<double> y = {2.0, 5.0, 4.0, nan, 8.0};
  const auto r = PearsonPairwiseComplete(x, y);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(OraclePearson({1.0, 2.0, 4.0}, {2.0, 4.0, 8.0}))
                  .epsilon(1e-12));
}

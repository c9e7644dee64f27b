#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "factorlab/common.h"
#include "factorlab/gpalpha.h"
#include "factorlab/stats.h"

using namespace factorlab;

namespace {

FeatureTable NoiseTable(std::size_t rows, std::size_t extra_columns,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  FeatureTable table;
  for (std::size_t r = 0; r < rows; ++r) {
    table.dates.push_back(static_cast<Date>(18000 + r));
  }
  auto column = [&] {
    std::vector<double> values(rows);
    for (double& v : values) {
      v = dist(rng);
    }
    return values;
  };
  table.AddColumn("roc_5", column());
  table.AddColumn("roc_30", column());
  for (std::size_t c = 0; c < extra_columns; ++c) {
    table.AddColumn("noise_" + std::to_string(c + 1), column());
  }
  return table;
}

// Forward returns that follow roc_5 with mild noise (planted signal).
std::vector<double> PlantedReturns(const FeatureTable& table,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  const auto& signal = table.Column("roc_5");
  std::vector<double> out(signal.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = signal[t] + noise(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("ts_argmin convention: offset from the oldest window entry") {
  FeatureTable table;
  table.dates = {1, 2, 3, 4};
  table.AddColumn("x", {3.0, 1.0, 2.0, 0.0});
  const AlphaExpr expr = ParseExpr("ts_argmin(x, 3)");
  const auto values = EvalExpr(expr, table);
  CHECK(IsMissing(values[0]));
  CHECK(IsMissing(values[1]));
  CHECK(values[2] == doctest::Approx(1.0));  // window [3,1,2], min at offset 1
  CHECK(values[3] == doctest::Approx(2.0));  // window [1,2,0], min at offset 2
}

TEST_CASE("windowed primitives match a brute-force scan") {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> dist(0, 6);  // ties likely
  FeatureTable table;
  std::vector<double> x(120);
  for (std::size_t i = 0; i < x.size(); ++i) {
    table.dates.push_back(static_cast<Date>(i));
    x[i] = dist(rng);
  }
  table.AddColumn("x", x);
  const int w = 7;
  const auto arg_min = EvalExpr(ParseExpr("ts_argmin(x, 7)"), table);
  const auto arg_max = EvalExpr(ParseExpr("ts_argmax(x, 7)"), table);
  const auto ts_sum = EvalExpr(ParseExpr("ts_sum(x, 7)"), table);
  const auto ts_min = EvalExpr(ParseExpr("ts_min(x, 7)"), table);
  const auto delta = EvalExpr(ParseExpr("delta(x, 7)"), table);
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (t + 1 < w) {
      CHECK(IsMissing(arg_min[t]));
      continue;
    }
    const std::size_t begin = t + 1 - w;
    double best_min = x[begin];
    double best_max = x[begin];
    std::size_t min_offset = 0;
    std::size_t max_offset = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < w; ++k) {
      sum += x[begin + k];
      if (x[begin + k] < best_min) {
        best_min = x[begin + k];
        min_offset = k;
      }
      if (x[begin + k] > best_max) {
        best_max = x[begin + k];
        max_offset = k;
      }
    }
    CHECK(arg_min[t] == doctest::Approx(min_offset));
    CHECK(arg_max[t] == doctest::Approx(max_offset));
    CHECK(ts_sum[t] == doctest::Approx(sum).epsilon(1e-12));
    CHECK(ts_min[t] == doctest::Approx(best_min));
    // delta(w) is x_t - x_{t-w}, one bar beyond the ts_* window.
    if (t >= static_cast<std::size_t>(w)) {
      CHECK(delta[t] == doctest::Approx(x[t] - x[t - w]));
    } else {
      CHECK(IsMissing(delta[t]));
    }
  }
}

TEST_CASE("protected division and unary conventions") {
  FeatureTable table;
  table.dates = {1, 2, 3};
  table.AddColumn("x", {4.0, -9.0, 16.0});
  table.AddColumn("zero", {0.0, 0.0, 0.0});
  const auto div = EvalExpr(ParseExpr("gp_div(x, zero)"), table);
  for (double v : div) {
    CHECK(v == doctest::Approx(1.0));
  }
  const auto root = EvalExpr(ParseExpr("gp_sqrt(x)"), table);
  CHECK(root[1] == doctest::Approx(3.0));  // sqrt of |x|
  const auto scaled = EvalExpr(ParseExpr("gp_scale(x)"), table);
  CHECK(Mean(scaled) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(Stdev(scaled, 0) == doctest::Approx(1.0).epsilon(1e-12));
  const auto ranked = EvalExpr(ParseExpr("gp_rank(x)"), table);
  CHECK(ranked[1] == doctest::Approx(0.0));
  CHECK(ranked[2] == doctest::Approx(1.0));
}

TEST_CASE("product expression equals the column product") {
  FeatureTable table = NoiseTable(50, 0, 2);
  const auto values = EvalExpr(ParseExpr("gp_mul(roc_30, roc_5)"), table);
  const auto& a = table.Column("roc_30");
  const auto& b = table.Column("roc_5");
  for (std::size_t t = 0; t < values.size(); ++t) {
    CHECK(values[t] == doctest::Approx(a[t] * b[t]).epsilon(1e-12));
  }
}

TEST_CASE("unknown column and oversized window errors") {
  FeatureTable table = NoiseTable(10, 0, 3);
  CHECK_THROWS_AS(EvalExpr(ParseExpr("gp_abs(missing_col)"), table),
                  DataError);
  CHECK_THROWS_AS(EvalExpr(ParseExpr("ts_sum(roc_5, 50)"), table), DataError);
}

TEST_CASE("spearman ic basics") {
  const std::vector<double> returns = {0.01, 0.02, 0.03, 0.04, 0.05};
  CHECK(SpearmanIc(returns, returns).ic == doctest::Approx(1.0));
  std::vector<double> negated = returns;
  for (double& v : negated) {
    v = -v;
  }
  CHECK(SpearmanIc(negated, returns).ic == doctest::Approx(-1.0));
  CHECK(SpearmanIc({1.0, 2.0, 3.0, 5.0, 4.0},
                   {1.0, 2.0, 3.0, 4.0, 5.0}).ic == doctest::Approx(0.9));
  const IcResult constant = SpearmanIc({1.0, 1.0, 1.0, 1.0, 1.0}, returns);
  CHECK_FALSE(constant.defined);
}

TEST_CASE("init population is half grow half full, bounded and deterministic") {
  GpConfig config;
  config.population_size = 10;
  config.max_depth = 3;
  config.rng_seed = 99;
  const std::vector<std::string> terminals = {"roc_5", "roc_30", "noise_1"};
  const auto pop1 = InitPopulation(config, terminals);
  const auto pop2 = InitPopulation(config, terminals);
  REQUIRE(pop1.size() == 10);
  for (std::size_t i = 0; i < pop1.size(); ++i) {
    CHECK(pop1[i].expr.Depth() <= config.max_depth);
    CHECK(FormatExpr(pop1[i].expr) == FormatExpr(pop2[i].expr));
    // Round trip through text.
    const AlphaExpr reparsed = ParseExpr(FormatExpr(pop1[i].expr), config);
    CHECK(FormatExpr(reparsed) == FormatExpr(pop1[i].expr));
  }
}

TEST_CASE("best fitness is non-decreasing across generations with elitism") {
  FeatureTable table = NoiseTable(200, 4, 5);
  const auto returns = PlantedReturns(table, 17);
  GpConfig config;
  config.population_size = 60;
  config.tournament_size = 8;
  config.elite_keep = 6;
  config.max_depth = 4;
  config.rng_seed = 7;
  auto population = InitPopulation(config, table.names);
  EvaluatePopulation(&population, table, returns);
  double best = 0.0;
  for (const auto& ind : population) {
    best = std::max(best, ind.fitness);
  }
  for (std::size_t g = 1; g <= 4; ++g) {
    population = EvolveGeneration(population, config, table.names, table,
                                  returns, g);
    double next_best = 0.0;
    for (const auto& ind : population) {
      CHECK(ind.expr.Depth() <= config.max_depth);
      next_best = std::max(next_best, ind.fitness);
    }
    CHECK(next_best >= best - 1e-12);
    best = next_best;
  }
}

TEST_CASE("dedup keeps one of a duplicate pair and respects the cap") {
  FeatureTable table = NoiseTable(100, 2, 11);
  const auto returns = PlantedReturns(table, 11);
  GpConfig config;
  std::vector<Individual> population(3);
  population[0].expr = ParseExpr("roc_5");
  population[1].expr = ParseExpr("gp_add(roc_5, roc_5)");  // corr 1 with [0]
  population[2].expr = ParseExpr("noise_1");
  EvaluatePopulation(&population, table, returns);
  const auto pool = DedupPool(population, config);
  REQUIRE(pool.size() == 2);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      const auto corr = PearsonPairwiseComplete(pool[i].values, pool[j].values);
      REQUIRE(corr.has_value());
      CHECK(std::fabs(*corr) <= config.dedup_corr_threshold + 1e-12);
    }
  }

  config.pool_cap = 1;
  const auto capped = DedupPool(population, config);
  REQUIRE(capped.size() == 1);
  double best = 0.0;
  for (const auto& ind : population) {
    best = std::max(best, ind.fitness);
  }
  CHECK(capped[0].fitness == doctest::Approx(best));
}

TEST_CASE("mining recovers a planted signal and is thread-invariant") {
  FeatureTable table = NoiseTable(250, 6, 21);
  const auto returns = PlantedReturns(table, 21);
  GpConfig config;
  config.population_size = 150;
  config.tournament_size = 20;
  config.generations = 3;
  config.elite_keep = 10;
  config.max_depth = 4;
  config.rng_seed = 4;

  SetMaxThreads(1);
  const MiningResult serial = Mine(table, returns, config);
  SetMaxThreads(4);
  const MiningResult parallel = Mine(table, returns, config);
  SetMaxThreads(0);

  REQUIRE_FALSE(serial.pool.empty());
  CHECK(serial.pool.front().fitness >= 0.8);
  REQUIRE(serial.pool.size() == parallel.pool.size());
  for (std::size_t i = 0; i < serial.pool.size(); ++i) {
    CHECK(FormatExpr(serial.pool[i].expr) ==
          FormatExpr(parallel.pool[i].expr));
  }
  // Pool contract: pairwise decorrelation and the cap.
  CHECK(serial.pool.size() <= config.pool_cap);
  for (std::size_t i = 0; i < serial.pool.size(); ++i) {
    for (std::size_t j = i + 1; j < serial.pool.size(); ++j) {
      const auto corr = PearsonPairwiseComplete(serial.pool[i].values,
                                                serial.pool[j].values);
      if (corr.has_value()) {
        CHECK(std::fabs(*corr) <= config.dedup_corr_threshold + 1e-9);
      }
    }
  }
}

TEST_CASE("parser round trip and errors") {
  const std::string canonical =
      "gp_sub(ts_argmin(CumLgReturn_40d, 40), gp_mul(roc_30, roc_5))";
  GpConfig config;
  CHECK(FormatExpr(ParseExpr(canonical, config)) == canonical);

  // Paper-style spelling without an explicit window parses with the default.
  const AlphaExpr bare = ParseExpr("ts_argmin(CumLgReturn_40d)", config);
  CHECK(FormatExpr(bare) ==
        "ts_argmin(CumLgReturn_40d, " +
            std::to_string(config.default_parse_window) + ")");

  CHECK_THROWS_AS(ParseExpr("gp_mul(roc_30", config), FormatError);
  CHECK_THROWS_AS(ParseExpr("gp_frob(roc_30, roc_5)", config), FormatError);
  try {
    ParseExpr("gp_mul(roc_30", config);
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("fitness is invariant under strictly increasing transforms") {
  FeatureTable table = NoiseTable(150, 1, 31);
  const auto returns = PlantedReturns(table, 31);
  const auto raw = EvalExpr(ParseExpr("roc_5"), table);
  std::vector<double> transformed = raw;
  for (double& v : transformed) {
    v = std::exp(2.0 * v) + 3.0;
  }
  const IcResult a = SpearmanIc(raw, returns);
  const IcResult b = SpearmanIc(transformed, returns);
  REQUIRE(a.defined);
  REQUIRE(b.defined);
  CHECK(a.ic == doctest::Approx(b.ic).epsilon(1e-12));
}

#include "factorlab/backtest.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "factorlab/common.h"
#include "factorlab/csv.h"
#include "factorlab/stats.h"

namespace factorlab {

namespace {

std::vector<double> CumulativeSum(const std::vector<double>& values) {
  std::vector<double> curve(values.size());
  double running = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    running += values[t];
    curve[t] = running;
  }
  return curve;
}

BacktestReport BuildReport(std::vector<int> position,
                           const std::vector<double>& log_returns,
                           double cost_bps) {
  const double cost_per_side = cost_bps / 10000.0;
  BacktestReport report;
  report.position = std::move(position);
  report.strategy_returns.resize(log_returns.size());
  int previous = 0;  // flat before the first bar; entering costs one side
  for (std::size_t t = 0; t < log_returns.size(); ++t) {
    const int sides = std::abs(report.position[t] - previous);
    report.strategy_returns[t] =
        report.position[t] * log_returns[t] - sides * cost_per_side;
    previous = report.position[t];
  }
  report.strategy_curve = CumulativeSum(report.strategy_returns);
  report.benchmark_curve = BuyAndHold(log_returns);
  report.total_log_return =
      report.strategy_curve.empty() ? 0.0 : report.strategy_curve.back();
  report.benchmark_log_return =
      report.benchmark_curve.empty() ? 0.0 : report.benchmark_curve.back();
  report.max_drawdown = MaxDrawdown(report.strategy_curve);
  return report;
}

}  // namespace

std::vector<double> BuyAndHold(const std::vector<double>& log_returns) {
  if (log_returns.empty()) {
    throw DataError("buy-and-hold needs a non-empty return series");
  }
  return CumulativeSum(log_returns);
}

BacktestReport RunStrategy(const std::vector<int>& predictions,
                           const std::vector<double>& log_returns,
                           double cost_bps) {
  if (predictions.size() != log_returns.size()) {
    throw DataError("backtest: predictions and returns differ in length");
  }
  if (predictions.empty()) {
    throw DataError("backtest: empty inputs");
  }
  if (cost_bps < 0.0) {
    throw ConfigError("cost_bps must be >= 0");
  }
  std::vector<int> position(predictions.size());
  for (std::size_t t = 0; t < predictions.size(); ++t) {
    position[t] = predictions[t] == 1 ? 1 : -1;
  }
  if (cost_bps == 0.0) {
    // Zero-cost fast path keeps the all-long curve bit-identical to the
    // benchmark: +1 * r and r - 0 share no rounding.
    BacktestReport report;
    report.position = std::move(position);
    report.strategy_returns.resize(log_returns.size());
    for (std::size_t t = 0; t < log_returns.size(); ++t) {
      report.strategy_returns[t] = report.position[t] == 1
                                       ? log_returns[t]
                                       : -log_returns[t];
    }
    report.strategy_curve = CumulativeSum(report.strategy_returns);
    report.benchmark_curve = BuyAndHold(log_returns);
    report.total_log_return = report.strategy_curve.back();
    report.benchmark_log_return = report.benchmark_curve.back();
    report.max_drawdown = MaxDrawdown(report.strategy_curve);
    return report;
  }
  return BuildReport(std::move(position), log_returns, cost_bps);
}

BacktestReport SingleFactorBacktest(const std::vector<double>& factor,
                                    const std::vector<double>& log_returns,
                                    std::size_t train_end) {
  if (factor.size() != log_returns.size()) {
    throw DataError("backtest: factor and returns differ in length");
  }
  if (train_end < 3 || train_end >= factor.size()) {
    throw ConfigError("single-factor backtest needs 3 <= train_end < n");
  }
  std::vector<double> train_factor(factor.begin(),
                                   factor.begin() + train_end);
  const std::vector<double> train_returns(log_returns.begin(),
                                          log_returns.begin() + train_end);
  const auto ic = SpearmanCorrelation(train_factor, train_returns);
  if (!ic.has_value() || *ic == 0.0) {
    throw DataError("undefined signal: factor has no training-window IC");
  }
  const int ic_sign = *ic > 0.0 ? 1 : -1;

  std::vector<double> sorted = train_factor;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.size() % 2 == 1
                            ? sorted[sorted.size() / 2]
                            : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                     sorted[sorted.size() / 2]);

  const std::size_t n_eval = factor.size() - train_end;
  std::vector<int> position(n_eval);
  int previous = 1;
  for (std::size_t i = 0; i < n_eval; ++i) {
    const double value = factor[train_end + i];
    if (IsMissing(value)) {
      throw DataError("single-factor backtest: factor undefined on "
                      "evaluation window");
    }
    if (value > median) {
      previous = ic_sign;
    } else if (value < median) {
      previous = -ic_sign;
    }
    position[i] = previous;
  }
  const std::vector<double> eval_returns(log_returns.begin() + train_end,
                                         log_returns.end());
  return BuildReport(std::move(position), eval_returns, 0.0);
}

double MaxDrawdown(const std::vector<double>& curve) {
  double peak = 0.0;  // curves start from an implicit 0 before the first bar
  double worst = 0.0;
  for (double value : curve) {
    peak = std::max(peak, value);
    worst = std::min(worst, value - peak);
  }
  return worst;
}

void WriteBacktestReport(const BacktestReport& report,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("cannot write backtest report: " + path);
  }
  out << "date,position,strategy_return,strategy_curve,benchmark_curve\n";
  for (std::size_t t = 0; t < report.position.size(); ++t) {
    if (t < report.dates.size()) {
      out << FormatDate(report.dates[t]);
    }
    out << ',' << report.position[t] << ','
        << FormatCell(report.strategy_returns[t]) << ','
        << FormatCell(report.strategy_curve[t]) << ','
        << FormatCell(report.benchmark_curve[t]) << '\n';
  }
}

}  // namespace factorlab

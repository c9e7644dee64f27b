#ifndef FACTORLAB_BACKTEST_H_
#define FACTORLAB_BACKTEST_H_

#include <string>
#include <vector>

#include "factorlab/dates.h"

namespace factorlab {

struct BacktestReport {
  std::vector<Date> dates;       // optional; filled by the pipeline
  std::vector<int> position;     // +1 long, -1 short, per day
  std::vector<double> strategy_returns;
  std::vector<double> strategy_curve;   // cumulative log returns
  std::vector<double> benchmark_curve;  // buy-and-hold cumulative curve
  double total_log_return = 0.0;
  double benchmark_log_return = 0.0;
  double max_drawdown = 0.0;  // <= 0, on the strategy curve
};

// Cumulative sum of log returns.
std::vector<double> BuyAndHold(const std::vector<double>& log_returns);

// position[t] = +1 if prediction[t] == 1 else -1, earning the return
// t -> t+1; cost_bps is charged per side on every position change.
BacktestReport RunStrategy(const std::vector<int>& predictions,
                           const std::vector<double>& log_returns,
                           double cost_bps = 0.0);

// Long/short on the factor's distance from its training-window median,
// oriented by the sign of the training-window IC; exact ties hold the
// previous position (initially long).
BacktestReport SingleFactorBacktest(const std::vector<double>& factor,
                                    const std::vector<double>& log_returns,
                                    std::size_t train_end);

// Most negative peak-to-trough difference on a cumulative curve.
double MaxDrawdown(const std::vector<double>& curve);

void WriteBacktestReport(const BacktestReport& report, const std::string& path);

}  // namespace factorlab

#endif  // FACTORLAB_BACKTEST_H_

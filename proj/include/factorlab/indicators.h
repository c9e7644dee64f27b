#ifndef FACTORLAB_INDICATORS_H_
#define FACTORLAB_INDICATORS_H_

#include <string>
#include <vector>

#include "factorlab/dataio.h"
#include "factorlab/table.h"

namespace factorlab {

enum class IndicatorKind {
  kMovingAverage,
  kKama,
  kMacd,
  kMacdSignal,
  kOpenClose,
  kHighLow,
  kGap,
  kCumLogReturn,
  kKdjK,
  kKdjD,
  kKdjJ,
  kRsi,
  kBollUpper,
  kBollMid,
  kBollLower,
  kCci,
  kRoc,
  kRocp,
  kMom,
  kAtr,
  kWillr,
};

struct IndicatorParams {
  int window = 14;
  // KAMA smoothing bounds and MACD periods.
  int fast = 2;
  int slow = 30;
  int signal = 9;
  double multiplier = 2.0;  // Bollinger band width
};

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

// Windows per indicator family. Defaults cover every window that shows up
// in the evolved-alpha terminals.
struct IndicatorConfig {
  std::vector<int> ma_windows = {5, 10, 20, 30, 60, 120};
  std::vector<int> roc_windows = {1, 5, 10, 20, 30};
  std::vector<int> rocp_windows = {1, 5, 10, 20, 30};
  std::vector<int> mom_windows = {1, 5, 10, 20, 30};
  std::vector<int> cum_log_return_windows = {3, 5, 10, 20, 40, 60, 110, 140};
  int kama_window = 10;
  int kama_fast = 2;
  int kama_slow = 30;
  int macd_fast = 12;
  int macd_slow = 26;
  int macd_signal = 9;
  int kdj_window = 9;
  int kdj_smooth = 3;
  int rsi_window = 14;
  int boll_window = 20;
  double boll_multiplier = 2.0;
  int cci_window = 14;
  int atr_window = 14;
  int willr_window = 14;
};

// Warm-up rows are NaN. Throws ConfigError for bad params, DataError when
// the series is too short for a single defined value.
NamedColumn ComputeIndicator(const OhlcvSeries& series, IndicatorKind kind,
                             const IndicatorParams& params = {});

// One column per (kind, window) in the config; names are deterministic
// (`moving_avg_20`, `roc_5`, `CumLgReturn_40d`, ...).
FeatureTable BuildBaseFeatures(const OhlcvSeries& series,
                               const IndicatorConfig& config = {});

}  // namespace factorlab

#endif  // FACTORLAB_INDICATORS_H_

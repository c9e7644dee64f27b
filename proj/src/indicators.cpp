#include "factorlab/indicators.h"

#include <algorithm>
#include <cmath>

#include "factorlab/common.h"

namespace factorlab {

namespace {

void RequireWindow(int window) {
  if (window < 1) {
    throw ConfigError("indicator window must be >= 1");
  }
}

void RequireDefined(const std::vector<double>& values,
                    const std::string& name) {
  for (double v : values) {
    if (!IsMissing(v)) {
      return;
    }
  }
  throw DataError("indicator " + name + ": window exceeds series length");
}

std::vector<double> Sma(const std::vector<double>& x, int window) {
  const std::size_t n = x.size();
  std::vector<double> out(n, NaN());
  if (n < static_cast<std::size_t>(window)) {
    return out;
  }
  // Skip leading NaNs of the input (chained indicators).
  std::size_t start = 0;
  while (start < n && IsMissing(x[start])) {
    ++start;
  }
  double sum = 0.0;
  for (std::size_t t = start; t < n; ++t) {
    sum += x[t];
    if (t >= start + window) {
      sum -= x[t - window];
    }
    if (t + 1 >= start + window) {
      out[t] = sum / window;
    }
  }
  return out;
}

std::vector<double> Ema(const std::vector<double>& x, int window) {
  const std::size_t n = x.size();
  std::vector<double> out(n, NaN());
  std::size_t start = 0;
  while (start < n && IsMissing(x[start])) {
    ++start;
  }
  if (n - start < static_cast<std::size_t>(window)) {
    return out;
  }
  // Seeded with the simple mean of the first `window` values.
  double seed = 0.0;
  for (std::size_t t = start; t < start + window; ++t) {
    seed += x[t];
  }
  double ema = seed / window;
  out[start + window - 1] = ema;
  const double alpha = 2.0 / (window + 1.0);
  for (std::size_t t = start + window; t < n; ++t) {
    ema = alpha * x[t] + (1.0 - alpha) * ema;
    out[t] = ema;
  }
  return out;
}

std::vector<double> RollingExtreme(const std::vector<double>& x, int window,
                                   bool max) {
  const std::size_t n = x.size();
  std::vector<double> out(n, NaN());
  for (std::size_t t = 0; t < n; ++t) {
    if (t + 1 < static_cast<std::size_t>(window)) {
      continue;
    }
    double best = x[t];
    for (std::size_t i = t + 1 - window; i < t; ++i) {
      best = max ? std::max(best, x[i]) : std::min(best, x[i]);
    }
    out[t] = best;
  }
  return out;
}

std::vector<double> Kama(const std::vector<double>& close, int window,
                         int fast, int slow) {
  const std::size_t n = close.size();
  std::vector<double> out(n, NaN());
  if (n <= static_cast<std::size_t>(window)) {
    return out;
  }
  const double fast_sc = 2.0 / (fast + 1.0);
  const double slow_sc = 2.0 / (slow + 1.0);
  double kama = close[window - 1];
  for (std::size_t t = window; t < n; ++t) {
    double noise = 0.0;
    for (std::size_t i = t + 1 - window; i <= t; ++i) {
      noise += std::fabs(close[i] - close[i - 1]);
    }
    const double signal = std::fabs(close[t] - close[t - window]);
    const double er = noise > 0.0 ? signal / noise : 0.0;
    const double sc = std::pow(er * (fast_sc - slow_sc) + slow_sc, 2.0);
    kama = kama + sc * (close[t] - kama);
    out[t] = kama;
  }
  return out;
}

std::vector<double> RawStochastic(const OhlcvSeries& s, int window) {
  const std::size_t n = s.Size();
  std::vector<double> out(n, NaN());
  const auto hh = RollingExtreme(s.high, window, true);
  const auto ll = RollingExtreme(s.low, window, false);
  for (std::size_t t = 0; t < n; ++t) {
    if (IsMissing(hh[t])) {
      continue;
    }
    const double range = hh[t] - ll[t];
    out[t] = range > 0.0 ? 100.0 * (s.close[t] - ll[t]) / range : 50.0;
  }
  return out;
}

// Wilder smoothing, neutral 50 on a zero-variance window.
std::vector<double> Rsi(const std::vector<double>& close, int window) {
  const std::size_t n = close.size();
  std::vector<double> out(n, NaN());
  if (n <= static_cast<std::size_t>(window)) {
    return out;
  }
  double avg_gain = 0.0;
  double avg_loss = 0.0;
  for (int t = 1; t <= window; ++t) {
    const double change = close[t] - close[t - 1];
    avg_gain += std::max(change, 0.0);
    avg_loss += std::max(-change, 0.0);
  }
  avg_gain /= window;
  avg_loss /= window;
  auto rsi_value = [](double gain, double loss) {
    const double total = gain + loss;
    return total > 0.0 ? 100.0 * gain / total : 50.0;
  };
  out[window] = rsi_value(avg_gain, avg_loss);
  for (std::size_t t = window + 1; t < n; ++t) {
    const double change = close[t] - close[t - 1];
    avg_gain = (avg_gain * (window - 1) + std::max(change, 0.0)) / window;
    avg_loss = (avg_loss * (window - 1) + std::max(-change, 0.0)) / window;
    out[t] = rsi_value(avg_gain, avg_loss);
  }
  return out;
}

std::vector<double> TrueRange(const OhlcvSeries& s) {
  const std::size_t n = s.Size();
  std::vector<double> tr(n, NaN());
  for (std::size_t t = 0; t < n; ++t) {
    if (t == 0) {
      tr[t] = s.high[t] - s.low[t];
      continue;
    }
    tr[t] = std::max({s.high[t] - s.low[t], std::fabs(s.high[t] - s.close[t - 1]),
                      std::fabs(s.low[t] - s.close[t - 1])});
  }
  return tr;
}

std::vector<double> Atr(const OhlcvSeries& s, int window) {
  const auto tr = TrueRange(s);
  const std::size_t n = tr.size();
  std::vector<double> out(n, NaN());
  if (n == 0) {
    return out;
  }
  // Wilder recursion seeded with the first true range (= high - low).
  double atr = tr[0];
  out[0] = atr;
  for (std::size_t t = 1; t < n; ++t) {
    atr = (atr * (window - 1) + tr[t]) / window;
    out[t] = atr;
  }
  return out;
}

std::vector<double> RollingStdev(const std::vector<double>& x, int window) {
  const std::size_t n = x.size();
  std::vector<double> out(n, NaN());
  for (std::size_t t = 0; t < n; ++t) {
    if (t + 1 < static_cast<std::size_t>(window)) {
      continue;
    }
    double mean = 0.0;
    for (std::size_t i = t + 1 - window; i <= t; ++i) {
      mean += x[i];
    }
    mean /= window;
    double ss = 0.0;
    for (std::size_t i = t + 1 - window; i <= t; ++i) {
      const double c = x[i] - mean;
      ss += c * c;
    }
    out[t] = std::sqrt(ss / window);
  }
  return out;
}

std::vector<double> Cci(const OhlcvSeries& s, int window) {
  const std::size_t n = s.Size();
  std::vector<double> tp(n);
  for (std::size_t t = 0; t < n; ++t) {
    tp[t] = (s.high[t] + s.low[t] + s.close[t]) / 3.0;
  }
  std::vector<double> out(n, NaN());
  for (std::size_t t = 0; t < n; ++t) {
    if (t + 1 < static_cast<std::size_t>(window)) {
      continue;
    }
    double mean = 0.0;
    for (std::size_t i = t + 1 - window; i <= t; ++i) {
      mean += tp[i];
    }
    mean /= window;
    double dev = 0.0;
    for (std::size_t i = t + 1 - window; i <= t; ++i) {
      dev += std::fabs(tp[i] - mean);
    }
    dev /= window;
    out[t] = dev > 0.0 ? (tp[t] - mean) / (0.015 * dev) : 0.0;
  }
  return out;
}

std::vector<double> Willr(const OhlcvSeries& s, int window) {
  const std::size_t n = s.Size();
  std::vector<double> out(n, NaN());
  const auto hh = RollingExtreme(s.high, window, true);
  const auto ll = RollingExtreme(s.low, window, false);
  for (std::size_t t = 0; t < n; ++t) {
    if (IsMissing(hh[t])) {
      continue;
    }
    const double range = hh[t] - ll[t];
    out[t] = range > 0.0 ? -100.0 * (hh[t] - s.close[t]) / range : -50.0;
  }
  return out;
}

std::vector<double> LaggedRatio(const std::vector<double>& x, int window,
                                double scale) {
  const std::size_t n = x.size();
  std::vector<double> out(n, NaN());
  for (std::size_t t = static_cast<std::size_t>(window); t < n; ++t) {
    if (x[t - window] != 0.0) {
      out[t] = scale * (x[t] - x[t - window]) / x[t - window];
    }
  }
  return out;
}

std::vector<double> CumLogReturn(const std::vector<double>& close,
                                 int window) {
  const std::size_t n = close.size();
  std::vector<double> out(n, NaN());
  for (std::size_t t = static_cast<std::size_t>(window); t < n; ++t) {
    if (close[t] > 0.0 && close[t - window] > 0.0) {
      out[t] = std::log(close[t] / close[t - window]);
    }
  }
  return out;
}

}  // namespace

NamedColumn ComputeIndicator(const OhlcvSeries& series, IndicatorKind kind,
                             const IndicatorParams& params) {
  const std::size_t n = series.Size();
  NamedColumn column;
  const int w = params.window;
  switch (kind) {
    case IndicatorKind::kMovingAverage:
      RequireWindow(w);
      column = {"moving_avg_" + std::to_string(w), Sma(series.close, w)};
      break;
    case IndicatorKind::kKama:
      RequireWindow(w);
      column = {"kama_" + std::to_string(w),
                Kama(series.close, w, params.fast, params.slow)};
      break;
    case IndicatorKind::kMacd: {
      RequireWindow(params.fast);
      RequireWindow(params.slow);
      const auto fast = Ema(series.close, params.fast);
      const auto slow = Ema(series.close, params.slow);
      std::vector<double> macd(n, NaN());
      for (std::size_t t = 0; t < n; ++t) {
        if (!IsMissing(fast[t]) && !IsMissing(slow[t])) {
          macd[t] = fast[t] - slow[t];
        }
      }
      column = {"macd", std::move(macd)};
      break;
    }
    case IndicatorKind::kMacdSignal: {
      auto macd =
          ComputeIndicator(series, IndicatorKind::kMacd, params).values;
      column = {"macd_signal", Ema(macd, params.signal)};
      break;
    }
    case IndicatorKind::kOpenClose: {
      std::vector<double> oc(n);
      for (std::size_t t = 0; t < n; ++t) {
        oc[t] = series.open[t] - series.close[t];
      }
      column = {"o_c", std::move(oc)};
      break;
    }
    case IndicatorKind::kHighLow: {
      std::vector<double> hl(n);
      for (std::size_t t = 0; t < n; ++t) {
        hl[t] = series.high[t] - series.low[t];
      }
      column = {"h_l", std::move(hl)};
      break;
    }
    case IndicatorKind::kGap: {
      std::vector<double> gap(n, NaN());
      for (std::size_t t = 1; t < n; ++t) {
        if (series.close[t - 1] != 0.0) {
          gap[t] = series.open[t] / series.close[t - 1] - 1.0;
        }
      }
      column = {"gap", std::move(gap)};
      break;
    }
    case IndicatorKind::kCumLogReturn:
      RequireWindow(w);
      column = {"CumLgReturn_" + std::to_string(w) + "d",
                CumLogReturn(series.close, w)};
      break;
    case IndicatorKind::kKdjK:
      RequireWindow(w);
      column = {"kdj_k", Sma(RawStochastic(series, w), params.fast)};
      break;
    case IndicatorKind::kKdjD: {
      RequireWindow(w);
      const auto k = Sma(RawStochastic(series, w), params.fast);
      column = {"kdj_d", Sma(k, params.fast)};
      break;
    }
    case IndicatorKind::kKdjJ: {
      RequireWindow(w);
      const auto k = Sma(RawStochastic(series, w), params.fast);
      const auto d = Sma(k, params.fast);
      std::vector<double> j(n, NaN());
      for (std::size_t t = 0; t < n; ++t) {
        if (!IsMissing(k[t]) && !IsMissing(d[t])) {
          j[t] = 3.0 * k[t] - 2.0 * d[t];
        }
      }
      column = {"kdj_j", std::move(j)};
      break;
    }
    case IndicatorKind::kRsi:
      RequireWindow(w);
      column = {"rsi_" + std::to_string(w), Rsi(series.close, w)};
      break;
    case IndicatorKind::kBollUpper:
    case IndicatorKind::kBollMid:
    case IndicatorKind::kBollLower: {
      RequireWindow(w);
      const auto mid = Sma(series.close, w);
      if (kind == IndicatorKind::kBollMid) {
        column = {"boll_mid", mid};
        break;
      }
      const auto sd = RollingStdev(series.close, w);
      std::vector<double> band(n, NaN());
      const double sign = kind == IndicatorKind::kBollUpper ? 1.0 : -1.0;
      for (std::size_t t = 0; t < n; ++t) {
        if (!IsMissing(mid[t])) {
          band[t] = mid[t] + sign * params.multiplier * sd[t];
        }
      }
      column = {kind == IndicatorKind::kBollUpper ? "boll_upper" : "boll_lower",
                std::move(band)};
      break;
    }
    case IndicatorKind::kCci:
      RequireWindow(w);
      column = {"cci_" + std::to_string(w), Cci(series, w)};
      break;
    case IndicatorKind::kRoc:
      RequireWindow(w);
      column = {"roc_" + std::to_string(w),
                LaggedRatio(series.close, w, 100.0)};
      break;
    case IndicatorKind::kRocp:
      RequireWindow(w);
      column = {"rocp_" + std::to_string(w),
                LaggedRatio(series.close, w, 1.0)};
      break;
    case IndicatorKind::kMom: {
      RequireWindow(w);
      std::vector<double> mom(n, NaN());
      for (std::size_t t = static_cast<std::size_t>(w); t < n; ++t) {
        mom[t] = series.close[t] - series.close[t - w];
      }
      column = {"mom_" + std::to_string(w), std::move(mom)};
      break;
    }
    case IndicatorKind::kAtr:
      RequireWindow(w);
      column = {"atr_" + std::to_string(w), Atr(series, w)};
      break;
    case IndicatorKind::kWillr:
      RequireWindow(w);
      column = {"willr_" + std::to_string(w), Willr(series, w)};
      break;
    default:
      throw ConfigError("unknown indicator kind");
  }
  RequireDefined(column.values, column.name);
  return column;
}

FeatureTable BuildBaseFeatures(const OhlcvSeries& series,
                               const IndicatorConfig& config) {
  FeatureTable table;
  table.dates = series.dates;

  auto add = [&](IndicatorKind kind, const IndicatorParams& params) {
    NamedColumn column = ComputeIndicator(series, kind, params);
    table.AddColumn(column.name, std::move(column.values));
  };

  for (int w : config.ma_windows) {
    add(IndicatorKind::kMovingAverage, {.window = w});
  }
  add(IndicatorKind::kKama, {.window = config.kama_window,
                             .fast = config.kama_fast,
                             .slow = config.kama_slow});
  add(IndicatorKind::kMacd,
      {.fast = config.macd_fast, .slow = config.macd_slow});
  add(IndicatorKind::kMacdSignal, {.fast = config.macd_fast,
                                   .slow = config.macd_slow,
                                   .signal = config.macd_signal});
  add(IndicatorKind::kOpenClose, {});
  add(IndicatorKind::kHighLow, {});
  add(IndicatorKind::kGap, {});
  for (int w : config.cum_log_return_windows) {
    add(IndicatorKind::kCumLogReturn, {.window = w});
  }
  add(IndicatorKind::kKdjK,
      {.window = config.kdj_window, .fast = config.kdj_smooth});
  add(IndicatorKind::kKdjD,
      {.window = config.kdj_window, .fast = config.kdj_smooth});
  add(IndicatorKind::kKdjJ,
      {.window = config.kdj_window, .fast = config.kdj_smooth});
  add(IndicatorKind::kRsi, {.window = config.rsi_window});
  add(IndicatorKind::kBollUpper,
      {.window = config.boll_window, .multiplier = config.boll_multiplier});
  add(IndicatorKind::kBollMid, {.window = config.boll_window});
  add(IndicatorKind::kBollLower,
      {.window = config.boll_window, .multiplier = config.boll_multiplier});
  add(IndicatorKind::kCci, {.window = config.cci_window});
  for (int w : config.roc_windows) {
    add(IndicatorKind::kRoc, {.window = w});
  }
  for (int w : config.rocp_windows) {
    add(IndicatorKind::kRocp, {.window = w});
  }
  for (int w : config.mom_windows) {
    add(IndicatorKind::kMom, {.window = w});
  }
  add(IndicatorKind::kAtr, {.window = config.atr_window});
  add(IndicatorKind::kWillr, {.window = config.willr_window});
  return table;
}

}  // namespace factorlab

#include "factorlab/dataio.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>

#include "factorlab/common.h"
#include "factorlab/csv.h"

namespace factorlab {

namespace {

std::string Lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return text;
}

std::string Canonical(const std::string& name) {
  std::string out;
  for (char c : Lower(name)) {
    if (c != ' ' && c != '_' && c != '-') {
      out.push_back(c);
    }
  }
  return out;
}

int FindColumn(const CsvTable& csv, const std::string& canonical_name) {
  for (std::size_t i = 0; i < csv.header.size(); ++i) {
    if (Canonical(csv.header[i]) == canonical_name) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

double ParseCell(const std::string& cell, const std::string& path,
                 std::size_t row_number) {
  if (cell.empty() || cell == "null" || cell == "NULL" || cell == "NA" ||
      cell == "nan") {
    return NaN();
  }
  double value = 0.0;
  auto result = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (result.ec != std::errc() || result.ptr != cell.data() + cell.size()) {
    throw FormatError(path + ": row " + std::to_string(row_number) +
                      ": bad numeric cell '" + cell + "'");
  }
  return value;
}

void ForwardFill(std::vector<double>* column) {
  double last = NaN();
  for (double& v : *column) {
    if (IsMissing(v)) {
      v = last;
    } else {
      last = v;
    }
  }
}

}  // namespace

OhlcvSeries LoadOhlcv(const std::string& path, const LoadOptions& options) {
  const CsvTable csv = ReadCsv(path, options.delimiter);

  const int date_col = FindColumn(csv, Canonical(options.date_column));
  if (date_col < 0) {
    throw SchemaError(path + ": missing date column '" + options.date_column +
                      "'");
  }
  const char* kFields[] = {"open", "high", "low", "close", "adjclose",
                           "volume"};
  int field_cols[6];
  for (int f = 0; f < 6; ++f) {
    field_cols[f] = FindColumn(csv, kFields[f]);
    if (field_cols[f] < 0 && std::string(kFields[f]) != "adjclose") {
      throw SchemaError(path + ": missing required column '" +
                        std::string(kFields[f]) + "'");
    }
  }
  // Adjusted close is optional; the raw close stands in when absent.
  if (field_cols[4] < 0) {
    field_cols[4] = field_cols[3];
  }

  const std::size_t n = csv.rows.size();
  std::vector<Date> dates(n);
  std::vector<std::vector<double>> fields(6, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    // +2: header occupies the first file row.
    const std::size_t row_number = r + 2;
    try {
      dates[r] = ParseDate(csv.rows[r][date_col]);
    } catch (const FormatError& e) {
      throw FormatError(path + ": row " + std::to_string(row_number) + ": " +
                        e.what());
    }
    for (int f = 0; f < 6; ++f) {
      fields[f][r] = ParseCell(csv.rows[r][field_cols[f]], path, row_number);
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return dates[a] < dates[b];
                   });
  for (std::size_t i = 1; i < n; ++i) {
    if (dates[order[i]] == dates[order[i - 1]]) {
      throw FormatError(path + ": duplicate date " +
                        FormatDate(dates[order[i]]));
    }
  }

  OhlcvSeries series;
  series.dates.resize(n);
  std::vector<std::vector<double>*> slots = {&series.open,  &series.high,
                                             &series.low,   &series.close,
                                             &series.adj_close,
                                             &series.volume};
  for (auto* slot : slots) {
    slot->resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    series.dates[i] = dates[order[i]];
    for (int f = 0; f < 6; ++f) {
      (*slots[f])[i] = fields[f][order[i]];
    }
  }

  for (auto* slot : slots) {
    ForwardFill(slot);
  }

  // Drop rows before the first complete one.
  std::size_t first = 0;
  while (first < n) {
    bool complete = true;
    for (auto* slot : slots) {
      if (IsMissing((*slot)[first])) {
        complete = false;
        break;
      }
    }
    if (complete) {
      break;
    }
    ++first;
  }
  if (first == n) {
    throw DataError(path + ": no complete rows after cleaning");
  }
  if (first > 0) {
    series.dates.erase(series.dates.begin(), series.dates.begin() + first);
    for (auto* slot : slots) {
      slot->erase(slot->begin(), slot->begin() + first);
    }
  }
  return series;
}

void DumpOhlcv(const OhlcvSeries& series, const std::string& path,
               char delimiter) {
  CsvTable csv;
  csv.header = {"date", "open", "high", "low", "close", "adj_close", "volume"};
  csv.rows.reserve(series.Size());
  for (std::size_t i = 0; i < series.Size(); ++i) {
    csv.rows.push_back({FormatDate(series.dates[i]), FormatCell(series.open[i]),
                        FormatCell(series.high[i]), FormatCell(series.low[i]),
                        FormatCell(series.close[i]),
                        FormatCell(series.adj_close[i]),
                        FormatCell(series.volume[i])});
  }
  WriteCsv(path, csv, delimiter);
}

LabelSeries MakeLabels(const OhlcvSeries& series, double threshold,
                       bool use_adj_close) {
  if (series.Size() < 2) {
    throw DataError("need at least 2 rows to label");
  }
  if (threshold < 0.0) {
    throw ConfigError("label threshold must be >= 0");
  }
  const std::vector<double>& price =
      use_adj_close ? series.adj_close : series.close;
  const double cutoff = std::log1p(threshold);
  LabelSeries labels;
  const std::size_t n = series.Size();
  labels.dates.reserve(n - 1);
  labels.log_return.reserve(n - 1);
  labels.label.reserve(n - 1);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    if (price[t] <= 0.0 || price[t + 1] <= 0.0) {
      throw DataError("non-positive price at " + FormatDate(series.dates[t]));
    }
    const double lr = std::log(price[t + 1] / price[t]);
    labels.dates.push_back(series.dates[t]);
    labels.log_return.push_back(lr);
    labels.label.push_back(lr > cutoff ? 1 : 0);
  }
  return labels;
}

SplitSpec ChronoSplit(std::size_t n, double test_frac,
                      double val_frac_of_train) {
  if (test_frac <= 0.0 || test_frac >= 1.0) {
    throw ConfigError("test_frac must be in (0, 1)");
  }
  if (val_frac_of_train < 0.0 || val_frac_of_train >= 1.0) {
    throw ConfigError("val_frac_of_train must be in [0, 1)");
  }
  const std::size_t test =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_frac));
  const std::size_t remainder = n - test;
  const std::size_t val = static_cast<std::size_t>(
      std::floor(static_cast<double>(remainder) * val_frac_of_train));
  const std::size_t train = remainder - val;
  if (test == 0 || train == 0) {
    throw ConfigError("degenerate split: train or test range is empty");
  }
  if (val_frac_of_train > 0.0 && val == 0) {
    throw ConfigError("degenerate split: validation range is empty");
  }
  SplitSpec spec;
  spec.train_begin = 0;
  spec.train_end = train;
  spec.val_begin = train;
  spec.val_end = train + val;
  spec.test_begin = train + val;
  spec.test_end = n;
  return spec;
}

FoldSpec TscvFolds(std::size_t n, std::size_t k, std::size_t min_train) {
  if (k < 2) {
    throw ConfigError("tscv needs k >= 2 folds");
  }
  if (min_train < 1) {
    throw ConfigError("tscv needs min_train >= 1");
  }
  if (n <= min_train || n - min_train < k) {
    throw ConfigError("tscv geometry infeasible: n=" + std::to_string(n) +
                      " k=" + std::to_string(k) +
                      " min_train=" + std::to_string(min_train));
  }
  const std::size_t region = n - min_train;
  FoldSpec spec;
  spec.folds.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    FoldSpec::Fold fold;
    fold.train_begin = 0;
    fold.test_begin = min_train + i * region / k;
    fold.test_end = min_train + (i + 1) * region / k;
    fold.train_end = fold.test_begin;
    spec.folds.push_back(fold);
  }
  return spec;
}

}  // namespace factorlab

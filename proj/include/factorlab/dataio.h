#ifndef FACTORLAB_DATAIO_H_
#define FACTORLAB_DATAIO_H_

#include <string>
#include <utility>
#include <vector>

#include "factorlab/dates.h"

namespace factorlab {

struct OhlcvSeries {
  std::vector<Date> dates;
  std::vector<double> open;
  std::vector<double> high;
  std::vector<double> low;
  std::vector<double> close;
  std::vector<double> adj_close;
  std::vector<double> volume;

  std::size_t Size() const { return dates.size(); }
};

struct LabelSeries {
  std::vector<Date> dates;        // prediction dates (feature date t)
  std::vector<double> log_return; // return t -> t+1
  std::vector<int> label;         // 1 iff log_return > ln(1 + threshold)
};

// Half-open index intervals, ordered train < val < test.
struct SplitSpec {
  std::size_t train_begin = 0;
  std::size_t train_end = 0;
  std::size_t val_begin = 0;
  std::size_t val_end = 0;
  std::size_t test_begin = 0;
  std::size_t test_end = 0;
};

struct FoldSpec {
  struct Fold {
    std::size_t train_begin = 0;
    std::size_t train_end = 0;  // == test_begin
    std::size_t test_begin = 0;
    std::size_t test_end = 0;
  };
  std::vector<Fold> folds;
};

struct LoadOptions {
  char delimiter = ',';
  std::string date_column = "date";
};

// Reads a delimited OHLCV table, sorts by date, forward-fills missing cells
// and drops rows before the first complete one.
OhlcvSeries LoadOhlcv(const std::string& path, const LoadOptions& options = {});

void DumpOhlcv(const OhlcvSeries& series, const std::string& path,
               char delimiter = ',');

/// Next-day log-return labels: label[t] = 1 iff ln(close[t+1]/close[t]) >
// ln(1 + threshold). Uses adj_close instead when use_adj_close is set.
LabelSeries MakeLabels(const OhlcvSeries& series, double threshold,
                       bool use_adj_close = false);

SplitSpec ChronoSplit(std::size_t n, double test_frac,
                      double val_frac_of_train);

// Expanding-window folds; the k test blocks tile [min_train, n).
FoldSpec TscvFolds(std::size_t n, std::size_t k, std::size_t min_train);

}  // namespace factorlab

#endif  // FACTORLAB_DATAIO_H_

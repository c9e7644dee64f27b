#ifndef FACTORLAB_SENTIMENT_H_
#define FACTORLAB_SENTIMENT_H_

#include <string>
#include <vector>

#include "factorlab/dates.h"
#include "factorlab/table.h"

namespace factorlab {

enum class SentimentLabel { kPositive, kNeutral, kNegative };

struct NewsRecord {
  Date day;  // calendar day of the timestamp
  SentimentLabel sentiment = SentimentLabel::kNeutral;
};

struct SentimentOptions {
  std::vector<int> windows = {7, 30};
  // Adds log record counts and net sentiment (P-N)/T per window.
  bool extended = false;
};

// Delimited text with `timestamp` and `sentiment` columns. Labels outside
// {positive, neutral, negative} are schema errors naming the row.
std::vector<NewsRecord> LoadNews(const std::string& path,
                                 char delimiter = ',');

// Rolling calendar-day ratios aligned to trading dates, including day t.
// A window with zero records yields NaN.
FeatureTable RollingRatios(const std::vector<NewsRecord>& records,
                           const std::vector<Date>& dates,
                           const SentimentOptions& options = {});

// Adds sentiment columns to a market table (dates must match row-for-row).
void MergeSentiment(FeatureTable* table, const FeatureTable& sentiment);

}  // namespace factorlab

#endif  // FACTORLAB_SENTIMENT_H_

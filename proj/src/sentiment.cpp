#include "factorlab/sentiment.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "factorlab/common.h"
#include "factorlab/csv.h"

namespace factorlab {

namespace {

SentimentLabel ParseLabel(const std::string& text, std::size_t row_number,
                          const std::string& path) {
  if (text == "positive") {
    return SentimentLabel::kPositive;
  }
  if (text == "neutral") {
    return SentimentLabel::kNeutral;
  }
  if (text == "negative") {
    return SentimentLabel::kNegative;
  }
  throw SchemaError(path + ": row " + std::to_string(row_number) +
                    ": unknown sentiment label '" + text + "'");
}

struct DayCounts {
  long positive = 0;
  long negative = 0;
  long total = 0;
};

}  // namespace

std::vector<NewsRecord> LoadNews(const std::string& path, char delimiter) {
  const CsvTable csv = ReadCsv(path, delimiter);
  const int ts_col = csv.ColumnIndex("timestamp");
  const int label_col = csv.ColumnIndex("sentiment");
  if (ts_col < 0 || label_col < 0) {
    throw SchemaError(path + ": need 'timestamp' and 'sentiment' columns");
  }
  std::vector<NewsRecord> records;
  records.reserve(csv.rows.size());
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const std::size_t row_number = r + 2;
    NewsRecord record;
    try {
      record.day = ParseDate(csv.rows[r][ts_col]);
    } catch (const FormatError& e) {
      throw FormatError(path + ": row " + std::to_string(row_number) + ": " +
                        e.what());
    }
    record.sentiment = ParseLabel(csv.rows[r][label_col], row_number, path);
    records.push_back(record);
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const NewsRecord& a, const NewsRecord& b) {
                     return a.day < b.day;
                   });
  return records;
}

FeatureTable RollingRatios(const std::vector<NewsRecord>& records,
                           const std::vector<Date>& dates,
                           const SentimentOptions& options) {
  for (int w : options.windows) {
    if (w < 1) {
      throw ConfigError("sentiment window must be >= 1");
    }
  }
  std::map<Date, DayCounts> by_day;
  for (const NewsRecord& record : records) {
    DayCounts& counts = by_day[record.day];
    ++counts.total;
    if (record.sentiment == SentimentLabel::kPositive) {
      ++counts.positive;
    } else if (record.sentiment == SentimentLabel::kNegative) {
      ++counts.negative;
    }
  }

  FeatureTable table;
  table.dates = dates;
  for (int w : options.windows) {
    const std::string suffix = "_" + std::to_string(w) + "d";
    std::vector<double> pos_ratio(dates.size(), NaN());
    std::vector<double> neg_ratio(dates.size(), NaN());
    std::vector<double> log_count(dates.size(), NaN());
    std::vector<double> net(dates.size(), NaN());
    for (std::size_t i = 0; i < dates.size(); ++i) {
      DayCounts window;
      // Calendar days [t - w + 1, t].
      auto it = by_day.lower_bound(dates[i] - (w - 1));
      for (; it != by_day.end() && it->first <= dates[i]; ++it) {
        window.positive += it->second.positive;
        window.negative += it->second.negative;
        window.total += it->second.total;
      }
      if (window.total == 0) {
        continue;
      }
      const double total = static_cast<double>(window.total);
      pos_ratio[i] = static_cast<double>(window.positive) / total;
      neg_ratio[i] = static_cast<double>(window.negative) / total;
      log_count[i] = std::log(total);
      net[i] =
          static_cast<double>(window.positive - window.negative) / total;
    }
    table.AddColumn("positive_ratio" + suffix, std::move(pos_ratio));
    table.AddColumn("negative_ratio" + suffix, std::move(neg_ratio));
    if (options.extended) {
      table.AddColumn("log_news_count" + suffix, std::move(log_count));
      table.AddColumn("net_sentiment" + suffix, std::move(net));
    }
  }
  return table;
}

void MergeSentiment(FeatureTable* table, const FeatureTable& sentiment) {
  if (table->dates != sentiment.dates) {
    throw DataError("sentiment table dates do not match market table");
  }
  for (std::size_t c = 0; c < sentiment.Cols(); ++c) {
    table->AddColumn(sentiment.names[c], sentiment.columns[c]);
  }
}

}  // namespace factorlab

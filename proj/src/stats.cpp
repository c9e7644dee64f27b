#include "factorlab/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "factorlab/common.h"

namespace factorlab {

double Mean(const std::vector<double>& values) {
  if (values.empty()) {
    return NaN();
  }
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double Stdev(const std::vector<double>& values, int ddof) {
  const std::size_t n = values.size();
  if (n <= static_cast<std::size_t>(ddof)) {
    return NaN();
  }
  const double mean = Mean(values);
  double ss = 0.0;
  for (double v : values) {
    const double c = v - mean;
    ss += c * c;
  }
  return std::sqrt(ss / static_cast<double>(n - ddof));
}

std::vector<double> RankAverageTies(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] < values[b];
                   });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = avg_rank;
    }
    i = j + 1;
  }
  return ranks;
}

std::optional<double> PearsonCorrelation(const std::vector<double>& lhs,
                                         const std::vector<double>& rhs) {
  const std::size_t n = lhs.size();
  if (n < 2 || n != rhs.size()) {
    return std::nullopt;
  }
  const double lm = Mean(lhs);
  const double rm = Mean(rhs);
  double cov = 0.0;
  double lv = 0.0;
  double rv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lc = lhs[i] - lm;
    const double rc = rhs[i] - rm;
    cov += lc * rc;
    lv += lc * lc;
    rv += rc * rc;
  }
  if (lv <= 0.0 || rv <= 0.0) {
    return std::nullopt;
  }
  return cov / std::sqrt(lv * rv);
}

std::optional<double> SpearmanCorrelation(const std::vector<double>& lhs,
                                          const std::vector<double>& rhs) {
  if (lhs.size() != rhs.size()) {
    return std::nullopt;
  }
  std::vector<double> a;
  std::vector<double> b;
  a.reserve(lhs.size());
  b.reserve(rhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (!IsMissing(lhs[i]) && !IsMissing(rhs[i])) {
      a.push_back(lhs[i]);
      b.push_back(rhs[i]);
    }
  }
  if (a.size() < 3) {
    return std::nullopt;
  }
  return PearsonCorrelation(RankAverageTies(a), RankAverageTies(b));
}

std::optional<double> PearsonPairwiseComplete(const std::vector<double>& lhs,
                                              const std::vector<double>& rhs) {
  if (lhs.size() != rhs.size()) {
    return std::nullopt;
  }
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (!IsMissing(lhs[i]) && !IsMissing(rhs[i])) {
      a.push_back(lhs[i]);
      b.push_back(rhs[i]);
    }
  }
  if (a.size() < 2) {
    return std::nullopt;
  }
  return PearsonCorrelation(a, b);
}

}  // namespace factorlab

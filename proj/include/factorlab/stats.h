#ifndef FACTORLAB_STATS_H_
#define FACTORLAB_STATS_H_

#include <optional>
#include <vector>

namespace factorlab {

double Mean(const std::vector<double>& values);

// Population standard deviation when ddof = 0, sample when ddof = 1.
double Stdev(const std::vector<double>& values, int ddof = 0);

// Average-rank ties; ranks start at 1.
std::vector<double> RankAverageTies(const std::vector<double>& values);

// nullopt when either input is constant or too short.
std::optional<double> PearsonCorrelation(const std::vector<double>& lhs,
                                         const std::vector<double>& rhs);

// Rank-then-Pearson with average ties over pairwise complete observations.
std::optional<double> SpearmanCorrelation(const std::vector<double>& lhs,
                                          const std::vector<double>& rhs);

// Pearson over indices where both entries are present (non-NaN).
std::optional<double> PearsonPairwiseComplete(const std::vector<double>& lhs,
                                              const std::vector<double>& rhs);

}  // namespace factorlab

#endif  // FACTORLAB_STATS_H_

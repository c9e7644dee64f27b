#ifndef FACTORLAB_FEATSEL_H_
#define FACTORLAB_FEATSEL_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "factorlab/learners.h"
#include "factorlab/table.h"

namespace factorlab {

class Standardizer {
 public:
  // Fits per-column mean and sd on the training rows only.
  static Standardizer Fit(const Matrix& X,
                          const std::vector<std::size_t>& train_rows);

  Matrix Transform(const Matrix& X) const;

  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stdevs() const { return stdevs_; }
  const std::vector<bool>& zero_variance() const { return zero_variance_; }

 private:
  std::vector<double> means_;
  std::vector<double> stdevs_;
  std::vector<bool> zero_variance_;
};

// One-way ANOVA F per column; within-class variance 0 maps to +inf.
std::vector<double> AnovaFScores(const Matrix& X, const std::vector<int>& y);

// Keeps the top pct percent of columns by score (at least one).
std::vector<std::size_t> SelectPercentile(const std::vector<double>& scores,
                                          double pct);

// Greedy in the given priority order: drop a column whose |corr| with an
// already kept column exceeds the threshold.
std::vector<std::size_t> PearsonPrune(const Matrix& X,
                                      const std::vector<std::size_t>& priority,
                                      double threshold);

// Quantile-bins continuous columns first; empty bins merge into a neighbor.
std::vector<double> ChiSquareScores(const Matrix& X, const std::vector<int>& y,
                                    int bins = 10);

// VIF_j = 1/(1 - R^2_j); exact linear dependence reports +inf sentinels.
std::vector<double> VifScores(const Matrix& X);

enum class BorutaDecision { kConfirmed, kRejected, kTentative };

struct BorutaConfig {
  int max_iter = 30;
  double alpha = 0.05;
  ForestParams forest;
  ImportanceMode importance = ImportanceMode::kPermutation;
  std::uint64_t seed = 42;
};

struct BorutaResult {
  std::vector<BorutaDecision> decisions;
  std::vector<int> hits;
  int iterations = 0;
};

BorutaResult Boruta(const Matrix& X, const std::vector<int>& y,
                    const BorutaConfig& config);

using ProbModel = std::function<double(const std::vector<double>&)>;

struct ShapleyConfig {
  int n_samples = 2000;  // Monte Carlo permutations
  std::uint64_t seed = 42;
  int exact_max_features = 10;
};

// Per-row Shapley values of the positive-class probability against a single
// background row; exact enumeration when columns <= exact_max_features.
Matrix ShapleyValues(const ProbModel& model, const Matrix& X,
                     const std::vector<double>& background,
                     const ShapleyConfig& config = {});

// Mean |attribution| per column across evaluation rows.
std::vector<double> ShapleyImportance(const ProbModel& model, const Matrix& X,
                                      const std::vector<double>& background,
                                      const ShapleyConfig& config = {});

struct MethodReport {
  std::string method;
  std::vector<std::string> columns;
  std::vector<double> scores;
  std::vector<bool> kept;
  double threshold = 0.0;
};

struct SelectionReport {
  std::vector<MethodReport> stages;
  std::vector<std::string> final_kept;
};

struct SelectionConfig {
  double vif_threshold = 5.0;
  double anova_percentile = 60.0;
  double pearson_threshold = 0.9;
  BorutaConfig boruta;
  bool keep_tentative = false;
  ShapleyConfig shapley;
  std::size_t top_k = 34;
  std::uint64_t seed = 42;
};

// VIF prune -> ANOVA percentile -> Pearson prune -> Boruta -> Shapley top-k.
// Statistics are computed on the training rows only.
SelectionReport SelectPipeline(const FeatureTable& table,
                               const std::vector<int>& labels,
                               const std::vector<std::size_t>& train_rows,
                               const SelectionConfig& config);

void WriteSelectionReport(const SelectionReport& report,
                          const std::string& path);

}  // namespace factorlab

#endif  // FACTORLAB_FEATSEL_H_

#ifndef FACTORLAB_ENSEMBLE_H_
#define FACTORLAB_ENSEMBLE_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "factorlab/dataio.h"
#include "factorlab/learners.h"

namespace factorlab {

enum class BaseKind { kForest, kLevelBooster, kLeafBooster };

struct BaseLearnerConfig {
  std::string name;
  BaseKind kind = BaseKind::kForest;
  ForestParams forest;
  BoostedParams boosted;
};

// Forest (500 trees), level-wise booster (alpha 0.3, lr 0.1, column
// subsample 0.4 per level) and leaf-wise booster (lr 0.05, 64 leaves).
std::vector<BaseLearnerConfig> DefaultBaseLearners();
BoostedParams DefaultMetaLearner();

enum class EnsembleMode { kBlendHoldout, kStackOof, kSoftVote };

struct EnsembleSpec {
  std::vector<BaseLearnerConfig> bases = DefaultBaseLearners();
  BoostedParams meta = DefaultMetaLearner();
  EnsembleMode mode = EnsembleMode::kBlendHoldout;
};

struct BaseModel {
  std::string name;
  BaseKind kind = BaseKind::kForest;
  ForestModel forest;
  BoostedModel boosted;

  std::vector<double> PredictProb1(const Matrix& X) const;
};

struct EnsembleModel {
  EnsembleMode mode = EnsembleMode::kBlendHoldout;
  std::vector<BaseModel> bases;
  BoostedModel meta;  // unused in soft-vote mode

  // Positive-class probability per row.
  std::vector<double> PredictProb1(const Matrix& X) const;
  std::vector<int> Predict(const Matrix& X) const;
};

BaseModel FitBase(const BaseLearnerConfig& config, const Matrix& X,
                  const std::vector<int>& y);

// Bases fit on train rows; the meta booster fits on their positive-class
// probabilities over the (strictly later) holdout rows.
EnsembleModel BlendFit(const EnsembleSpec& spec, const Matrix& X,
                       const std::vector<int>& y,
                       const std::vector<std::size_t>& train_rows,
                       const std::vector<std::size_t>& holdout_rows);

// Meta features are out-of-fold base predictions; bases refit on all rows.
EnsembleModel StackFit(const EnsembleSpec& spec, const Matrix& X,
                       const std::vector<int>& y, const FoldSpec& folds);

// Bases fit on train rows; prediction is the unweighted probability mean.
EnsembleModel SoftVoteFit(const EnsembleSpec& spec, const Matrix& X,
                          const std::vector<int>& y,
                          const std::vector<std::size_t>& train_rows);

// Unweighted elementwise mean of equally shaped probability matrices.
Matrix SoftVote(const std::vector<Matrix>& probabilities);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool zero_denominator = false;
};

struct MetricsTable {
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;

  long Total() const { return tp + fp + fn + tn; }
};

MetricsTable Evaluate(const std::vector<int>& predictions,
                      const std::vector<int>& labels);

void WriteMetrics(const MetricsTable& metrics, const std::string& path);

struct GridSpec {
  // Parameter name -> candidate values, in declaration order.
  std::vector<std::pair<std::string, std::vector<double>>> values;
  std::string metric = "accuracy";  // or "neg_logloss"
  FoldSpec folds;
};

struct GridEntry {
  std::vector<std::pair<std::string, double>> config;
  double score = 0.0;
  bool trained = false;
};

struct GridResult {
  GridEntry best;
  std::vector<GridEntry> leaderboard;  // score desc, then config lexicographic
  std::size_t evaluated = 0;
};

// Mean TSCV validation score per grid point; ties break toward the
// first-listed combination.
GridResult GridSearch(const BaseLearnerConfig& family, const GridSpec& grid,
                      const Matrix& X, const std::vector<int>& y);

// Applies a named hyperparameter assignment; unknown names are errors.
BaseLearnerConfig ApplyGridPoint(
    const BaseLearnerConfig& family,
    const std::vector<std::pair<std::string, double>>& point);

void WriteLeaderboard(const GridResult& result, const std::string& path);

}  // namespace factorlab

#endif  // FACTORLAB_ENSEMBLE_H_

#ifndef FACTORLAB_LEARNERS_H_
#define FACTORLAB_LEARNERS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace factorlab {

// Row-major feature matrix.
using Matrix = std::vector<std::vector<double>>;

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double prob1 = 0.0;   // classification leaf: P(y = 1)
  double weight = 0.0;  // boosting leaf weight
  double gain = 0.0;    // weighted impurity decrease of this split
};

struct TreeModel {
  std::vector<TreeNode> nodes;
  int n_features = 0;

  double PredictProb1(const std::vector<double>& row) const;
  double PredictWeight(const std::vector<double>& row) const;
};

struct TreeParams {
  int max_depth = -1;  // -1 = unbounded
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_leaf_nodes = -1;  // -1 = unbounded
  double min_weight_fraction_leaf = 0.0;
  int max_features = -1;  // per-split subsample, -1 = all
};

// Greedy CART with Gini impurity and exact midpoint split search. Ties in
// impurity break toward the lowest feature index, then lowest threshold.
TreeModel FitTree(const Matrix& X, const std::vector<int>& y,
                  const std::vector<double>& weights, const TreeParams& params,
                  std::uint64_t seed = 0);

struct ForestParams {
  int n_estimators = 500;
  TreeParams tree;
  bool bootstrap = true;
  int max_features = 0;  // 0 = ceil(sqrt(d))
  std::uint64_t seed = 42;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<std::vector<std::size_t>> oob_indices;  // per tree
  ForestParams params;

  std::vector<double> PredictProb1(const Matrix& X) const;
};

ForestModel FitForest(const Matrix& X, const std::vector<int>& y,
                      const ForestParams& params);

enum class ImportanceMode { kImpurity, kPermutation };

// Impurity: normalized Gini decrease per feature. Permutation: accuracy
// drop on (X, y) when one column is shuffled, averaged over repeats.
std::vector<double> ForestImportance(const ForestModel& model, const Matrix& X,
                                     const std::vector<int>& y,
                                     ImportanceMode mode,
                                     std::uint64_t seed = 0, int repeats = 3);

enum class Growth { kLevelWise, kLeafWise };

struct BoostedParams {
  int n_estimators = 200;
  double learning_rate = 0.1;
  Growth growth = Growth::kLevelWise;
  int max_depth = 3;     // level-wise budget
  int num_leaves = 64;   // leaf-wise budget
  double lambda = 1.0;   // L2 on leaf weights
  double alpha = 0.0;    // L1 on leaf weights
  double gamma = 0.0;    // minimum split gain
  double min_child_weight = 1e-3;  // minimum hessian sum per leaf
  double colsample_bytree = 1.0;
  double colsample_bylevel = 1.0;
  std::uint64_t seed = 42;
};

struct BoostedModel {
  std::vector<TreeModel> trees;
  double base_score = 0.0;  // log-odds
  BoostedParams params;

  std::vector<double> PredictScore(const Matrix& X) const;
  std::vector<double> PredictProb1(const Matrix& X) const;
};

// Second-order split gain with L2 shrinkage and the gamma penalty applied:
// 1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H+lambda)] - gamma.
double SplitGain(double g_left, double h_left, double g_right, double h_right,
                 double lambda, double gamma);

// Logistic-loss boosting; leaf weight -soft_threshold(G, alpha)/(H+lambda).
BoostedModel FitBoosted(const Matrix& X, const std::vector<int>& y,
                        const BoostedParams& params);

double LogisticLoss(const std::vector<double>& prob1,
                    const std::vector<int>& y);

// Rows sum to 1; column 0 is P(y = 0).
Matrix PredictProba(const ForestModel& model, const Matrix& X);
Matrix PredictProba(const BoostedModel& model, const Matrix& X);

// Versioned text serialization; round trip is prediction-exact.
void SaveForest(const ForestModel& model, const std::string& path);
ForestModel LoadForest(const std::string& path);
void SaveBoosted(const BoostedModel& model, const std::string& path);
BoostedModel LoadBoosted(const std::string& path);

}  // namespace factorlab

#endif  // FACTORLAB_LEARNERS_H_

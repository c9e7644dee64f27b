#ifndef FACTORLAB_GPALPHA_H_
#define FACTORLAB_GPALPHA_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "factorlab/dataio.h"
#include "factorlab/table.h"

namespace factorlab {

enum class Primitive {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kSqrt,
  kAbs,
  kSin,
  kCos,
  kTan,
  kMax,
  kMin,
  kRank,
  kScale,
  kDelta,
  kTsSum,
  kTsMin,
  kTsMax,
  kTsArgMin,
  kTsArgMax,
};

bool IsBinary(Primitive primitive);
bool IsWindowed(Primitive primitive);  // delta and ts_*
const char* PrimitiveName(Primitive primitive);

struct ExprNode {
  Primitive primitive = Primitive::kLeaf;
  std::string leaf;  // base-feature column, kLeaf only
  int window = 0;    // windowed primitives only
  std::unique_ptr<ExprNode> left;
  std::unique_ptr<ExprNode> right;
};

class AlphaExpr {
 public:
  AlphaExpr() = default;
  explicit AlphaExpr(std::unique_ptr<ExprNode> root) : root_(std::move(root)) {}
  AlphaExpr(const AlphaExpr& other);
  AlphaExpr& operator=(const AlphaExpr& other);
  AlphaExpr(AlphaExpr&&) = default;
  AlphaExpr& operator=(AlphaExpr&&) = default;

  const ExprNode* root() const { return root_.get(); }
  ExprNode* mutable_root() { return root_.get(); }
  bool empty() const { return root_ == nullptr; }
  int Depth() const;
  int NodeCount() const;

 private:
  std::unique_ptr<ExprNode> root_;
};

struct Individual {
  AlphaExpr expr;
  std::vector<double> values;
  double fitness = 0.0;  // |IC|
  int ic_sign = 0;
  bool degenerate = false;  // constant output, IC undefined
};

struct GpConfig {
  std::size_t population_size = 500;
  std::size_t tournament_size = 50;
  std::size_t generations = 5;
  std::size_t elite_keep = 25;
  std::size_t pool_cap = 350;
  double dedup_corr_threshold = 0.7;
  int max_depth = 6;
  std::vector<int> ts_windows = {3, 5, 10, 20, 40, 60};
  std::uint64_t rng_seed = 42;
  double p_crossover = 0.9;
  double p_subtree_mutation = 0.05;
  double p_point_mutation = 0.04;
  double early_stop_eps = 1e-4;
  int default_parse_window = 20;  // ts_*/delta windows omitted from text
};

struct MiningResult {
  std::vector<Individual> pool;  // sorted by descending |IC|
  std::size_t generations_run = 0;
  double best_fitness = 0.0;
};

// Pointwise/rolling evaluation with protected division, sqrt on |x|,
// full-column rank/scale and trailing windows (NaN through warm-up).
std::vector<double> EvalExpr(const AlphaExpr& expr, const FeatureTable& table);

struct IcResult {
  double ic = 0.0;
  bool defined = false;
};

// Spearman of factor[t] vs forward return[t] over aligned rows.
IcResult SpearmanIc(const std::vector<double>& factor,
                    const std::vector<double>& forward_returns);

std::vector<Individual> InitPopulation(const GpConfig& config,
                                       const std::vector<std::string>& terminals);

void EvaluatePopulation(std::vector<Individual>* population,
                        const FeatureTable& table,
                        const std::vector<double>& forward_returns);

std::vector<Individual> EvolveGeneration(
    const std::vector<Individual>& population, const GpConfig& config,
    const std::vector<std::string>& terminals, const FeatureTable& table,
    const std::vector<double>& forward_returns, std::size_t generation);

// Greedy by descending |IC|: keep while pairwise |Pearson| stays within the
// threshold, capped at pool_cap.
std::vector<Individual> DedupPool(const std::vector<Individual>& population,
                                  const GpConfig& config);

// init -> (evaluate, dedup, evolve) x generations with early stopping.
// forward_returns must cover only the training window.
MiningResult Mine(const FeatureTable& table,
                  const std::vector<double>& forward_returns,
                  const GpConfig& config);

AlphaExpr ParseExpr(const std::string& text, const GpConfig& config = {});
std::string FormatExpr(const AlphaExpr& expr);

}  // namespace factorlab

#endif  // FACTORLAB_GPALPHA_H_

#include "factorlab/ensemble.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "factorlab/common.h"
#include "factorlab/csv.h"

namespace factorlab {

namespace {

Matrix SelectRows(const Matrix& X, const std::vector<std::size_t>& rows) {
  Matrix out;
  out.reserve(rows.size());
  for (std::size_t r : rows) {
    out.push_back(X[r]);
  }
  return out;
}

std::vector<int> SelectLabels(const std::vector<int>& y,
                              const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) {
    out.push_back(y[r]);
  }
  return out;
}

void RequireBothClasses(const std::vector<int>& y, const std::string& where) {
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1) {
    throw DataError("degenerate target: " + where + " holds a single class");
  }
}

}  // namespace

std::vector<BaseLearnerConfig> DefaultBaseLearners() {
  std::vector<BaseLearnerConfig> bases(3);

  bases[0].name = "forest";
  bases[0].kind = BaseKind::kForest;
  bases[0].forest.n_estimators = 500;
  bases[0].forest.seed = 42;

  bases[1].name = "level_booster";
  bases[1].kind = BaseKind::kLevelBooster;
  bases[1].boosted.growth = Growth::kLevelWise;
  bases[1].boosted.n_estimators = 200;
  bases[1].boosted.learning_rate = 0.1;
  bases[1].boosted.max_depth = 6;
  bases[1].boosted.alpha = 0.3;
  bases[1].boosted.colsample_bylevel = 0.4;

  bases[2].name = "leaf_booster";
  bases[2].kind = BaseKind::kLeafBooster;
  bases[2].boosted.growth = Growth::kLeafWise;
  bases[2].boosted.n_estimators = 200;
  bases[2].boosted.learning_rate = 0.05;
  bases[2].boosted.num_leaves = 64;
  bases[2].boosted.max_depth = 3;
  bases[2].boosted.colsample_bytree = 0.65;
  bases[2].boosted.alpha = 1.2;
  bases[2].boosted.lambda = 1.4;

  return bases;
}

BoostedParams DefaultMetaLearner() {
  BoostedParams meta;
  meta.growth = Growth::kLeafWise;
  meta.n_estimators = 50;
  meta.learning_rate = 0.1;
  meta.num_leaves = 8;
  meta.max_depth = 3;
  return meta;
}

std::vector<double> BaseModel::PredictProb1(const Matrix& X) const {
  if (kind == BaseKind::kForest) {
    return forest.PredictProb1(X);
  }
  return boosted.PredictProb1(X);
}

std::vector<double> EnsembleModel::PredictProb1(const Matrix& X) const {
  if (bases.empty()) {
    throw ConfigError("ensemble has no base learners");
  }
  std::vector<std::vector<double>> base_probs;
  base_probs.reserve(bases.size());
  for (const BaseModel& base : bases) {
    base_probs.push_back(base.PredictProb1(X));
  }
  std::vector<double> out(X.size(), 0.0);
  if (mode == EnsembleMode::kSoftVote) {
    for (const auto& probs : base_probs) {
      for (std::size_t r = 0; r < out.size(); ++r) {
        out[r] += probs[r];
      }
    }
    for (double& p : out) {
      p /= static_cast<double>(bases.size());
    }
    return out;
  }
  Matrix meta_features(X.size(), std::vector<double>(bases.size()));
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (std::size_t r = 0; r < X.size(); ++r) {
      meta_features[r][b] = base_probs[b][r];
    }
  }
  return meta.PredictProb1(meta_features);
}

std::vector<int> EnsembleModel::Predict(const Matrix& X) const {
  const auto probs = PredictProb1(X);
  std::vector<int> out(probs.size());
  for (std::size_t r = 0; r < probs.size(); ++r) {
    out[r] = probs[r] > 0.5 ? 1 : 0;
  }
  return out;
}

BaseModel FitBase(const BaseLearnerConfig& config, const Matrix& X,
                  const std::vector<int>& y) {
  BaseModel model;
  model.name = config.name;
  model.kind = config.kind;
  if (config.kind == BaseKind::kForest) {
    model.forest = FitForest(X, y, config.forest);
  } else {
    model.boosted = FitBoosted(X, y, config.boosted);
  }
  return model;
}

EnsembleModel BlendFit(const EnsembleSpec& spec, const Matrix& X,
                       const std::vector<int>& y,
                       const std::vector<std::size_t>& train_rows,
                       const std::vector<std::size_t>& holdout_rows) {
  if (spec.bases.empty()) {
    throw ConfigError("blend needs at least one base learner");
  }
  if (train_rows.empty() || holdout_rows.empty()) {
    throw DataError("blend needs non-empty train and holdout row sets");
  }
  const std::size_t max_train =
      *std::max_element(train_rows.begin(), train_rows.end());
  const std::size_t min_holdout =
      *std::min_element(holdout_rows.begin(), holdout_rows.end());
  if (max_train >= min_holdout) {
    throw DataError("blend holdout must strictly follow the training rows");
  }
  const std::vector<int> y_holdout = SelectLabels(y, holdout_rows);
  RequireBothClasses(y_holdout, "blend holdout");

  const Matrix x_train = SelectRows(X, train_rows);
  const std::vector<int> y_train = SelectLabels(y, train_rows);
  const Matrix x_holdout = SelectRows(X, holdout_rows);

  EnsembleModel model;
  model.mode = EnsembleMode::kBlendHoldout;
  model.bases.resize(spec.bases.size());
  for (std::size_t b = 0; b < spec.bases.size(); ++b) {
    model.bases[b] = FitBase(spec.bases[b], x_train, y_train);
  }

  Matrix meta_features(holdout_rows.size(),
                       std::vector<double>(spec.bases.size()));
  for (std::size_t b = 0; b < model.bases.size(); ++b) {
    const auto probs = model.bases[b].PredictProb1(x_holdout);
    for (std::size_t r = 0; r < probs.size(); ++r) {
      meta_features[r][b] = probs[r];
    }
  }
  model.meta = FitBoosted(meta_features, y_holdout, spec.meta);
  return model;
}

EnsembleModel StackFit(const EnsembleSpec& spec, const Matrix& X,
                       const std::vector<int>& y, const FoldSpec& folds) {
  if (spec.bases.empty()) {
    throw ConfigError("stack needs at least one base learner");
  }
  if (folds.folds.empty()) {
    throw ConfigError("stack needs at least one fold");
  }
  // Out-of-fold meta features: for fold i, bases trained on the fold's
  // training block predict its test block.
  std::vector<std::size_t> meta_rows;
  Matrix meta_features;
  std::vector<int> meta_labels;
  for (const FoldSpec::Fold& fold : folds.folds) {
    std::vector<std::size_t> train_rows;
    for (std::size_t r = fold.train_begin; r < fold.train_end; ++r) {
      train_rows.push_back(r);
    }
    std::vector<std::size_t> test_rows;
    for (std::size_t r = fold.test_begin; r < fold.test_end; ++r) {
      test_rows.push_back(r);
    }
    const Matrix x_train = SelectRows(X, train_rows);
    const std::vector<int> y_train = SelectLabels(y, train_rows);
    const Matrix x_test = SelectRows(X, test_rows);
    std::vector<std::vector<double>> fold_probs(spec.bases.size());
    for (std::size_t b = 0; b < spec.bases.size(); ++b) {
      fold_probs[b] = FitBase(spec.bases[b], x_train, y_train)
                          .PredictProb1(x_test);
    }
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      std::vector<double> row(spec.bases.size());
      for (std::size_t b = 0; b < spec.bases.size(); ++b) {
        row[b] = fold_probs[b][i];
      }
      meta_features.push_back(std::move(row));
      meta_labels.push_back(y[test_rows[i]]);
      meta_rows.push_back(test_rows[i]);
    }
  }
  if (meta_features.empty()) {
    throw DataError("stack produced no out-of-fold rows");
  }
  RequireBothClasses(meta_labels, "stack out-of-fold block");

  EnsembleModel model;
  model.mode = EnsembleMode::kStackOof;
  model.meta = FitBoosted(meta_features, meta_labels, spec.meta);

  // Final bases refit on every row for inference.
  model.bases.resize(spec.bases.size());
  for (std::size_t b = 0; b < spec.bases.size(); ++b) {
    model.bases[b] = FitBase(spec.bases[b], X, y);
  }
  return model;
}

EnsembleModel SoftVoteFit(const EnsembleSpec& spec, const Matrix& X,
                          const std::vector<int>& y,
                          const std::vector<std::size_t>& train_rows) {
  if (spec.bases.empty()) {
    throw ConfigError("soft vote needs at least one base learner");
  }
  const Matrix x_train = SelectRows(X, train_rows);
  const std::vector<int> y_train = SelectLabels(y, train_rows);
  EnsembleModel model;
  model.mode = EnsembleMode::kSoftVote;
  model.bases.resize(spec.bases.size());
  for (std::size_t b = 0; b < spec.bases.size(); ++b) {
    model.bases[b] = FitBase(spec.bases[b], x_train, y_train);
  }
  return model;
}

Matrix SoftVote(const std::vector<Matrix>& probabilities) {
  if (probabilities.empty()) {
    throw ConfigError("soft vote needs at least one probability matrix");
  }
  const std::size_t rows = probabilities[0].size();
  const std::size_t cols = rows == 0 ? 0 : probabilities[0][0].size();
  for (const Matrix& m : probabilities) {
    if (m.size() != rows) {
      throw DataError("soft vote: probability matrices differ in row count");
    }
    for (const auto& row : m) {
      if (row.size() != cols) {
        throw DataError(
            "soft vote: probability matrices differ in column count");
      }
    }
  }
  Matrix out(rows, std::vector<double>(cols, 0.0));
  for (const Matrix& m : probabilities) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        out[r][c] += m[r][c];
      }
    }
  }
  for (auto& row : out) {
    for (double& v : row) {
      v /= static_cast<double>(probabilities.size());
    }
  }
  return out;
}

MetricsTable Evaluate(const std::vector<int>& predictions,
                      const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw DataError("evaluate: predictions and labels differ in length");
  }
  MetricsTable metrics;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred1 = predictions[i] == 1;
    const bool true1 = labels[i] == 1;
    if (pred1 && true1) {
      ++metrics.tp;
    } else if (pred1 && !true1) {
      ++metrics.fp;
    } else if (!pred1 && true1) {
      ++metrics.fn;
    } else {
      ++metrics.tn;
    }
  }
  const long total = metrics.Total();
  metrics.accuracy =
      total > 0 ? static_cast<double>(metrics.tp + metrics.tn) / total : 0.0;

  auto fill = [](long tp, long fp, long fn) {
    ClassMetrics m;
    if (tp + fp == 0 || tp + fn == 0) {
      m.zero_denominator = true;
    }
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
  };
  // Class 0 treats "predicted 0" as the positive call.
  metrics.per_class[0] = fill(metrics.tn, metrics.fn, metrics.fp);
  metrics.per_class[1] = fill(metrics.tp, metrics.fp, metrics.fn);
  return metrics;
}

void WriteMetrics(const MetricsTable& metrics, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("cannot write metrics: " + path);
  }
  out << "metric,class,value\n";
  out << "accuracy,," << FormatCell(metrics.accuracy) << '\n';
  for (int c = 0; c < 2; ++c) {
    const ClassMetrics& m = metrics.per_class[static_cast<std::size_t>(c)];
    out << "precision," << c << ',' << FormatCell(m.precision)
        << (m.zero_denominator ? ",zero_denominator" : "") << '\n';
    out << "recall," << c << ',' << FormatCell(m.recall) << '\n';
    out << "f1," << c << ',' << FormatCell(m.f1) << '\n';
  }
  out << "confusion_tp,," << metrics.tp << '\n';
  out << "confusion_fp,," << metrics.fp << '\n';
  out << "confusion_fn,," << metrics.fn << '\n';
  out << "confusion_tn,," << metrics.tn << '\n';
}

BaseLearnerConfig ApplyGridPoint(
    const BaseLearnerConfig& family,
    const std::vector<std::pair<std::string, double>>& point) {
  BaseLearnerConfig config = family;
  for (const auto& [name, value] : point) {
    const int as_int = static_cast<int>(std::llround(value));
    if (config.kind == BaseKind::kForest) {
      if (name == "n_estimators") {
        config.forest.n_estimators = as_int;
      } else if (name == "max_depth") {
        config.forest.tree.max_depth = as_int;
      } else if (name == "min_samples_split") {
        config.forest.tree.min_samples_split = as_int;
      } else if (name == "min_samples_leaf") {
        config.forest.tree.min_samples_leaf = as_int;
      } else if (name == "max_leaf_nodes") {
        config.forest.tree.max_leaf_nodes = as_int;
      } else if (name == "min_weight_fraction_leaf") {
        config.forest.tree.min_weight_fraction_leaf = value;
      } else if (name == "max_features") {
        config.forest.max_features = as_int;
      } else {
        throw ConfigError("unknown forest grid parameter: " + name);
      }
    } else {
      if (name == "n_estimators") {
        config.boosted.n_estimators = as_int;
      } else if (name == "learning_rate") {
        config.boosted.learning_rate = value;
      } else if (name == "max_depth") {
        config.boosted.max_depth = as_int;
      } else if (name == "num_leaves") {
        config.boosted.num_leaves = as_int;
      } else if (name == "lambda" || name == "reg_lambda") {
        config.boosted.lambda = value;
      } else if (name == "alpha" || name == "reg_alpha") {
        config.boosted.alpha = value;
      } else if (name == "gamma") {
        config.boosted.gamma = value;
      } else if (name == "min_child_weight") {
        config.boosted.min_child_weight = value;
      } else if (name == "colsample_bytree") {
        config.boosted.colsample_bytree = value;
      } else if (name == "colsample_bylevel") {
        config.boosted.colsample_bylevel = value;
      } else {
        throw ConfigError("unknown booster grid parameter: " + name);
      }
    }
  }
  return config;
}

namespace {

std::string ConfigKey(const std::vector<std::pair<std::string, double>>& point) {
  std::ostringstream out;
  for (const auto& [name, value] : point) {
    out << name << '=' << FormatCell(value) << ';';
  }
  return out.str();
}

}  // namespace

GridResult GridSearch(const BaseLearnerConfig& family, const GridSpec& grid,
                      const Matrix& X, const std::vector<int>& y) {
  if (grid.values.empty()) {
    throw ConfigError("grid search needs a non-empty grid");
  }
  if (grid.folds.folds.empty()) {
    throw ConfigError("grid search needs folds");
  }
  if (grid.metric != "accuracy" && grid.metric != "neg_logloss") {
    throw ConfigError("unknown grid metric: " + grid.metric);
  }
  std::size_t total = 1;
  for (const auto& [name, values] : grid.values) {
    if (values.empty()) {
      throw ConfigError("grid parameter '" + name + "' has no values");
    }
    total *= values.size();
  }

  // Enumerate the cartesian product in listed order (first axis slowest).
  std::vector<GridEntry> entries(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    std::vector<std::pair<std::string, double>> point;
    for (auto it = grid.values.rbegin(); it != grid.values.rend(); ++it) {
      point.emplace_back(it->first, it->second[rest % it->second.size()]);
      rest /= it->second.size();
    }
    std::reverse(point.begin(), point.end());
    entries[idx].config = std::move(point);
  }

  ParallelFor(total, [&](std::size_t idx) {
    GridEntry& entry = entries[idx];
    try {
      const BaseLearnerConfig config = ApplyGridPoint(family, entry.config);
      double score_sum = 0.0;
      for (const FoldSpec::Fold& fold : grid.folds.folds) {
        std::vector<std::size_t> train_rows;
        for (std::size_t r = fold.train_begin; r < fold.train_end; ++r) {
          train_rows.push_back(r);
        }
        std::vector<std::size_t> test_rows;
        for (std::size_t r = fold.test_begin; r < fold.test_end; ++r) {
          test_rows.push_back(r);
        }
        const BaseModel model = FitBase(config, SelectRows(X, train_rows),
                                        SelectLabels(y, train_rows));
        const auto probs = model.PredictProb1(SelectRows(X, test_rows));
        const auto labels = SelectLabels(y, test_rows);
        if (grid.metric == "accuracy") {
          long correct = 0;
          for (std::size_t i = 0; i < probs.size(); ++i) {
            correct += (probs[i] > 0.5 ? 1 : 0) == labels[i] ? 1 : 0;
          }
          score_sum += static_cast<double>(correct) /
                       static_cast<double>(probs.size());
        } else {
          score_sum += -LogisticLoss(probs, labels);
        }
      }
      entry.score = score_sum / static_cast<double>(grid.folds.folds.size());
      entry.trained = true;
    } catch (const std::exception&) {
      entry.trained = false;
      entry.score = -std::numeric_limits<double>::infinity();
    }
  });

  GridResult result;
  result.evaluated = total;
  std::size_t best_idx = total;
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (!entries[idx].trained) {
      continue;
    }
    if (best_idx == total || entries[idx].score > entries[best_idx].score) {
      best_idx = idx;
    }
  }
  if (best_idx == total) {
    throw DataError("grid search failed: no combination trained successfully");
  }
  result.best = entries[best_idx];
  result.leaderboard = std::move(entries);
  std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(),
                   [](const GridEntry& a, const GridEntry& b) {
                     if (a.score != b.score) {
                       return a.score > b.score;
                     }
                     return ConfigKey(a.config) < ConfigKey(b.config);
                   });
  return result;
}

void WriteLeaderboard(const GridResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("cannot write leaderboard: " + path);
  }
  out << "rank,config,score,trained\n";
  for (std::size_t i = 0; i < result.leaderboard.size(); ++i) {
    const GridEntry& entry = result.leaderboard[i];
    out << (i + 1) << ',' << ConfigKey(entry.config) << ','
        << FormatCell(entry.score) << ',' << (entry.trained ? 1 : 0) << '\n';
  }
}

}  // namespace factorlab

#include "factorlab/learners.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "factorlab/common.h"
#include "factorlab/csv.h"

namespace factorlab {

namespace {

double Sigmoid(double x) {
  return 1.0 / (1.0 + std::exp(-x));
}

double Gini(double w0, double w1) {
  const double w = w0 + w1;
  if (w <= 0.0) {
    return 0.0;
  }
  return 1.0 - (w0 * w0 + w1 * w1) / (w * w);
}

double SoftThreshold(double g, double alpha) {
  if (g > alpha) {
    return g - alpha;
  }
  if (g < -alpha) {
    return g + alpha;
  }
  return 0.0;
}

// Without replacement; result ascending so split search scans features in
// index order (tie-break contract).
std::vector<int> SampleFeatures(int d, int k, std::mt19937_64* rng) {
  std::vector<int> all(d);
  std::iota(all.begin(), all.end(), 0);
  if (k >= d) {
    return all;
  }
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> dist(i, d - 1);
    std::swap(all[i], all[dist(*rng)]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

struct ClassSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // weighted impurity decrease
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

ClassSplit BestClassSplit(const Matrix& X, const std::vector<int>& y,
                          const std::vector<double>& weights,
                          const std::vector<std::size_t>& samples,
                          const std::vector<int>& features,
                          const TreeParams& params, double root_weight) {
  ClassSplit best;
  double w0 = 0.0;
  double w1 = 0.0;
  for (std::size_t i : samples) {
    (y[i] == 1 ? w1 : w0) += weights[i];
  }
  const double node_weight = w0 + w1;
  const double node_impurity = Gini(w0, w1);
  if (node_impurity <= 0.0) {
    return best;
  }

  std::vector<std::pair<double, std::size_t>> sorted;
  sorted.reserve(samples.size());
  for (int f : features) {
    sorted.clear();
    for (std::size_t i : samples) {
      sorted.emplace_back(X[i][f], i);
    }
    std::sort(sorted.begin(), sorted.end());
    double lw0 = 0.0;
    double lw1 = 0.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const std::size_t row = sorted[i].second;
      (y[row] == 1 ? lw1 : lw0) += weights[row];
      if (sorted[i].first == sorted[i + 1].first) {
        continue;
      }
      const std::size_t left_count = i + 1;
      const std::size_t right_count = sorted.size() - left_count;
      if (left_count < static_cast<std::size_t>(params.min_samples_leaf) ||
          right_count < static_cast<std::size_t>(params.min_samples_leaf)) {
        continue;
      }
      const double lw = lw0 + lw1;
      const double rw = node_weight - lw;
      if (lw < params.min_weight_fraction_leaf * root_weight ||
          rw < params.min_weight_fraction_leaf * root_weight) {
        continue;
      }
      const double gain = node_weight * node_impurity -
                          lw * Gini(lw0, lw1) -
                          rw * Gini(w0 - lw0, w1 - lw1);
      // Zero-gain splits on impure nodes are allowed: deeper levels may
      // still untangle the classes (e.g. XOR-like targets).
      if (gain >= 0.0 && (!best.found || gain > best.gain)) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        best.gain = gain;
      }
    }
  }
  if (best.found) {
    for (std::size_t i : samples) {
      (X[i][best.feature] <= best.threshold ? best.left : best.right)
          .push_back(i);
    }
  }
  return best;
}

int TraverseLeaf(const TreeModel& model, const std::vector<double>& row) {
  int node = 0;
  while (model.nodes[node].feature >= 0) {
    const TreeNode& n = model.nodes[node];
    node = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return node;
}

}  // namespace

double TreeModel::PredictProb1(const std::vector<double>& row) const {
  return nodes[TraverseLeaf(*this, row)].prob1;
}

double TreeModel::PredictWeight(const std::vector<double>& row) const {
  return nodes[TraverseLeaf(*this, row)].weight;
}

TreeModel FitTree(const Matrix& X, const std::vector<int>& y,
                  const std::vector<double>& weights, const TreeParams& params,
                  std::uint64_t seed) {
  if (X.empty() || X.size() != y.size() || X.size() != weights.size()) {
    throw DataError("tree training data misaligned or empty");
  }
  const int d = static_cast<int>(X[0].size());
  TreeModel model;
  model.n_features = d;

  std::vector<std::size_t> root_samples;
  double root_weight = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (weights[i] > 0.0) {
      root_samples.push_back(i);
      root_weight += weights[i];
    }
  }
  if (root_samples.empty()) {
    throw DataError("no samples with positive weight");
  }

  struct Pending {
    int node = 0;
    int depth = 0;
    ClassSplit split;
    std::vector<std::size_t> samples;
  };
  // Best-first expansion keyed by impurity decrease so max_leaf_nodes trims
  // the least useful splits; order is immaterial without a leaf cap.
  auto cmp = [](const Pending& a, const Pending& b) {
    if (a.split.gain != b.split.gain) {
      return a.split.gain < b.split.gain;
    }
    return a.node > b.node;
  };
  std::priority_queue<Pending, std::vector<Pending>, decltype(cmp)> queue(cmp);

  const int max_features = params.max_features > 0 ? params.max_features : d;
  int node_counter = 0;

  auto make_node = [&](const std::vector<std::size_t>& samples) {
    TreeNode node;
    double w0 = 0.0;
    double w1 = 0.0;
    for (std::size_t i : samples) {
      (y[i] == 1 ? w1 : w0) += weights[i];
    }
    node.prob1 = w1 / (w0 + w1);
    model.nodes.push_back(node);
    return node_counter++;
  };

  auto try_enqueue = [&](int node, int depth,
                         std::vector<std::size_t> samples) {
    if (params.max_depth >= 0 && depth >= params.max_depth) {
      return;
    }
    if (samples.size() < static_cast<std::size_t>(params.min_samples_split)) {
      return;
    }
    std::mt19937_64 rng(DeriveSeed(seed, static_cast<std::uint64_t>(node)));
    const std::vector<int> features = SampleFeatures(d, max_features, &rng);
    ClassSplit split = BestClassSplit(X, y, weights, samples, features, params,
                                      root_weight);
    if (!split.found) {
      return;
    }
    queue.push(Pending{node, depth, std::move(split), std::move(samples)});
  };

  const int root = make_node(root_samples);
  try_enqueue(root, 0, root_samples);

  int leaves = 1;
  while (!queue.empty()) {
    if (params.max_leaf_nodes >= 1 && leaves >= params.max_leaf_nodes) {
      break;
    }
    // priority_queue::top is const; copy is fine at these sizes.
    Pending pending = queue.top();
    queue.pop();
    TreeNode& node = model.nodes[pending.node];
    node.feature = pending.split.feature;
    node.threshold = pending.split.threshold;
    node.gain = pending.split.gain;
    const int left = make_node(pending.split.left);
    const int right = make_node(pending.split.right);
    model.nodes[pending.node].left = left;
    model.nodes[pending.node].right = right;
    ++leaves;
    try_enqueue(left, pending.depth + 1, std::move(pending.split.left));
    try_enqueue(right, pending.depth + 1, std::move(pending.split.right));
  }
  return model;
}

std::vector<double> ForestModel::PredictProb1(const Matrix& X) const {
  std::vector<double> out(X.size(), 0.0);
  for (std::size_t r = 0; r < X.size(); ++r) {
    double sum = 0.0;
    for (const TreeModel& tree : trees) {
      sum += tree.PredictProb1(X[r]);
    }
    out[r] = sum / static_cast<double>(trees.size());
  }
  return out;
}

ForestModel FitForest(const Matrix& X, const std::vector<int>& y,
                      const ForestParams& params) {
  if (params.n_estimators < 1) {
    throw ConfigError("n_estimators must be >= 1");
  }
  if (X.empty()) {
    throw DataError("empty training data");
  }
  const int d = static_cast<int>(X[0].size());
  ForestModel model;
  model.params = params;
  model.trees.resize(params.n_estimators);
  model.oob_indices.resize(params.n_estimators);

  TreeParams tree_params = params.tree;
  tree_params.max_features =
      params.max_features > 0
          ? params.max_features
          : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  const std::size_t n = X.size();
  ParallelFor(static_cast<std::size_t>(params.n_estimators),
              [&](std::size_t t) {
                std::vector<double> weights(n, 1.0);
                if (params.bootstrap) {
                  std::mt19937_64 rng(DeriveSeed(params.seed, t, 0xB007));
                  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
                  std::fill(weights.begin(), weights.end(), 0.0);
                  for (std::size_t i = 0; i < n; ++i) {
                    weights[dist(rng)] += 1.0;
                  }
                  for (std::size_t i = 0; i < n; ++i) {
                    if (weights[i] == 0.0) {
                      model.oob_indices[t].push_back(i);
                    }
                  }
                }
                model.trees[t] = FitTree(X, y, weights, tree_params,
                                         DeriveSeed(params.seed, t, 0x17EE));
              });
  return model;
}

std::vector<double> ForestImportance(const ForestModel& model, const Matrix& X,
                                     const std::vector<int>& y,
                                     ImportanceMode mode, std::uint64_t seed,
                                     int repeats) {
  const int d = model.trees.empty() ? 0 : model.trees[0].n_features;
  std::vector<double> importance(d, 0.0);
  if (mode == ImportanceMode::kImpurity) {
    for (const TreeModel& tree : model.trees) {
      for (const TreeNode& node : tree.nodes) {
        if (node.feature >= 0) {
          importance[node.feature] += node.gain;
        }
      }
    }
    const double total =
        std::accumulate(importance.begin(), importance.end(), 0.0);
    if (total > 0.0) {
      for (double& v : importance) {
        v /= total;
      }
    }
    return importance;
  }

  auto accuracy = [&](const Matrix& data) {
    const auto prob = model.PredictProb1(data);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
      if ((prob[i] > 0.5 ? 1 : 0) == y[i]) {
        ++hits;
      }
    }
    return static_cast<double>(hits) / static_cast<double>(prob.size());
  };
  const double base = accuracy(X);
  ParallelFor(static_cast<std::size_t>(d), [&](std::size_t f) {
    double drop_sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      std::mt19937_64 rng(DeriveSeed(seed, f, static_cast<std::uint64_t>(r)));
      std::vector<std::size_t> perm(X.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix shuffled = X;
      for (std::size_t i = 0; i < X.size(); ++i) {
        shuffled[i][f] = X[perm[i]][f];
      }
      drop_sum += base - accuracy(shuffled);
    }
    importance[f] = drop_sum / repeats;
  });
  return importance;
}

double SplitGain(double g_left, double h_left, double g_right, double h_right,
                 double lambda, double gamma) {
  const double g_total = g_left + g_right;
  const double h_total = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) +
                g_right * g_right / (h_right + lambda) -
                g_total * g_total / (h_total + lambda)) -
         gamma;
}

namespace {

struct BoostSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

BoostSplit BestBoostSplit(const Matrix& X, const std::vector<double>& grad,
                          const std::vector<double>& hess,
                          const std::vector<std::size_t>& samples,
                          const std::vector<int>& features,
                          const BoostedParams& params) {
  BoostSplit best;
  double g_total = 0.0;
  double h_total = 0.0;
  for (std::size_t i : samples) {
    g_total += grad[i];
    h_total += hess[i];
  }
  std::vector<std::pair<double, std::size_t>> sorted;
  sorted.reserve(samples.size());
  for (int f : features) {
    sorted.clear();
    for (std::size_t i : samples) {
      sorted.emplace_back(X[i][f], i);
    }
    std::sort(sorted.begin(), sorted.end());
    double g_left = 0.0;
    double h_left = 0.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      g_left += grad[sorted[i].second];
      h_left += hess[sorted[i].second];
      if (sorted[i].first == sorted[i + 1].first) {
        continue;
      }
      const double h_right = h_total - h_left;
      if (h_left < params.min_child_weight ||
          h_right < params.min_child_weight) {
        continue;
      }
      const double gain = SplitGain(g_left, h_left, g_total - g_left, h_right,
                                    params.lambda, params.gamma);
      if (gain > 0.0 && (!best.found || gain > best.gain)) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        best.gain = gain;
      }
    }
  }
  if (best.found) {
    for (std::size_t i : samples) {
      (X[i][best.feature] <= best.threshold ? best.left : best.right)
          .push_back(i);
    }
  }
  return best;
}

std::vector<int> LevelFeatures(const std::vector<int>& tree_features,
                               double rate, std::uint64_t seed) {
  if (rate >= 1.0) {
    return tree_features;
  }
  const int k = std::max(
      1, static_cast<int>(std::ceil(rate * tree_features.size())));
  std::mt19937_64 rng(seed);
  std::vector<int> pool = tree_features;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
    std::swap(pool[i], pool[dist(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double LeafWeight(const std::vector<double>& grad,
                  const std::vector<double>& hess,
                  const std::vector<std::size_t>& samples,
                  const BoostedParams& params) {
  double g = 0.0;
  double h = 0.0;
  for (std::size_t i : samples) {
    g += grad[i];
    h += hess[i];
  }
  return -SoftThreshold(g, params.alpha) / (h + params.lambda);
}

TreeModel BuildBoostTree(const Matrix& X, const std::vector<double>& grad,
                         const std::vector<double>& hess,
                         const std::vector<int>& tree_features,
                         const BoostedParams& params, std::uint64_t seed) {
  TreeModel model;
  model.n_features = static_cast<int>(X[0].size());

  struct Open {
    int node = 0;
    int depth = 0;
    std::vector<std::size_t> samples;
    BoostSplit split;
  };

  auto make_node = [&](const std::vector<std::size_t>& samples) {
    TreeNode node;
    node.weight = LeafWeight(grad, hess, samples, params);
    model.nodes.push_back(node);
    return static_cast<int>(model.nodes.size()) - 1;
  };

  auto find_split = [&](Open* open) {
    const auto features = LevelFeatures(
        tree_features, params.colsample_bylevel,
        DeriveSeed(seed, static_cast<std::uint64_t>(open->depth), 0x1E7E1));
    open->split = BestBoostSplit(X, grad, hess, open->samples, features, params);
  };

  std::vector<std::size_t> root_samples(X.size());
  std::iota(root_samples.begin(), root_samples.end(), 0);
  const int root = make_node(root_samples);

  if (params.growth == Growth::kLevelWise) {
    std::vector<Open> frontier;
    frontier.push_back(Open{root, 0, std::move(root_samples), {}});
    while (!frontier.empty()) {
      std::vector<Open> next;
      for (Open& open : frontier) {
        if (open.depth >= params.max_depth) {
          continue;
        }
        find_split(&open);
        if (!open.split.found) {
          continue;
        }
        TreeNode& node = model.nodes[open.node];
        node.feature = open.split.feature;
        node.threshold = open.split.threshold;
        node.gain = open.split.gain;
        const int left = make_node(open.split.left);
        const int right = make_node(open.split.right);
        model.nodes[open.node].left = left;
        model.nodes[open.node].right = right;
        next.push_back(Open{left, open.depth + 1, std::move(open.split.left), {}});
        next.push_back(
            Open{right, open.depth + 1, std::move(open.split.right), {}});
      }
      frontier = std::move(next);
    }
    return model;
  }

  // Leaf-wise: repeatedly split the highest-gain leaf.
  std::vector<Open> leaves;
  Open root_open{root, 0, std::move(root_samples), {}};
  find_split(&root_open);
  leaves.push_back(std::move(root_open));
  int leaf_count = 1;
  while (leaf_count < params.num_leaves) {
    int best = -1;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!leaves[i].split.found) {
        continue;
      }
      if (best < 0 || leaves[i].split.gain > leaves[best].split.gain ||
          (leaves[i].split.gain == leaves[best].split.gain &&
           leaves[i].node < leaves[best].node)) {
        best = static_cast<int>(i);
      }
    }
    if (best < 0) {
      break;
    }
    Open open = std::move(leaves[best]);
    leaves.erase(leaves.begin() + best);
    TreeNode& node = model.nodes[open.node];
    node.feature = open.split.feature;
    node.threshold = open.split.threshold;
    node.gain = open.split.gain;
    const int left = make_node(open.split.left);
    const int right = make_node(open.split.right);
    model.nodes[open.node].left = left;
    model.nodes[open.node].right = right;
    Open left_open{left, open.depth + 1, std::move(open.split.left), {}};
    Open right_open{right, open.depth + 1, std::move(open.split.right), {}};
    find_split(&left_open);
    find_split(&right_open);
    leaves.push_back(std::move(left_open));
    leaves.push_back(std::move(right_open));
    ++leaf_count;
  }
  return model;
}

}  // namespace

std::vector<double> BoostedModel::PredictScore(const Matrix& X) const {
  std::vector<double> score(X.size(), base_score);
  for (const TreeModel& tree : trees) {
    for (std::size_t r = 0; r < X.size(); ++r) {
      score[r] += params.learning_rate * tree.PredictWeight(X[r]);
    }
  }
  return score;
}

std::vector<double> BoostedModel::PredictProb1(const Matrix& X) const {
  auto score = PredictScore(X);
  for (double& s : score) {
    s = Sigmoid(s);
  }
  return score;
}

BoostedModel FitBoosted(const Matrix& X, const std::vector<int>& y,
                        const BoostedParams& params) {
  if (params.n_estimators < 0) {
    throw ConfigError("n_estimators must be >= 0");
  }
  if (X.empty() || X.size() != y.size()) {
    throw DataError("boosted training data misaligned or empty");
  }
  const std::size_t n = X.size();
  double mean = 0.0;
  for (int label : y) {
    mean += label;
  }
  mean /= static_cast<double>(n);
  if (mean <= 0.0 || mean >= 1.0) {
    throw DataError("degenerate target: single-class labels");
  }

  BoostedModel model;
  model.params = params;
  model.base_score = std::log(mean / (1.0 - mean));

  const int d = static_cast<int>(X[0].size());
  std::vector<int> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);

  std::vector<double> score(n, model.base_score);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = Sigmoid(score[i]);
      grad[i] = p - static_cast<double>(y[i]);
      hess[i] = p * (1.0 - p);
    }
    std::vector<int> tree_features = all_features;
    if (params.colsample_bytree < 1.0) {
      std::mt19937_64 rng(
          DeriveSeed(params.seed, static_cast<std::uint64_t>(m), 0xC011));
      const int k = std::max(
          1, static_cast<int>(std::ceil(params.colsample_bytree * d)));
      for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> dist(
            i, tree_features.size() - 1);
        std::swap(tree_features[i], tree_features[dist(rng)]);
      }
      tree_features.resize(k);
      std::sort(tree_features.begin(), tree_features.end());
    }
    TreeModel tree = BuildBoostTree(
        X, grad, hess, tree_features, params,
        DeriveSeed(params.seed, static_cast<std::uint64_t>(m), 0x7EEE));
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += params.learning_rate * tree.PredictWeight(X[i]);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double LogisticLoss(const std::vector<double>& prob1,
                    const std::vector<int>& y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < prob1.size(); ++i) {
    const double p = std::clamp(prob1[i], 1e-12, 1.0 - 1e-12);
    loss += y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return loss / static_cast<double>(prob1.size());
}

Matrix PredictProba(const ForestModel& model, const Matrix& X) {
  const auto p1 = model.PredictProb1(X);
  Matrix out(X.size(), std::vector<double>(2));
  for (std::size_t i = 0; i < p1.size(); ++i) {
    out[i][0] = 1.0 - p1[i];
    out[i][1] = p1[i];
  }
  return out;
}

Matrix PredictProba(const BoostedModel& model, const Matrix& X) {
  const auto p1 = model.PredictProb1(X);
  Matrix out(X.size(), std::vector<double>(2));
  for (std::size_t i = 0; i < p1.size(); ++i) {
    out[i][0] = 1.0 - p1[i];
    out[i][1] = p1[i];
  }
  return out;
}

namespace {

void WriteTree(std::ostream& out, const TreeModel& tree) {
  out << "tree " << tree.nodes.size() << ' ' << tree.n_features << '\n';
  for (const TreeNode& node : tree.nodes) {
    out << node.feature << ' ' << FormatCell(node.threshold) << ' '
        << node.left << ' ' << node.right << ' ' << FormatCell(node.prob1)
        << ' ' << FormatCell(node.weight) << ' ' << FormatCell(node.gain)
        << '\n';
  }
}

TreeModel ReadTree(std::istream& in) {
  std::string tag;
  std::size_t count = 0;
  TreeModel tree;
  in >> tag >> count >> tree.n_features;
  if (tag != "tree") {
    throw FormatError("model file: expected tree record, got '" + tag + "'");
  }
  tree.nodes.resize(count);
  for (TreeNode& node : tree.nodes) {
    in >> node.feature >> node.threshold >> node.left >> node.right >>
        node.prob1 >> node.weight >> node.gain;
  }
  if (!in.good()) {
    throw FormatError("model file: truncated tree record");
  }
  return tree;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("cannot write model file: " + path);
  }
  out.precision(17);
  return out;
}

std::ifstream OpenIn(const std::string& path, const std::string& expect_type) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw DataError("cannot open model file: " + path);
  }
  std::string magic;
  std::string version;
  std::string type;
  in >> magic >> version >> type;
  if (magic != "factorlab-model" || version != "v1") {
    throw FormatError(path + ": not a v1 model file");
  }
  if (type != expect_type) {
    throw FormatError(path + ": expected " + expect_type + " model, found " +
                      type);
  }
  return in;
}

}  // namespace

void SaveForest(const ForestModel& model, const std::string& path) {
  auto out = OpenOut(path);
  out << "factorlab-model v1 forest\n";
  out << "n_estimators " << model.trees.size() << '\n';
  out << "seed " << model.params.seed << '\n';
  for (const TreeModel& tree : model.trees) {
    WriteTree(out, tree);
  }
}

ForestModel LoadForest(const std::string& path) {
  auto in = OpenIn(path, "forest");
  std::string key;
  std::size_t count = 0;
  in >> key >> count;
  ForestModel model;
  in >> key >> model.params.seed;
  model.params.n_estimators = static_cast<int>(count);
  model.trees.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    model.trees.push_back(ReadTree(in));
  }
  model.oob_indices.resize(count);
  return model;
}

void SaveBoosted(const BoostedModel& model, const std::string& path) {
  auto out = OpenOut(path);
  out << "factorlab-model v1 boosted\n";
  out << "n_estimators " << model.trees.size() << '\n';
  out << "base_score " << FormatCell(model.base_score) << '\n';
  out << "learning_rate " << FormatCell(model.params.learning_rate) << '\n';
  out << "growth "
      << (model.params.growth == Growth::kLeafWise ? "leaf_wise" : "level_wise")
      << '\n';
  for (const TreeModel& tree : model.trees) {
    WriteTree(out, tree);
  }
}

BoostedModel LoadBoosted(const std::string& path) {
  auto in = OpenIn(path, "boosted");
  std::string key;
  std::size_t count = 0;
  std::string growth;
  BoostedModel model;
  in >> key >> count;
  in >> key >> model.base_score;
  in >> key >> model.params.learning_rate;
  in >> key >> growth;
  model.params.growth =
      growth == "leaf_wise" ? Growth::kLeafWise : Growth::kLevelWise;
  model.params.n_estimators = static_cast<int>(count);
  model.trees.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    model.trees.push_back(ReadTree(in));
  }
  return model;
}

}  // namespace factorlab

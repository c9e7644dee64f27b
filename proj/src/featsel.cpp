#include "factorlab/featsel.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "factorlab/common.h"
#include "factorlab/csv.h"
#include "factorlab/stats.h"

namespace factorlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> ColumnOf(const Matrix& X, std::size_t col) {
  std::vector<double> out(X.size());
  for (std::size_t r = 0; r < X.size(); ++r) {
    out[r] = X[r][col];
  }
  return out;
}

// Lower-triangular Cholesky; returns the failing pivot index or -1.
int TryCholesky(const std::vector<std::vector<double>>& a,
                std::vector<std::vector<double>>* l, double tol) {
  const std::size_t n = a.size();
  l->assign(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j][j];
    for (std::size_t k = 0; k < j; ++k) {
      diag -= (*l)[j][k] * (*l)[j][k];
    }
    if (diag <= tol) {
      return static_cast<int>(j);
    }
    (*l)[j][j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = a[i][j];
      for (std::size_t k = 0; k < j; ++k) {
        sum -= (*l)[i][k] * (*l)[j][k];
      }
      (*l)[i][j] = sum / (*l)[j][j];
    }
  }
  return -1;
}

std::vector<double> CholeskySolve(const std::vector<std::vector<double>>& l,
                                  std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      b[i] -= l[i][k] * b[k];
    }
    b[i] /= l[i][i];
  }
  for (std::size_t ii = n; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    for (std::size_t k = i + 1; k < n; ++k) {
      b[i] -= l[k][i] * b[k];
    }
    b[i] /= l[i][i];
  }
  return b;
}

double BinomialUpperTail(int n, int k) {
  // P(X >= k) for X ~ Binomial(n, 1/2), exact summation in log space.
  if (k <= 0) {
    return 1.0;
  }
  double tail = 0.0;
  for (int i = k; i <= n; ++i) {
    double log_term = -n * std::log(2.0) + std::lgamma(n + 1.0) -
                      std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    tail += std::exp(log_term);
  }
  return std::min(tail, 1.0);
}

}  // namespace

Standardizer Standardizer::Fit(const Matrix& X,
                               const std::vector<std::size_t>& train_rows) {
  if (train_rows.empty() || X.empty()) {
    throw DataError("standardizer needs non-empty training rows");
  }
  const std::size_t d = X[0].size();
  Standardizer s;
  s.means_.resize(d);
  s.stdevs_.resize(d);
  s.zero_variance_.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> values;
    values.reserve(train_rows.size());
    for (std::size_t r : train_rows) {
      values.push_back(X[r][c]);
    }
    s.means_[c] = Mean(values);
    const double sd = Stdev(values, 0);
    s.zero_variance_[c] = !(sd > 0.0);
    s.stdevs_[c] = s.zero_variance_[c] ? 1.0 : sd;
  }
  return s;
}

Matrix Standardizer::Transform(const Matrix& X) const {
  Matrix out = X;
  for (auto& row : out) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = zero_variance_[c] ? 0.0 : (row[c] - means_[c]) / stdevs_[c];
    }
  }
  return out;
}

std::vector<double> AnovaFScores(const Matrix& X, const std::vector<int>& y) {
  const std::size_t n = X.size();
  if (n == 0 || n != y.size()) {
    throw DataError("anova inputs misaligned");
  }
  std::size_t n1 = 0;
  for (int label : y) {
    n1 += label == 1 ? 1 : 0;
  }
  const std::size_t n0 = n - n1;
  if (n0 < 2 || n1 < 2) {
    throw DataError("degenerate target: each class needs >= 2 samples");
  }
  const std::size_t d = X[0].size();
  std::vector<double> scores(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    double sum0 = 0.0;
    double sum1 = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      (y[r] == 1 ? sum1 : sum0) += X[r][c];
    }
    const double mean0 = sum0 / static_cast<double>(n0);
    const double mean1 = sum1 / static_cast<double>(n1);
    const double grand = (sum0 + sum1) / static_cast<double>(n);
    double within = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dev = X[r][c] - (y[r] == 1 ? mean1 : mean0);
      within += dev * dev;
    }
    const double between =
        static_cast<double>(n0) * (mean0 - grand) * (mean0 - grand) +
        static_cast<double>(n1) * (mean1 - grand) * (mean1 - grand);
    // df_between = 1, df_within = n - 2.
    if (within <= 0.0) {
      scores[c] = between > 0.0 ? kInf : 0.0;
    } else {
      scores[c] = between / (within / static_cast<double>(n - 2));
    }
  }
  return scores;
}

std::vector<std::size_t> SelectPercentile(const std::vector<double>& scores,
                                          double pct) {
  if (pct <= 0.0 || pct > 100.0) {
    throw ConfigError("percentile must be in (0, 100]");
  }
  const std::size_t n = scores.size();
  std::size_t k = static_cast<std::size_t>(
      std::floor(pct / 100.0 * static_cast<double>(n) + 0.5));
  k = std::clamp<std::size_t>(k, 1, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> PearsonPrune(const Matrix& X,
                                      const std::vector<std::size_t>& priority,
                                      double threshold) {
  std::vector<std::size_t> kept;
  std::vector<std::vector<double>> kept_cols;
  for (std::size_t c : priority) {
    const auto col = ColumnOf(X, c);
    bool keep = true;
    for (const auto& other : kept_cols) {
      const auto corr = PearsonCorrelation(col, other);
      if (corr.has_value() && std::fabs(*corr) > threshold) {
        keep = false;
        break;
      }
    }
    if (keep) {
      kept.push_back(c);
      kept_cols.push_back(col);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<double> ChiSquareScores(const Matrix& X, const std::vector<int>& y,
                                    int bins) {
  if (bins < 2) {
    throw ConfigError("chi-square needs >= 2 bins");
  }
  const std::size_t n = X.size();
  if (n == 0 || n != y.size()) {
    throw DataError("chi-square inputs misaligned");
  }
  std::size_t n1 = 0;
  for (int label : y) {
    n1 += label == 1 ? 1 : 0;
  }
  if (n1 == 0 || n1 == n) {
    throw DataError("degenerate target: single-class labels");
  }
  const std::size_t d = X[0].size();
  std::vector<double> scores(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> sorted = ColumnOf(X, c);
    std::sort(sorted.begin(), sorted.end());
    // Interior quantile edges; duplicates collapse (ties share a bin).
    std::vector<double> edges;
    for (int b = 1; b < bins; ++b) {
      const std::size_t idx =
          std::min(n - 1, static_cast<std::size_t>(
                              static_cast<double>(b) * n / bins));
      edges.push_back(sorted[idx]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const std::size_t n_bins = edges.size() + 1;
    std::vector<std::array<double, 2>> counts(n_bins, {0.0, 0.0});
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t bin = static_cast<std::size_t>(
          std::lower_bound(edges.begin(), edges.end(), X[r][c]) -
          edges.begin());
      counts[bin][y[r] == 1 ? 1 : 0] += 1.0;
    }
    // Empty bin rows add nothing; skipping them equals merging.
    const double p1 = static_cast<double>(n1) / static_cast<double>(n);
    double chi2 = 0.0;
    for (const auto& row : counts) {
      const double total = row[0] + row[1];
      if (total <= 0.0) {
        continue;
      }
      const double e1 = total * p1;
      const double e0 = total - e1;
      chi2 += (row[0] - e0) * (row[0] - e0) / e0 +
              (row[1] - e1) * (row[1] - e1) / e1;
    }
    scores[c] = chi2;
  }
  return scores;
}

std::vector<double> VifScores(const Matrix& X) {
  const std::size_t n = X.size();
  if (n == 0) {
    throw DataError("vif: empty matrix");
  }
  const std::size_t d = X[0].size();
  if (n <= d) {
    throw DataError("vif needs more rows than columns");
  }
  if (d < 2) {
    return std::vector<double>(d, 1.0);
  }

  // Standardize defensively; VIF is scale-invariant.
  std::vector<std::vector<double>> cols(d);
  std::vector<bool> constant(d, false);
  for (std::size_t c = 0; c < d; ++c) {
    cols[c] = ColumnOf(X, c);
    const double mean = Mean(cols[c]);
    const double sd = Stdev(cols[c], 0);
    if (!(sd > 0.0)) {
      constant[c] = true;
      std::fill(cols[c].begin(), cols[c].end(), 0.0);
      continue;
    }
    for (double& v : cols[c]) {
      v = (v - mean) / sd;
    }
  }

  std::vector<double> vif(d, 1.0);
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < d; ++c) {
    if (!constant[c]) {
      active.push_back(c);
    }
  }

  auto correlation_matrix = [&](const std::vector<std::size_t>& set) {
    std::vector<std::vector<double>> r(set.size(),
                                       std::vector<double>(set.size(), 0.0));
    for (std::size_t i = 0; i < set.size(); ++i) {
      for (std::size_t j = i; j < set.size(); ++j) {
        double dot = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          dot += cols[set[i]][t] * cols[set[j]][t];
        }
        r[i][j] = r[j][i] = dot / static_cast<double>(n);
      }
    }
    return r;
  };

  const double tol = 1e-10;
  std::vector<std::vector<double>> l;
  while (active.size() >= 2) {
    auto r = correlation_matrix(active);
    const int fail = TryCholesky(r, &l, tol);
    if (fail < 0) {
      // VIF_j is the j-th diagonal of the inverse correlation matrix.
      const std::size_t m = active.size();
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> e(m, 0.0);
        e[j] = 1.0;
        vif[active[j]] = std::max(1.0, CholeskySolve(l, std::move(e))[j]);
      }
      return vif;
    }
    // Column active[fail] is linearly dependent on the preceding ones; it
    // and every column carrying weight in that dependence are perfectly
    // multicollinear, so all get the infinity sentinel.
    std::vector<std::size_t> involved = {active[static_cast<std::size_t>(fail)]};
    if (fail > 0) {
      std::vector<std::vector<double>> head(
          static_cast<std::size_t>(fail),
          std::vector<double>(static_cast<std::size_t>(fail), 0.0));
      for (int i = 0; i < fail; ++i) {
        for (int j = 0; j < fail; ++j) {
          head[i][j] = r[i][j];
        }
      }
      std::vector<std::vector<double>> head_l;
      if (TryCholesky(head, &head_l, tol) < 0) {
        std::vector<double> rhs(static_cast<std::size_t>(fail));
        for (int i = 0; i < fail; ++i) {
          rhs[i] = r[i][static_cast<std::size_t>(fail)];
        }
        const auto coef = CholeskySolve(head_l, std::move(rhs));
        for (int i = 0; i < fail; ++i) {
          if (std::fabs(coef[i]) > 1e-6) {
            involved.push_back(active[static_cast<std::size_t>(i)]);
          }
        }
      }
    }
    for (std::size_t c : involved) {
      vif[c] = kInf;
    }
    std::vector<std::size_t> next;
    for (std::size_t c : active) {
      if (std::find(involved.begin(), involved.end(), c) == involved.end()) {
        next.push_back(c);
      }
    }
    active = std::move(next);
  }
  return vif;
}

BorutaResult Boruta(const Matrix& X, const std::vector<int>& y,
                    const BorutaConfig& config) {
  if (config.max_iter < 20) {
    throw ConfigError("boruta needs max_iter >= 20");
  }
  const std::size_t n = X.size();
  if (n == 0 || n != y.size()) {
    throw DataError("boruta inputs misaligned");
  }
  const std::size_t d = X[0].size();

  BorutaResult result;
  result.hits.assign(d, 0);
  for (int it = 0; it < config.max_iter; ++it) {
    // Extended matrix: the original columns plus a row-permuted shadow copy
    // of each, doubling the column count.
    Matrix extended(n, std::vector<double>(2 * d));
    for (std::size_t r = 0; r < n; ++r) {
      std::copy(X[r].begin(), X[r].end(), extended[r].begin());
    }
    for (std::size_t c = 0; c < d; ++c) {
      std::mt19937_64 rng(
          DeriveSeed(config.seed, static_cast<std::uint64_t>(it), c));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t r = 0; r < n; ++r) {
        extended[r][d + c] = X[perm[r]][c];
      }
    }
    ForestParams forest_params = config.forest;
    forest_params.seed =
        DeriveSeed(config.seed, static_cast<std::uint64_t>(it), 0xF07E57);
    const ForestModel forest = FitForest(extended, y, forest_params);
    const auto importance = ForestImportance(
        forest, extended, y, config.importance,
        DeriveSeed(config.seed, static_cast<std::uint64_t>(it), 0x1A907));
    double shadow_max = -kInf;
    for (std::size_t c = d; c < 2 * d; ++c) {
      shadow_max = std::max(shadow_max, importance[c]);
    }
    for (std::size_t c = 0; c < d; ++c) {
      if (importance[c] > shadow_max) {
        ++result.hits[c];
      }
    }
    ++result.iterations;
  }

  result.decisions.assign(d, BorutaDecision::kTentative);
  for (std::size_t c = 0; c < d; ++c) {
    const double upper = BinomialUpperTail(result.iterations, result.hits[c]);
    const double lower =
        1.0 - BinomialUpperTail(result.iterations, result.hits[c] + 1);
    if (upper < config.alpha / 2.0) {
      result.decisions[c] = BorutaDecision::kConfirmed;
    } else if (lower < config.alpha / 2.0) {
      result.decisions[c] = BorutaDecision::kRejected;
    }
  }
  return result;
}

namespace {

Matrix ShapleyExact(const ProbModel& model, const Matrix& X,
                    const std::vector<double>& background) {
  const std::size_t d = background.size();
  const std::size_t masks = std::size_t{1} << d;
  // Shapley coalition weights by |S|.
  std::vector<double> weight(d);
  double log_fact_d = std::lgamma(static_cast<double>(d) + 1.0);
  for (std::size_t s = 0; s < d; ++s) {
    weight[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                         std::lgamma(static_cast<double>(d - s)) - log_fact_d);
  }
  Matrix values(X.size(), std::vector<double>(d, 0.0));
  ParallelFor(X.size(), [&](std::size_t r) {
    std::vector<double> v(masks);
    std::vector<double> probe = background;
    for (std::size_t mask = 0; mask < masks; ++mask) {
      for (std::size_t c = 0; c < d; ++c) {
        probe[c] = (mask >> c) & 1 ? X[r][c] : background[c];
      }
      v[mask] = model(probe);
    }
    for (std::size_t c = 0; c < d; ++c) {
      double phi = 0.0;
      for (std::size_t mask = 0; mask < masks; ++mask) {
        if ((mask >> c) & 1) {
          continue;
        }
        const std::size_t size = static_cast<std::size_t>(
            std::popcount(static_cast<unsigned long long>(mask)));
        phi += weight[size] * (v[mask | (std::size_t{1} << c)] - v[mask]);
      }
      values[r][c] = phi;
    }
  });
  return values;
}

Matrix ShapleyMonteCarlo(const ProbModel& model, const Matrix& X,
                         const std::vector<double>& background,
                         const ShapleyConfig& config) {
  const std::size_t d = background.size();
  Matrix values(X.size(), std::vector<double>(d, 0.0));
  ParallelFor(X.size(), [&](std::size_t r) {
    for (int s = 0; s < config.n_samples; ++s) {
      std::mt19937_64 rng(
          DeriveSeed(config.seed, r, static_cast<std::uint64_t>(s)));
      std::vector<std::size_t> perm(d);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<double> probe = background;
      double prev = model(probe);
      for (std::size_t k = 0; k < d; ++k) {
        probe[perm[k]] = X[r][perm[k]];
        const double next = model(probe);
        values[r][perm[k]] += (next - prev) / config.n_samples;
        prev = next;
      }
    }
  });
  return values;
}

}  // namespace

Matrix ShapleyValues(const ProbModel& model, const Matrix& X,
                     const std::vector<double>& background,
                     const ShapleyConfig& config) {
  if (config.n_samples < 1) {
    throw ConfigError("shapley needs n_samples >= 1");
  }
  if (background.size() <= static_cast<std::size_t>(config.exact_max_features)) {
    return ShapleyExact(model, X, background);
  }
  return ShapleyMonteCarlo(model, X, background, config);
}

std::vector<double> ShapleyImportance(const ProbModel& model, const Matrix& X,
                                      const std::vector<double>& background,
                                      const ShapleyConfig& config) {
  const Matrix values = ShapleyValues(model, X, background, config);
  std::vector<double> importance(background.size(), 0.0);
  for (const auto& row : values) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      importance[c] += std::fabs(row[c]);
    }
  }
  for (double& v : importance) {
    v /= static_cast<double>(values.size());
  }
  return importance;
}

namespace {

MethodReport MakeReport(const std::string& method,
                        const std::vector<std::string>& columns,
                        const std::vector<double>& scores,
                        const std::vector<bool>& kept, double threshold) {
  MethodReport report;
  report.method = method;
  report.columns = columns;
  report.scores = scores;
  report.kept = kept;
  report.threshold = threshold;
  return report;
}

}  // namespace

SelectionReport SelectPipeline(const FeatureTable& table,
                               const std::vector<int>& labels,
                               const std::vector<std::size_t>& train_rows,
                               const SelectionConfig& config) {
  if (labels.size() != table.Rows()) {
    throw DataError("labels misaligned with table");
  }
  // Training rows with complete features and a defined label.
  std::vector<std::size_t> rows;
  for (std::size_t r : train_rows) {
    if (labels[r] < 0) {
      continue;
    }
    bool complete = true;
    for (const auto& col : table.columns) {
      if (IsMissing(col[r])) {
        complete = false;
        break;
      }
    }
    if (complete) {
      rows.push_back(r);
    }
  }
  if (rows.size() < 10) {
    throw DataError("too few complete training rows for selection");
  }

  std::vector<std::string> current = table.names;
  Matrix X(rows.size());
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[i] = labels[rows[i]];
    X[i].resize(current.size());
    for (std::size_t c = 0; c < current.size(); ++c) {
      X[i][c] = table.columns[c][rows[i]];
    }
  }
  std::vector<std::size_t> all_rows(X.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  X = Standardizer::Fit(X, all_rows).Transform(X);

  SelectionReport report;
  auto restrict = [&](const std::vector<std::size_t>& kept_idx) {
    Matrix reduced(X.size());
    std::vector<std::string> names;
    for (std::size_t r = 0; r < X.size(); ++r) {
      reduced[r].reserve(kept_idx.size());
      for (std::size_t c : kept_idx) {
        reduced[r].push_back(X[r][c]);
      }
    }
    for (std::size_t c : kept_idx) {
      names.push_back(current[c]);
    }
    X = std::move(reduced);
    current = std::move(names);
    if (current.empty()) {
      throw DataError(
          "feature selection eliminated every column; loosen thresholds");
    }
  };

  // Stage 1: iterative VIF pruning.
  {
    std::vector<double> vif = VifScores(X);
    std::vector<bool> kept(current.size(), true);
    std::vector<double> last_scores = vif;
    while (true) {
      std::size_t worst = current.size();
      double worst_vif = config.vif_threshold;
      std::vector<std::size_t> active;
      for (std::size_t c = 0; c < current.size(); ++c) {
        if (kept[c]) {
          active.push_back(c);
        }
      }
      if (active.size() <= 1) {
        break;
      }
      Matrix sub(X.size());
      for (std::size_t r = 0; r < X.size(); ++r) {
        for (std::size_t c : active) {
          sub[r].push_back(X[r][c]);
        }
      }
      const auto scores = VifScores(sub);
      for (std::size_t i = 0; i < active.size(); ++i) {
        last_scores[active[i]] = scores[i];
        if (scores[i] >= worst_vif &&
            (worst == current.size() || scores[i] > last_scores[worst])) {
          worst = active[i];
          worst_vif = scores[i];
        }
      }
      if (worst == current.size()) {
        break;
      }
      kept[worst] = false;
    }
    report.stages.push_back(MakeReport("vif", current, last_scores, kept,
                                       config.vif_threshold));
    std::vector<std::size_t> kept_idx;
    for (std::size_t c = 0; c < kept.size(); ++c) {
      if (kept[c]) {
        kept_idx.push_back(c);
      }
    }
    restrict(kept_idx);
  }

  // Stage 2: ANOVA percentile filter.
  std::vector<double> f_scores = AnovaFScores(X, y);
  {
    const auto kept_idx = SelectPercentile(f_scores, config.anova_percentile);
    std::vector<bool> kept(current.size(), false);
    for (std::size_t c : kept_idx) {
      kept[c] = true;
    }
    report.stages.push_back(MakeReport("anova_f", current, f_scores, kept,
                                       config.anova_percentile));
    std::vector<double> reduced_scores;
    for (std::size_t c : kept_idx) {
      reduced_scores.push_back(f_scores[c]);
    }
    restrict(kept_idx);
    f_scores = std::move(reduced_scores);
  }

  // Stage 3: Pearson prune, priority by descending F.
  {
    std::vector<std::size_t> priority(current.size());
    std::iota(priority.begin(), priority.end(), 0);
    std::stable_sort(priority.begin(), priority.end(),
                     [&](std::size_t a, std::size_t b) {
                       return f_scores[a] > f_scores[b];
                     });
    const auto kept_idx = PearsonPrune(X, priority, config.pearson_threshold);
    std::vector<bool> kept(current.size(), false);
    for (std::size_t c : kept_idx) {
      kept[c] = true;
    }
    report.stages.push_back(MakeReport("pearson", current, f_scores, kept,
                                       config.pearson_threshold));
    restrict(kept_idx);
  }

  // Stage 4: Boruta wrapper.
  {
    BorutaConfig boruta_config = config.boruta;
    boruta_config.seed = DeriveSeed(config.seed, 0xB0247A);
    const BorutaResult boruta = Boruta(X, y, boruta_config);
    std::vector<bool> kept(current.size(), false);
    std::vector<double> hit_rate(current.size(), 0.0);
    std::vector<std::size_t> kept_idx;
    for (std::size_t c = 0; c < current.size(); ++c) {
      hit_rate[c] = static_cast<double>(boruta.hits[c]) /
                    static_cast<double>(boruta.iterations);
      const bool keep =
          boruta.decisions[c] == BorutaDecision::kConfirmed ||
          (config.keep_tentative &&
           boruta.decisions[c] == BorutaDecision::kTentative);
      if (keep) {
        kept[c] = true;
        kept_idx.push_back(c);
      }
    }
    report.stages.push_back(MakeReport("boruta", current, hit_rate, kept,
                                       boruta_config.alpha));
    restrict(kept_idx);
  }

  // Stage 5: Shapley ranking, keep top-k.
  {
    ForestParams forest_params = config.boruta.forest;
    forest_params.seed = DeriveSeed(config.seed, 0x55A9);
    const ForestModel forest = FitForest(X, y, forest_params);
    ProbModel prob = [&forest](const std::vector<double>& row) {
      double sum = 0.0;
      for (const TreeModel& tree : forest.trees) {
        sum += tree.PredictProb1(row);
      }
      return sum / static_cast<double>(forest.trees.size());
    };
    // Median training row as the single background reference.
    std::vector<double> background(current.size());
    for (std::size_t c = 0; c < current.size(); ++c) {
      auto col = ColumnOf(X, c);
      std::nth_element(col.begin(), col.begin() + col.size() / 2, col.end());
      background[c] = col[col.size() / 2];
    }
    // Cap evaluation rows to keep attribution affordable.
    Matrix eval_rows;
    const std::size_t step = std::max<std::size_t>(1, X.size() / 200);
    for (std::size_t r = 0; r < X.size(); r += step) {
      eval_rows.push_back(X[r]);
    }
    ShapleyConfig shapley_config = config.shapley;
    shapley_config.seed = DeriveSeed(config.seed, 0x5A4D);
    const auto importance =
        ShapleyImportance(prob, eval_rows, background, shapley_config);
    std::vector<std::size_t> order(current.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return importance[a] > importance[b];
                     });
    if (order.size() > config.top_k) {
      order.resize(config.top_k);
    }
    std::sort(order.begin(), order.end());
    std::vector<bool> kept(current.size(), false);
    for (std::size_t c : order) {
      kept[c] = true;
    }
    report.stages.push_back(MakeReport("shapley", current, importance, kept,
                                       static_cast<double>(config.top_k)));
    restrict(order);
  }

  report.final_kept = current;
  return report;
}

void WriteSelectionReport(const SelectionReport& report,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("cannot write selection report: " + path);
  }
  for (const MethodReport& stage : report.stages) {
    out << "== " << stage.method << " (threshold=" << stage.threshold
        << ") ==\n";
    out << "column,score,decision\n";
    for (std::size_t c = 0; c < stage.columns.size(); ++c) {
      out << stage.columns[c] << ',' << FormatCell(stage.scores[c]) << ','
          << (stage.kept[c] ? "keep" : "drop") << '\n';
    }
    out << '\n';
  }
  out << "== final ==\n";
  for (const std::string& name : report.final_kept) {
    out << name << '\n';
  }
}

}  // namespace factorlab

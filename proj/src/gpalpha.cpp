#include "factorlab/gpalpha.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "factorlab/common.h"
#include "factorlab/stats.h"

namespace factorlab {

namespace {

constexpr double kDivEps = 1e-12;

const Primitive kFunctions[] = {
    Primitive::kAdd,     Primitive::kSub,   Primitive::kMul,
    Primitive::kDiv,     Primitive::kSqrt,  Primitive::kAbs,
    Primitive::kSin,     Primitive::kCos,   Primitive::kTan,
    Primitive::kMax,     Primitive::kMin,   Primitive::kRank,
    Primitive::kScale,   Primitive::kDelta, Primitive::kTsSum,
    Primitive::kTsMin,   Primitive::kTsMax, Primitive::kTsArgMin,
    Primitive::kTsArgMax};

std::unique_ptr<ExprNode> CloneNode(const ExprNode* node) {
  if (node == nullptr) {
    return nullptr;
  }
  auto copy = std::make_unique<ExprNode>();
  copy->primitive = node->primitive;
  copy->leaf = node->leaf;
  copy->window = node->window;
  copy->left = CloneNode(node->left.get());
  copy->right = CloneNode(node->right.get());
  return copy;
}

int NodeDepth(const ExprNode* node) {
  if (node == nullptr) {
    return 0;
  }
  return 1 + std::max(NodeDepth(node->left.get()), NodeDepth(node->right.get()));
}

int CountNodes(const ExprNode* node) {
  if (node == nullptr) {
    return 0;
  }
  return 1 + CountNodes(node->left.get()) + CountNodes(node->right.get());
}

// Pre-order node addressing used by crossover and mutation.
ExprNode* NodeAt(ExprNode* node, int index, int* visited) {
  if (node == nullptr) {
    return nullptr;
  }
  if (*visited == index) {
    return node;
  }
  ++*visited;
  if (ExprNode* found = NodeAt(node->left.get(), index, visited)) {
    return found;
  }
  return NodeAt(node->right.get(), index, visited);
}

ExprNode* PickNode(AlphaExpr* expr, std::mt19937_64* rng) {
  const int count = expr->NodeCount();
  std::uniform_int_distribution<int> dist(0, count - 1);
  int visited = 0;
  return NodeAt(expr->mutable_root(), dist(*rng), &visited);
}

const std::string& FirstLeafName(const ExprNode* node) {
  while (node->primitive != Primitive::kLeaf) {
    node = node->left.get();
  }
  return node->leaf;
}

// Subtrees rooted deeper than max_depth collapse onto their leftmost leaf.
void ClampDepth(ExprNode* node, int depth, int max_depth) {
  if (node == nullptr) {
    return;
  }
  if (depth >= max_depth && node->primitive != Primitive::kLeaf) {
    std::string leaf = FirstLeafName(node);
    node->primitive = Primitive::kLeaf;
    node->leaf = std::move(leaf);
    node->window = 0;
    node->left.reset();
    node->right.reset();
    return;
  }
  ClampDepth(node->left.get(), depth + 1, max_depth);
  ClampDepth(node->right.get(), depth + 1, max_depth);
}

std::unique_ptr<ExprNode> MakeLeaf(const std::vector<std::string>& terminals,
                                   std::mt19937_64* rng) {
  auto node = std::make_unique<ExprNode>();
  std::uniform_int_distribution<std::size_t> dist(0, terminals.size() - 1);
  node->leaf = terminals[dist(*rng)];
  return node;
}

int DrawWindow(const GpConfig& config, std::mt19937_64* rng) {
  std::uniform_int_distribution<std::size_t> dist(0,
                                                  config.ts_windows.size() - 1);
  return config.ts_windows[dist(*rng)];
}

std::unique_ptr<ExprNode> GrowTree(const GpConfig& config,
                                   const std::vector<std::string>& terminals,
                                   std::mt19937_64* rng, int depth,
                                   bool full) {
  const bool must_leaf = depth >= config.max_depth;
  bool make_leaf = must_leaf;
  if (!must_leaf && !full) {
    // Grow strategy: any node may terminate early.
    std::bernoulli_distribution leaf_dist(0.3);
    make_leaf = depth > 1 && leaf_dist(*rng);
  }
  if (make_leaf) {
    return MakeLeaf(terminals, rng);
  }
  auto node = std::make_unique<ExprNode>();
  std::uniform_int_distribution<std::size_t> dist(0, std::size(kFunctions) - 1);
  node->primitive = kFunctions[dist(*rng)];
  if (IsWindowed(node->primitive)) {
    node->window = DrawWindow(config, rng);
  }
  node->left = GrowTree(config, terminals, rng, depth + 1, full);
  if (IsBinary(node->primitive)) {
    node->right = GrowTree(config, terminals, rng, depth + 1, full);
  }
  return node;
}

std::vector<double> ApplyRank(const std::vector<double>& x) {
  std::vector<double> present;
  for (double v : x) {
    if (!IsMissing(v)) {
      present.push_back(v);
    }
  }
  std::vector<double> out(x.size(), NaN());
  if (present.empty()) {
    return out;
  }
  const auto ranks = RankAverageTies(present);
  const double m = static_cast<double>(present.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!IsMissing(x[i])) {
      out[i] = m > 1.0 ? (ranks[j] - 1.0) / (m - 1.0) : 0.5;
      ++j;
    }
  }
  return out;
}

std::vector<double> ApplyScale(const std::vector<double>& x) {
  std::vector<double> present;
  for (double v : x) {
    if (!IsMissing(v)) {
      present.push_back(v);
    }
  }
  std::vector<double> out(x.size(), NaN());
  if (present.empty()) {
    return out;
  }
  const double mean = Mean(present);
  const double sd = Stdev(present, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!IsMissing(x[i])) {
      out[i] = sd > 0.0 ? (x[i] - mean) / sd : 0.0;
    }
  }
  return out;
}

std::vector<double> ApplyWindowed(Primitive primitive,
                                  const std::vector<double>& x, int window,
                                  std::size_t rows) {
  if (window < 1) {
    throw ConfigError("window must be >= 1");
  }
  if (static_cast<std::size_t>(window) > rows) {
    throw DataError("window " + std::to_string(window) +
                    " exceeds data length " + std::to_string(rows));
  }
  std::vector<double> out(x.size(), NaN());
  if (primitive == Primitive::kDelta) {
    for (std::size_t t = static_cast<std::size_t>(window); t < x.size(); ++t) {
      if (!IsMissing(x[t]) && !IsMissing(x[t - window])) {
        out[t] = x[t] - x[t - window];
      }
    }
    return out;
  }
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (t + 1 < static_cast<std::size_t>(window)) {
      continue;
    }
    const std::size_t begin = t + 1 - window;
    bool complete = true;
    for (std::size_t i = begin; i <= t; ++i) {
      if (IsMissing(x[i])) {
        complete = false;
        break;
      }
    }
    if (!complete) {
      continue;
    }
    switch (primitive) {
      case Primitive::kTsSum: {
        double sum = 0.0;
        for (std::size_t i = begin; i <= t; ++i) {
          sum += x[i];
        }
        out[t] = sum;
        break;
      }
      case Primitive::kTsMin:
      case Primitive::kTsMax: {
        double best = x[begin];
        for (std::size_t i = begin + 1; i <= t; ++i) {
          best = primitive == Primitive::kTsMax ? std::max(best, x[i])
                                                : std::min(best, x[i]);
        }
        out[t] = best;
        break;
      }
      case Primitive::kTsArgMin:
      case Primitive::kTsArgMax: {
        // Offset from window start: 0 = oldest. First extremum wins ties.
        std::size_t best = begin;
        for (std::size_t i = begin + 1; i <= t; ++i) {
          const bool better = primitive == Primitive::kTsArgMax
                                  ? x[i] > x[best]
                                  : x[i] < x[best];
          if (better) {
            best = i;
          }
        }
        out[t] = static_cast<double>(best - begin);
        break;
      }
      default:
        throw ConfigError("not a windowed primitive");
    }
  }
  return out;
}

std::vector<double> EvalNode(const ExprNode* node, const FeatureTable& table) {
  const std::size_t n = table.Rows();
  switch (node->primitive) {
    case Primitive::kLeaf:
      return table.Column(node->leaf);
    case Primitive::kAdd:
    case Primitive::kSub:
    case Primitive::kMul:
    case Primitive::kDiv:
    case Primitive::kMax:
    case Primitive::kMin: {
      const auto lhs = EvalNode(node->left.get(), table);
      const auto rhs = EvalNode(node->right.get(), table);
      std::vector<double> out(n, NaN());
      for (std::size_t i = 0; i < n; ++i) {
        if (IsMissing(lhs[i]) || IsMissing(rhs[i])) {
          continue;
        }
        switch (node->primitive) {
          case Primitive::kAdd:
            out[i] = lhs[i] + rhs[i];
            break;
          case Primitive::kSub:
            out[i] = lhs[i] - rhs[i];
            break;
          case Primitive::kMul:
            out[i] = lhs[i] * rhs[i];
            break;
          case Primitive::kDiv:
            out[i] = std::fabs(rhs[i]) < kDivEps ? 1.0 : lhs[i] / rhs[i];
            break;
          case Primitive::kMax:
            out[i] = std::max(lhs[i], rhs[i]);
            break;
          default:
            out[i] = std::min(lhs[i], rhs[i]);
            break;
        }
      }
      return out;
    }
    case Primitive::kSqrt:
    case Primitive::kAbs:
    case Primitive::kSin:
    case Primitive::kCos:
    case Primitive::kTan: {
      auto out = EvalNode(node->left.get(), table);
      for (double& v : out) {
        if (IsMissing(v)) {
          continue;
        }
        switch (node->primitive) {
          case Primitive::kSqrt:
            v = std::sqrt(std::fabs(v));
            break;
          case Primitive::kAbs:
            v = std::fabs(v);
            break;
          case Primitive::kSin:
            v = std::sin(v);
            break;
          case Primitive::kCos:
            v = std::cos(v);
            break;
          default:
            v = std::tan(v);
            break;
        }
      }
      return out;
    }
    case Primitive::kRank:
      return ApplyRank(EvalNode(node->left.get(), table));
    case Primitive::kScale:
      return ApplyScale(EvalNode(node->left.get(), table));
    case Primitive::kDelta:
    case Primitive::kTsSum:
    case Primitive::kTsMin:
    case Primitive::kTsMax:
    case Primitive::kTsArgMin:
    case Primitive::kTsArgMax:
      return ApplyWindowed(node->primitive, EvalNode(node->left.get(), table),
                           node->window, n);
  }
  throw ConfigError("unknown primitive");
}

std::size_t TournamentPick(const std::vector<Individual>& population,
                           std::size_t tournament_size, std::mt19937_64* rng) {
  std::uniform_int_distribution<std::size_t> dist(0, population.size() - 1);
  std::size_t best = dist(*rng);
  for (std::size_t i = 1; i < tournament_size; ++i) {
    const std::size_t candidate = dist(*rng);
    if (population[candidate].fitness > population[best].fitness) {
      best = candidate;
    }
  }
  return best;
}

void PointMutate(ExprNode* node, const GpConfig& config,
                 const std::vector<std::string>& terminals,
                 std::mt19937_64* rng) {
  if (node->primitive == Primitive::kLeaf) {
    node->leaf = MakeLeaf(terminals, rng)->leaf;
    return;
  }
  const bool binary = IsBinary(node->primitive);
  std::vector<Primitive> same_arity;
  for (Primitive p : kFunctions) {
    if (IsBinary(p) == binary && p != node->primitive) {
      same_arity.push_back(p);
    }
  }
  std::uniform_int_distribution<std::size_t> dist(0, same_arity.size() - 1);
  node->primitive = same_arity[dist(*rng)];
  node->window =
      IsWindowed(node->primitive) ? DrawWindow(config, rng) : 0;
}

}  // namespace

bool IsBinary(Primitive primitive) {
  switch (primitive) {
    case Primitive::kAdd:
    case Primitive::kSub:
    case Primitive::kMul:
    case Primitive::kDiv:
    case Primitive::kMax:
    case Primitive::kMin:
      return true;
    default:
      return false;
  }
}

bool IsWindowed(Primitive primitive) {
  switch (primitive) {
    case Primitive::kDelta:
    case Primitive::kTsSum:
    case Primitive::kTsMin:
    case Primitive::kTsMax:
    case Primitive::kTsArgMin:
    case Primitive::kTsArgMax:
      return true;
    default:
      return false;
  }
}

const char* PrimitiveName(Primitive primitive) {
  switch (primitive) {
    case Primitive::kLeaf:
      return "<leaf>";
    case Primitive::kAdd:
      return "gp_add";
    case Primitive::kSub:
      return "gp_sub";
    case Primitive::kMul:
      return "gp_mul";
    case Primitive::kDiv:
      return "gp_div";
    case Primitive::kSqrt:
      return "gp_sqrt";
    case Primitive::kAbs:
      return "gp_abs";
    case Primitive::kSin:
      return "gp_sin";
    case Primitive::kCos:
      return "gp_cos";
    case Primitive::kTan:
      return "gp_tan";
    case Primitive::kMax:
      return "gp_max";
    case Primitive::kMin:
      return "gp_min";
    case Primitive::kRank:
      return "rank";
    case Primitive::kScale:
      return "scale";
    case Primitive::kDelta:
      return "delta";
    case Primitive::kTsSum:
      return "ts_sum";
    case Primitive::kTsMin:
      return "ts_min";
    case Primitive::kTsMax:
      return "ts_max";
    case Primitive::kTsArgMin:
      return "ts_argmin";
    case Primitive::kTsArgMax:
      return "ts_argmax";
  }
  return "<unknown>";
}

AlphaExpr::AlphaExpr(const AlphaExpr& other) : root_(CloneNode(other.root())) {}

AlphaExpr& AlphaExpr::operator=(const AlphaExpr& other) {
  if (this != &other) {
    root_ = CloneNode(other.root());
  }
  return *this;
}

int AlphaExpr::Depth() const { return NodeDepth(root_.get()); }

int AlphaExpr::NodeCount() const { return CountNodes(root_.get()); }

std::vector<double> EvalExpr(const AlphaExpr& expr, const FeatureTable& table) {
  if (expr.empty()) {
    throw ConfigError("empty expression");
  }
  return EvalNode(expr.root(), table);
}

IcResult SpearmanIc(const std::vector<double>& factor,
                    const std::vector<double>& forward_returns) {
  if (factor.size() != forward_returns.size()) {
    throw DataError("factor and returns are not aligned");
  }
  const auto rho = SpearmanCorrelation(factor, forward_returns);
  if (!rho.has_value()) {
    return {0.0, false};
  }
  return {*rho, true};
}

std::vector<Individual> InitPopulation(
    const GpConfig& config, const std::vector<std::string>& terminals) {
  if (config.max_depth < 1) {
    throw ConfigError("max_depth must be >= 1");
  }
  if (terminals.empty()) {
    throw ConfigError("no terminals available");
  }
  std::vector<Individual> population(config.population_size);
  for (std::size_t slot = 0; slot < config.population_size; ++slot) {
    std::mt19937_64 rng(DeriveSeed(config.rng_seed, 0, slot));
    const bool full = slot >= config.population_size / 2;
    Individual individual;
    individual.expr =
        AlphaExpr(GrowTree(config, terminals, &rng, 1, full));
    population[slot] = std::move(individual);
  }
  return population;
}

void EvaluatePopulation(std::vector<Individual>* population,
                        const FeatureTable& table,
                        const std::vector<double>& forward_returns) {
  ParallelFor(population->size(), [&](std::size_t i) {
    Individual& individual = (*population)[i];
    individual.values = EvalExpr(individual.expr, table);
    const IcResult ic = SpearmanIc(individual.values, forward_returns);
    individual.degenerate = !ic.defined;
    individual.fitness = ic.defined ? std::fabs(ic.ic) : 0.0;
    individual.ic_sign = ic.ic < 0.0 ? -1 : 1;
  });
}

std::vector<Individual> EvolveGeneration(
    const std::vector<Individual>& population, const GpConfig& config,
    const std::vector<std::string>& terminals, const FeatureTable& table,
    const std::vector<double>& forward_returns, std::size_t generation) {
  if (population.empty()) {
    throw ConfigError("empty population");
  }
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return population[a].fitness > population[b].fitness;
                   });

  std::vector<Individual> next;
  next.reserve(config.population_size);
  const std::size_t elites =
      std::min(config.elite_keep, config.population_size);
  for (std::size_t e = 0; e < elites && e < population.size(); ++e) {
    Individual elite;
    elite.expr = population[order[e]].expr;
    next.push_back(std::move(elite));
  }

  const double p_total = config.p_crossover + config.p_subtree_mutation +
                         config.p_point_mutation;
  for (std::size_t slot = next.size(); slot < config.population_size; ++slot) {
    std::mt19937_64 rng(DeriveSeed(config.rng_seed, generation, slot));
    const std::size_t parent =
        TournamentPick(population, config.tournament_size, &rng);
    Individual child;
    child.expr = population[parent].expr;

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double draw = coin(rng);
    if (draw < config.p_crossover) {
      const std::size_t donor =
          TournamentPick(population, config.tournament_size, &rng);
      AlphaExpr donor_expr = population[donor].expr;
      ExprNode* site = PickNode(&child.expr, &rng);
      const ExprNode* graft = PickNode(&donor_expr, &rng);
      *site = std::move(*CloneNode(graft));
    } else if (draw < config.p_crossover + config.p_subtree_mutation) {
      ExprNode* site = PickNode(&child.expr, &rng);
      auto replacement = GrowTree(config, terminals, &rng, 1, false);
      *site = std::move(*replacement);
    } else if (draw < p_total) {
      PointMutate(PickNode(&child.expr, &rng), config, terminals, &rng);
    }
    // else: plain reproduction.

    ClampDepth(child.expr.mutable_root(), 1, config.max_depth);
    next.push_back(std::move(child));
  }
  EvaluatePopulation(&next, table, forward_returns);
  return next;
}

std::vector<Individual> DedupPool(const std::vector<Individual>& population,
                                  const GpConfig& config) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (!population[i].degenerate) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return population[a].fitness > population[b].fitness;
                   });
  std::vector<Individual> pool;
  for (std::size_t idx : order) {
    if (pool.size() >= config.pool_cap) {
      break;
    }
    bool keep = true;
    for (const Individual& kept : pool) {
      const auto corr =
          PearsonPairwiseComplete(population[idx].values, kept.values);
      if (corr.has_value() &&
          std::fabs(*corr) > config.dedup_corr_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) {
      pool.push_back(population[idx]);
    }
  }
  return pool;
}

MiningResult Mine(const FeatureTable& table,
                  const std::vector<double>& forward_returns,
                  const GpConfig& config) {
  if (table.Rows() != forward_returns.size()) {
    throw DataError("table and forward returns are not aligned");
  }
  std::vector<Individual> population =
      InitPopulation(config, table.names);
  EvaluatePopulation(&population, table, forward_returns);

  MiningResult result;
  auto best_of = [](const std::vector<Individual>& pop) {
    double best = 0.0;
    for (const Individual& ind : pop) {
      best = std::max(best, ind.fitness);
    }
    return best;
  };

  result.pool = DedupPool(population, config);
  result.best_fitness = best_of(population);
  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    population = EvolveGeneration(population, config, table.names, table,
                                  forward_returns, gen);
    result.pool = DedupPool(population, config);
    const double best = best_of(population);
    result.generations_run = gen;
    if (best - result.best_fitness <= config.early_stop_eps) {
      result.best_fitness = std::max(result.best_fitness, best);
      break;
    }
    result.best_fitness = best;
  }
  return result;
}

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  const GpConfig& config;

  void SkipSpace() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])) != 0) {
      ++pos;
    }
  }

  [[noreturn]] void Fail(const std::string& message) const {
    throw FormatError("parse error at position " + std::to_string(pos) + ": " +
                      message);
  }

  std::string Identifier() {
    SkipSpace();
    const std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) != 0 ||
            text[pos] == '_')) {
      ++pos;
    }
    if (pos == start) {
      Fail("expected identifier");
    }
    return text.substr(start, pos - start);
  }

  bool Accept(char c) {
    SkipSpace();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void Expect(char c) {
    if (!Accept(c)) {
      Fail(std::string("expected '") + c + "'");
    }
  }

  static bool LookupPrimitive(const std::string& name, Primitive* out) {
    std::string key = name;
    if (key.rfind("gp_", 0) == 0) {
      key = key.substr(3);
    }
    for (Primitive p : kFunctions) {
      std::string canonical = PrimitiveName(p);
      if (canonical.rfind("gp_", 0) == 0) {
        canonical = canonical.substr(3);
      }
      if (key == canonical) {
        *out = p;
        return true;
      }
    }
    return false;
  }

  std::unique_ptr<ExprNode> ParseNode() {
    const std::string name = Identifier();
    SkipSpace();
    Primitive primitive;
    const bool is_call = pos < text.size() && text[pos] == '(';
    if (is_call && LookupPrimitive(name, &primitive)) {
      Expect('(');
      auto node = std::make_unique<ExprNode>();
      node->primitive = primitive;
      node->left = ParseNode();
      if (IsBinary(primitive)) {
        Expect(',');
        node->right = ParseNode();
      } else if (IsWindowed(primitive)) {
        if (Accept(',')) {
          node->window = ParseWindow();
        } else {
          node->window = config.default_parse_window;
        }
      }
      Expect(')');
      return node;
    }
    if (is_call) {
      Fail("unknown primitive '" + name + "'");
    }
    auto node = std::make_unique<ExprNode>();
    node->leaf = name;
    return node;
  }

  int ParseWindow() {
    SkipSpace();
    const std::size_t start = pos;
    while (pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos])) != 0) {
      ++pos;
    }
    if (pos == start) {
      Fail("expected window literal");
    }
    return std::stoi(text.substr(start, pos - start));
  }
};

void FormatNode(const ExprNode* node, std::string* out) {
  if (node->primitive == Primitive::kLeaf) {
    *out += node->leaf;
    return;
  }
  *out += PrimitiveName(node->primitive);
  *out += '(';
  FormatNode(node->left.get(), out);
  if (IsBinary(node->primitive)) {
    *out += ", ";
    FormatNode(node->right.get(), out);
  } else if (IsWindowed(node->primitive)) {
    *out += ", ";
    *out += std::to_string(node->window);
  }
  *out += ')';
}

}  // namespace

AlphaExpr ParseExpr(const std::string& text, const GpConfig& config) {
  Parser parser{text, 0, config};
  auto root = parser.ParseNode();
  parser.SkipSpace();
  if (parser.pos != text.size()) {
    parser.Fail("trailing characters");
  }
  return AlphaExpr(std::move(root));
}

std::string FormatExpr(const AlphaExpr& expr) {
  if (expr.empty()) {
    return "";
  }
  std::string out;
  FormatNode(expr.root(), &out);
  return out;
}

}  // namespace factorlab

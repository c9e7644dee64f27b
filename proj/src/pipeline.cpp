#include "factorlab/pipeline.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "factorlab/backtest.h"
#include "factorlab/common.h"
#include "factorlab/csv.h"
#include "factorlab/dataio.h"
#include "factorlab/indicators.h"
#include "factorlab/learners.h"
#include "factorlab/stats.h"
#include "factorlab/table.h"

namespace factorlab {

namespace fs = std::filesystem;
using nlohmann::json;

PipelineConfig DefaultPipelineConfig() {
  PipelineConfig config;
  // Wrapper-stage forests stay small so select runs in minutes.
  config.selection.boruta.max_iter = 20;
  config.selection.boruta.forest.n_estimators = 40;
  config.selection.boruta.forest.tree.max_depth = 6;
  config.selection.shapley.n_samples = 200;
  return config;
}

namespace {

void CheckKeys(const json& object, const std::string& path,
               const std::vector<std::string>& allowed) {
  if (!object.is_object()) {
    throw ConfigError(path + ": expected an object");
  }
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(path + "." + key + ": unknown key");
    }
  }
}

template <typename T>
void Assign(const json& object, const std::string& key, T* out) {
  if (!object.contains(key)) {
    return;
  }
  try {
    *out = object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key + ": invalid value type");
  }
}

void AssignForest(const json& object, const std::string& path,
                  ForestParams* params) {
  CheckKeys(object, path,
            {"n_estimators", "max_depth", "min_samples_split",
             "min_samples_leaf", "max_leaf_nodes", "max_features", "seed"});
  Assign(object, "n_estimators", &params->n_estimators);
  Assign(object, "max_depth", &params->tree.max_depth);
  Assign(object, "min_samples_split", &params->tree.min_samples_split);
  Assign(object, "min_samples_leaf", &params->tree.min_samples_leaf);
  Assign(object, "max_leaf_nodes", &params->tree.max_leaf_nodes);
  Assign(object, "max_features", &params->max_features);
  Assign(object, "seed", &params->seed);
}

void AssignBooster(const json& object, const std::string& path,
                   BoostedParams* params) {
  CheckKeys(object, path,
            {"n_estimators", "learning_rate", "max_depth", "num_leaves",
             "lambda", "alpha", "gamma", "min_child_weight",
             "colsample_bytree", "colsample_bylevel", "seed"});
  Assign(object, "n_estimators", &params->n_estimators);
  Assign(object, "learning_rate", &params->learning_rate);
  Assign(object, "max_depth", &params->max_depth);
  Assign(object, "num_leaves", &params->num_leaves);
  Assign(object, "lambda", &params->lambda);
  Assign(object, "alpha", &params->alpha);
  Assign(object, "gamma", &params->gamma);
  Assign(object, "min_child_weight", &params->min_child_weight);
  Assign(object, "colsample_bytree", &params->colsample_bytree);
  Assign(object, "colsample_bylevel", &params->colsample_bylevel);
  Assign(object, "seed", &params->seed);
}

json ForestToJson(const ForestParams& params) {
  return json{{"n_estimators", params.n_estimators},
              {"max_depth", params.tree.max_depth},
              {"min_samples_split", params.tree.min_samples_split},
              {"min_samples_leaf", params.tree.min_samples_leaf},
              {"max_leaf_nodes", params.tree.max_leaf_nodes},
              {"max_features", params.max_features},
              {"seed", params.seed}};
}

json BoosterToJson(const BoostedParams& params) {
  return json{{"n_estimators", params.n_estimators},
              {"learning_rate", params.learning_rate},
              {"max_depth", params.max_depth},
              {"num_leaves", params.num_leaves},
              {"lambda", params.lambda},
              {"alpha", params.alpha},
              {"gamma", params.gamma},
              {"min_child_weight", params.min_child_weight},
              {"colsample_bytree", params.colsample_bytree},
              {"colsample_bylevel", params.colsample_bylevel},
              {"seed", params.seed}};
}

std::string ModeName(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::kBlendHoldout:
      return "blend_holdout";
    case EnsembleMode::kStackOof:
      return "stack_oof";
    case EnsembleMode::kSoftVote:
      return "soft_vote";
  }
  return "blend_holdout";
}

EnsembleMode ParseMode(const std::string& text) {
  if (text == "blend_holdout") {
    return EnsembleMode::kBlendHoldout;
  }
  if (text == "stack_oof") {
    return EnsembleMode::kStackOof;
  }
  if (text == "soft_vote") {
    return EnsembleMode::kSoftVote;
  }
  throw ConfigError("ensemble.mode: expected blend_holdout, stack_oof or "
                    "soft_vote, got '" + text + "'");
}

BaseLearnerConfig* FindBase(EnsembleSpec* spec, const std::string& name) {
  for (BaseLearnerConfig& base : spec->bases) {
    if (base.name == name) {
      return &base;
    }
  }
  return nullptr;
}

}  // namespace

PipelineConfig LoadPipelineConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw ConfigError("cannot open config file: " + path);
  }
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }

  PipelineConfig config = DefaultPipelineConfig();
  CheckKeys(root, "config",
            {"data", "label_threshold", "use_adj_close", "split", "gp",
             "sentiment", "selection", "ensemble", "tscv_folds", "grid",
             "backtest", "rng_seed", "out_dir", "profile"});
  if (root.contains("data")) {
    CheckKeys(root["data"], "data", {"ohlcv_csv", "news_csv"});
    Assign(root["data"], "ohlcv_csv", &config.ohlcv_csv);
    Assign(root["data"], "news_csv", &config.news_csv);
  }
  Assign(root, "label_threshold", &config.label_threshold);
  Assign(root, "use_adj_close", &config.use_adj_close);
  if (root.contains("split")) {
    CheckKeys(root["split"], "split", {"test_frac", "val_frac"});
    Assign(root["split"], "test_frac", &config.split.test_frac);
    Assign(root["split"], "val_frac", &config.split.val_frac);
  }
  if (root.contains("gp")) {
    const json& gp = root["gp"];
    CheckKeys(gp, "gp",
              {"population_size", "tournament_size", "generations",
               "elite_keep", "pool_cap", "dedup_corr_threshold", "max_depth",
               "ts_windows", "p_crossover", "p_subtree_mutation",
               "p_point_mutation", "early_stop_eps", "default_parse_window"});
    Assign(gp, "population_size", &config.gp.population_size);
    Assign(gp, "tournament_size", &config.gp.tournament_size);
    Assign(gp, "generations", &config.gp.generations);
    Assign(gp, "elite_keep", &config.gp.elite_keep);
    Assign(gp, "pool_cap", &config.gp.pool_cap);
    Assign(gp, "dedup_corr_threshold", &config.gp.dedup_corr_threshold);
    Assign(gp, "max_depth", &config.gp.max_depth);
    Assign(gp, "ts_windows", &config.gp.ts_windows);
    Assign(gp, "p_crossover", &config.gp.p_crossover);
    Assign(gp, "p_subtree_mutation", &config.gp.p_subtree_mutation);
    Assign(gp, "p_point_mutation", &config.gp.p_point_mutation);
    Assign(gp, "early_stop_eps", &config.gp.early_stop_eps);
    Assign(gp, "default_parse_window", &config.gp.default_parse_window);
  }
  if (root.contains("sentiment")) {
    CheckKeys(root["sentiment"], "sentiment",
              {"enabled", "windows", "extended"});
    Assign(root["sentiment"], "enabled", &config.sentiment_enabled);
    Assign(root["sentiment"], "windows", &config.sentiment.windows);
    Assign(root["sentiment"], "extended", &config.sentiment.extended);
  }
  if (root.contains("selection")) {
    const json& sel = root["selection"];
    CheckKeys(sel, "selection",
              {"vif_threshold", "anova_percentile", "pearson_threshold",
               "keep_tentative", "top_k", "boruta", "shapley"});
    Assign(sel, "vif_threshold", &config.selection.vif_threshold);
    Assign(sel, "anova_percentile", &config.selection.anova_percentile);
    Assign(sel, "pearson_threshold", &config.selection.pearson_threshold);
    Assign(sel, "keep_tentative", &config.selection.keep_tentative);
    Assign(sel, "top_k", &config.selection.top_k);
    if (sel.contains("boruta")) {
      CheckKeys(sel["boruta"], "selection.boruta",
                {"max_iter", "alpha", "n_estimators", "max_depth"});
      Assign(sel["boruta"], "max_iter", &config.selection.boruta.max_iter);
      Assign(sel["boruta"], "alpha", &config.selection.boruta.alpha);
      Assign(sel["boruta"], "n_estimators",
             &config.selection.boruta.forest.n_estimators);
      Assign(sel["boruta"], "max_depth",
             &config.selection.boruta.forest.tree.max_depth);
    }
    if (sel.contains("shapley")) {
      CheckKeys(sel["shapley"], "selection.shapley",
                {"n_samples", "exact_max_features"});
      Assign(sel["shapley"], "n_samples",
             &config.selection.shapley.n_samples);
      Assign(sel["shapley"], "exact_max_features",
             &config.selection.shapley.exact_max_features);
    }
  }
  if (root.contains("ensemble")) {
    const json& ens = root["ensemble"];
    CheckKeys(ens, "ensemble",
              {"mode", "forest", "level_booster", "leaf_booster", "meta"});
    if (ens.contains("mode")) {
      config.ensemble.mode = ParseMode(ens["mode"].get<std::string>());
    }
    for (const std::string name : {"forest", "level_booster", "leaf_booster"}) {
      if (!ens.contains(name)) {
        continue;
      }
      BaseLearnerConfig* base = FindBase(&config.ensemble, name);
      if (base == nullptr) {
        throw ConfigError("ensemble." + name + ": no such base learner");
      }
      if (base->kind == BaseKind::kForest) {
        AssignForest(ens[name], "ensemble." + name, &base->forest);
      } else {
        AssignBooster(ens[name], "ensemble." + name, &base->boosted);
      }
    }
    if (ens.contains("meta")) {
      AssignBooster(ens["meta"], "ensemble.meta", &config.ensemble.meta);
    }
  }
  Assign(root, "tscv_folds", &config.tscv_folds);
  if (root.contains("grid")) {
    const json& grid = root["grid"];
    CheckKeys(grid, "grid", {"enabled", "base", "metric", "folds", "values"});
    Assign(grid, "enabled", &config.grid.enabled);
    Assign(grid, "base", &config.grid.base);
    Assign(grid, "metric", &config.grid.metric);
    Assign(grid, "folds", &config.grid.folds);
    if (grid.contains("values")) {
      if (!grid["values"].is_object()) {
        throw ConfigError("grid.values: expected an object");
      }
      config.grid.values.clear();
      for (const auto& [name, values] : grid["values"].items()) {
        if (!values.is_array()) {
          throw ConfigError("grid.values." + name + ": expected an array");
        }
        config.grid.values.emplace_back(name,
                                        values.get<std::vector<double>>());
      }
    }
  }
  if (root.contains("backtest")) {
    CheckKeys(root["backtest"], "backtest", {"cost_bps"});
    Assign(root["backtest"], "cost_bps", &config.backtest.cost_bps);
  }
  Assign(root, "rng_seed", &config.rng_seed);
  Assign(root, "out_dir", &config.out_dir);
  if (root.contains("profile")) {
    ApplyProfile(&config, root["profile"].get<std::string>());
  }
  return config;
}

void ApplyProfile(PipelineConfig* config, const std::string& profile) {
  if (profile == "desk") {
    config->profile = "desk";
    return;
  }
  if (profile == "paper") {
    config->profile = "paper";
    config->gp.population_size = 5000;
    config->gp.tournament_size = 1000;
    for (BaseLearnerConfig& base : config->ensemble.bases) {
      if (base.kind == BaseKind::kForest) {
        base.forest.n_estimators = 500;
      }
    }
    config->selection.boruta.forest.n_estimators = 100;
    config->selection.shapley.n_samples = 2000;
    return;
  }
  throw ConfigError("profile: expected desk or paper, got '" + profile + "'");
}

std::string ConfigToJson(const PipelineConfig& config) {
  json root;
  root["data"] = {{"ohlcv_csv", config.ohlcv_csv},
                  {"news_csv", config.news_csv}};
  root["label_threshold"] = config.label_threshold;
  root["use_adj_close"] = config.use_adj_close;
  root["split"] = {{"test_frac", config.split.test_frac},
                   {"val_frac", config.split.val_frac}};
  root["gp"] = {{"population_size", config.gp.population_size},
                {"tournament_size", config.gp.tournament_size},
                {"generations", config.gp.generations},
                {"elite_keep", config.gp.elite_keep},
                {"pool_cap", config.gp.pool_cap},
                {"dedup_corr_threshold", config.gp.dedup_corr_threshold},
                {"max_depth", config.gp.max_depth},
                {"ts_windows", config.gp.ts_windows},
                {"p_crossover", config.gp.p_crossover},
                {"p_subtree_mutation", config.gp.p_subtree_mutation},
                {"p_point_mutation", config.gp.p_point_mutation},
                {"early_stop_eps", config.gp.early_stop_eps},
                {"default_parse_window", config.gp.default_parse_window}};
  root["sentiment"] = {{"enabled", config.sentiment_enabled},
                       {"windows", config.sentiment.windows},
                       {"extended", config.sentiment.extended}};
  root["selection"] = {
      {"vif_threshold", config.selection.vif_threshold},
      {"anova_percentile", config.selection.anova_percentile},
      {"pearson_threshold", config.selection.pearson_threshold},
      {"keep_tentative", config.selection.keep_tentative},
      {"top_k", config.selection.top_k},
      {"boruta",
       {{"max_iter", config.selection.boruta.max_iter},
        {"alpha", config.selection.boruta.alpha},
        {"n_estimators", config.selection.boruta.forest.n_estimators},
        {"max_depth", config.selection.boruta.forest.tree.max_depth}}},
      {"shapley",
       {{"n_samples", config.selection.shapley.n_samples},
        {"exact_max_features",
         config.selection.shapley.exact_max_features}}}};
  json ensemble;
  ensemble["mode"] = ModeName(config.ensemble.mode);
  for (const BaseLearnerConfig& base : config.ensemble.bases) {
    ensemble[base.name] = base.kind == BaseKind::kForest
                              ? ForestToJson(base.forest)
                              : BoosterToJson(base.boosted);
  }
  ensemble["meta"] = BoosterToJson(config.ensemble.meta);
  root["ensemble"] = ensemble;
  root["tscv_folds"] = config.tscv_folds;
  json grid_values = json::object();
  for (const auto& [name, values] : config.grid.values) {
    grid_values[name] = values;
  }
  root["grid"] = {{"enabled", config.grid.enabled},
                  {"base", config.grid.base},
                  {"metric", config.grid.metric},
                  {"folds", config.grid.folds},
                  {"values", grid_values}};
  root["backtest"] = {{"cost_bps", config.backtest.cost_bps}};
  root["rng_seed"] = config.rng_seed;
  root["out_dir"] = config.out_dir;
  root["profile"] = config.profile;
  return root.dump(2) + "\n";
}

std::string HashFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) {
    throw DataError("cannot hash missing file: " + path);
  }
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buffer[4096];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ull;
    }
  }
  std::ostringstream out;
  out << std::hex << hash;
  return out.str();
}

namespace {

std::string OutPath(const PipelineConfig& config, const std::string& name) {
  return (fs::path(config.out_dir) / name).string();
}

void RequireArtifact(const PipelineConfig& config, const std::string& name,
                     const std::string& producing_stage) {
  if (!fs::exists(OutPath(config, name))) {
    throw DependencyError("missing artifact '" + name + "'; run the '" +
                          producing_stage + "' stage first");
  }
}

void WriteManifest(const PipelineConfig& config, const std::string& stage,
                   const std::vector<std::string>& inputs) {
  json manifest;
  manifest["stage"] = stage;
  manifest["format_version"] = 1;
  manifest["seed"] = config.rng_seed;
  manifest["config"] = json::parse(ConfigToJson(config));
  json hashes = json::object();
  for (const std::string& path : inputs) {
    hashes[path] = HashFile(path);
  }
  manifest["inputs"] = hashes;
  std::ofstream out(OutPath(config, "manifest_" + stage + ".json"));
  out << manifest.dump(2) << '\n';
}

void WriteLabels(const LabelSeries& labels, const std::string& path) {
  CsvTable csv;
  csv.header = {"date", "log_return", "label"};
  for (std::size_t i = 0; i < labels.dates.size(); ++i) {
    csv.rows.push_back({FormatDate(labels.dates[i]),
                        FormatCell(labels.log_return[i]),
                        std::to_string(labels.label[i])});
  }
  WriteCsv(path, csv);
}

LabelSeries ReadLabels(const std::string& path) {
  const CsvTable csv = ReadCsv(path);
  const int date_col = csv.ColumnIndex("date");
  const int ret_col = csv.ColumnIndex("log_return");
  const int label_col = csv.ColumnIndex("label");
  if (date_col < 0 || ret_col < 0 || label_col < 0) {
    throw SchemaError(path + ": need date, log_return and label columns");
  }
  LabelSeries labels;
  for (const auto& row : csv.rows) {
    labels.dates.push_back(ParseDate(row[date_col]));
    labels.log_return.push_back(std::stod(row[ret_col]));
    labels.label.push_back(std::stoi(row[label_col]));
  }
  return labels;
}

struct StageData {
  FeatureTable table;
  LabelSeries labels;
  std::size_t valid_from = 0;  // first fully defined row
  std::size_t usable = 0;      // rows with features and a label
  SplitSpec split;             // over the usable range
};

// Aligns the feature table with the label series and computes the
// chronological split over rows that have both features and a next-day label.
StageData AlignStage(const PipelineConfig& config, FeatureTable table,
                     LabelSeries labels) {
  StageData data;
  data.valid_from = table.ValidFrom();
  if (data.valid_from >= table.Rows()) {
    throw DataError("no fully defined feature rows; series too short");
  }
  if (labels.dates.size() >= table.Rows() ||
      !std::equal(labels.dates.begin(), labels.dates.end(),
                  table.dates.begin())) {
    throw DataError("labels are not aligned with the feature table");
  }
  if (data.valid_from >= labels.dates.size()) {
    throw DataError("warm-up swallows every labeled row");
  }
  data.usable = labels.dates.size() - data.valid_from;
  data.split =
      ChronoSplit(data.usable, config.split.test_frac, config.split.val_frac);
  data.table = std::move(table);
  data.labels = std::move(labels);
  return data;
}

std::vector<std::string> LoadAlphaExpressions(const std::string& path) {
  const CsvTable csv = ReadCsv(path);
  const int expr_col = csv.ColumnIndex("expression");
  if (expr_col < 0) {
    throw SchemaError(path + ": need an expression column");
  }
  std::vector<std::string> expressions;
  for (const auto& row : csv.rows) {
    expressions.push_back(row[expr_col]);
  }
  return expressions;
}

void StageIngest(const PipelineConfig& config) {
  if (config.ohlcv_csv.empty()) {
    throw ConfigError("data.ohlcv_csv: no input file configured");
  }
  const OhlcvSeries series = LoadOhlcv(config.ohlcv_csv);
  DumpOhlcv(series, OutPath(config, "prices.csv"));
  const LabelSeries labels =
      MakeLabels(series, config.label_threshold, config.use_adj_close);
  WriteLabels(labels, OutPath(config, "labels.csv"));
  WriteManifest(config, "ingest", {config.ohlcv_csv});
}

void StageFeatures(const PipelineConfig& config) {
  RequireArtifact(config, "prices.csv", "ingest");
  RequireArtifact(config, "labels.csv", "ingest");
  const OhlcvSeries series = LoadOhlcv(OutPath(config, "prices.csv"));
  FeatureTable table = BuildBaseFeatures(series);
  const LabelSeries labels = ReadLabels(OutPath(config, "labels.csv"));
  std::vector<int> label_column(table.Rows(), -1);
  for (std::size_t i = 0; i < labels.label.size() && i < table.Rows(); ++i) {
    label_column[i] = labels.label[i];
  }
  table.labels = std::move(label_column);
  std::vector<std::string> inputs = {OutPath(config, "prices.csv"),
                                     OutPath(config, "labels.csv")};
  if (config.sentiment_enabled) {
    if (config.news_csv.empty()) {
      throw ConfigError("data.news_csv: sentiment enabled without a file");
    }
    const auto news = LoadNews(config.news_csv);
    MergeSentiment(&table, RollingRatios(news, table.dates, config.sentiment));
    inputs.push_back(config.news_csv);
  }
  DumpFeatureTable(table, OutPath(config, "features.csv"));
  WriteManifest(config, "features", inputs);
}

void StageMine(const PipelineConfig& config) {
  RequireArtifact(config, "features.csv", "features");
  RequireArtifact(config, "labels.csv", "ingest");
  FeatureTable table = LoadFeatureTable(OutPath(config, "features.csv"));
  LabelSeries labels = ReadLabels(OutPath(config, "labels.csv"));
  StageData data = AlignStage(config, std::move(table), std::move(labels));

  // GP sees the training window only.
  const std::size_t train_begin = data.valid_from;
  const std::size_t train_end = data.valid_from + data.split.train_end;
  const FeatureTable train_table = data.table.Slice(train_begin, train_end);
  const std::vector<double> forward_returns(
      data.labels.log_return.begin() + train_begin,
      data.labels.log_return.begin() + train_end);

  GpConfig gp = config.gp;
  gp.rng_seed = DeriveSeed(config.rng_seed, 0x61F4);
  const MiningResult result = Mine(train_table, forward_returns, gp);

  CsvTable csv;
  csv.header = {"name", "expression", "ic", "fitness"};
  for (std::size_t i = 0; i < result.pool.size(); ++i) {
    const Individual& ind = result.pool[i];
    csv.rows.push_back({"factor_" + std::to_string(i + 1),
                        FormatExpr(ind.expr),
                        FormatCell(ind.ic_sign * ind.fitness),
                        FormatCell(ind.fitness)});
  }
  WriteCsv(OutPath(config, "alphas.csv"), csv);
  WriteManifest(config, "mine",
                {OutPath(config, "features.csv"),
                 OutPath(config, "labels.csv")});
}

void StageSelect(const PipelineConfig& config) {
  RequireArtifact(config, "features.csv", "features");
  RequireArtifact(config, "alphas.csv", "mine");
  RequireArtifact(config, "labels.csv", "ingest");
  FeatureTable table = LoadFeatureTable(OutPath(config, "features.csv"));
  const auto expressions =
      LoadAlphaExpressions(OutPath(config, "alphas.csv"));
  for (std::size_t i = 0; i < expressions.size(); ++i) {
    const AlphaExpr expr = ParseExpr(expressions[i], config.gp);
    table.AddColumn("factor_" + std::to_string(i + 1), EvalExpr(expr, table));
  }
  LabelSeries labels = ReadLabels(OutPath(config, "labels.csv"));
  StageData data = AlignStage(config, std::move(table), std::move(labels));

  std::vector<int> label_column(data.table.Rows(), -1);
  for (std::size_t i = 0; i < data.labels.label.size(); ++i) {
    label_column[i] = data.labels.label[i];
  }
  std::vector<std::size_t> train_rows;
  for (std::size_t r = 0; r < data.split.train_end; ++r) {
    train_rows.push_back(data.valid_from + r);
  }
  SelectionConfig selection = config.selection;
  selection.seed = DeriveSeed(config.rng_seed, 0x5E1E);
  const SelectionReport report =
      SelectPipeline(data.table, label_column, train_rows, selection);
  WriteSelectionReport(report, OutPath(config, "selection_report.csv"));

  FeatureTable reduced = data.table.Select(report.final_kept);
  reduced.labels = label_column;
  DumpFeatureTable(reduced, OutPath(config, "reduced.csv"));
  WriteManifest(config, "select",
                {OutPath(config, "features.csv"),
                 OutPath(config, "alphas.csv"),
                 OutPath(config, "labels.csv")});
}

struct TrainMatrices {
  Matrix X;
  std::vector<int> y;
  std::vector<Date> dates;
};

TrainMatrices ToMatrices(const StageData& data) {
  TrainMatrices out;
  out.X.resize(data.usable);
  out.y.resize(data.usable);
  out.dates.resize(data.usable);
  for (std::size_t i = 0; i < data.usable; ++i) {
    const std::size_t row = data.valid_from + i;
    out.dates[i] = data.table.dates[row];
    out.y[i] = data.labels.label[row];
    out.X[i].resize(data.table.Cols());
    for (std::size_t c = 0; c < data.table.Cols(); ++c) {
      out.X[i][c] = data.table.columns[c][row];
    }
  }
  return out;
}

void StageTrain(const PipelineConfig& config) {
  RequireArtifact(config, "reduced.csv", "select");
  RequireArtifact(config, "labels.csv", "ingest");
  FeatureTable table = LoadFeatureTable(OutPath(config, "reduced.csv"));
  LabelSeries labels = ReadLabels(OutPath(config, "labels.csv"));
  StageData data = AlignStage(config, std::move(table), std::move(labels));
  const TrainMatrices m = ToMatrices(data);
  const SplitSpec split = data.split;

  EnsembleSpec spec = config.ensemble;
  for (std::size_t b = 0; b < spec.bases.size(); ++b) {
    if (spec.bases[b].kind == BaseKind::kForest) {
      spec.bases[b].forest.seed = DeriveSeed(config.rng_seed, 0xBA5E, b);
    } else {
      spec.bases[b].boosted.seed = DeriveSeed(config.rng_seed, 0xBA5E, b);
    }
  }
  spec.meta.seed = DeriveSeed(config.rng_seed, 0x3E7A);

  if (config.grid.enabled) {
    BaseLearnerConfig* base = FindBase(&spec, config.grid.base);
    if (base == nullptr) {
      throw ConfigError("grid.base: no base learner named '" +
                        config.grid.base + "'");
    }
    GridSpec grid;
    grid.values = config.grid.values;
    grid.metric = config.grid.metric;
    grid.folds = TscvFolds(split.train_end, config.grid.folds,
                           split.train_end / 2);
    const GridResult result = GridSearch(*base, grid, m.X, m.y);
    WriteLeaderboard(result, OutPath(config, "leaderboard.csv"));
    *base = ApplyGridPoint(*base, result.best.config);
  }

  std::vector<std::size_t> train_rows;
  for (std::size_t r = split.train_begin; r < split.train_end; ++r) {
    train_rows.push_back(r);
  }
  std::vector<std::size_t> val_rows;
  for (std::size_t r = split.val_begin; r < split.val_end; ++r) {
    val_rows.push_back(r);
  }

  EnsembleModel model;
  switch (spec.mode) {
    case EnsembleMode::kBlendHoldout:
      model = BlendFit(spec, m.X, m.y, train_rows, val_rows);
      break;
    case EnsembleMode::kStackOof: {
      const FoldSpec folds = TscvFolds(split.val_end, config.tscv_folds,
                                       split.val_end / 2);
      Matrix x_fit(m.X.begin(), m.X.begin() + split.val_end);
      std::vector<int> y_fit(m.y.begin(), m.y.begin() + split.val_end);
      model = StackFit(spec, x_fit, y_fit, folds);
      break;
    }
    case EnsembleMode::kSoftVote: {
      std::vector<std::size_t> fit_rows = train_rows;
      fit_rows.insert(fit_rows.end(), val_rows.begin(), val_rows.end());
      model = SoftVoteFit(spec, m.X, m.y, fit_rows);
      break;
    }
  }

  const fs::path models_dir = fs::path(config.out_dir) / "models";
  fs::create_directories(models_dir);
  for (const BaseModel& base : model.bases) {
    const std::string path = (models_dir / ("base_" + base.name + ".txt")).string();
    if (base.kind == BaseKind::kForest) {
      SaveForest(base.forest, path);
    } else {
      SaveBoosted(base.boosted, path);
    }
  }
  if (model.mode != EnsembleMode::kSoftVote) {
    SaveBoosted(model.meta, (models_dir / "meta.txt").string());
  }

  const Matrix x_test(m.X.begin() + split.test_begin,
                      m.X.begin() + split.test_end);
  const std::vector<int> y_test(m.y.begin() + split.test_begin,
                                m.y.begin() + split.test_end);
  const auto probs = model.PredictProb1(x_test);
  std::vector<int> preds(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    preds[i] = probs[i] > 0.5 ? 1 : 0;
  }
  WriteMetrics(Evaluate(preds, y_test), OutPath(config, "metrics.csv"));

  CsvTable csv;
  csv.header = {"date", "prob1", "prediction", "label"};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    csv.rows.push_back({FormatDate(m.dates[split.test_begin + i]),
                        FormatCell(probs[i]), std::to_string(preds[i]),
                        std::to_string(y_test[i])});
  }
  WriteCsv(OutPath(config, "predictions.csv"), csv);
  WriteManifest(config, "train",
                {OutPath(config, "reduced.csv"),
                 OutPath(config, "labels.csv")});
}

void StageBacktest(const PipelineConfig& config) {
  RequireArtifact(config, "predictions.csv", "train");
  RequireArtifact(config, "labels.csv", "ingest");
  const CsvTable csv = ReadCsv(OutPath(config, "predictions.csv"));
  const int date_col = csv.ColumnIndex("date");
  const int pred_col = csv.ColumnIndex("prediction");
  if (date_col < 0 || pred_col < 0) {
    throw SchemaError("predictions.csv: need date and prediction columns");
  }
  const LabelSeries labels = ReadLabels(OutPath(config, "labels.csv"));

  std::vector<Date> dates;
  std::vector<int> predictions;
  std::vector<double> returns;
  std::size_t cursor = 0;
  for (const auto& row : csv.rows) {
    const Date date = ParseDate(row[date_col]);
    while (cursor < labels.dates.size() && labels.dates[cursor] < date) {
      ++cursor;
    }
    if (cursor >= labels.dates.size() || labels.dates[cursor] != date) {
      throw DataError("predictions date " + row[date_col] +
                      " not present in labels");
    }
    dates.push_back(date);
    predictions.push_back(std::stoi(row[pred_col]));
    returns.push_back(labels.log_return[cursor]);
  }
  BacktestReport report =
      RunStrategy(predictions, returns, config.backtest.cost_bps);
  report.dates = dates;
  WriteBacktestReport(report, OutPath(config, "equity.csv"));

  json summary;
  summary["days"] = report.position.size();
  summary["strategy_log_return"] = report.total_log_return;
  summary["benchmark_log_return"] = report.benchmark_log_return;
  summary["max_drawdown"] = report.max_drawdown;
  summary["cost_bps"] = config.backtest.cost_bps;
  std::ofstream out(OutPath(config, "backtest_summary.json"));
  out << summary.dump(2) << '\n';
  WriteManifest(config, "backtest",
                {OutPath(config, "predictions.csv"),
                 OutPath(config, "labels.csv")});
}

}  // namespace

void RunStage(const std::string& stage, const PipelineConfig& config) {
  fs::create_directories(config.out_dir);
  if (stage == "ingest") {
    StageIngest(config);
  } else if (stage == "features") {
    StageFeatures(config);
  } else if (stage == "mine") {
    StageMine(config);
  } else if (stage == "select") {
    StageSelect(config);
  } else if (stage == "train") {
    StageTrain(config);
  } else if (stage == "backtest") {
    StageBacktest(config);
  } else if (stage == "all") {
    for (const char* name :
         {"ingest", "features", "mine", "select", "train", "backtest"}) {
      RunStage(name, config);
    }
  } else {
    throw ConfigError("unknown stage: " + stage);
  }
}

}  // namespace factorlab

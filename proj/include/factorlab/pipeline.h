#ifndef FACTORLAB_PIPELINE_H_
#define FACTORLAB_PIPELINE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "factorlab/ensemble.h"
#include "factorlab/featsel.h"
#include "factorlab/gpalpha.h"
#include "factorlab/sentiment.h"

namespace factorlab {

struct SplitConfig {
  double test_frac = 0.2;
  double val_frac = 0.1;  // of the pre-test remainder
};

struct GridConfig {
  bool enabled = false;
  std::string base = "leaf_booster";  // base learner name to tune
  std::vector<std::pair<std::string, std::vector<double>>> values;
  std::string metric = "accuracy";
  std::size_t folds = 3;
};

struct BacktestConfig {
  double cost_bps = 0.0;
};

struct PipelineConfig {
  std::string ohlcv_csv;
  std::string news_csv;
  double label_threshold = 0.001;
  bool use_adj_close = false;
  SplitConfig split;
  GpConfig gp;
  bool sentiment_enabled = false;
  SentimentOptions sentiment;
  SelectionConfig selection;
  EnsembleSpec ensemble;
  std::size_t tscv_folds = 5;
  GridConfig grid;
  BacktestConfig backtest;
  std::uint64_t rng_seed = 42;
  std::string out_dir = "out";
  std::string profile = "desk";
};

// Defaults suited to interactive runs; selection's wrapper forests are
// shrunk relative to the library defaults.
PipelineConfig DefaultPipelineConfig();

// Strict parse: unknown keys raise ConfigError naming the field path.
PipelineConfig LoadPipelineConfig(const std::string& path);

// "desk" (minutes) or "paper" (hours: population 5000, tournament 1000,
// 500-tree forests).
void ApplyProfile(PipelineConfig* config, const std::string& profile);

// Effective configuration echoed as a canonical document (manifest body).
std::string ConfigToJson(const PipelineConfig& config);

// FNV-1a 64 of the file bytes, hex encoded.
std::string HashFile(const std::string& path);

// One of: ingest, features, mine, select, train, backtest, all. Writes
// stage artifacts plus manifest_<stage>.json under config.out_dir.
void RunStage(const std::string& stage, const PipelineConfig& config);

}  // namespace factorlab

#endif  // FACTORLAB_PIPELINE_H_

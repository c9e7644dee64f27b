// Command-line front end: runs pipeline stages from a JSON config.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "factorlab/common.h"
#include "factorlab/pipeline.h"

int main(int argc, char** argv) {
  CLI::App app{"factorlab: alpha mining, feature selection, ensembles and "
               "backtesting for a single asset"};

  std::string command;
  app.add_option("command", command,
                 "stage to run: ingest, features, mine, select, train, "
                 "backtest, all")
      ->required();
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file");
  std::uint64_t seed = 0;
  const auto* seed_opt =
      app.add_option("--seed", seed, "override the configured rng seed");
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker cap (0 = hardware concurrency); never changes "
                 "results");
  std::string profile;
  app.add_option("--profile", profile, "scale profile: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  std::string out_dir;
  app.add_option("--out", out_dir, "override the output directory");
  std::string data_path;
  app.add_option("--data", data_path, "override the input OHLCV csv");

  CLI11_PARSE(app, argc, argv);

  try {
    factorlab::PipelineConfig config =
        config_path.empty() ? factorlab::DefaultPipelineConfig()
                            : factorlab::LoadPipelineConfig(config_path);
    if (*seed_opt) {
      config.rng_seed = seed;
    }
    if (!profile.empty()) {
      factorlab::ApplyProfile(&config, profile);
    }
    if (!out_dir.empty()) {
      config.out_dir = out_dir;
    }
    if (!data_path.empty()) {
      config.ohlcv_csv = data_path;
    }
    factorlab::SetMaxThreads(threads);
    factorlab::RunStage(command, config);
    return 0;
  } catch (const factorlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const factorlab::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const factorlab::DependencyError& e) {
    std::cerr << "dependency error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace molpool::cli {

struct TrainArgs {
  std::string config_path;
  std::string out_dir = "runs";
  int runs = 1;
  std::optional<unsigned long long> seed;  // overrides the config seed
  std::string split_file;                  // forces a from-file split
  bool parallel_repeats = false;
  bool fix_split = false;  // keep one split across repeat runs
};

struct EvaluateArgs {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_path;   // metrics JSON; empty prints to stdout only
  std::string data_path;  // overrides the config dataset
  std::string split_file;
};

struct BenchmarkArgs {
  std::string config_path;
  std::vector<double> ratios;
  std::string out_dir = "runs";
  std::optional<int> epochs;
};

struct InspectArgs {
  std::string config_path;
  std::string checkpoint_path;  // optional: seeded init when absent
  std::string out_dir = "pool_inspect";
  std::vector<std::string> smiles;
};

int cmd_train(const TrainArgs& args);
int cmd_evaluate(const EvaluateArgs& args);
int cmd_benchmark(const BenchmarkArgs& args);
int cmd_pool_inspect(const InspectArgs& args);

}  // namespace molpool::cli

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "molpool/layers.hpp"
#include "molpool/train.hpp"

namespace molpool::cli {

// One run configuration: model architecture, task, training protocol, and
// data source. Parsed from a single JSON file.
struct RunConfig {
  ModelConfig model;
  train::TaskKind task_kind = train::TaskKind::Regression;

  train::TrainConfig training;

  struct DataConfig {
    enum class Kind { Csv, Synthetic };
    Kind kind = Kind::Csv;
    std::string path;
    std::string smiles_column = "smiles";
    std::vector<std::string> target_columns;
    train::SplitSpec split;
    train::SyntheticSpec synthetic;
  } data;
};

RunConfig parse_run_config(const std::string& path);
std::string dump_run_config(const RunConfig& cfg);  // canonical JSON

// FNV-1a over the canonical dump; ignore_pooling strips the pooling variant
// and keep ratio so benchmark runs can assert width equality across ratios.
std::uint64_t config_hash(const RunConfig& cfg, bool ignore_pooling = false);

// Loads and featurizes the configured dataset; CSV warnings go to stderr.
train::GraphDataset load_dataset(const RunConfig& cfg);

}  // namespace molpool::cli

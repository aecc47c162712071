#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "molpool/chem.hpp"
#include "molpool/graph.hpp"
#include "molpool/layers.hpp"

namespace molpool::train {

enum class TaskKind { Regression, BinaryClassification };

struct TaskSpec {
  TaskKind kind = TaskKind::Regression;
  long task_count = 1;
  // Fitted on the training split only (regression); metrics are reported in
  // original units.
  std::vector<double> target_mean, target_std;
};

struct SplitSpec {
  enum class Mode { Random, FromFile };
  Mode mode = Mode::Random;
  unsigned long long seed = 0;
  std::array<double, 3> fractions{0.8, 0.1, 0.1};
  std::string path;  // FromFile: JSON {"train": [...], "valid": [...], "test": [...]}
};

struct Split {
  std::vector<long> train, valid, test;
};

Split make_split(long n, const SplitSpec& spec);

struct GraphDataset {
  std::vector<MolGraph> graphs;
  // targets[i][t]; missing labels stay empty
  std::vector<std::vector<std::optional<double>>> targets;

  long size() const { return static_cast<long>(graphs.size()); }
  long task_count() const {
    return targets.empty() ? 0 : static_cast<long>(targets[0].size());
  }
};

GraphDataset featurize_records(const std::vector<chem::DatasetRecord>& records);

// mean/std per task over present train labels; std guards against zero
TaskSpec fit_task_spec(const GraphDataset& data,
                       const std::vector<long>& train_idx, TaskKind kind);

double metric_rmse(const std::vector<double>& preds,
                   const std::vector<double>& targets);
double metric_r2(const std::vector<double>& preds,
                 const std::vector<double>& targets);
// Rank statistic with midrank tie handling; throws when one class is absent.
double metric_rocauc(const std::vector<double>& scores,
                     const std::vector<int>& labels);

struct TrainConfig {
  int epochs = 100;
  long batch_size = 32;
  double lr = 1e-4;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  unsigned long long seed = 0;
  int patience = 20;  // epochs without validation improvement; <= 0 disables
  bool verbose = false;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_metric = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_valid = 0.0;
  std::map<std::string, double> test_metrics;
  double total_seconds = 0.0;
  double mean_epoch_seconds = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trains in place, restores the best-validation parameters, then reports
// test metrics (when the split has a test set). Deterministic under a fixed
// seed in single-worker mode.
TrainResult train_model(Model& model, const GraphDataset& data,
                        const Split& split, const TaskSpec& task,
                        const TrainConfig& cfg);

// per-task metrics plus cross-task means; keys like "rmse", "rmse_task0",
// "r2", "roc_auc"
std::map<std::string, double> evaluate(Model& model, const GraphDataset& data,
                                       const std::vector<long>& idx,
                                       const TaskSpec& task);

struct SyntheticSpec {
  long num_graphs = 100;
  long nodes_mean = 20;
  long nodes_jitter = 5;       // uniform in [mean - jitter, mean + jitter]
  double extra_edge_factor = 0.5;  // extra edges beyond the spanning tree
  long task_count = 1;
  TaskKind kind = TaskKind::Regression;
  unsigned long long seed = 0;
};

// Connected random graphs with molecule-like features and a structure-
// derived target, for training smoke tests and timing runs.
GraphDataset make_synthetic(const SyntheticSpec& spec);

struct BenchmarkEntry {
  std::string label;
  double rho = 0.0;  // 0 marks the no-pooling baseline
  double mean_epoch_seconds = 0.0;
  double total_seconds = 0.0;
  double speedup_pct = 0.0;  // (t_none - t_rho) / t_rho * 100
  double final_train_loss = 0.0;
};

// Fixed-epoch timing sweep: the no-pooling baseline plus one run per keep
// ratio, identical widths everywhere so the pooling layers are the only
// difference.
std::vector<BenchmarkEntry> benchmark_pooling(
    const ModelConfig& base, PoolVariant variant,
    const std::vector<double>& ratios, const GraphDataset& data,
    const Split& split, const TaskSpec& task, const TrainConfig& cfg);

}  // namespace molpool::train

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "molpool/optim.hpp"
#include "molpool/train.hpp"

namespace molpool::train {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct BatchTensors {
  GraphBatch batch;
  Tensor targets, mask;
};

BatchTensors assemble(const GraphDataset& data, const std::vector<long>& idx,
                      const TaskSpec& task) {
  std::vector<MolGraph> graphs;
  graphs.reserve(idx.size());
  for (long i : idx) graphs.push_back(data.graphs[i]);

  const long T = task.task_count;
  std::vector<double> tv(idx.size() * T, 0.0), mv(idx.size() * T, 0.0);
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (long t = 0; t < T; ++t) {
      const auto& label = data.targets[idx[r]][t];
      if (!label.has_value()) continue;
      mv[r * T + t] = 1.0;
      double v = *label;
      if (task.kind == TaskKind::Regression)
        v = (v - task.target_mean[t]) / task.target_std[t];
      tv[r * T + t] = v;
    }

  BatchTensors out;
  out.batch = make_batch(graphs);
  out.targets = Tensor::from(std::move(tv), {static_cast<long>(idx.size()), T});
  out.mask = Tensor::from(std::move(mv), {static_cast<long>(idx.size()), T});
  return out;
}

Tensor compute_loss(const Tensor& preds, const BatchTensors& bt,
                    const TaskSpec& task) {
  return task.kind == TaskKind::Regression
             ? masked_mse(preds, bt.targets, bt.mask)
             : bce_with_logits(preds, bt.targets, bt.mask);
}

bool lower_is_better(const TaskSpec& task) {
  return task.kind == TaskKind::Regression;
}

std::string primary_metric(const TaskSpec& task) {
  return task.kind == TaskKind::Regression ? "rmse" : "roc_auc";
}

}  // namespace

std::map<std::string, double> evaluate(Model& model, const GraphDataset& data,
                                       const std::vector<long>& idx,
                                       const TaskSpec& task) {
  if (idx.empty()) throw std::invalid_argument("evaluate: empty index set");
  const bool was_training = model.training();
  model.set_training(false);
  NoGradGuard guard;

  const long T = task.task_count;
  std::vector<double> preds(idx.size() * T);
  constexpr std::size_t kChunk = 256;
  for (std::size_t at = 0; at < idx.size(); at += kChunk) {
    std::vector<long> part(idx.begin() + at,
                           idx.begin() + std::min(at + kChunk, idx.size()));
    BatchTensors bt = assemble(data, part, task);
    Tensor out = model.forward(bt.batch);
    std::copy(out.values().begin(), out.values().end(),
              preds.begin() + at * T);
  }
  model.set_training(was_training);

  std::map<std::string, double> metrics;
  double rmse_total = 0, r2_total = 0, auc_total = 0;
  long r2_defined = 0;
  for (long t = 0; t < T; ++t) {
    std::vector<double> p, y;
    std::vector<int> labels;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto& label = data.targets[idx[r]][t];
      if (!label.has_value()) continue;
      double pred = preds[r * T + t];
      if (task.kind == TaskKind::Regression)
        pred = pred * task.target_std[t] + task.target_mean[t];
      p.push_back(pred);
      y.push_back(*label);
      labels.push_back(*label != 0.0 ? 1 : 0);
    }
    if (p.empty())
      throw std::runtime_error("evaluate: task " + std::to_string(t) +
                               " has no labels in the index set");
    const std::string suffix = "_task" + std::to_string(t);
    if (task.kind == TaskKind::Regression) {
      metrics["rmse" + suffix] = metric_rmse(p, y);
      rmse_total += metrics["rmse" + suffix];
      // constant targets leave R^2 undefined; report it only when it exists
      try {
        metrics["r2" + suffix] = metric_r2(p, y);
        r2_total += metrics["r2" + suffix];
        ++r2_defined;
      } catch (const std::invalid_argument&) {
      }
    } else {
      metrics["roc_auc" + suffix] = metric_rocauc(p, labels);
      auc_total += metrics["roc_auc" + suffix];
    }
  }
  if (task.kind == TaskKind::Regression) {
    metrics["rmse"] = rmse_total / T;
    if (r2_defined > 0) metrics["r2"] = r2_total / r2_defined;
  } else {
    metrics["roc_auc"] = auc_total / T;
  }
  return metrics;
}

TrainResult train_model(Model& model, const GraphDataset& data,
                        const Split& split, const TaskSpec& task,
                        const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("train: batch size must be >= 1");
  if (split.train.empty())
    throw std::invalid_argument("train: empty training split");

  NamedTensors named = model.parameters();
  std::vector<Tensor> params;
  params.reserve(named.size());
  for (auto& [name, t] : named) params.push_back(t);
  Adam opt(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

  std::mt19937_64 shuffle_rng(cfg.seed);
  const bool has_valid = !split.valid.empty();
  const bool minimize = lower_is_better(task);

  TrainResult result;
  StateDict best_state;
  double best = minimize ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
  int since_best = 0;
  const auto run_start = Clock::now();

  std::vector<long> order = split.train;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    model.set_training(true);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    long batches = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<long> idx(
          order.begin() + at,
          order.begin() +
              std::min(at + static_cast<std::size_t>(cfg.batch_size),
                       order.size()));
      BatchTensors bt = assemble(data, idx, task);
      Tensor preds = model.forward(bt.batch);
      Tensor loss = compute_loss(preds, bt, task);
      if (!std::isfinite(loss.item()))
        throw TrainingDiverged("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch) + ", batch " +
                               std::to_string(batches));
      opt.zero_grad();
      backward(loss);
      opt.step();
      loss_sum += loss.item();
      ++batches;
    }
    const double train_seconds = seconds_since(epoch_start);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / std::max(1L, batches);
    rec.seconds = train_seconds;
    rec.valid_metric = std::numeric_limits<double>::quiet_NaN();

    if (has_valid) {
      const auto metrics = evaluate(model, data, split.valid, task);
      rec.valid_metric = metrics.at(primary_metric(task));
      const bool improved =
          minimize ? rec.valid_metric < best : rec.valid_metric > best;
      if (improved) {
        best = rec.valid_metric;
        result.best_epoch = epoch;
        best_state = model.state_dict();
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    result.history.push_back(rec);
    if (cfg.verbose)
      std::fprintf(stderr, "epoch %3d  loss %.6f  valid %.6f  (%.2fs)\n",
                   epoch, rec.train_loss, rec.valid_metric, rec.seconds);

    if (has_valid && cfg.patience > 0 && since_best >= cfg.patience) break;
  }

  if (result.best_epoch >= 0) {
    model.load_state(best_state);
    result.best_valid = best;
  }
  model.set_training(false);

  if (!split.test.empty())
    result.test_metrics = evaluate(model, data, split.test, task);

  result.total_seconds = seconds_since(run_start);
  double train_time = 0.0;
  for (const auto& rec : result.history) train_time += rec.seconds;
  result.mean_epoch_seconds =
      train_time / std::max<std::size_t>(1, result.history.size());
  return result;
}

}  // namespace molpool::train

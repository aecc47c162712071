#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "molpool/train.hpp"

namespace molpool::train {

namespace {

Split split_from_file(long n, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("split: cannot open " + path);
  nlohmann::json j;
  is >> j;
  Split s;
  s.train = j.at("train").get<std::vector<long>>();
  s.valid = j.at("valid").get<std::vector<long>>();
  s.test = j.at("test").get<std::vector<long>>();

  std::set<long> seen;
  auto check = [&](const std::vector<long>& part, const char* name) {
    for (long i : part) {
      if (i < 0 || i >= n)
        throw std::runtime_error("split: index " + std::to_string(i) + " in " +
                                 name + " out of range [0, " +
                                 std::to_string(n) + ")");
      if (!seen.insert(i).second)
        throw std::runtime_error("split: index " + std::to_string(i) +
                                 " appears in more than one part");
    }
  };
  check(s.train, "train");
  check(s.valid, "valid");
  check(s.test, "test");
  if (static_cast<long>(seen.size()) != n)
    throw std::runtime_error("split: parts cover " +
                             std::to_string(seen.size()) + " of " +
                             std::to_string(n) + " records");
  return s;
}

}  // namespace

Split make_split(long n, const SplitSpec& spec) {
  if (n < 3) throw std::invalid_argument("split: need at least 3 records");
  if (spec.mode == SplitSpec::Mode::FromFile)
    return split_from_file(n, spec.path);

  const double fsum =
      spec.fractions[0] + spec.fractions[1] + spec.fractions[2];
  if (std::abs(fsum - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");

  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  const long n_train = static_cast<long>(spec.fractions[0] * n);
  const long n_valid = static_cast<long>(spec.fractions[1] * n);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.valid.assign(idx.begin() + n_train, idx.begin() + n_train + n_valid);
  s.test.assign(idx.begin() + n_train + n_valid, idx.end());
  return s;
}

GraphDataset featurize_records(
    const std::vector<chem::DatasetRecord>& records) {
  GraphDataset data;
  data.graphs.reserve(records.size());
  data.targets.reserve(records.size());
  for (const auto& rec : records) {
    data.graphs.push_back(chem::featurize(chem::parse_smiles(rec.smiles)));
    data.targets.push_back(rec.targets);
  }
  return data;
}

TaskSpec fit_task_spec(const GraphDataset& data,
                       const std::vector<long>& train_idx, TaskKind kind) {
  TaskSpec spec;
  spec.kind = kind;
  spec.task_count = data.task_count();
  if (kind != TaskKind::Regression) return spec;

  spec.target_mean.assign(spec.task_count, 0.0);
  spec.target_std.assign(spec.task_count, 1.0);
  for (long t = 0; t < spec.task_count; ++t) {
    double sum = 0.0, sum2 = 0.0;
    long count = 0;
    for (long i : train_idx) {
      if (!data.targets[i][t].has_value()) continue;
      const double v = *data.targets[i][t];
      sum += v;
      sum2 += v * v;
      ++count;
    }
    if (count == 0)
      throw std::runtime_error("task " + std::to_string(t) +
                               ": no labels in the training split");
    const double mean = sum / count;
    const double var = std::max(sum2 / count - mean * mean, 0.0);
    spec.target_mean[t] = mean;
    spec.target_std[t] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  return spec;
}

}  // namespace molpool::train

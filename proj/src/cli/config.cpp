#include "molpool/config.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace molpool::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config: " + field + ": " + why);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

PoolVariant parse_pooling(const std::string& s) {
  if (s == "none") return PoolVariant::None;
  if (s == "simple") return PoolVariant::Simple;
  if (s == "coarse_grain") return PoolVariant::CoarseGrain;
  fail("model.pooling", "expected none|simple|coarse_grain, got '" + s + "'");
}

train::TaskKind parse_kind(const std::string& s) {
  if (s == "regression") return train::TaskKind::Regression;
  if (s == "binary_classification") return train::TaskKind::BinaryClassification;
  fail("task.kind", "expected regression|binary_classification, got '" + s + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  json j;
  is >> j;  // nlohmann reports the byte/line of malformed JSON

  RunConfig cfg;
  if (!j.contains("model")) fail("model", "section required");
  const json& jm = j.at("model");
  cfg.model.node_channels = get_or(jm, "node_channels", std::vector<long>{});
  cfg.model.edge_channels = get_or(jm, "edge_channels", std::vector<long>{});
  cfg.model.keep_ratio = get_or(jm, "keep_ratio", 0.9);
  cfg.model.pooling = parse_pooling(get_or<std::string>(jm, "pooling", "none"));
  cfg.model.gather_width = get_or(jm, "gather_width", 128L);
  cfg.model.mlp_depth = get_or(jm, "mlp_depth", 2);

  const json jt = j.value("task", json::object());
  cfg.task_kind = parse_kind(get_or<std::string>(jt, "kind", "regression"));
  cfg.model.task_count = get_or(jt, "count", 1L);

  const json jtr = j.value("training", json::object());
  cfg.training.lr = get_or(jtr, "lr", 1e-4);
  cfg.training.epochs = get_or(jtr, "epochs", 100);
  cfg.training.batch_size = get_or(jtr, "batch_size", 32L);
  cfg.training.seed = get_or(jtr, "seed", 0ULL);
  cfg.training.patience = get_or(jtr, "patience", 20);
  cfg.model.seed = cfg.training.seed;
  if (cfg.training.lr <= 0) fail("training.lr", "must be positive");
  if (cfg.training.epochs < 1) fail("training.epochs", "must be >= 1");
  if (cfg.training.batch_size < 1) fail("training.batch_size", "must be >= 1");

  const json jd = j.value("data", json::object());
  const std::string kind = get_or<std::string>(jd, "kind", "csv");
  if (kind == "csv")
    cfg.data.kind = RunConfig::DataConfig::Kind::Csv;
  else if (kind == "synthetic")
    cfg.data.kind = RunConfig::DataConfig::Kind::Synthetic;
  else
    fail("data.kind", "expected csv|synthetic, got '" + kind + "'");
  cfg.data.path = get_or<std::string>(jd, "path", "");
  cfg.data.smiles_column = get_or<std::string>(jd, "smiles_column", "smiles");
  cfg.data.target_columns =
      get_or(jd, "target_columns", std::vector<std::string>{});
  if (cfg.data.kind == RunConfig::DataConfig::Kind::Csv) {
    if (cfg.data.path.empty()) fail("data.path", "required for csv data");
    if (cfg.data.target_columns.empty())
      fail("data.target_columns", "at least one target column required");
  }

  const json js = jd.value("split", json::object());
  const std::string mode = get_or<std::string>(js, "mode", "random");
  if (mode == "random")
    cfg.data.split.mode = train::SplitSpec::Mode::Random;
  else if (mode == "from_file")
    cfg.data.split.mode = train::SplitSpec::Mode::FromFile;
  else
    fail("data.split.mode", "expected random|from_file, got '" + mode + "'");
  cfg.data.split.seed = get_or(js, "seed", cfg.training.seed);
  cfg.data.split.path = get_or<std::string>(js, "path", "");
  if (js.contains("fractions")) {
    const auto f = js.at("fractions").get<std::vector<double>>();
    if (f.size() != 3) fail("data.split.fractions", "expected three values");
    cfg.data.split.fractions = {f[0], f[1], f[2]};
  }

  const json jsy = jd.value("synthetic", json::object());
  cfg.data.synthetic.num_graphs = get_or(jsy, "num_graphs", 100L);
  cfg.data.synthetic.nodes_mean = get_or(jsy, "nodes_mean", 20L);
  cfg.data.synthetic.nodes_jitter = get_or(jsy, "nodes_jitter", 5L);
  cfg.data.synthetic.extra_edge_factor = get_or(jsy, "extra_edge_factor", 0.5);
  cfg.data.synthetic.seed = get_or(jsy, "seed", cfg.training.seed);
  cfg.data.synthetic.task_count = cfg.model.task_count;
  cfg.data.synthetic.kind = cfg.task_kind;

  cfg.model.validate();
  return cfg;
}

namespace {
json config_to_json(const RunConfig& cfg) {
  json j;
  j["model"] = {
      {"node_channels", cfg.model.node_channels},
      {"edge_channels", cfg.model.edge_channels},
      {"keep_ratio", cfg.model.keep_ratio},
      {"pooling", pool_variant_name(cfg.model.pooling)},
      {"gather_width", cfg.model.gather_width},
      {"mlp_depth", cfg.model.mlp_depth},
  };
  j["task"] = {
      {"kind", cfg.task_kind == train::TaskKind::Regression
                   ? "regression"
                   : "binary_classification"},
      {"count", cfg.model.task_count},
  };
  j["training"] = {
      {"lr", cfg.training.lr},           {"epochs", cfg.training.epochs},
      {"batch_size", cfg.training.batch_size}, {"seed", cfg.training.seed},
      {"patience", cfg.training.patience},
  };
  json jd;
  jd["kind"] = cfg.data.kind == RunConfig::DataConfig::Kind::Csv ? "csv"
                                                                 : "synthetic";
  jd["path"] = cfg.data.path;
  jd["smiles_column"] = cfg.data.smiles_column;
  jd["target_columns"] = cfg.data.target_columns;
  jd["split"] = {
      {"mode", cfg.data.split.mode == train::SplitSpec::Mode::Random
                   ? "random"
                   : "from_file"},
      {"seed", cfg.data.split.seed},
      {"fractions", cfg.data.split.fractions},
      {"path", cfg.data.split.path},
  };
  jd["synthetic"] = {
      {"num_graphs", cfg.data.synthetic.num_graphs},
      {"nodes_mean", cfg.data.synthetic.nodes_mean},
      {"nodes_jitter", cfg.data.synthetic.nodes_jitter},
      {"extra_edge_factor", cfg.data.synthetic.extra_edge_factor},
      {"seed", cfg.data.synthetic.seed},
  };
  j["data"] = std::move(jd);
  return j;
}
}  // namespace

std::string dump_run_config(const RunConfig& cfg) {
  return config_to_json(cfg).dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg, bool ignore_pooling) {
  json j = config_to_json(cfg);
  if (ignore_pooling) {
    j["model"]["pooling"] = "*";
    j["model"]["keep_ratio"] = 0.0;
  }
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

train::GraphDataset load_dataset(const RunConfig& cfg) {
  if (cfg.data.kind == RunConfig::DataConfig::Kind::Synthetic)
    return train::make_synthetic(cfg.data.synthetic);

  auto loaded = chem::load_csv(cfg.data.path, cfg.data.smiles_column,
                               cfg.data.target_columns);
  for (const std::string& w : loaded.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (loaded.skipped > 0)
    std::fprintf(stderr, "warning: skipped %zu unparseable rows\n",
                 loaded.skipped);
  if (loaded.records.empty())
    throw std::runtime_error("dataset " + cfg.data.path +
                             " contains no usable records");
  return train::featurize_records(loaded.records);
}

}  // namespace molpool::cli

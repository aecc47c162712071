#include "molpool/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>

#include "json.hpp"
#include "molpool/checkpoint.hpp"
#include "molpool/config.hpp"
#include "molpool/export.hpp"

namespace molpool::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

json history_json(const train::TrainResult& result) {
  json h = json::array();
  for (const auto& rec : result.history) {
    json r;
    r["epoch"] = rec.epoch;
    r["train_loss"] = rec.train_loss;
    if (std::isfinite(rec.valid_metric)) r["valid_metric"] = rec.valid_metric;
    r["seconds"] = rec.seconds;
    h.push_back(std::move(r));
  }
  return h;
}

json run_metrics_json(const RunConfig& cfg, const train::TrainResult& result) {
  json m;
  m["config_hash"] = config_hash(cfg);
  m["seed"] = cfg.training.seed;
  m["split_seed"] = cfg.data.split.seed;
  m["history"] = history_json(result);
  m["best_epoch"] = result.best_epoch;
  m["test_metrics"] = result.test_metrics;
  m["wall_clock_seconds"] = result.total_seconds;
  m["mean_epoch_seconds"] = result.mean_epoch_seconds;
  return m;
}

struct RunOutput {
  train::TrainResult result;
  fs::path dir;
};

RunOutput run_training(RunConfig cfg, const train::GraphDataset& data,
                       const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "config.json", dump_run_config(cfg));

  train::Split split = train::make_split(data.size(), cfg.data.split);
  train::TaskSpec task = train::fit_task_spec(data, split.train, cfg.task_kind);

  Model model(cfg.model);
  train::TrainResult result =
      train::train_model(model, data, split, task, cfg.training);

  save_state_dict((dir / "checkpoint.json").string(), model.state_dict());
  write_text(dir / "metrics.json", run_metrics_json(cfg, result).dump(2));
  return {std::move(result), dir};
}

void apply_split_file(RunConfig& cfg, const std::string& split_file) {
  if (split_file.empty()) return;
  cfg.data.split.mode = train::SplitSpec::Mode::FromFile;
  cfg.data.split.path = split_file;
}

bool single_worker_forced() {
  const char* env = std::getenv("MOLPOOL_SINGLE_WORKER");
  return env && env[0] != '\0' && env[0] != '0';
}

}  // namespace

int cmd_train(const TrainArgs& args) {
  RunConfig base = parse_run_config(args.config_path);
  if (args.seed) {
    base.training.seed = *args.seed;
    base.model.seed = *args.seed;
    base.data.split.seed = *args.seed;
  }
  apply_split_file(base, args.split_file);
  if (args.runs < 1) throw std::invalid_argument("--runs must be >= 1");

  const train::GraphDataset data = load_dataset(base);
  std::printf("dataset: %ld graphs, %ld task(s)\n", data.size(),
              data.task_count());

  std::vector<RunConfig> configs;
  for (int r = 0; r < args.runs; ++r) {
    RunConfig cfg = base;
    cfg.training.seed = base.training.seed + static_cast<unsigned>(r);
    cfg.model.seed = cfg.training.seed;
    if (!args.fix_split &&
        cfg.data.split.mode == train::SplitSpec::Mode::Random)
      cfg.data.split.seed = base.data.split.seed + static_cast<unsigned>(r);
    configs.push_back(std::move(cfg));
  }

  const fs::path out{args.out_dir};
  std::vector<RunOutput> outputs(args.runs);
  auto dir_for = [&](int r) {
    return args.runs == 1 ? out : out / ("run_" + std::to_string(r));
  };

  const bool parallel =
      args.parallel_repeats && args.runs > 1 && !single_worker_forced();
  if (parallel) {
    std::vector<std::future<RunOutput>> futures;
    for (int r = 0; r < args.runs; ++r)
      futures.push_back(std::async(std::launch::async, [&, r] {
        return run_training(configs[r], data, dir_for(r));
      }));
    for (int r = 0; r < args.runs; ++r) outputs[r] = futures[r].get();
  } else {
    for (int r = 0; r < args.runs; ++r)
      outputs[r] = run_training(configs[r], data, dir_for(r));
  }

  for (int r = 0; r < args.runs; ++r) {
    const auto& result = outputs[r].result;
    std::printf("run %d: best epoch %d", r, result.best_epoch);
    for (const auto& [k, v] : result.test_metrics)
      if (k.find("_task") == std::string::npos)
        std::printf("  test %s %.4f", k.c_str(), v);
    std::printf("  (%.1fs)\n", result.total_seconds);
  }

  if (args.runs > 1) {
    json agg;
    for (const auto& [key, unused] : outputs[0].result.test_metrics) {
      (void)unused;
      std::vector<double> values;
      for (const auto& o : outputs)
        if (o.result.test_metrics.count(key))
          values.push_back(o.result.test_metrics.at(key));
      const double mean =
          std::accumulate(values.begin(), values.end(), 0.0) / values.size();
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      var /= values.size();
      agg[key] = {{"mean", mean},
                  {"std", std::sqrt(var)},
                  {"values", values}};
      if (key.find("_task") == std::string::npos)
        std::printf("aggregate %s: %.4f +/- %.4f over %d runs\n", key.c_str(),
                    mean, std::sqrt(var), args.runs);
    }
    write_text(out / "aggregate.json", agg.dump(2));
  }
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args) {
  RunConfig cfg = parse_run_config(args.config_path);
  apply_split_file(cfg, args.split_file);
  if (!args.data_path.empty()) {
    cfg.data.kind = RunConfig::DataConfig::Kind::Csv;
    cfg.data.path = args.data_path;
  }

  const train::GraphDataset data = load_dataset(cfg);
  train::Split split = train::make_split(data.size(), cfg.data.split);
  train::TaskSpec task = train::fit_task_spec(data, split.train, cfg.task_kind);

  Model model(cfg.model);
  model.load_state(load_state_dict(args.checkpoint_path));

  const auto metrics = train::evaluate(model, data, split.test, task);
  json out;
  out["config_hash"] = config_hash(cfg);
  out["checkpoint"] = args.checkpoint_path;
  out["test_size"] = split.test.size();
  out["metrics"] = metrics;
  const std::string text = out.dump(2);
  if (!args.out_path.empty()) write_text(args.out_path, text);
  std::printf("%s\n", text.c_str());
  return 0;
}

int cmd_benchmark(const BenchmarkArgs& args) {
  if (args.ratios.empty())
    throw std::invalid_argument(
        "benchmark: --ratios is empty, nothing to compare");
  RunConfig cfg = parse_run_config(args.config_path);
  if (args.epochs) cfg.training.epochs = *args.epochs;
  cfg.training.patience = 0;

  // identical widths across entries; only the pooling fields may vary
  for (double rho : args.ratios) {
    RunConfig variant = cfg;
    variant.model.keep_ratio = rho;
    variant.model.pooling = PoolVariant::Simple;
    if (config_hash(variant, true) != config_hash(cfg, true))
      throw std::logic_error("benchmark: config hash drifted across ratios");
  }

  const train::GraphDataset data = load_dataset(cfg);
  train::Split split;  // timing runs train on everything
  split.train.resize(data.size());
  std::iota(split.train.begin(), split.train.end(), 0);
  train::TaskSpec task = train::fit_task_spec(data, split.train, cfg.task_kind);

  const PoolVariant variant = cfg.model.pooling == PoolVariant::None
                                  ? PoolVariant::Simple
                                  : cfg.model.pooling;
  const auto entries = train::benchmark_pooling(
      cfg.model, variant, args.ratios, data, split, task, cfg.training);

  std::printf("%-22s %14s %12s %10s\n", "run", "epoch seconds", "total", "speedup");
  json rows = json::array();
  for (const auto& e : entries) {
    if (e.rho == 0.0)
      std::printf("%-22s %14.3f %12.2f %10s\n", e.label.c_str(),
                  e.mean_epoch_seconds, e.total_seconds, "-");
    else
      std::printf("%-22s %14.3f %12.2f %9.1f%%\n", e.label.c_str(),
                  e.mean_epoch_seconds, e.total_seconds, e.speedup_pct);
    rows.push_back({{"label", e.label},
                    {"rho", e.rho},
                    {"mean_epoch_seconds", e.mean_epoch_seconds},
                    {"total_seconds", e.total_seconds},
                    {"speedup_pct", e.speedup_pct},
                    {"final_train_loss", e.final_train_loss}});
  }
  json out;
  out["config_hash_modulo_pooling"] = config_hash(cfg, true);
  out["entries"] = std::move(rows);
  fs::create_directories(args.out_dir);
  write_text(fs::path(args.out_dir) / "benchmark.json", out.dump(2));
  return 0;
}

namespace {

std::string provenance_label(const PoolGroup& group) {
  int kept = 0, one = 0, two = 0;
  for (const auto& p : group.provenances) {
    switch (p.kind) {
      case EdgeProvenance::Kind::KeptEdge: ++kept; break;
      case EdgeProvenance::Kind::OneHop: ++one; break;
      case EdgeProvenance::Kind::TwoHop: ++two; break;
    }
  }
  std::string label;
  auto append = [&](int count, const char* name) {
    if (count == 0) return;
    if (!label.empty()) label += "+";
    if (count > 1) label += std::to_string(count) + "x";
    label += name;
  };
  append(kept, "kept");
  append(one, "1hop");
  append(two, "2hop");
  return label;
}

}  // namespace

int cmd_pool_inspect(const InspectArgs& args) {
  RunConfig cfg = parse_run_config(args.config_path);
  if (cfg.model.pooling == PoolVariant::None)
    throw std::invalid_argument(
        "pool-inspect: config has pooling=none, nothing to visualize");
  if (args.smiles.empty())
    throw std::invalid_argument("pool-inspect: no SMILES given");

  Model model(cfg.model);
  if (!args.checkpoint_path.empty())
    model.load_state(load_state_dict(args.checkpoint_path));
  model.set_training(false);

  fs::create_directories(args.out_dir);
  json manifest = json::array();
  int succeeded = 0;

  for (std::size_t mi = 0; mi < args.smiles.size(); ++mi) {
    const std::string& smiles = args.smiles[mi];
    chem::Molecule mol;
    try {
      mol = chem::parse_smiles(smiles);
    } catch (const chem::SmilesError& e) {
      std::fprintf(stderr, "warning: molecule %zu '%s': %s\n", mi,
                   smiles.c_str(), e.what());
      continue;
    }
    MolGraph graph = chem::featurize(mol);
    GraphBatch batch = make_batch({graph});
    std::vector<PoolTrace> traces;
    {
      NoGradGuard guard;
      model.forward(batch, &traces);
    }

    // original atom id carried through the kept chains
    std::vector<long> atom_of(mol.atoms.size());
    std::iota(atom_of.begin(), atom_of.end(), 0);
    auto label_of = [&](long original) {
      return mol.atoms[original].element + std::to_string(original);
    };

    const int stages = static_cast<int>(traces.size()) + 1;
    json mol_entry;
    mol_entry["smiles"] = smiles;
    mol_entry["stages"] = json::array();

    std::vector<std::array<long, 2>> edges;
    std::vector<std::string> edge_labels;
    for (const auto& b : mol.bonds) {
      edges.push_back({b.i, b.j});
      edge_labels.push_back(chem::bond_order_name(b.order));
    }

    for (int stage = 0; stage < stages; ++stage) {
      StageGraph sg;
      sg.name = "mol" + std::to_string(mi) + "_stage" + std::to_string(stage);
      for (long orig : atom_of) sg.node_labels.push_back(label_of(orig));
      sg.edges = edges;
      sg.edge_labels = edge_labels;
      if (stage < static_cast<int>(traces.size())) {
        const auto& tg = traces[stage].graphs[0];
        sg.scores = tg.scores;
        sg.kept.assign(atom_of.size(), false);
        for (long k : tg.kept) sg.kept[k] = true;
      }
      const std::string base =
          (fs::path(args.out_dir) / sg.name).string();
      write_text(base + ".dot", to_dot(sg));
      write_text(base + ".json", to_json(sg));
      mol_entry["stages"].push_back(
          {{"nodes", sg.node_labels.size()}, {"edges", sg.edges.size()}});

      if (stage < static_cast<int>(traces.size())) {
        const auto& tg = traces[stage].graphs[0];
        std::vector<long> next_atoms;
        for (long k : tg.kept) next_atoms.push_back(atom_of[k]);
        atom_of = std::move(next_atoms);
        edges.clear();
        edge_labels.clear();
        for (const auto& grp : tg.plan.groups) {
          edges.push_back({grp.u, grp.v});
          edge_labels.push_back(provenance_label(grp));
        }
      }
    }
    manifest.push_back(std::move(mol_entry));
    ++succeeded;
  }

  write_text(fs::path(args.out_dir) / "manifest.json", manifest.dump(2));
  std::printf("pool-inspect: wrote %d molecule(s) to %s\n", succeeded,
              args.out_dir.c_str());
  return succeeded > 0 ? 0 : 1;
}

}  // namespace molpool::cli

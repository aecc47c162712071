#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "molpool/commands.hpp"
#include "molpool/config.hpp"

using namespace molpool;
using namespace molpool::cli;
namespace fs = std::filesystem;

namespace {

std::string write_config(const std::string& name, const std::string& body) {
  const std::string path = "cli_tmp_" + name + ".json";
  std::ofstream os(path);
  os << body;
  return path;
}

const char* kToyConfig = R"({
  "model": {
    "node_channels": [8, 8],
    "edge_channels": [6, 6],
    "keep_ratio": 0.5,
    "pooling": "simple",
    "gather_width": 6
  },
  "task": { "kind": "regression", "count": 1 },
  "training": { "lr": 0.001, "epochs": 2, "batch_size": 8, "seed": 1, "patience": 0 },
  "data": {
    "kind": "synthetic",
    "synthetic": { "num_graphs": 24, "nodes_mean": 8, "nodes_jitter": 2, "seed": 2 }
  }
})";

nlohmann::json read_json(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  nlohmann::json j;
  is >> j;
  return j;
}

}  // namespace

TEST_CASE("config parsing: defaults, round trip, field-named errors") {
  const std::string path = write_config("parse", kToyConfig);
  RunConfig cfg = parse_run_config(path);
  CHECK(cfg.model.node_channels == std::vector<long>{8, 8});
  CHECK(cfg.model.pooling == PoolVariant::Simple);
  CHECK(cfg.model.mlp_depth == 2);       // default
  CHECK(cfg.training.patience == 0);
  CHECK(cfg.data.synthetic.num_graphs == 24);

  // round trip through the canonical dump
  const std::string copy = write_config("parse2", dump_run_config(cfg));
  RunConfig cfg2 = parse_run_config(copy);
  CHECK(config_hash(cfg) == config_hash(cfg2));

  const std::string bad_rho = write_config("bad_rho", R"({
    "model": {"node_channels": [8], "edge_channels": [6], "keep_ratio": 1.3},
    "data": {"kind": "synthetic"}
  })");
  CHECK_THROWS_WITH_AS(parse_run_config(bad_rho),
                       doctest::Contains("keep_ratio"), std::invalid_argument);

  const std::string bad_pool = write_config("bad_pool", R"({
    "model": {"node_channels": [8], "edge_channels": [6], "pooling": "diffpool"}
  })");
  CHECK_THROWS_WITH_AS(parse_run_config(bad_pool),
                       doctest::Contains("model.pooling"),
                       std::invalid_argument);

  const std::string no_target = write_config("no_target", R"({
    "model": {"node_channels": [8], "edge_channels": [6]},
    "data": {"kind": "csv", "path": "x.csv"}
  })");
  CHECK_THROWS_WITH_AS(parse_run_config(no_target),
                       doctest::Contains("target_columns"),
                       std::invalid_argument);
}

TEST_CASE("config hash ignores pooling fields only when asked") {
  RunConfig a = parse_run_config(write_config("hash_a", kToyConfig));
  RunConfig b = a;
  b.model.keep_ratio = 0.8;
  b.model.pooling = PoolVariant::CoarseGrain;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a, true) == config_hash(b, true));

  RunConfig c = a;
  c.model.node_channels = {16, 16};
  CHECK(config_hash(a, true) != config_hash(c, true));
}

TEST_CASE("cmd_train writes a self-reproducing run directory") {
  TrainArgs args;
  args.config_path = write_config("train", kToyConfig);
  args.out_dir = "cli_tmp_run";
  fs::remove_all(args.out_dir);
  REQUIRE(cmd_train(args) == 0);

  CHECK(fs::exists("cli_tmp_run/config.json"));
  CHECK(fs::exists("cli_tmp_run/checkpoint.json"));
  const auto metrics = read_json("cli_tmp_run/metrics.json");
  CHECK(metrics.contains("config_hash"));
  CHECK(metrics.contains("wall_clock_seconds"));
  REQUIRE(metrics.at("history").size() == 2);
  const double first_loss = metrics.at("history")[0].at("train_loss");

  // re-running from the stored config reproduces the first-epoch loss
  TrainArgs again;
  again.config_path = "cli_tmp_run/config.json";
  again.out_dir = "cli_tmp_run2";
  fs::remove_all(again.out_dir);
  REQUIRE(cmd_train(again) == 0);
  const auto metrics2 = read_json("cli_tmp_run2/metrics.json");
  CHECK(metrics2.at("history")[0].at("train_loss").get<double>() ==
        first_loss);
}

TEST_CASE("cmd_train with repeats aggregates mean and std") {
  TrainArgs args;
  args.config_path = write_config("repeats", kToyConfig);
  args.out_dir = "cli_tmp_repeats";
  args.runs = 3;
  fs::remove_all(args.out_dir);
  REQUIRE(cmd_train(args) == 0);
  CHECK(fs::exists("cli_tmp_repeats/run_0/metrics.json"));
  CHECK(fs::exists("cli_tmp_repeats/run_2/metrics.json"));
  const auto agg = read_json("cli_tmp_repeats/aggregate.json");
  REQUIRE(agg.contains("rmse"));
  CHECK(agg.at("rmse").at("values").size() == 3);
  CHECK(agg.at("rmse").at("std").get<double>() >= 0.0);

  // distinct split seeds per run by default
  const auto m0 = read_json("cli_tmp_repeats/run_0/metrics.json");
  const auto m1 = read_json("cli_tmp_repeats/run_1/metrics.json");
  CHECK(m0.at("split_seed").get<long>() != m1.at("split_seed").get<long>());
}

TEST_CASE("cmd_evaluate reproduces training test metrics from the checkpoint") {
  TrainArgs args;
  args.config_path = write_config("eval", kToyConfig);
  args.out_dir = "cli_tmp_eval_run";
  fs::remove_all(args.out_dir);
  REQUIRE(cmd_train(args) == 0);
  const double trained_rmse = read_json("cli_tmp_eval_run/metrics.json")
                                  .at("test_metrics")
                                  .at("rmse")
                                  .get<double>();

  EvaluateArgs eargs;
  eargs.config_path = "cli_tmp_eval_run/config.json";
  eargs.checkpoint_path = "cli_tmp_eval_run/checkpoint.json";
  eargs.out_path = "cli_tmp_eval_metrics.json";
  REQUIRE(cmd_evaluate(eargs) == 0);
  const double evaluated_rmse = read_json("cli_tmp_eval_metrics.json")
                                    .at("metrics")
                                    .at("rmse")
                                    .get<double>();
  CHECK(std::abs(evaluated_rmse - trained_rmse) < 1e-9);
}

TEST_CASE("cmd_evaluate rejects a wrong-width checkpoint with a named layer") {
  std::string wide = kToyConfig;
  wide.replace(wide.find("[8, 8]"), 6, "[9, 9]");
  EvaluateArgs eargs;
  eargs.config_path = write_config("eval_wide", wide);
  eargs.checkpoint_path = "cli_tmp_eval_run/checkpoint.json";
  CHECK_THROWS_WITH_AS(cmd_evaluate(eargs), doctest::Contains("conv0"),
                       std::runtime_error);
}

TEST_CASE("cmd_benchmark errors on an empty ratio list") {
  BenchmarkArgs bargs;
  bargs.config_path = write_config("bench", kToyConfig);
  CHECK_THROWS_AS(cmd_benchmark(bargs), std::invalid_argument);
}

TEST_CASE("cmd_pool_inspect: benzene stage node counts follow ceil(rho * n)") {
  // three conv layers -> two pooling layers at rho = 0.5
  const std::string config = write_config("inspect", R"({
    "model": {
      "node_channels": [8, 8, 8],
      "edge_channels": [6, 6, 6],
      "keep_ratio": 0.5,
      "pooling": "simple",
      "gather_width": 6
    },
    "task": { "kind": "regression", "count": 1 },
    "training": { "seed": 3 },
    "data": { "kind": "synthetic" }
  })");

  InspectArgs iargs;
  iargs.config_path = config;
  iargs.out_dir = "cli_tmp_inspect";
  iargs.smiles = {"c1ccccc1", "not(a(smiles"};
  fs::remove_all(iargs.out_dir);
  REQUIRE(cmd_pool_inspect(iargs) == 0);

  const auto manifest = read_json("cli_tmp_inspect/manifest.json");
  REQUIRE(manifest.size() == 1);  // the bad molecule was skipped with a warning
  const auto& stages = manifest[0].at("stages");
  REQUIRE(stages.size() == 3);
  CHECK(stages[0].at("nodes") == 6);
  CHECK(stages[1].at("nodes") == 3);
  CHECK(stages[2].at("nodes") == 2);

  for (const char* f :
       {"mol0_stage0.dot", "mol0_stage1.dot", "mol0_stage2.dot"}) {
    std::ifstream is(fs::path("cli_tmp_inspect") / f);
    REQUIRE(is.good());
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("graph ") == 0);
    CHECK(std::count(text.begin(), text.end(), '{') ==
          std::count(text.begin(), text.end(), '}'));
  }

  // all molecules failing is an error exit
  InspectArgs none = iargs;
  none.smiles = {"却not_smiles"};
  none.out_dir = "cli_tmp_inspect_none";
  CHECK(cmd_pool_inspect(none) == 1);
}

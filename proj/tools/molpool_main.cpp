#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "molpool/commands.hpp"
#include "molpool/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "molpool: graph neural networks with edge features and sparse "
      "hierarchical pooling on molecular graphs"};
  app.require_subcommand(1);

  molpool::cli::TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a model, write run artifacts");
  train->add_option("--config", train_args.config_path, "run config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out-dir", train_args.out_dir, "output directory");
  train->add_option("--runs", train_args.runs, "repeat runs with shifted seeds");
  unsigned long long seed_override = 0;
  auto* seed_opt = train->add_option("--seed", seed_override, "seed override");
  train->add_option("--split-file", train_args.split_file,
                    "JSON index lists (train/valid/test)");
  train->add_flag("--parallel-repeats", train_args.parallel_repeats,
                  "run repeats concurrently (MOLPOOL_SINGLE_WORKER=1 forces "
                  "sequential)");
  train->add_flag("--fix-split", train_args.fix_split,
                  "reuse one split across repeat runs");

  molpool::cli::EvaluateArgs eval_args;
  auto* evaluate =
      app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
  evaluate->add_option("--config", eval_args.config_path)->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--checkpoint", eval_args.checkpoint_path)->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval_args.out_path, "metrics JSON path");
  evaluate->add_option("--data-path", eval_args.data_path,
                       "CSV overriding the config dataset");
  evaluate->add_option("--split-file", eval_args.split_file);

  molpool::cli::BenchmarkArgs bench_args;
  auto* benchmark = app.add_subcommand(
      "benchmark", "time pooling keep ratios against the no-pooling run");
  benchmark->add_option("--config", bench_args.config_path)->required()
      ->check(CLI::ExistingFile);
  benchmark->add_option("--ratios", bench_args.ratios, "keep ratios")
      ->delimiter(',');
  benchmark->add_option("--out-dir", bench_args.out_dir);
  int bench_epochs = 0;
  auto* epochs_opt =
      benchmark->add_option("--epochs", bench_epochs, "fixed epoch count");

  molpool::cli::InspectArgs inspect_args;
  auto* inspect = app.add_subcommand(
      "pool-inspect", "emit DOT/JSON graphs per pooling stage");
  inspect->add_option("--config", inspect_args.config_path)->required()
      ->check(CLI::ExistingFile);
  inspect->add_option("--checkpoint", inspect_args.checkpoint_path,
                      "optional trained checkpoint");
  inspect->add_option("--out-dir", inspect_args.out_dir);
  inspect->add_option("smiles", inspect_args.smiles, "molecules to trace");

  bool show_kernels = false;
  app.add_flag("--kernels", show_kernels, "print the active kernel variant");

  CLI11_PARSE(app, argc, argv);

  if (show_kernels)
    std::printf("kernels: %s\n", molpool::kernels::active().name);

  try {
    if (*seed_opt) train_args.seed = seed_override;
    if (*epochs_opt) bench_args.epochs = bench_epochs;
    if (app.got_subcommand(train)) return molpool::cli::cmd_train(train_args);
    if (app.got_subcommand(evaluate))
      return molpool::cli::cmd_evaluate(eval_args);
    if (app.got_subcommand(benchmark))
      return molpool::cli::cmd_benchmark(bench_args);
    if (app.got_subcommand(inspect))
      return molpool::cli::cmd_pool_inspect(inspect_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

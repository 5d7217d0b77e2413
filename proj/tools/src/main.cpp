// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "CLI11.hpp"
#include "layergraph/cli/commands.hpp"

namespace cli = layergraph::cli;

int main(int argc, char** argv) {
  CLI::App app{"Build, describe, train and evaluate layer graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "layergraph 0.1.0");

  std::filesystem::path describe_spec;
  auto* describe = app.add_subcommand("describe", "Print the dependency-ordered schedule of a spec");
  describe->add_option("spec", describe_spec, "Graph spec file")->required();

  cli::TrainArgs train_args;
  std::uint64_t train_seed = 0;
  auto* train = app.add_subcommand("train", "Fit a spec's single output to a data file");
  train->add_option("spec", train_args.spec, "Graph spec file")->required();
  train->add_option("data", train_args.data, "Data file")->required();
  train->add_option("--epochs", train_args.epochs, "Passes over the data")->default_val(1);
  train->add_option("--lr", train_args.lr, "Learning rate")->default_val(0.01);
  train->add_option("--momentum", train_args.momentum, "SGD momentum, 0 for plain SGD")->default_val(0.0);
  train->add_option("--loss", train_args.loss, "mse or sce")->default_val("mse");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "Run seed (default LAYERGRAPH_SEED or 0)");
  train->add_flag("--compile", train_args.compile, "Evaluate through optimized plans");
  train->add_option("--out", train_args.out, "Output directory for history and state")->default_val(".");
  train->add_option("--batch-size", train_args.batch_size, "Rows per batch, 0 for full batch")->default_val(0);

  cli::EvalArgs eval_args;
  std::uint64_t eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate saved state on a data file");
  eval->add_option("spec", eval_args.spec, "Graph spec file")->required();
  eval->add_option("state_dir", eval_args.state_dir, "Directory of <node>.<slot>.tsr blobs")->required();
  eval->add_option("data", eval_args.data, "Data file")->required();
  eval->add_option("--metric", eval_args.metrics, "mse or accuracy (repeatable)")->default_val("accuracy");
  auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "Run seed (default LAYERGRAPH_SEED or 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kExitOk : cli::kExitValidation;
  }

  if (describe->parsed()) return cli::cmd_describe(describe_spec, std::cout, std::cerr);
  if (train->parsed()) {
    if (train_seed_opt->count() > 0) train_args.seed = train_seed;
    return cli::cmd_train(train_args, std::cout, std::cerr);
  }
  if (eval_seed_opt->count() > 0) eval_args.seed = eval_seed;
  return cli::cmd_eval(eval_args, std::cout, std::cerr);
}

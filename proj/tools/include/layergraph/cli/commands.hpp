// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "layergraph/error.hpp"

namespace layergraph::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

int exit_code_for(ErrorCode code) noexcept;

/// LAYERGRAPH_SEED when set to an unsigned integer, else 0.
std::uint64_t default_run_seed();

struct TrainArgs {
  std::filesystem::path spec;
  std::filesystem::path data;
  std::filesystem::path out = ".";
  std::size_t epochs = 1;
  double lr = 0.01;
  double momentum = 0.0;
  std::string loss = "mse";
  std::optional<std::uint64_t> seed;
  bool compile = false;
  /// Rows per batch; 0 trains on the whole file as one batch.
  std::size_t batch_size = 0;
};

struct EvalArgs {
  std::filesystem::path spec;
  std::filesystem::path state_dir;
  std::filesystem::path data;
  std::vector<std::string> metrics{"accuracy"};
  std::optional<std::uint64_t> seed;
};

/// Each command writes results to `out`, diagnostics to `err`, and returns
/// the exit code.
int cmd_describe(const std::filesystem::path& spec, std::ostream& out, std::ostream& err);
/// Writes `history.tsv` and one `<node>.<slot>.tsr` per trainable slot to args.out.
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
/// Loads `<node>.<slot>.tsr` blobs from args.state_dir; never writes files.
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

}  // namespace layergraph::cli

// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layergraph/autodiff.hpp"
#include "layergraph/graph.hpp"
#include "layergraph/layers.hpp"

namespace layergraph {

/// Mean over all elements of (pred - target)^2, output shape [1].
/// ShapeMismatch when the unit counts differ (runtime shapes are checked on compute).
LayerPtr mse(const LayerPtr& pred, const LayerPtr& target, std::string name = {});

/// Batch mean of -sum(target * log_softmax(logits)) over rank-2 inputs.
LayerPtr softmax_cross_entropy(const LayerPtr& logits, const LayerPtr& target,
                               std::string name = {});

enum class LossKind { kMse, kSoftmaxCrossEntropy };

/// Accepts "mse", "sce" and "softmax_cross_entropy".
std::optional<LossKind> parse_loss(std::string_view name) noexcept;
std::string_view loss_name(LossKind kind) noexcept;

enum class Metric { kMse, kAccuracy };

std::optional<Metric> parse_metric(std::string_view name) noexcept;
std::string_view metric_name(Metric metric) noexcept;

enum class OptimizerKind { kSgd, kSgdMomentum };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 0.01;
  double momentum = 0.9;
};

/// slot <- slot - lr * g (sgd) or v <- mu * v + g; slot <- slot - lr * v.
class Optimizer {
 public:
  /// InvalidArgument for a negative or non-finite rate, or momentum outside [0,1).
  explicit Optimizer(OptimizerConfig config);

  const OptimizerConfig& config() const noexcept { return config_; }
  void apply(std::span<const SlotGradient> gradients);
  /// Velocity for a slot, nullptr before its first momentum update.
  const Tensor* velocity(const LayerState& state, std::string_view slot) const;

 private:
  OptimizerConfig config_;
  std::map<std::pair<const LayerState*, std::string>, Tensor, std::less<>> velocity_;
};

/// A plain list of batch feeds; batching and ordering are the caller's.
using Dataset = std::vector<Feed>;

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::vector<double> metrics;
};

struct History {
  std::vector<Metric> metrics;
  std::vector<EpochRecord> epochs;

  double final_loss() const;
  /// `version: 1`, a header line, then `epoch<TAB>mean_loss<TAB>metric...`
  /// per epoch with 9 significant digits.
  std::string to_tsv() const;
};

struct FitOptions {
  std::size_t epochs = 1;
  /// Evaluated on the training data after each epoch.
  std::vector<Metric> metrics;
};

struct ModelOptions {
  LossKind loss = LossKind::kMse;
  OptimizerConfig optimizer;
  /// Inference and evaluation run through optimized plans.
  bool compile = false;
  std::string target_name = "target";
};

/// Inference, training and evaluation graphs over one set of state records.
///
/// The training graph adds a target Input and the loss node; the evaluation
/// graph adds an mse metric node. A batch feed names the prediction graph's
/// inputs plus the target.
class Model {
 public:
  explicit Model(LayerPtr prediction, ModelOptions options = {});

  const Graph& inference_graph() const noexcept { return inference_; }
  const Graph& training_graph() const noexcept { return training_; }
  const Graph& evaluation_graph() const noexcept { return evaluation_; }
  const LayerPtr& prediction() const noexcept { return prediction_; }
  const LayerPtr& target() const noexcept { return target_; }
  const LayerPtr& loss() const noexcept { return loss_; }
  const ModelOptions& options() const noexcept { return options_; }
  const Optimizer& optimizer() const noexcept { return optimizer_; }
  std::uint64_t step() const noexcept { return step_; }
  std::uint64_t epoch() const noexcept { return epoch_; }

  /// Train-mode forward, backward and update. Returns the loss measured
  /// before the update. NonFiniteLoss leaves every slot untouched.
  double train_step(const Feed& batch);

  /// Inference-mode prediction; the target may be present and is ignored.
  Tensor predict(const Feed& feed) const;

  /// Inference-mode (prediction, mse) on a batch that includes the target.
  std::pair<Tensor, double> evaluate_batch(const Feed& batch) const;

 private:
  friend History fit(Model& model, const Dataset& dataset, const FitOptions& options);

  LayerPtr prediction_;
  LayerPtr target_;
  LayerPtr loss_;
  LayerPtr metric_mse_;
  ModelOptions options_;
  Graph inference_;
  Graph training_;
  Graph evaluation_;
  ExecutablePlan predict_plan_;
  ExecutablePlan evaluate_plan_;
  Optimizer optimizer_;
  std::uint64_t step_ = 0;
  std::uint64_t epoch_ = 0;
};

/// Mean loss per epoch over the dataset's batches. Errors: EmptyDataset,
/// InvalidArgument for zero epochs, plus anything train_step raises.
History fit(Model& model, const Dataset& dataset, const FitOptions& options);

/// Inference-mode metrics, weighted by batch row count. Never mutates state.
std::map<std::string, double> evaluate(const Model& model, const Dataset& dataset,
                                       std::span<const Metric> metrics);

/// Fraction of rows classified correctly: threshold 0.5 for single-unit
/// outputs, argmax agreement otherwise.
double accuracy(const Tensor& prediction, const Tensor& target);

}  // namespace layergraph

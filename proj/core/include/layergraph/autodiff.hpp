// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "layergraph/graph.hpp"
#include "layergraph/layers.hpp"

namespace layergraph {

/// A trainable slot reachable from a graph, including slots owned by nodes
/// inside modules. Each state record appears once however many nodes share it.
struct SlotRef {
  StatePtr state;
  std::string slot;

  std::string label() const { return state->owner() + "." + slot; }
};

std::vector<SlotRef> trainable_slots(const Graph& g);

struct SlotGradient {
  SlotRef ref;
  Tensor gradient;
};

/// Result of a reverse sweep: node adjoints (same shape as node outputs),
/// summed slot gradients, and the forward values of the graph outputs.
class Gradients {
 public:
  /// Nullptr when no gradient reached the node.
  const Tensor* node_adjoint(const LayerNode& node) const;
  /// Nullptr when the slot is not a trainable slot of the graph.
  const Tensor* slot_gradient(const LayerState& state, std::string_view slot) const;
  std::span<const SlotGradient> slots() const noexcept { return slots_; }

  std::span<const Tensor> outputs() const noexcept { return outputs_; }
  double loss() const noexcept { return loss_; }

 private:
  friend class BackwardSweep;

  std::map<const LayerNode*, Tensor> adjoints_;
  std::vector<SlotGradient> slots_;
  std::vector<Tensor> outputs_;
  double loss_ = 0.0;
};

struct BackwardOptions;

/// Everything a vector-Jacobian rule sees for one node.
struct VjpArgs {
  const LayerNode& node;
  std::span<const Tensor> inputs;
  const Tensor& output;
  const Tensor& upstream;
  const ExecContext& ctx;
  const BackwardOptions& options;
};

struct VjpResult {
  /// One entry per node input; nullopt for non-differentiable inputs.
  std::vector<std::optional<Tensor>> input_grads;
  std::vector<SlotGradient> slot_grads;
};

using VjpRule = std::function<VjpResult(const VjpArgs&)>;

/// The built-in rule for args.node.kind().
VjpResult default_vjp(const VjpArgs& args);

struct BackwardOptions {
  ExecContext ctx{Mode::kTrain, 0};
  /// When set, consumers are visited in a random valid reverse order keyed by
  /// this seed instead of reverse dependency order.
  std::optional<std::uint64_t> shuffle_seed;
  /// Replaces the built-in rule for a kind (used to test the checker).
  std::map<LayerKind, VjpRule> overrides;
};

/// Reverse-mode sweep from `loss`, seeded with d(loss)/d(loss) = 1.
/// Errors: NotInGraph, NonScalarLoss, plus anything the forward pass raises.
Gradients backward(const Graph& g, const LayerNode& loss, const Feed& feed,
                   const BackwardOptions& options = {});

/// Sweep seeded with arbitrary adjoints on graph nodes and positional input
/// bindings; used for module recursion.
Gradients backward_from(const Graph& g, const Bindings& bindings,
                        std::span<const std::pair<const LayerNode*, Tensor>> seeds,
                        const BackwardOptions& options);

struct GradCheckOptions {
  double tolerance = 1e-4;
  /// Central-difference step.
  double step = 1e-6;
  /// Above this many trainable elements a seeded random subsample is checked.
  std::size_t max_elements = 10000;
  std::uint64_t sample_seed = 0;
  BackwardOptions backward;
};

struct GradCheckEntry {
  std::string slot;
  std::vector<std::size_t> coordinate;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = true;

  std::vector<GradCheckEntry> failures() const;
  /// `slot<TAB>coordinate<TAB>analytic<TAB>numeric<TAB>relative_error` per
  /// entry, coordinate as comma-separated indices.
  std::string to_lines() const;
};

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
double gradient_relative_error(double analytic, double numeric) noexcept;

/// Compares backward() against central finite differences for every
/// trainable element. Intended for float64 graphs.
GradCheckReport grad_check(const Graph& g, const LayerNode& loss, const Feed& feed,
                           const GradCheckOptions& options = {});

}  // namespace layergraph

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
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "layergraph/layers.hpp"

namespace layergraph {

/// Input tensors keyed by node name.
using Feed = std::map<std::string, Tensor, std::less<>>;

/// One optional tensor per declared graph input, in declaration order.
using Bindings = std::vector<std::optional<Tensor>>;

/// Immutable DAG snapshot traced backward from its outputs.
///
/// Nodes are kept in dependency order (ties broken by creation id). When
/// inputs are declared, tracing stops at them: a declared node with layer
/// inputs becomes a boundary fed from outside, and every zero-input node the
/// trace reaches must be declared.
class Graph {
 public:
  /// Errors: CycleDetected, UndeclaredInput, UnreachableDeclaredInput,
  /// DuplicateName.
  static Graph build(std::vector<LayerPtr> outputs,
                     std::optional<std::vector<LayerPtr>> inputs = std::nullopt);

  std::span<const LayerPtr> nodes() const noexcept { return order_; }
  std::span<const LayerPtr> inputs() const noexcept { return inputs_; }
  std::span<const LayerPtr> outputs() const noexcept { return outputs_; }
  std::size_t size() const noexcept { return order_.size(); }

  bool contains(const LayerNode& node) const;
  /// Position in dependency order; NotInGraph when absent.
  std::size_t index_of(const LayerNode& node) const;
  /// Position in inputs(), if declared.
  std::optional<std::size_t> input_slot(const LayerNode& node) const;
  LayerPtr find(std::string_view name) const;

  /// Declared input whose own layer inputs are not part of the graph.
  bool is_boundary(const LayerNode& node) const;
  /// Member nodes feeding `node` inside this graph (empty for boundaries).
  std::span<const LayerPtr> sources(const LayerNode& node) const;

  /// (producer, consumer) pairs.
  std::vector<std::pair<LayerPtr, LayerPtr>> edges() const;

 private:
  Graph() = default;

  std::vector<LayerPtr> order_;
  std::vector<LayerPtr> inputs_;
  std::vector<LayerPtr> outputs_;
  std::unordered_map<const LayerNode*, std::size_t> index_;
  std::vector<bool> boundary_;
};

/// Topological order with ties broken by ascending creation id.
std::vector<LayerPtr> dependency_order(const Graph& g);

/// Validates a named feed against the declared inputs. Unknown names raise
/// FeedArityMismatch; wrong last dimension or dtype FeedShapeMismatch.
Bindings bind_feed(const Graph& g, const Feed& feed);

/// Evaluates every node in dependency order. Declared inputs take their
/// binding when present, Input nodes otherwise fall back to the stored value.
/// The result is aligned with g.nodes().
std::vector<Tensor> evaluate_nodes(const Graph& g, const Bindings& bindings,
                                   const ExecContext& ctx = kInference);

/// Eager execution; returns one tensor per graph output.
std::vector<Tensor> execute(const Graph& g, const Feed& feed, const ExecContext& ctx = kInference);
std::vector<Tensor> execute(const Graph& g, const Feed& feed, Mode mode);

struct PlanOptions {
  bool compile = false;
  Mode mode = Mode::kInference;
  /// Subset of graph nodes to return; all graph outputs when empty.
  std::vector<LayerPtr> fetch;
};

/// Frozen schedule plus argument wiring. Each step reads earlier step
/// results or a feed slot (one slot per declared graph input).
class ExecutablePlan {
 public:
  struct Source {
    enum class Kind { kStep, kFeed };
    Kind kind = Kind::kStep;
    std::size_t index = 0;
    friend bool operator==(const Source&, const Source&) = default;
  };

  struct Step {
    LayerPtr node;
    std::vector<Source> sources;
  };

  std::span<const Step> schedule() const noexcept { return schedule_; }
  std::span<const Source> outputs() const noexcept { return outputs_; }
  std::span<const LayerPtr> feed_nodes() const noexcept { return feed_nodes_; }
  bool compiled() const noexcept { return compiled_; }
  Mode mode() const noexcept { return mode_; }

  /// Positional feed: exactly one tensor per declared input.
  std::vector<Tensor> operator()(std::span<const Tensor> feed, std::uint64_t step = 0) const;
  std::vector<Tensor> operator()(std::initializer_list<Tensor> feed, std::uint64_t step = 0) const;
  /// Named feed: Input nodes missing from the feed use their stored value.
  std::vector<Tensor> operator()(const Feed& feed, std::uint64_t step = 0) const;

  /// One line per step, `name = Kind(source, ...)`.
  std::string describe() const;

 private:
  friend ExecutablePlan as_function(const Graph& g, PlanOptions options);
  friend ExecutablePlan optimize(ExecutablePlan plan);

  std::vector<Tensor> run(const Bindings& bindings, std::uint64_t step) const;
  std::string source_name(const Source& source) const;

  std::vector<Step> schedule_;
  std::vector<Source> outputs_;
  std::vector<LayerPtr> feed_nodes_;
  bool compiled_ = false;
  Mode mode_ = Mode::kInference;
};

/// With compile=true the plan is passed through optimize() and frozen.
ExecutablePlan as_function(const Graph& g, PlanOptions options = {});
ExecutablePlan as_function(const Graph& g, bool compile, Mode mode = Mode::kInference);

/// Dead-node elimination, then duplicate merge, then (inference mode only)
/// Dropout elision. Never changes the plan's outputs on any feed.
ExecutablePlan optimize(ExecutablePlan plan);

/// Rendering of the unoptimized schedule of `g`.
std::string describe(const Graph& g);

}  // namespace layergraph

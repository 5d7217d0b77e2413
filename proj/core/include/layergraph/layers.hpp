// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layergraph/ops.hpp"
#include "layergraph/tensor.hpp"

namespace layergraph {

class Graph;
class LayerNode;
using LayerPtr = std::shared_ptr<const LayerNode>;

enum class LayerKind {
  kInput,
  kLinear,
  kActivation,
  kAdd,
  kDropout,
  kLookup,
  kModule,
  kMse,
  kSoftmaxCrossEntropy,
};

/// "Input", "Linear", ... as used in plan descriptions.
std::string_view kind_name(LayerKind kind) noexcept;

enum class Mode { kInference, kTrain };

/// Explicit execution context threaded through every compute call.
/// `step` keys the per-call dropout stream.
struct ExecContext {
  Mode mode = Mode::kInference;
  std::uint64_t step = 0;
};

inline constexpr ExecContext kInference{Mode::kInference, 0};
inline constexpr ExecContext kTrain{Mode::kTrain, 0};

/// Named variables owned separately from nodes so several nodes can alias
/// one parameter set. Slot shapes are fixed once declared, except for the
/// Input "value" slot whose leading extents follow the fed batch.
class LayerState {
 public:
  explicit LayerState(std::string owner) : owner_(std::move(owner)) {}

  /// Name of the node that created the record; used in reports and blob names.
  const std::string& owner() const noexcept { return owner_; }

  void declare(const std::string& slot, Tensor initial, bool trainable);
  void declare_unset(const std::string& slot);

  bool has(std::string_view slot) const;
  bool is_set(std::string_view slot) const;
  bool trainable(std::string_view slot) const;
  std::size_t size() const noexcept { return slots_.size(); }
  std::vector<std::string> slot_names() const;

  /// MissingInput when declared but unset.
  const Tensor& get(std::string_view slot) const;
  /// ShapeMismatch / DtypeMismatch when a fixed-shape slot would change.
  void set(std::string_view slot, Tensor value);

 private:
  struct Slot {
    std::optional<Tensor> value;
    bool trainable = false;
    bool fixed_shape = true;
  };

  Slot& slot(std::string_view name);
  const Slot& slot(std::string_view name) const;

  std::string owner_;
  std::map<std::string, Slot, std::less<>> slots_;
};

using StatePtr = std::shared_ptr<LayerState>;

/// Kind-specific parameters. Compared field-wise by duplicate merging.
struct LayerConfig {
  UnaryOp activation = UnaryOp::kIdentity;
  double probability = 0.0;
  std::size_t vocab_size = 0;
  bool bias = true;
  /// Element type of the node's output.
  DType dtype = DType::kFloat32;

  friend bool operator==(const LayerConfig&, const LayerConfig&) = default;
};

namespace detail {
struct NodeInit {
  std::string name;
  LayerKind kind = LayerKind::kInput;
  std::vector<LayerPtr> inputs;
  std::size_t n_units = 0;
  StatePtr state;
  LayerConfig config;
  std::uint64_t seed = 0;
  std::shared_ptr<const Graph> inner;
  /// Creation ordinal reserved before construction; allocated when absent.
  std::optional<std::uint64_t> id;
};
/// Allocates the next creation ordinal and an auto name when none is given.
LayerPtr make_node(NodeInit init);
std::uint64_t next_node_id() noexcept;
}  // namespace detail

/// A stateful function over its ordered inputs and, at the same time, the
/// end-node of the graph that produces its inputs. Nodes are immutable after
/// construction; only the referenced LayerState changes.
class LayerNode {
 public:
  LayerNode(std::uint64_t id, detail::NodeInit init);

  std::uint64_t id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  LayerKind kind() const noexcept { return kind_; }
  const std::vector<LayerPtr>& inputs() const noexcept { return inputs_; }
  std::size_t n_units() const noexcept { return n_units_; }
  const StatePtr& state() const noexcept { return state_; }
  const LayerConfig& config() const noexcept { return config_; }
  DType dtype() const noexcept { return config_.dtype; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Non-null only for modules.
  const std::shared_ptr<const Graph>& inner_graph() const noexcept { return inner_; }

  /// Input nodes: store the placeholder value (validated against n_units).
  void set_value(Tensor value) const;
  bool has_value() const;

  /// Checks a tensor bound to this Input node: rank >= 1, last axis ==
  /// n_units and dtype. Throws `code` on violation.
  void check_input_tensor(const Tensor& value, ErrorCode code) const;

 private:
  std::uint64_t id_;
  std::string name_;
  LayerKind kind_;
  std::vector<LayerPtr> inputs_;
  std::size_t n_units_;
  StatePtr state_;
  LayerConfig config_;
  std::uint64_t seed_;
  std::shared_ptr<const Graph> inner_;
};

enum class WeightInit { kGlorotUniform, kZeros };

struct InputOptions {
  std::string name;
  DType dtype = DType::kFloat32;
};

struct LinearOptions {
  std::string name;
  bool bias = true;
  WeightInit init = WeightInit::kGlorotUniform;
  std::optional<std::uint64_t> seed;
};

struct DropoutOptions {
  std::string name;
  std::optional<std::uint64_t> seed;
};

struct LookupOptions {
  std::string name;
  DType dtype = DType::kFloat32;
  std::optional<std::uint64_t> seed;
};

/// Seed used when a factory is given none: derived from the node name.
std::uint64_t default_seed(std::string_view name) noexcept;

LayerPtr input_layer(std::size_t n_units, InputOptions options = {});
LayerPtr linear(const LayerPtr& input, std::size_t n_units, LinearOptions options = {});
LayerPtr activation(const LayerPtr& input, UnaryOp fn, std::string name = {});
/// UnknownActivation when `fn` names no supported op.
LayerPtr activation(const LayerPtr& input, std::string_view fn, std::string name = {});
LayerPtr add(std::vector<LayerPtr> inputs, std::string name = {});
/// `probability` is the drop probability; survivors are scaled by 1/(1-p) in
/// training mode, inference mode is the identity.
LayerPtr dropout(const LayerPtr& input, double probability, DropoutOptions options = {});
LayerPtr lookup(const LayerPtr& indices, std::size_t vocab_size, std::size_t n_units,
                LookupOptions options = {});

/// New node with the same kind and config over `new_inputs`, aliasing the
/// original state record (and inner graph for modules).
LayerPtr reuse_with(const LayerPtr& layer, std::vector<LayerPtr> new_inputs,
                    std::string name = {});

/// Encapsulates the graph between `inputs` and `output` as one layer whose
/// inputs are `inputs`.
LayerPtr module(std::vector<LayerPtr> inputs, const LayerPtr& output, std::string name = {});

/// Applies only this node's function to `inputs`; upstream nodes are not run.
/// Input nodes take no arguments and return their stored value.
Tensor compute(const LayerNode& layer, std::span<const Tensor> inputs,
               const ExecContext& ctx = kInference);
Tensor compute(const LayerNode& layer, std::initializer_list<Tensor> inputs,
               const ExecContext& ctx = kInference);

/// Builds the graph ending at `layer` and executes it from stored Input values.
Tensor forward(const LayerPtr& layer, const ExecContext& ctx = kInference);

/// Keep-mask used by a dropout node for a tensor of `count` elements.
std::vector<bool> dropout_keep_mask(const LayerNode& layer, std::size_t count,
                                    const ExecContext& ctx);

}  // namespace layergraph

// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/layers.hpp"

#include <atomic>
#include <cmath>

#include "layergraph/graph.hpp"
#include "layergraph/rng.hpp"

namespace layergraph {

std::string_view kind_name(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::kInput: return "Input";
    case LayerKind::kLinear: return "Linear";
    case LayerKind::kActivation: return "Activation";
    case LayerKind::kAdd: return "Add";
    case LayerKind::kDropout: return "Dropout";
    case LayerKind::kLookup: return "Lookup";
    case LayerKind::kModule: return "Module";
    case LayerKind::kMse: return "MSE";
    case LayerKind::kSoftmaxCrossEntropy: return "SoftmaxCrossEntropy";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// LayerState

LayerState::Slot& LayerState::slot(std::string_view name) {
  auto it = slots_.find(name);
  if (it == slots_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "state of '" + owner_ + "' has no slot '" + std::string(name) + "'");
  }
  return it->second;
}

const LayerState::Slot& LayerState::slot(std::string_view name) const {
  return const_cast<LayerState*>(this)->slot(name);
}

void LayerState::declare(const std::string& name, Tensor initial, bool trainable) {
  slots_[name] = Slot{std::move(initial), trainable, true};
}

void LayerState::declare_unset(const std::string& name) {
  slots_[name] = Slot{std::nullopt, false, false};
}

bool LayerState::has(std::string_view name) const { return slots_.find(name) != slots_.end(); }

bool LayerState::is_set(std::string_view name) const {
  auto it = slots_.find(name);
  return it != slots_.end() && it->second.value.has_value();
}

bool LayerState::trainable(std::string_view name) const { return slot(name).trainable; }

std::vector<std::string> LayerState::slot_names() const {
  std::vector<std::string> names;
  names.reserve(slots_.size());
  for (const auto& [name, _] : slots_) names.push_back(name);
  return names;
}

const Tensor& LayerState::get(std::string_view name) const {
  const Slot& s = slot(name);
  if (!s.value) {
    throw Error(ErrorCode::kMissingInput,
                "slot '" + std::string(name) + "' of '" + owner_ + "' has no value");
  }
  return *s.value;
}

void LayerState::set(std::string_view name, Tensor value) {
  Slot& s = slot(name);
  if (s.fixed_shape && s.value) {
    if (s.value->shape() != value.shape()) {
      throw Error(ErrorCode::kShapeMismatch, "slot '" + owner_ + "." + std::string(name) +
                                                 "' has shape " + s.value->shape().to_string() +
                                                 ", got " + value.shape().to_string());
    }
    if (s.value->dtype() != value.dtype()) {
      throw Error(ErrorCode::kDtypeMismatch, "slot '" + owner_ + "." + std::string(name) +
                                                 "' holds " +
                                                 std::string(dtype_name(s.value->dtype())));
    }
  }
  s.value = std::move(value);
}

// ---------------------------------------------------------------------------
// LayerNode

namespace detail {

std::uint64_t next_node_id() noexcept {
  static std::atomic<std::uint64_t> counter{0};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

LayerPtr make_node(NodeInit init) {
  const std::uint64_t id = init.id ? *init.id : next_node_id();
  if (init.name.empty()) {
    std::string base(kind_name(init.kind));
    for (char& c : base) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    init.name = base + std::to_string(id);
  }
  if (!init.state) init.state = std::make_shared<LayerState>(init.name);
  return std::make_shared<const LayerNode>(id, std::move(init));
}

}  // namespace detail

LayerNode::LayerNode(std::uint64_t id, detail::NodeInit init)
    : id_(id),
      name_(std::move(init.name)),
      kind_(init.kind),
      inputs_(std::move(init.inputs)),
      n_units_(init.n_units),
      state_(std::move(init.state)),
      config_(init.config),
      seed_(init.seed),
      inner_(std::move(init.inner)) {}

void LayerNode::check_input_tensor(const Tensor& value, ErrorCode code) const {
  if (value.rank() == 0 || value.shape().last() != n_units_) {
    throw Error(code, "'" + name_ + "' expects last dimension " + std::to_string(n_units_) +
                          ", got shape " + value.shape().to_string());
  }
  if (value.dtype() != config_.dtype) {
    throw Error(code == ErrorCode::kShapeMismatch ? ErrorCode::kDtypeMismatch : code,
                "'" + name_ + "' expects " + std::string(dtype_name(config_.dtype)) + ", got " +
                    std::string(dtype_name(value.dtype())));
  }
}

void LayerNode::set_value(Tensor value) const {
  if (kind_ != LayerKind::kInput) {
    throw Error(ErrorCode::kInvalidArgument, "set_value on non-Input node '" + name_ + "'");
  }
  check_input_tensor(value, ErrorCode::kShapeMismatch);
  state_->set("value", std::move(value));
}

bool LayerNode::has_value() const { return kind_ == LayerKind::kInput && state_->is_set("value"); }

// ---------------------------------------------------------------------------
// Factories

std::uint64_t default_seed(std::string_view name) noexcept {
  return derive_seed(0, hash_name(name));
}

namespace {

void require_positive_units(std::size_t n_units, std::string_view what) {
  if (n_units == 0) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": n_units must be positive");
  }
}

void require_input(const LayerPtr& input, std::string_view what) {
  if (!input) throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": null input");
}

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Shape shape, std::uint64_t seed,
              DType dtype) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return random_uniform(shape, -limit, limit, seed, dtype);
}

// Assigns the name early so the default seed can be derived from it.
void resolve_name(detail::NodeInit& init) {
  if (!init.name.empty()) return;
  init.id = detail::next_node_id();
  std::string base(kind_name(init.kind));
  for (char& c : base) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  init.name = base + std::to_string(*init.id);
}

}  // namespace

LayerPtr input_layer(std::size_t n_units, InputOptions options) {
  require_positive_units(n_units, "input_layer");
  detail::NodeInit init;
  init.name = std::move(options.name);
  init.kind = LayerKind::kInput;
  init.n_units = n_units;
  init.config.dtype = options.dtype;
  init.config.bias = false;
  LayerPtr node = detail::make_node(std::move(init));
  node->state()->declare_unset("value");
  return node;
}

LayerPtr linear(const LayerPtr& input, std::size_t n_units, LinearOptions options) {
  require_input(input, "linear");
  require_positive_units(n_units, "linear");
  if (!is_floating(input->dtype())) {
    throw Error(ErrorCode::kDtypeMismatch, "linear over non-floating input '" + input->name() + "'");
  }
  detail::NodeInit init;
  init.name = std::move(options.name);
  init.kind = LayerKind::kLinear;
  resolve_name(init);
  init.inputs = {input};
  init.n_units = n_units;
  init.config.bias = options.bias;
  init.config.dtype = input->dtype();
  init.seed = options.seed.value_or(default_seed(init.name));
  const std::size_t fan_in = input->n_units();
  const DType dtype = input->dtype();
  const std::uint64_t seed = init.seed;
  LayerPtr node = detail::make_node(std::move(init));
  Shape wshape{fan_in, n_units};
  node->state()->declare("weights",
                         options.init == WeightInit::kGlorotUniform
                             ? glorot(fan_in, n_units, wshape, derive_seed(seed, 0), dtype)
                             : Tensor::zeros(wshape, dtype),
                         true);
  if (options.bias) node->state()->declare("bias", Tensor::zeros(Shape{n_units}, dtype), true);
  return node;
}

LayerPtr activation(const LayerPtr& input, UnaryOp fn, std::string name) {
  require_input(input, "activation");
  detail::NodeInit init;
  init.name = std::move(name);
  init.kind = LayerKind::kActivation;
  init.inputs = {input};
  init.n_units = input->n_units();
  init.config.activation = fn;
  init.config.dtype = input->dtype();
  return detail::make_node(std::move(init));
}

LayerPtr activation(const LayerPtr& input, std::string_view fn, std::string name) {
  auto op = parse_unary_op(fn);
  if (!op) throw Error(ErrorCode::kUnknownActivation, "unknown activation '" + std::string(fn) + "'");
  return activation(input, *op, std::move(name));
}

LayerPtr add(std::vector<LayerPtr> inputs, std::string name) {
  if (inputs.size() < 2) {
    throw Error(ErrorCode::kArityMismatch, "add needs at least two inputs");
  }
  for (const auto& in : inputs) {
    require_input(in, "add");
    if (in->n_units() != inputs.front()->n_units()) {
      throw Error(ErrorCode::kShapeMismatch, "add: '" + in->name() + "' has " +
                                                 std::to_string(in->n_units()) + " units, '" +
                                                 inputs.front()->name() + "' has " +
                                                 std::to_string(inputs.front()->n_units()));
    }
  }
  detail::NodeInit init;
  init.name = std::move(name);
  init.kind = LayerKind::kAdd;
  init.n_units = inputs.front()->n_units();
  init.config.dtype = inputs.front()->dtype();
  init.inputs = std::move(inputs);
  return detail::make_node(std::move(init));
}

LayerPtr dropout(const LayerPtr& input, double probability, DropoutOptions options) {
  require_input(input, "dropout");
  if (!(probability >= 0.0 && probability < 1.0)) {
    throw Error(ErrorCode::kInvalidProbability,
                "dropout probability " + std::to_string(probability) + " outside [0,1)");
  }
  detail::NodeInit init;
  init.name = std::move(options.name);
  init.kind = LayerKind::kDropout;
  resolve_name(init);
  init.inputs = {input};
  init.n_units = input->n_units();
  init.config.probability = probability;
  init.config.dtype = input->dtype();
  init.seed = options.seed.value_or(default_seed(init.name));
  return detail::make_node(std::move(init));
}

LayerPtr lookup(const LayerPtr& indices, std::size_t vocab_size, std::size_t n_units,
                LookupOptions options) {
  require_input(indices, "lookup");
  require_positive_units(n_units, "lookup");
  if (vocab_size == 0) throw Error(ErrorCode::kInvalidArgument, "lookup: empty vocabulary");
  if (indices->dtype() != DType::kInt64) {
    throw Error(ErrorCode::kDtypeMismatch, "lookup indices '" + indices->name() + "' must be int64");
  }
  if (!is_floating(options.dtype)) {
    throw Error(ErrorCode::kDtypeMismatch, "lookup table must be floating");
  }
  detail::NodeInit init;
  init.name = std::move(options.name);
  init.kind = LayerKind::kLookup;
  resolve_name(init);
  init.inputs = {indices};
  init.n_units = n_units;
  init.config.vocab_size = vocab_size;
  init.config.dtype = options.dtype;
  init.seed = options.seed.value_or(default_seed(init.name));
  const std::uint64_t seed = init.seed;
  LayerPtr node = detail::make_node(std::move(init));
  node->state()->declare(
      "table", glorot(vocab_size, n_units, Shape{vocab_size, n_units}, derive_seed(seed, 0),
                      options.dtype),
      true);
  return node;
}

LayerPtr reuse_with(const LayerPtr& layer, std::vector<LayerPtr> new_inputs, std::string name) {
  require_input(layer, "reuse_with");
  if (new_inputs.size() != layer->inputs().size()) {
    throw Error(ErrorCode::kArityMismatch, "reuse_with '" + layer->name() + "': expected " +
                                               std::to_string(layer->inputs().size()) +
                                               " inputs, got " +
                                               std::to_string(new_inputs.size()));
  }
  for (std::size_t i = 0; i < new_inputs.size(); ++i) {
    require_input(new_inputs[i], "reuse_with");
    const auto& old = layer->inputs()[i];
    if (new_inputs[i]->n_units() != old->n_units()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "reuse_with '" + layer->name() + "': input " + std::to_string(i) + " has " +
                      std::to_string(new_inputs[i]->n_units()) + " units, expected " +
                      std::to_string(old->n_units()));
    }
    if (new_inputs[i]->dtype() != old->dtype()) {
      throw Error(ErrorCode::kDtypeMismatch, "reuse_with '" + layer->name() + "': input " +
                                                 std::to_string(i) + " dtype differs");
    }
  }
  detail::NodeInit init;
  init.kind = layer->kind();
  init.inputs = std::move(new_inputs);
  init.n_units = layer->n_units();
  init.state = layer->state();
  init.config = layer->config();
  init.seed = layer->seed();
  init.inner = layer->inner_graph();
  if (name.empty()) {
    init.id = detail::next_node_id();
    init.name = layer->name() + "_r" + std::to_string(*init.id);
  } else {
    init.name = std::move(name);
  }
  return detail::make_node(std::move(init));
}

LayerPtr module(std::vector<LayerPtr> inputs, const LayerPtr& output, std::string name) {
  require_input(output, "module");
  if (inputs.empty()) throw Error(ErrorCode::kArityMismatch, "module needs at least one input");
  for (const auto& in : inputs) require_input(in, "module");
  std::shared_ptr<const Graph> inner;
  try {
    inner = std::make_shared<const Graph>(Graph::build({output}, inputs));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUnreachableDeclaredInput) {
      throw Error(ErrorCode::kDisconnectedInput, e.message());
    }
    if (e.code() == ErrorCode::kUndeclaredInput) {
      throw Error(ErrorCode::kUnreachableDependency, e.message());
    }
    throw;
  }
  detail::NodeInit init;
  init.name = std::move(name);
  init.kind = LayerKind::kModule;
  init.inputs = std::move(inputs);
  init.n_units = output->n_units();
  init.config.dtype = output->dtype();
  init.inner = std::move(inner);
  return detail::make_node(std::move(init));
}

// ---------------------------------------------------------------------------
// compute

std::vector<bool> dropout_keep_mask(const LayerNode& layer, std::size_t count,
                                    const ExecContext& ctx) {
  std::vector<bool> keep(count, true);
  if (ctx.mode != Mode::kTrain || layer.config().probability == 0.0) return keep;
  const CounterRng rng(derive_seed(layer.seed(), ctx.step));
  const double p = layer.config().probability;
  for (std::size_t i = 0; i < count; ++i) keep[i] = rng.uniform(i) >= p;
  return keep;
}

namespace {

void require_arity(const LayerNode& layer, std::span<const Tensor> inputs) {
  if (inputs.size() != layer.inputs().size()) {
    throw Error(ErrorCode::kArityMismatch, "'" + layer.name() + "' takes " +
                                               std::to_string(layer.inputs().size()) +
                                               " inputs, got " + std::to_string(inputs.size()));
  }
}

void require_last_dim(const LayerNode& layer, const Tensor& x, std::size_t expected) {
  if (x.rank() == 0 || x.shape().last() != expected) {
    throw Error(ErrorCode::kShapeMismatch, "'" + layer.name() + "' expects last dimension " +
                                               std::to_string(expected) + ", got " +
                                               x.shape().to_string());
  }
}

Tensor compute_linear(const LayerNode& layer, const Tensor& x) {
  const Tensor& w = layer.state()->get("weights");
  require_last_dim(layer, x, w.shape()[0]);
  const std::size_t k = w.shape()[0];
  const std::size_t n = w.shape()[1];
  std::vector<std::size_t> out_dims = x.shape().vec();
  out_dims.back() = n;
  Tensor y = matmul(x.reshape(Shape{x.numel() / std::max<std::size_t>(k, 1), k}), w);
  if (layer.config().bias) y = add_broadcast(y, layer.state()->get("bias"));
  return y.reshape(Shape(std::move(out_dims)));
}

Tensor compute_dropout(const LayerNode& layer, const Tensor& x, const ExecContext& ctx) {
  if (ctx.mode != Mode::kTrain || layer.config().probability == 0.0) return x;
  const std::vector<bool> keep = dropout_keep_mask(layer, x.numel(), ctx);
  const double keep_prob = 1.0 - layer.config().probability;
  return x.visit([&](auto xv) -> Tensor {
    using T = std::remove_const_t<typename decltype(xv)::element_type>;
    if constexpr (std::is_floating_point_v<T>) {
      const T denom = static_cast<T>(keep_prob);
      std::vector<T> out(xv.size());
      for (std::size_t i = 0; i < xv.size(); ++i) out[i] = keep[i] ? xv[i] / denom : T(0);
      return Tensor(x.shape(), std::move(out));
    } else {
      throw Error(ErrorCode::kDtypeMismatch, "dropout over integer tensor");
    }
  });
}

Tensor compute_mse(const LayerNode& layer, const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "'" + layer.name() + "': prediction " +
                                               pred.shape().to_string() + " vs target " +
                                               target.shape().to_string());
  }
  const Tensor diff = sub(pred, target);
  const double mean = sum_all(mul(diff, diff)) / static_cast<double>(std::max<std::size_t>(pred.numel(), 1));
  return Tensor::full(Shape{1}, mean, pred.dtype());
}

Tensor compute_softmax_xent(const LayerNode& layer, const Tensor& logits, const Tensor& target) {
  if (logits.rank() != 2 || logits.shape() != target.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "'" + layer.name() + "': logits " +
                                               logits.shape().to_string() + " vs target " +
                                               target.shape().to_string());
  }
  if (logits.dtype() != target.dtype()) {
    throw Error(ErrorCode::kDtypeMismatch, "'" + layer.name() + "': logits and target dtypes differ");
  }
  const std::size_t batch = logits.shape()[0];
  const std::size_t classes = logits.shape()[1];
  const std::vector<double> x = logits.to_doubles();
  const std::vector<double> t = target.to_doubles();
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = x.data() + b * classes;
    double peak = row[0];
    for (std::size_t j = 1; j < classes; ++j) peak = std::max(peak, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < classes; ++j) sum += std::exp(row[j] - peak);
    const double lse = peak + std::log(sum);
    for (std::size_t j = 0; j < classes; ++j) total -= t[b * classes + j] * (row[j] - lse);
  }
  return Tensor::full(Shape{1}, batch == 0 ? 0.0 : total / static_cast<double>(batch),
                      logits.dtype());
}

}  // namespace

Tensor compute(const LayerNode& layer, std::span<const Tensor> inputs, const ExecContext& ctx) {
  require_arity(layer, inputs);
  switch (layer.kind()) {
    case LayerKind::kInput:
      if (!layer.state()->is_set("value")) {
        throw Error(ErrorCode::kMissingInput, "Input '" + layer.name() + "' has no value");
      }
      return layer.state()->get("value");
    case LayerKind::kLinear:
      return compute_linear(layer, inputs[0]);
    case LayerKind::kActivation:
      return unary(layer.config().activation, inputs[0]);
    case LayerKind::kAdd: {
      Tensor acc = inputs[0];
      for (std::size_t i = 1; i < inputs.size(); ++i) {
        if (inputs[i].shape() != acc.shape()) {
          throw Error(ErrorCode::kShapeMismatch, "'" + layer.name() + "': operand " +
                                                     std::to_string(i) + " has shape " +
                                                     inputs[i].shape().to_string() + ", expected " +
                                                     acc.shape().to_string());
        }
        acc = add_broadcast(acc, inputs[i]);
      }
      return acc;
    }
    case LayerKind::kDropout:
      return compute_dropout(layer, inputs[0], ctx);
    case LayerKind::kLookup:
      return gather_rows(layer.state()->get("table"), inputs[0]);
    case LayerKind::kModule: {
      const Graph& inner = *layer.inner_graph();
      Bindings bindings(inputs.begin(), inputs.end());
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        require_last_dim(layer, inputs[i], inner.inputs()[i]->n_units());
      }
      std::vector<Tensor> values = evaluate_nodes(inner, bindings, ctx);
      return values[inner.index_of(*inner.outputs().front())];
    }
    case LayerKind::kMse:
      return compute_mse(layer, inputs[0], inputs[1]);
    case LayerKind::kSoftmaxCrossEntropy:
      return compute_softmax_xent(layer, inputs[0], inputs[1]);
  }
  throw Error(ErrorCode::kUnknownKind, "unhandled layer kind");
}

Tensor compute(const LayerNode& layer, std::initializer_list<Tensor> inputs,
               const ExecContext& ctx) {
  return compute(layer, std::span<const Tensor>(inputs.begin(), inputs.size()), ctx);
}

Tensor forward(const LayerPtr& layer, const ExecContext& ctx) {
  Graph g = Graph::build({layer});
  return execute(g, Feed{}, ctx).front();
}

}  // namespace layergraph

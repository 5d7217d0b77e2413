// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "layergraph/rng.hpp"

namespace layergraph {

namespace {

void collect_slots(const Graph& g, std::unordered_set<const LayerState*>& seen,
                   std::vector<SlotRef>& out) {
  for (const auto& node : g.nodes()) {
    if (node->kind() == LayerKind::kModule && !g.is_boundary(*node)) {
      collect_slots(*node->inner_graph(), seen, out);
    }
    if (!g.sources(*node).empty() || node->kind() == LayerKind::kInput) {
      const StatePtr& state = node->state();
      if (!seen.insert(state.get()).second) continue;
      for (const auto& name : state->slot_names()) {
        if (state->trainable(name)) out.push_back({state, name});
      }
    }
  }
}

void accumulate(std::optional<Tensor>& into, const Tensor& contribution) {
  if (into) {
    into = add_broadcast(*into, contribution);
  } else {
    into = contribution;
  }
}

template <class F>
Tensor zip3(const Tensor& a, const Tensor& b, const Tensor& c, F f) {
  return a.visit([&](auto av) -> Tensor {
    using T = std::remove_const_t<typename decltype(av)::element_type>;
    if constexpr (std::is_floating_point_v<T>) {
      auto bv = b.values<T>();
      auto cv = c.values<T>();
      std::vector<T> out(av.size());
      for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i], bv[i], cv[i]);
      return Tensor(a.shape(), std::move(out));
    } else {
      throw Error(ErrorCode::kDtypeMismatch, "gradient of an integer tensor");
    }
  });
}

// d/dx of the activation given upstream dy, input x and output y.
Tensor activation_vjp(UnaryOp op, const Tensor& dy, const Tensor& x, const Tensor& y) {
  switch (op) {
    case UnaryOp::kIdentity:
      return dy;
    case UnaryOp::kTanh:
      return zip3(dy, x, y, [](auto g, auto, auto v) { return g * (decltype(v)(1) - v * v); });
    case UnaryOp::kRelu:
      // Derivative at exactly 0 is 0.
      return zip3(dy, x, y, [](auto g, auto u, auto) {
        return u > decltype(u)(0) ? g : decltype(u)(0);
      });
    case UnaryOp::kSigmoid:
      return zip3(dy, x, y, [](auto g, auto, auto v) { return g * v * (decltype(v)(1) - v); });
    case UnaryOp::kExp:
      return zip3(dy, x, y, [](auto g, auto, auto v) { return g * v; });
    case UnaryOp::kLog:
      return zip3(dy, x, y, [](auto g, auto u, auto) { return g / u; });
    case UnaryOp::kNeg:
      return zip3(dy, x, y, [](auto g, auto, auto) { return -g; });
  }
  throw Error(ErrorCode::kUnknownActivation, "no derivative rule");
}

VjpResult linear_vjp(const VjpArgs& a) {
  const Tensor& x = a.inputs[0];
  const Tensor& w = a.node.state()->get("weights");
  const std::size_t k = w.shape()[0];
  const std::size_t n = w.shape()[1];
  const std::size_t rows = x.numel() / std::max<std::size_t>(k, 1);
  const Tensor x2 = x.reshape(Shape{rows, k});
  const Tensor dy2 = a.upstream.reshape(Shape{rows, n});
  VjpResult r;
  r.input_grads.push_back(matmul(dy2, transpose_2d(w)).reshape(x.shape()));
  r.slot_grads.push_back({{a.node.state(), "weights"}, matmul(transpose_2d(x2), dy2)});
  if (a.node.config().bias) {
    r.slot_grads.push_back({{a.node.state(), "bias"}, reduce_sum(dy2, 0)});
  }
  return r;
}

VjpResult dropout_vjp(const VjpArgs& a) {
  VjpResult r;
  const double p = a.node.config().probability;
  if (a.ctx.mode != Mode::kTrain || p == 0.0) {
    r.input_grads.push_back(a.upstream);
    return r;
  }
  const std::vector<bool> keep = dropout_keep_mask(a.node, a.upstream.numel(), a.ctx);
  r.input_grads.push_back(a.upstream.visit([&](auto gv) -> Tensor {
    using T = std::remove_const_t<typename decltype(gv)::element_type>;
    const T denom = static_cast<T>(1.0 - p);
    std::vector<T> out(gv.size());
    for (std::size_t i = 0; i < gv.size(); ++i) out[i] = keep[i] ? gv[i] / denom : T(0);
    return Tensor(a.upstream.shape(), std::move(out));
  }));
  return r;
}

VjpResult mse_vjp(const VjpArgs& a) {
  const Tensor& pred = a.inputs[0];
  const Tensor& target = a.inputs[1];
  const double scale = 2.0 * a.upstream.item(0) / static_cast<double>(std::max<std::size_t>(pred.numel(), 1));
  const Tensor d = scalar_mul(sub(pred, target), scale);
  VjpResult r;
  r.input_grads.push_back(d);
  r.input_grads.push_back(scalar_mul(d, -1.0));
  return r;
}

VjpResult softmax_xent_vjp(const VjpArgs& a) {
  const Tensor& logits = a.inputs[0];
  const Tensor& target = a.inputs[1];
  const double scale = a.upstream.item(0) / static_cast<double>(std::max<std::size_t>(logits.shape()[0], 1));
  VjpResult r;
  r.input_grads.push_back(scalar_mul(sub(softmax(logits), target), scale));
  r.input_grads.push_back(scalar_mul(log_softmax(logits), -scale));
  return r;
}

VjpResult module_vjp(const VjpArgs& a) {
  const Graph& inner = *a.node.inner_graph();
  Bindings bindings(a.inputs.begin(), a.inputs.end());
  BackwardOptions inner_options = a.options;
  inner_options.ctx = a.ctx;
  const std::pair<const LayerNode*, Tensor> seed{inner.outputs().front().get(), a.upstream};
  Gradients g = backward_from(inner, bindings, std::span(&seed, 1), inner_options);
  VjpResult r;
  for (std::size_t i = 0; i < inner.inputs().size(); ++i) {
    const Tensor& x = a.inputs[i];
    if (!x.is_floating()) {
      r.input_grads.emplace_back();
    } else if (const Tensor* adj = g.node_adjoint(*inner.inputs()[i])) {
      r.input_grads.emplace_back(*adj);
    } else {
      r.input_grads.emplace_back(Tensor::zeros(x.shape(), x.dtype()));
    }
  }
  r.slot_grads.assign(g.slots().begin(), g.slots().end());
  return r;
}

struct SlotKey {
  const LayerState* state;
  std::string slot;
  friend bool operator<(const SlotKey& a, const SlotKey& b) {
    return std::tie(a.state, a.slot) < std::tie(b.state, b.slot);
  }
};

}  // namespace

VjpResult default_vjp(const VjpArgs& a) {
  switch (a.node.kind()) {
    case LayerKind::kInput:
      return {};
    case LayerKind::kLinear:
      return linear_vjp(a);
    case LayerKind::kActivation: {
      VjpResult r;
      r.input_grads.push_back(activation_vjp(a.node.config().activation, a.upstream, a.inputs[0], a.output));
      return r;
    }
    case LayerKind::kAdd: {
      VjpResult r;
      r.input_grads.assign(a.inputs.size(), a.upstream);
      return r;
    }
    case LayerKind::kDropout:
      return dropout_vjp(a);
    case LayerKind::kLookup: {
      const Tensor& idx = a.inputs[0];
      const std::size_t vocab = a.node.config().vocab_size;
      VjpResult r;
      r.input_grads.emplace_back();
      r.slot_grads.push_back({{a.node.state(), "table"}, scatter_add_rows(idx, a.upstream, vocab)});
      return r;
    }
    case LayerKind::kModule:
      return module_vjp(a);
    case LayerKind::kMse:
      return mse_vjp(a);
    case LayerKind::kSoftmaxCrossEntropy:
      return softmax_xent_vjp(a);
  }
  throw Error(ErrorCode::kUnknownKind, "no vjp rule");
}

std::vector<SlotRef> trainable_slots(const Graph& g) {
  std::unordered_set<const LayerState*> seen;
  std::vector<SlotRef> out;
  collect_slots(g, seen, out);
  return out;
}

const Tensor* Gradients::node_adjoint(const LayerNode& node) const {
  auto it = adjoints_.find(&node);
  return it == adjoints_.end() ? nullptr : &it->second;
}

const Tensor* Gradients::slot_gradient(const LayerState& state, std::string_view slot) const {
  for (const auto& s : slots_) {
    if (s.ref.state.get() == &state && s.ref.slot == slot) return &s.gradient;
  }
  return nullptr;
}

class BackwardSweep {
 public:
  static Gradients run(const Graph& g, std::vector<Tensor> values,
                       std::span<const std::pair<const LayerNode*, Tensor>> seeds,
                       const BackwardOptions& options) {
    const std::size_t n = g.size();
    std::vector<std::optional<Tensor>> adjoint(n);
    for (const auto& [node, seed] : seeds) accumulate(adjoint[g.index_of(*node)], seed);

    Gradients out;
    std::map<SlotKey, std::size_t> slot_index;
    for (SlotRef& ref : trainable_slots(g)) {
      const Tensor& v = ref.state->get(ref.slot);
      slot_index.emplace(SlotKey{ref.state.get(), ref.slot}, out.slots_.size());
      out.slots_.push_back({std::move(ref), Tensor::zeros(v.shape(), v.dtype())});
    }

    std::vector<Tensor> args;
    for (std::size_t idx : reverse_order(g, options)) {
      if (!adjoint[idx]) continue;
      const LayerNode& node = *g.nodes()[idx];
      const auto sources = g.sources(node);
      if (sources.empty()) continue;
      args.clear();
      for (const auto& src : sources) args.push_back(values[g.index_of(*src)]);
      const VjpArgs vjp_args{node, args, values[idx], *adjoint[idx], options.ctx, options};
      auto rule = options.overrides.find(node.kind());
      VjpResult r = rule != options.overrides.end() ? rule->second(vjp_args) : default_vjp(vjp_args);
      for (std::size_t i = 0; i < r.input_grads.size() && i < sources.size(); ++i) {
        if (r.input_grads[i]) accumulate(adjoint[g.index_of(*sources[i])], *r.input_grads[i]);
      }
      for (SlotGradient& sg : r.slot_grads) {
        const SlotKey key{sg.ref.state.get(), sg.ref.slot};
        auto it = slot_index.find(key);
        if (it == slot_index.end()) {
          slot_index.emplace(key, out.slots_.size());
          out.slots_.push_back(std::move(sg));
        } else {
          Tensor& acc = out.slots_[it->second].gradient;
          acc = add_broadcast(acc, sg.gradient);
        }
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (adjoint[i]) out.adjoints_.emplace(g.nodes()[i].get(), std::move(*adjoint[i]));
    }
    for (const auto& o : g.outputs()) out.outputs_.push_back(values[g.index_of(*o)]);
    return out;
  }

  static void set_loss(Gradients& g, double loss) { g.loss_ = loss; }

 private:
  // Every node is visited after all of its consumers.
  static std::vector<std::size_t> reverse_order(const Graph& g, const BackwardOptions& options) {
    const std::size_t n = g.size();
    std::vector<std::size_t> order;
    order.reserve(n);
    if (!options.shuffle_seed) {
      for (std::size_t i = n; i-- > 0;) order.push_back(i);
      return order;
    }
    std::vector<std::size_t> consumers_left(n, 0);
    for (const auto& node : g.nodes()) {
      for (const auto& src : g.sources(*node)) ++consumers_left[g.index_of(*src)];
    }
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i) {
      if (consumers_left[i] == 0) ready.push_back(i);
    }
    const CounterRng rng(*options.shuffle_seed);
    std::uint64_t draw = 0;
    while (!ready.empty()) {
      const std::size_t pick = static_cast<std::size_t>(rng.bits(draw++) % ready.size());
      const std::size_t idx = ready[pick];
      ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
      order.push_back(idx);
      for (const auto& src : g.sources(*g.nodes()[idx])) {
        if (--consumers_left[g.index_of(*src)] == 0) ready.push_back(g.index_of(*src));
      }
    }
    return order;
  }
};

Gradients backward_from(const Graph& g, const Bindings& bindings,
                        std::span<const std::pair<const LayerNode*, Tensor>> seeds,
                        const BackwardOptions& options) {
  std::vector<Tensor> values = evaluate_nodes(g, bindings, options.ctx);
  return BackwardSweep::run(g, std::move(values), seeds, options);
}

Gradients backward(const Graph& g, const LayerNode& loss, const Feed& feed,
                   const BackwardOptions& options) {
  if (!g.contains(loss)) {
    throw Error(ErrorCode::kNotInGraph, "loss '" + loss.name() + "' is not in the graph");
  }
  std::vector<Tensor> values = evaluate_nodes(g, bind_feed(g, feed), options.ctx);
  const Tensor& loss_value = values[g.index_of(loss)];
  if (loss_value.numel() != 1 || loss_value.rank() > 1) {
    throw Error(ErrorCode::kNonScalarLoss, "loss '" + loss.name() + "' has shape " +
                                               loss_value.shape().to_string());
  }
  const double loss_scalar = loss_value.item(0);
  const std::pair<const LayerNode*, Tensor> seed{
      &loss, Tensor::ones(loss_value.shape(), loss_value.dtype())};
  Gradients out = BackwardSweep::run(g, std::move(values), std::span(&seed, 1), options);
  BackwardSweep::set_loss(out, loss_scalar);
  return out;
}

}  // namespace layergraph

// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <unordered_set>

namespace layergraph {

namespace {

std::string join_names(const std::vector<const LayerNode*>& nodes, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) out += sep;
    out += nodes[i]->name();
  }
  return out;
}

}  // namespace

Graph Graph::build(std::vector<LayerPtr> outputs, std::optional<std::vector<LayerPtr>> inputs) {
  if (outputs.empty()) throw Error(ErrorCode::kInvalidArgument, "graph needs at least one output");
  for (const auto& out : outputs) {
    if (!out) throw Error(ErrorCode::kInvalidArgument, "null graph output");
  }

  std::unordered_map<const LayerNode*, std::size_t> declared;
  if (inputs) {
    for (std::size_t i = 0; i < inputs->size(); ++i) {
      const LayerPtr& in = (*inputs)[i];
      if (!in) throw Error(ErrorCode::kInvalidArgument, "null graph input");
      if (!declared.emplace(in.get(), i).second) {
        throw Error(ErrorCode::kDuplicateName, "input '" + in->name() + "' declared twice");
      }
    }
  }

  // Iterative DFS; grey nodes are on the current path.
  enum class Color : std::uint8_t { kGrey, kBlack };
  std::unordered_map<const LayerNode*, Color> color;
  std::vector<LayerPtr> reached;
  struct Frame {
    LayerPtr node;
    std::size_t next = 0;
  };
  auto traced_inputs = [&](const LayerNode& n) -> const std::vector<LayerPtr>& {
    static const std::vector<LayerPtr> kNone;
    return declared.count(&n) ? kNone : n.inputs();
  };
  for (const auto& root : outputs) {
    if (color.count(root.get())) continue;
    std::vector<Frame> stack{{root, 0}};
    color[root.get()] = Color::kGrey;
    while (!stack.empty()) {
      Frame& top = stack.back();
      const auto& ins = traced_inputs(*top.node);
      if (top.next < ins.size()) {
        LayerPtr child = ins[top.next++];
        auto it = color.find(child.get());
        if (it == color.end()) {
          color[child.get()] = Color::kGrey;
          stack.push_back({child, 0});
        } else if (it->second == Color::kGrey) {
          std::vector<const LayerNode*> path;
          bool on_cycle = false;
          for (const auto& f : stack) {
            if (f.node.get() == child.get()) on_cycle = true;
            if (on_cycle) path.push_back(f.node.get());
          }
          path.push_back(child.get());
          throw Error(ErrorCode::kCycleDetected, join_names(path, " -> "));
        }
      } else {
        color[top.node.get()] = Color::kBlack;
        reached.push_back(top.node);
        stack.pop_back();
      }
    }
  }

  Graph g;
  g.outputs_ = std::move(outputs);

  // Names must identify nodes uniquely (feeds and descriptions use them).
  std::unordered_map<std::string_view, const LayerNode*> by_name;
  for (const auto& n : reached) {
    auto [it, fresh] = by_name.emplace(n->name(), n.get());
    if (!fresh && it->second != n.get()) {
      throw Error(ErrorCode::kDuplicateName, "two distinct nodes named '" + n->name() + "'");
    }
  }

  if (inputs) {
    std::vector<const LayerNode*> undeclared;
    for (const auto& n : reached) {
      if (n->inputs().empty() && !declared.count(n.get())) undeclared.push_back(n.get());
    }
    if (!undeclared.empty()) {
      std::sort(undeclared.begin(), undeclared.end(),
                [](const LayerNode* a, const LayerNode* b) { return a->id() < b->id(); });
      throw Error(ErrorCode::kUndeclaredInput, "trace reached undeclared source(s): " +
                                                   join_names(undeclared, ", "));
    }
    std::vector<const LayerNode*> unreached;
    for (const auto& in : *inputs) {
      if (!color.count(in.get())) unreached.push_back(in.get());
    }
    if (!unreached.empty()) {
      throw Error(ErrorCode::kUnreachableDeclaredInput,
                  "declared input(s) not on any path to an output: " + join_names(unreached, ", "));
    }
    g.inputs_ = std::move(*inputs);
  } else {
    for (const auto& n : reached) {
      if (n->inputs().empty()) g.inputs_.push_back(n);
    }
    std::sort(g.inputs_.begin(), g.inputs_.end(),
              [](const LayerPtr& a, const LayerPtr& b) { return a->id() < b->id(); });
    for (std::size_t i = 0; i < g.inputs_.size(); ++i) declared.emplace(g.inputs_[i].get(), i);
  }

  // Kahn's algorithm, smallest creation id first.
  std::unordered_map<const LayerNode*, std::size_t> pending;
  std::unordered_map<const LayerNode*, std::vector<LayerPtr>> consumers;
  for (const auto& n : reached) {
    const auto& ins = traced_inputs(*n);
    pending[n.get()] = ins.size();
    for (const auto& in : ins) consumers[in.get()].push_back(n);
  }
  auto later = [](const LayerPtr& a, const LayerPtr& b) { return a->id() > b->id(); };
  std::priority_queue<LayerPtr, std::vector<LayerPtr>, decltype(later)> ready(later);
  for (const auto& n : reached) {
    if (pending[n.get()] == 0) ready.push(n);
  }
  while (!ready.empty()) {
    LayerPtr n = ready.top();
    ready.pop();
    g.index_.emplace(n.get(), g.order_.size());
    g.order_.push_back(n);
    for (const auto& c : consumers[n.get()]) {
      if (--pending[c.get()] == 0) ready.push(c);
    }
  }

  g.boundary_.resize(g.order_.size(), false);
  for (std::size_t i = 0; i < g.order_.size(); ++i) {
    const LayerNode* n = g.order_[i].get();
    g.boundary_[i] = declared.count(n) && !n->inputs().empty();
  }
  return g;
}

bool Graph::contains(const LayerNode& node) const { return index_.count(&node) != 0; }

std::size_t Graph::index_of(const LayerNode& node) const {
  auto it = index_.find(&node);
  if (it == index_.end()) {
    throw Error(ErrorCode::kNotInGraph, "node '" + node.name() + "' is not in the graph");
  }
  return it->second;
}

std::optional<std::size_t> Graph::input_slot(const LayerNode& node) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    if (inputs_[i].get() == &node) return i;
  }
  return std::nullopt;
}

LayerPtr Graph::find(std::string_view name) const {
  for (const auto& n : order_) {
    if (n->name() == name) return n;
  }
  return nullptr;
}

bool Graph::is_boundary(const LayerNode& node) const { return boundary_[index_of(node)]; }

std::span<const LayerPtr> Graph::sources(const LayerNode& node) const {
  if (is_boundary(node)) return {};
  return node.inputs();
}

std::vector<std::pair<LayerPtr, LayerPtr>> Graph::edges() const {
  std::vector<std::pair<LayerPtr, LayerPtr>> out;
  for (const auto& n : order_) {
    for (const auto& src : sources(*n)) out.emplace_back(src, n);
  }
  return out;
}

std::vector<LayerPtr> dependency_order(const Graph& g) {
  return {g.nodes().begin(), g.nodes().end()};
}

Bindings bind_feed(const Graph& g, const Feed& feed) {
  Bindings bindings(g.inputs().size());
  for (const auto& [name, value] : feed) {
    bool matched = false;
    for (std::size_t i = 0; i < g.inputs().size(); ++i) {
      const LayerNode& in = *g.inputs()[i];
      if (in.name() != name) continue;
      in.check_input_tensor(value, ErrorCode::kFeedShapeMismatch);
      bindings[i] = value;
      matched = true;
      break;
    }
    if (!matched) {
      throw Error(ErrorCode::kFeedArityMismatch, "feed names '" + name + "', which is not a graph input");
    }
  }
  return bindings;
}

std::vector<Tensor> evaluate_nodes(const Graph& g, const Bindings& bindings,
                                   const ExecContext& ctx) {
  if (bindings.size() != g.inputs().size()) {
    throw Error(ErrorCode::kFeedArityMismatch, "expected " + std::to_string(g.inputs().size()) +
                                                   " bindings, got " +
                                                   std::to_string(bindings.size()));
  }
  std::vector<Tensor> values;
  values.reserve(g.size());
  std::vector<Tensor> args;
  for (const auto& node : g.nodes()) {
    if (auto slot = g.input_slot(*node)) {
      if (bindings[*slot]) {
        values.push_back(*bindings[*slot]);
        continue;
      }
      if (node->kind() != LayerKind::kInput) {
        throw Error(ErrorCode::kMissingInput, "declared input '" + node->name() + "' was not fed");
      }
    }
    args.clear();
    for (const auto& src : g.sources(*node)) args.push_back(values[g.index_of(*src)]);
    values.push_back(compute(*node, args, ctx));
  }
  return values;
}

std::vector<Tensor> execute(const Graph& g, const Feed& feed, const ExecContext& ctx) {
  const std::vector<Tensor> values = evaluate_nodes(g, bind_feed(g, feed), ctx);
  std::vector<Tensor> out;
  out.reserve(g.outputs().size());
  for (const auto& o : g.outputs()) out.push_back(values[g.index_of(*o)]);
  return out;
}

std::vector<Tensor> execute(const Graph& g, const Feed& feed, Mode mode) {
  return execute(g, feed, ExecContext{mode, 0});
}

}  // namespace layergraph

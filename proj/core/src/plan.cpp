// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "layergraph/graph.hpp"

namespace layergraph {

namespace {

using Source = ExecutablePlan::Source;
using Step = ExecutablePlan::Step;

bool is_load(const Step& step) {
  return !step.sources.empty() && step.sources.front().kind == Source::Kind::kFeed;
}

Bindings bind_positional(std::span<const LayerPtr> declared, std::span<const Tensor> feed) {
  if (feed.size() != declared.size()) {
    throw Error(ErrorCode::kFeedArityMismatch, "plan takes " + std::to_string(declared.size()) +
                                                   " inputs, got " + std::to_string(feed.size()));
  }
  Bindings bindings(declared.size());
  for (std::size_t i = 0; i < feed.size(); ++i) {
    declared[i]->check_input_tensor(feed[i], ErrorCode::kFeedShapeMismatch);
    bindings[i] = feed[i];
  }
  return bindings;
}

Bindings bind_named(std::span<const LayerPtr> declared, const Feed& feed) {
  Bindings bindings(declared.size());
  for (const auto& [name, value] : feed) {
    bool matched = false;
    for (std::size_t i = 0; i < declared.size(); ++i) {
      if (declared[i]->name() != name) continue;
      declared[i]->check_input_tensor(value, ErrorCode::kFeedShapeMismatch);
      bindings[i] = value;
      matched = true;
      break;
    }
    if (!matched) {
      throw Error(ErrorCode::kFeedArityMismatch, "feed names '" + name + "', which is not a plan input");
    }
  }
  return bindings;
}

// Two non-load steps compute the same value when their kind, config and
// wiring match and any state they read is the very same record.
bool same_computation(const Step& a, const Step& b) {
  const LayerNode& x = *a.node;
  const LayerNode& y = *b.node;
  if (x.kind() != y.kind() || x.config() != y.config() || x.n_units() != y.n_units() ||
      a.sources != b.sources) {
    return false;
  }
  switch (x.kind()) {
    case LayerKind::kInput:
      return false;
    case LayerKind::kLinear:
    case LayerKind::kLookup:
      return x.state() == y.state();
    case LayerKind::kModule:
      return x.state() == y.state() && x.inner_graph() == y.inner_graph();
    case LayerKind::kDropout:
      return x.seed() == y.seed();
    case LayerKind::kActivation:
    case LayerKind::kAdd:
    case LayerKind::kMse:
    case LayerKind::kSoftmaxCrossEntropy:
      return true;
  }
  return false;
}

}  // namespace

// `target[i]` is the step whose value replaces step i (i itself when kept),
// or nullopt when the step is dropped without replacement.
class PlanRewriter {
 public:
  static void apply(std::vector<Step>& schedule, std::vector<Source>& outputs,
                    const std::vector<std::optional<std::size_t>>& target) {
    auto resolve = [&](std::size_t i) {
      while (target[i] && *target[i] != i) i = *target[i];
      return i;
    };
    std::vector<std::size_t> new_index(schedule.size(), 0);
    std::vector<Step> kept;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      if (!target[i] || *target[i] != i) continue;
      Step step = std::move(schedule[i]);
      for (Source& src : step.sources) {
        if (src.kind == Source::Kind::kStep) src.index = new_index[resolve(src.index)];
      }
      new_index[i] = kept.size();
      kept.push_back(std::move(step));
    }
    for (Source& out : outputs) out.index = new_index[resolve(out.index)];
    schedule = std::move(kept);
  }
};

ExecutablePlan as_function(const Graph& g, PlanOptions options) {
  ExecutablePlan plan;
  plan.mode_ = options.mode;
  plan.feed_nodes_.assign(g.inputs().begin(), g.inputs().end());
  for (const auto& node : g.nodes()) {
    Step step{node, {}};
    if (auto slot = g.input_slot(*node)) {
      step.sources.push_back({Source::Kind::kFeed, *slot});
    } else {
      for (const auto& src : g.sources(*node)) {
        step.sources.push_back({Source::Kind::kStep, g.index_of(*src)});
      }
    }
    plan.schedule_.push_back(std::move(step));
  }
  const auto& fetch = options.fetch;
  if (fetch.empty()) {
    for (const auto& o : g.outputs()) plan.outputs_.push_back({Source::Kind::kStep, g.index_of(*o)});
  } else {
    for (const auto& o : fetch) plan.outputs_.push_back({Source::Kind::kStep, g.index_of(*o)});
  }
  if (options.compile) return optimize(std::move(plan));
  return plan;
}

ExecutablePlan as_function(const Graph& g, bool compile, Mode mode) {
  return as_function(g, PlanOptions{compile, mode, {}});
}

ExecutablePlan optimize(ExecutablePlan plan) {
  auto& schedule = plan.schedule_;
  using Target = std::vector<std::optional<std::size_t>>;

  // 1. Dead-node elimination.
  {
    std::vector<bool> live(schedule.size(), false);
    for (const auto& out : plan.outputs_) live[out.index] = true;
    for (std::size_t i = schedule.size(); i-- > 0;) {
      if (!live[i]) continue;
      for (const auto& src : schedule[i].sources) {
        if (src.kind == Source::Kind::kStep) live[src.index] = true;
      }
    }
    Target target(schedule.size());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      if (live[i]) target[i] = i;
    }
    PlanRewriter::apply(schedule, plan.outputs_, target);
  }

  // 2. Duplicate merge. Sources are rewritten as we go so chains of
  // duplicates collapse in one sweep.
  {
    Target target(schedule.size());
    std::vector<std::size_t> canonical(schedule.size());
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      Step probe = schedule[i];
      for (Source& src : probe.sources) {
        if (src.kind == Source::Kind::kStep) src.index = canonical[src.index];
      }
      canonical[i] = i;
      if (!is_load(probe)) {
        for (std::size_t k : kept) {
          if (same_computation(schedule[k], probe)) {
            canonical[i] = k;
            break;
          }
        }
      }
      if (canonical[i] == i) {
        schedule[i] = std::move(probe);
        kept.push_back(i);
      }
      target[i] = canonical[i];
    }
    PlanRewriter::apply(schedule, plan.outputs_, target);
  }

  // 3. Dropout is the identity outside training.
  if (plan.mode_ == Mode::kInference) {
    Target target(schedule.size());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const Step& step = schedule[i];
      const bool elide = step.node->kind() == LayerKind::kDropout && !is_load(step);
      target[i] = elide ? step.sources.front().index : i;
    }
    PlanRewriter::apply(schedule, plan.outputs_, target);
  }

  plan.compiled_ = true;
  return plan;
}

std::vector<Tensor> ExecutablePlan::run(const Bindings& bindings, std::uint64_t step) const {
  const ExecContext ctx{mode_, step};
  std::vector<Tensor> results;
  results.reserve(schedule_.size());
  std::vector<Tensor> args;
  for (const Step& s : schedule_) {
    if (is_load(s)) {
      const auto& bound = bindings[s.sources.front().index];
      if (bound) {
        results.push_back(*bound);
      } else if (s.node->kind() == LayerKind::kInput) {
        results.push_back(compute(*s.node, std::span<const Tensor>{}, ctx));
      } else {
        throw Error(ErrorCode::kMissingInput, "declared input '" + s.node->name() + "' was not fed");
      }
      continue;
    }
    args.clear();
    for (const Source& src : s.sources) args.push_back(results[src.index]);
    results.push_back(compute(*s.node, args, ctx));
  }
  std::vector<Tensor> out;
  out.reserve(outputs_.size());
  for (const Source& o : outputs_) out.push_back(results[o.index]);
  return out;
}

std::vector<Tensor> ExecutablePlan::operator()(std::span<const Tensor> feed,
                                               std::uint64_t step) const {
  return run(bind_positional(feed_nodes_, feed), step);
}

std::vector<Tensor> ExecutablePlan::operator()(std::initializer_list<Tensor> feed,
                                               std::uint64_t step) const {
  return (*this)(std::span<const Tensor>(feed.begin(), feed.size()), step);
}

std::vector<Tensor> ExecutablePlan::operator()(const Feed& feed, std::uint64_t step) const {
  return run(bind_named(feed_nodes_, feed), step);
}

std::string ExecutablePlan::source_name(const Source& source) const {
  if (source.kind == Source::Kind::kFeed) return feed_nodes_[source.index]->name();
  return schedule_[source.index].node->name();
}

std::string ExecutablePlan::describe() const {
  std::ostringstream os;
  for (const Step& s : schedule_) {
    os << s.node->name() << " = ";
    if (is_load(s)) {
      os << (s.node->kind() == LayerKind::kInput ? "Input" : "Feed") << "()\n";
      continue;
    }
    os << kind_name(s.node->kind()) << "(";
    for (std::size_t i = 0; i < s.sources.size(); ++i) {
      if (i > 0) os << ", ";
      os << source_name(s.sources[i]);
    }
    os << ")\n";
  }
  return os.str();
}

std::string describe(const Graph& g) { return as_function(g, false).describe(); }

}  // namespace layergraph

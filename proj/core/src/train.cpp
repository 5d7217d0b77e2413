// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include "layergraph/train.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <type_traits>

namespace layergraph {

namespace {

LayerPtr make_loss(LayerKind kind, const LayerPtr& a, const LayerPtr& b, std::string name) {
  if (!a || !b) throw Error(ErrorCode::kInvalidArgument, "loss: null input");
  if (a->n_units() != b->n_units()) {
    throw Error(ErrorCode::kShapeMismatch, "loss: '" + a->name() + "' has " +
                                               std::to_string(a->n_units()) + " units, '" +
                                               b->name() + "' has " + std::to_string(b->n_units()));
  }
  if (a->dtype() != b->dtype() || !is_floating(a->dtype())) {
    throw Error(ErrorCode::kDtypeMismatch, "loss: '" + a->name() + "' and '" + b->name() +
                                               "' need one floating dtype");
  }
  detail::NodeInit init;
  init.name = std::move(name);
  init.kind = kind;
  init.inputs = {a, b};
  init.n_units = 1;
  init.config.dtype = a->dtype();
  return detail::make_node(std::move(init));
}

Feed restrict_feed(const Feed& feed, const Graph& g) {
  Feed out;
  for (const auto& in : g.inputs()) {
    auto it = feed.find(in->name());
    if (it != feed.end()) out.emplace(it->first, it->second);
  }
  return out;
}

std::size_t batch_rows(const Tensor& t) {
  return t.rank() == 0 ? 1 : t.numel() / std::max<std::size_t>(t.shape().last(), 1);
}

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

LayerPtr mse(const LayerPtr& pred, const LayerPtr& target, std::string name) {
  return make_loss(LayerKind::kMse, pred, target, std::move(name));
}

LayerPtr softmax_cross_entropy(const LayerPtr& logits, const LayerPtr& target, std::string name) {
  return make_loss(LayerKind::kSoftmaxCrossEntropy, logits, target, std::move(name));
}

std::optional<LossKind> parse_loss(std::string_view name) noexcept {
  if (name == "mse") return LossKind::kMse;
  if (name == "sce" || name == "softmax_cross_entropy") return LossKind::kSoftmaxCrossEntropy;
  return std::nullopt;
}

std::string_view loss_name(LossKind kind) noexcept {
  return kind == LossKind::kMse ? "mse" : "sce";
}

std::optional<Metric> parse_metric(std::string_view name) noexcept {
  if (name == "mse") return Metric::kMse;
  if (name == "accuracy") return Metric::kAccuracy;
  return std::nullopt;
}

std::string_view metric_name(Metric metric) noexcept {
  return metric == Metric::kMse ? "mse" : "accuracy";
}

// ---------------------------------------------------------------------------
// Optimizer

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(std::isfinite(config.learning_rate) && config.learning_rate >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be finite and non-negative");
  }
  if (config.kind == OptimizerKind::kSgdMomentum && !(config.momentum >= 0.0 && config.momentum < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "momentum must lie in [0,1)");
  }
}

const Tensor* Optimizer::velocity(const LayerState& state, std::string_view slot) const {
  auto it = velocity_.find(std::pair<const LayerState*, std::string>(&state, std::string(slot)));
  return it == velocity_.end() ? nullptr : &it->second;
}

void Optimizer::apply(std::span<const SlotGradient> gradients) {
  for (const SlotGradient& sg : gradients) {
    LayerState& state = *sg.ref.state;
    if (!state.trainable(sg.ref.slot)) continue;
    Tensor step = sg.gradient;
    if (config_.kind == OptimizerKind::kSgdMomentum) {
      auto key = std::make_pair(static_cast<const LayerState*>(&state), sg.ref.slot);
      auto it = velocity_.find(key);
      if (it == velocity_.end()) {
        it = velocity_.emplace(key, sg.gradient).first;
      } else {
        it->second = add_broadcast(scalar_mul(it->second, config_.momentum), sg.gradient);
      }
      step = it->second;
    }
    // A zero rate must leave slots bitwise intact, signed zeros included.
    if (config_.learning_rate == 0.0) continue;
    const Tensor& w = state.get(sg.ref.slot);
    Tensor updated = w.visit([&](auto wv) -> Tensor {
      using T = std::remove_const_t<typename decltype(wv)::element_type>;
      if constexpr (std::is_floating_point_v<T>) {
        const auto dv = step.values<T>();
        const T lr = static_cast<T>(config_.learning_rate);
        std::vector<T> out(wv.size());
        for (std::size_t i = 0; i < wv.size(); ++i) out[i] = wv[i] - lr * dv[i];
        return Tensor(w.shape(), std::move(out));
      } else {
        throw Error(ErrorCode::kDtypeMismatch, "cannot update integer slot " + sg.ref.label());
      }
    });
    state.set(sg.ref.slot, std::move(updated));
  }
}

// ---------------------------------------------------------------------------
// Model

Model::Model(LayerPtr prediction, ModelOptions options)
    : prediction_(std::move(prediction)),
      target_(input_layer(prediction_->n_units(),
                          InputOptions{options.target_name, prediction_->dtype()})),
      loss_(options.loss == LossKind::kMse ? mse(prediction_, target_, "loss")
                                           : softmax_cross_entropy(prediction_, target_, "loss")),
      metric_mse_(mse(prediction_, target_, "mse_metric")),
      options_(std::move(options)),
      inference_(Graph::build({prediction_})),
      training_(Graph::build({loss_, prediction_})),
      evaluation_(Graph::build({prediction_, metric_mse_})),
      predict_plan_(as_function(inference_, options_.compile, Mode::kInference)),
      evaluate_plan_(as_function(evaluation_, options_.compile, Mode::kInference)),
      optimizer_(options_.optimizer) {}

double Model::train_step(const Feed& batch) {
  BackwardOptions opts;
  opts.ctx = ExecContext{Mode::kTrain, step_};
  const Gradients grads = backward(training_, *loss_, batch, opts);
  const double loss = grads.loss();
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kNonFiniteLoss,
                "loss is " + format_g9(loss) + " at step " + std::to_string(step_));
  }
  optimizer_.apply(grads.slots());
  ++step_;
  return loss;
}

Tensor Model::predict(const Feed& feed) const {
  return predict_plan_(restrict_feed(feed, inference_)).front();
}

std::pair<Tensor, double> Model::evaluate_batch(const Feed& batch) const {
  auto out = evaluate_plan_(restrict_feed(batch, evaluation_));
  return {out[0], out[1].item(0)};
}

// ---------------------------------------------------------------------------
// Loops

double accuracy(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "accuracy: prediction " + prediction.shape().to_string() +
                                               " vs target " + target.shape().to_string());
  }
  const std::size_t rows = batch_rows(prediction);
  if (rows == 0) return 0.0;
  const std::size_t width = prediction.numel() / rows;
  const std::vector<double> p = prediction.to_doubles();
  const std::vector<double> t = target.to_doubles();
  std::size_t correct = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* pr = p.data() + r * width;
    const double* tr = t.data() + r * width;
    if (width == 1) {
      correct += (pr[0] >= 0.5) == (tr[0] >= 0.5);
    } else {
      correct += std::max_element(pr, pr + width) - pr == std::max_element(tr, tr + width) - tr;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(rows);
}

std::map<std::string, double> evaluate(const Model& model, const Dataset& dataset,
                                       std::span<const Metric> metrics) {
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "evaluate: no batches");
  double rows_total = 0.0;
  double mse_total = 0.0;
  double acc_total = 0.0;
  for (const Feed& batch : dataset) {
    auto [pred, batch_mse] = model.evaluate_batch(batch);
    const double rows = static_cast<double>(batch_rows(pred));
    rows_total += rows;
    mse_total += rows * batch_mse;
    for (Metric m : metrics) {
      if (m == Metric::kAccuracy) {
        auto it = batch.find(model.target()->name());
        if (it == batch.end()) {
          throw Error(ErrorCode::kMissingInput, "evaluate: batch has no '" + model.target()->name() + "'");
        }
        acc_total += rows * accuracy(pred, it->second);
        break;
      }
    }
  }
  std::map<std::string, double> out;
  for (Metric m : metrics) {
    const double total = m == Metric::kMse ? mse_total : acc_total;
    out[std::string(metric_name(m))] = rows_total > 0.0 ? total / rows_total : 0.0;
  }
  return out;
}

History fit(Model& model, const Dataset& dataset, const FitOptions& options) {
  if (options.epochs == 0) throw Error(ErrorCode::kInvalidArgument, "fit: epochs must be at least 1");
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "fit: no batches");
  History history;
  history.metrics = options.metrics;
  for (std::size_t e = 1; e <= options.epochs; ++e) {
    double total = 0.0;
    for (const Feed& batch : dataset) total += model.train_step(batch);
    ++model.epoch_;
    EpochRecord rec;
    rec.epoch = e;
    rec.mean_loss = total / static_cast<double>(dataset.size());
    if (!options.metrics.empty()) {
      const auto values = evaluate(model, dataset, options.metrics);
      for (Metric m : options.metrics) rec.metrics.push_back(values.at(std::string(metric_name(m))));
    }
    history.epochs.push_back(std::move(rec));
  }
  return history;
}

double History::final_loss() const {
  return epochs.empty() ? 0.0 : epochs.back().mean_loss;
}

std::string History::to_tsv() const {
  std::ostringstream os;
  os << "version: 1\n" << "epoch\tmean_loss";
  for (Metric m : metrics) os << '\t' << metric_name(m);
  os << '\n';
  for (const auto& rec : epochs) {
    os << rec.epoch << '\t' << format_g9(rec.mean_loss);
    for (double v : rec.metrics) os << '\t' << format_g9(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace layergraph

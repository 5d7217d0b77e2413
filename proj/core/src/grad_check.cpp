// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "layergraph/autodiff.hpp"
#include "layergraph/rng.hpp"

namespace layergraph {

namespace {

std::vector<std::size_t> unravel(std::size_t flat, const Shape& shape) {
  std::vector<std::size_t> coord(shape.rank(), 0);
  for (std::size_t axis = shape.rank(); axis-- > 0;) {
    coord[axis] = flat % shape[axis];
    flat /= shape[axis];
  }
  return coord;
}

// Restores a slot to its original tensor however the probe exits.
class SlotRestorer {
 public:
  SlotRestorer(LayerState& state, std::string slot)
      : state_(state), slot_(std::move(slot)), original_(state.get(slot_)) {}
  ~SlotRestorer() { state_.set(slot_, original_); }
  SlotRestorer(const SlotRestorer&) = delete;
  SlotRestorer& operator=(const SlotRestorer&) = delete;

  const Tensor& original() const noexcept { return original_; }

 private:
  LayerState& state_;
  std::string slot_;
  Tensor original_;
};

}  // namespace

double gradient_relative_error(double analytic, double numeric) noexcept {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / scale;
}

std::vector<GradCheckEntry> GradCheckReport::failures() const {
  std::vector<GradCheckEntry> out;
  for (const auto& e : entries) {
    if (!(e.relative_error <= tolerance)) out.push_back(e);
  }
  return out;
}

std::string GradCheckReport::to_lines() const {
  std::ostringstream os;
  char buf[64];
  for (const auto& e : entries) {
    os << e.slot << '\t';
    for (std::size_t i = 0; i < e.coordinate.size(); ++i) {
      if (i > 0) os << ',';
      os << e.coordinate[i];
    }
    for (double v : {e.analytic, e.numeric, e.relative_error}) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      os << '\t' << buf;
    }
    os << '\n';
  }
  return os.str();
}

GradCheckReport grad_check(const Graph& g, const LayerNode& loss, const Feed& feed,
                           const GradCheckOptions& options) {
  const Gradients analytic = backward(g, loss, feed, options.backward);
  const Bindings bindings = bind_feed(g, feed);
  const std::size_t loss_index = g.index_of(loss);
  auto loss_at = [&] { return evaluate_nodes(g, bindings, options.backward.ctx)[loss_index].item(0); };

  struct Probe {
    std::size_t slot;
    std::size_t flat;
  };
  std::vector<Probe> probes;
  const auto slots = analytic.slots();
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const std::size_t n = slots[s].gradient.numel();
    for (std::size_t i = 0; i < n; ++i) probes.push_back({s, i});
  }
  if (probes.size() > options.max_elements) {
    // Partial Fisher-Yates keyed by the sample seed.
    const CounterRng rng(options.sample_seed);
    for (std::size_t i = 0; i < options.max_elements; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.bits(i) % (probes.size() - i));
      std::swap(probes[i], probes[j]);
    }
    probes.resize(options.max_elements);
    std::sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) {
      return a.slot != b.slot ? a.slot < b.slot : a.flat < b.flat;
    });
  }

  GradCheckReport report;
  report.tolerance = options.tolerance;
  const double h = options.step;
  for (const Probe& p : probes) {
    const SlotGradient& sg = slots[p.slot];
    LayerState& state = *sg.ref.state;
    double plus = 0.0;
    double minus = 0.0;
    {
      SlotRestorer guard(state, sg.ref.slot);
      const double v = guard.original().item(p.flat);
      state.set(sg.ref.slot, guard.original().with_value(p.flat, v + h));
      plus = loss_at();
      state.set(sg.ref.slot, guard.original().with_value(p.flat, v - h));
      minus = loss_at();
    }
    GradCheckEntry e;
    e.slot = sg.ref.label();
    e.coordinate = unravel(p.flat, sg.gradient.shape());
    e.analytic = sg.gradient.item(p.flat);
    e.numeric = (plus - minus) / (2.0 * h);
    e.relative_error = gradient_relative_error(e.analytic, e.numeric);
    report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
    if (!(e.relative_error <= options.tolerance)) report.passed = false;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace layergraph

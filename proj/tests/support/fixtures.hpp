// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference graph constructions shared by unit and acceptance tests.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "layergraph/graph.hpp"
#include "layergraph/layers.hpp"

namespace layergraph::testing {

// x1(2), x2(4); l1 = Linear(x1, 4); l2 = Add(l1, x2); l3 = Linear(l2, 2).
struct FigGraph {
  LayerPtr x1, x2, l1, l2, l3;
};

inline FigGraph make_fig_graph(DType dtype = DType::kFloat32) {
  FigGraph f;
  f.x1 = input_layer(2, {"x1", dtype});
  f.x2 = input_layer(4, {"x2", dtype});
  f.l1 = linear(f.x1, 4, {.name = "l1"});
  f.l2 = add({f.l1, f.x2}, "l2");
  f.l3 = linear(f.l2, 2, {.name = "l3"});
  return f;
}

// x1 -> l1 -> relu a1 -> l2, plus d1 = Dropout(a1, 0.4) and l3 = l2 reused on d1.
struct ReuseGraph {
  LayerPtr x1, l1, a1, l2, d1, l3;
};

inline ReuseGraph make_reuse_graph(DType dtype = DType::kFloat32, std::uint64_t seed = 1) {
  ReuseGraph r;
  r.x1 = input_layer(2, {"x1", dtype});
  r.l1 = linear(r.x1, 3, {.name = "l1", .seed = seed});
  r.a1 = activation(r.l1, UnaryOp::kRelu, "a1");
  r.l2 = linear(r.a1, 4, {.name = "l2", .seed = seed + 1});
  r.d1 = dropout(r.a1, 0.4, {"d1", seed + 2});
  r.l3 = reuse_with(r.l2, {r.d1}, "l3");
  return r;
}

// Module([x, h], tanh(Add(Linear(x), Linear(h)))).
struct RnnCell {
  LayerPtr x, h, w, u, add_wu, output, cell;
};

inline RnnCell make_rnn_cell(std::size_t n_in, std::size_t n_units, DType dtype,
                             std::uint64_t seed, const std::string& prefix = "rnn") {
  RnnCell c;
  c.x = input_layer(n_in, {prefix + "_x", dtype});
  c.h = input_layer(n_units, {prefix + "_h", dtype});
  c.w = linear(c.x, n_units, {.name = prefix + "_w", .seed = seed});
  c.u = linear(c.h, n_units, {.name = prefix + "_u", .seed = seed + 1});
  c.add_wu = add({c.w, c.u}, prefix + "_add");
  c.output = activation(c.add_wu, UnaryOp::kTanh, prefix + "_tanh");
  c.cell = module({c.x, c.h}, c.output, prefix + "_cell");
  return c;
}

// The same cell applied to (x, h) without encapsulation, sharing its state.
inline LayerPtr flat_rnn_step(const RnnCell& c, const LayerPtr& x, const LayerPtr& h,
                              const std::string& tag) {
  LayerPtr w = reuse_with(c.w, {x}, tag + "_w");
  LayerPtr u = reuse_with(c.u, {h}, tag + "_u");
  LayerPtr s = add({w, u}, tag + "_add");
  return activation(s, UnaryOp::kTanh, tag + "_tanh");
}

inline LayerPtr module_rnn_step(const RnnCell& c, const LayerPtr& x, const LayerPtr& h,
                                const std::string& tag) {
  return reuse_with(c.cell, {x, h}, tag + "_cell");
}

}  // namespace layergraph::testing

// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "layergraph/graph.hpp"
#include "oracles.hpp"
#include "random_graphs.hpp"

namespace layergraph {
namespace {

std::vector<std::string> names(std::span<const LayerPtr> nodes) {
  std::vector<std::string> out;
  for (const auto& n : nodes) out.push_back(n->name());
  return out;
}

TEST(GraphBuild, FigGraphOrderAndMembers) {
  const auto f = testing::make_fig_graph();
  const Graph g = Graph::build({f.l3});
  EXPECT_EQ(names(g.nodes()), (std::vector<std::string>{"x1", "x2", "l1", "l2", "l3"}));
  EXPECT_EQ(names(g.inputs()), (std::vector<std::string>{"x1", "x2"}));
  EXPECT_EQ(g.edges().size(), 4u);
  EXPECT_EQ(g.find("l2"), f.l2);
  EXPECT_EQ(g.find("nope"), nullptr);
}

TEST(GraphBuild, TieBreakByCreationId) {
  auto b = input_layer(1, {"b"});
  auto a = input_layer(1, {"a"});
  auto s = add({a, b}, "s");
  const Graph g = Graph::build({s});
  EXPECT_EQ(names(g.nodes()), (std::vector<std::string>{"b", "a", "s"}));
}

TEST(GraphBuild, SingleInputGraph) {
  auto x = input_layer(3, {"only"});
  const Graph g = Graph::build({x});
  ASSERT_EQ(g.size(), 1u);
  EXPECT_TRUE(g.edges().empty());
  const Tensor v = Tensor::ones(Shape{2, 3});
  EXPECT_TRUE(execute(g, {{"only", v}}).front().bitwise_equal(v));
}

TEST(GraphBuild, DeclaredInputStopsTrace) {
  const auto f = testing::make_fig_graph();
  const Graph g = Graph::build({f.l3}, std::vector<LayerPtr>{f.l1, f.x2});
  EXPECT_FALSE(g.contains(*f.x1));
  EXPECT_TRUE(g.is_boundary(*f.l1));
  EXPECT_TRUE(g.sources(*f.l1).empty());
  const Tensor l1v = Tensor::ones(Shape{1, 4});
  const Tensor x2v = Tensor::zeros(Shape{1, 4});
  const auto out = execute(g, {{"l1", l1v}, {"x2", x2v}});
  EXPECT_TRUE(out.front().bitwise_equal(compute(*f.l3, {l1v})));
  EXPECT_LG_ERROR(execute(g, {{"x2", x2v}}), kMissingInput, "l1");
}

TEST(GraphBuild, Errors) {
  const auto f = testing::make_fig_graph();
  EXPECT_LG_ERROR(Graph::build({f.l3}, std::vector<LayerPtr>{f.x1}), kUndeclaredInput, "x2");
  auto stray = input_layer(2, {"stray"});
  EXPECT_LG_ERROR(Graph::build({f.l3}, std::vector<LayerPtr>{f.x1, f.x2, stray}),
                  kUnreachableDeclaredInput, "stray");
  auto clash = linear(f.x1, 4, {.name = "l1"});
  EXPECT_LG_ERROR(Graph::build({f.l3, clash}), kDuplicateName, "l1");
  EXPECT_LG_ERROR(Graph::build({}), kInvalidArgument);
}

TEST(Execute, FigGraphMatchesManualChain) {
  std::mt19937_64 rng(41);
  const auto f = testing::make_fig_graph();
  const Graph g = Graph::build({f.l3});
  const Tensor x1 = testing::random_tensor(rng, Shape{3, 2}, DType::kFloat32);
  const Tensor x2 = testing::random_tensor(rng, Shape{3, 4}, DType::kFloat32);
  const auto out = execute(g, {{"x1", x1}, {"x2", x2}});
  const Tensor l1 = compute(*f.l1, {x1});
  const Tensor l2 = compute(*f.l2, {l1, x2});
  EXPECT_TRUE(out.front().bitwise_equal(compute(*f.l3, {l2})));
}

TEST(Execute, FeedValidation) {
  const auto f = testing::make_fig_graph();
  const Graph g = Graph::build({f.l3});
  EXPECT_LG_ERROR(execute(g, {{"zz", Tensor::ones(Shape{1, 2})}}), kFeedArityMismatch, "zz");
  EXPECT_LG_ERROR(execute(g, {{"x1", Tensor::ones(Shape{1, 3})}}), kFeedShapeMismatch);
  EXPECT_LG_ERROR(execute(g, {{"x1", Tensor::ones(Shape{1, 2}, DType::kFloat64)}}), kFeedShapeMismatch);
}

TEST(Execute, UnfedInputFallsBackToStoredValue) {
  const auto f = testing::make_fig_graph();
  const Graph g = Graph::build({f.l3});
  f.x2->set_value(Tensor::zeros(Shape{1, 4}));
  const Tensor x1 = Tensor::ones(Shape{1, 2});
  const auto a = execute(g, {{"x1", x1}});
  const auto b = execute(g, {{"x1", x1}, {"x2", Tensor::zeros(Shape{1, 4})}});
  EXPECT_TRUE(a.front().bitwise_equal(b.front()));
  auto fresh = testing::make_fig_graph();
  EXPECT_LG_ERROR(execute(Graph::build({fresh.l3}), {{"x1", x1}}), kMissingInput, "x2");
}

TEST(Execute, MultipleOutputsInRequestedOrder) {
  const auto f = testing::make_fig_graph();
  const Graph g = Graph::build({f.l3, f.l1});
  const auto out = execute(g, {{"x1", Tensor::ones(Shape{2, 2})}, {"x2", Tensor::ones(Shape{2, 4})}});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].shape().last(), 2u);
  EXPECT_EQ(out[1].shape().last(), 4u);
}

TEST(Execute, ModeControlsDropout) {
  auto x = input_layer(50, {"dx"});
  auto d = dropout(x, 0.5, {"dd", 9});
  const Graph g = Graph::build({d});
  const Tensor v = Tensor::ones(Shape{4, 50});
  EXPECT_TRUE(execute(g, {{"dx", v}}).front().bitwise_equal(v));
  EXPECT_FALSE(execute(g, {{"dx", v}}, Mode::kTrain).front().bitwise_equal(v));
}

TEST(Describe, FigGraphLines) {
  const auto f = testing::make_fig_graph();
  EXPECT_EQ(describe(Graph::build({f.l3})),
            "x1 = Input()\nx2 = Input()\nl1 = Linear(x1)\nl2 = Add(l1, x2)\nl3 = Linear(l2)\n");
}

// Dependency order respects every edge on random graphs, and the order is
// reproducible from the same construction.
TEST(GraphProperties, OrderRespectsEdges) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto rg = testing::make_random_graph(seed);
    const Graph& g = *rg.graph;
    for (const auto& [producer, consumer] : g.edges()) {
      EXPECT_LT(g.index_of(*producer), g.index_of(*consumer)) << "seed " << seed;
    }
    std::set<std::uint64_t> ids;
    for (const auto& n : g.nodes()) ids.insert(n->id());
    EXPECT_EQ(ids.size(), g.size());
  }
}

TEST(GraphProperties, SourcesAreMembers) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const auto rg = testing::make_random_graph(seed);
    const Graph& g = *rg.graph;
    for (const auto& n : g.nodes()) {
      for (const auto& s : g.sources(*n)) EXPECT_TRUE(g.contains(*s));
      if (!g.is_boundary(*n)) {
        EXPECT_EQ(g.sources(*n).size(), n->inputs().size());
      }
    }
  }
}

TEST(GraphProperties, ExecuteIsDeterministic) {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    const auto rg = testing::make_random_graph(seed);
    const auto a = execute(*rg.graph, rg.feed, ExecContext{Mode::kTrain, 3});
    const auto b = execute(*rg.graph, rg.feed, ExecContext{Mode::kTrain, 3});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].bitwise_equal(b[i]));
  }
}

}  // namespace
}  // namespace layergraph

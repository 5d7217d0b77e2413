// Copyright 2026 The layergraph Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "layergraph/train.hpp"
#include "oracles.hpp"

namespace layergraph {
namespace {

constexpr DType kF64 = DType::kFloat64;

LayerPtr small_regressor(const std::string& prefix, DType dtype = kF64, std::uint64_t seed = 1) {
  auto x = input_layer(3, {prefix + "_x", dtype});
  return linear(x, 2, {.name = prefix + "_l", .seed = seed});
}

Feed regression_batch(std::mt19937_64& rng, const std::string& prefix, std::size_t rows) {
  return {{prefix + "_x", testing::random_tensor(rng, Shape{rows, 3})},
          {"target", testing::random_tensor(rng, Shape{rows, 2})}};
}

TEST(Losses, ConstructionChecks) {
  auto a = input_layer(3, {"la"});
  EXPECT_LG_ERROR(mse(a, input_layer(2)), kShapeMismatch);
  EXPECT_LG_ERROR(mse(a, input_layer(3, {.dtype = kF64})), kDtypeMismatch);
  EXPECT_LG_ERROR(softmax_cross_entropy(a, input_layer(4)), kShapeMismatch);
}

TEST(Losses, MseMatchesOracle) {
  std::mt19937_64 rng(71);
  auto p = input_layer(3, {"mp", kF64});
  auto t = input_layer(3, {"mt", kF64});
  auto l = mse(p, t);
  const Tensor pv = testing::random_tensor(rng, Shape{4, 3});
  const Tensor tv = testing::random_tensor(rng, Shape{4, 3});
  const Tensor out = compute(*l, {pv, tv});
  EXPECT_EQ(out.shape(), (Shape{1}));
  EXPECT_NEAR(out.item(0), testing::loop_mse(pv.to_doubles(), tv.to_doubles()), 1e-15);
  EXPECT_LG_ERROR(compute(*l, {pv, testing::random_tensor(rng, Shape{2, 3})}), kShapeMismatch);
}

TEST(Losses, NamesParse) {
  EXPECT_EQ(parse_loss("mse"), LossKind::kMse);
  EXPECT_EQ(parse_loss("sce"), LossKind::kSoftmaxCrossEntropy);
  EXPECT_EQ(parse_loss("softmax_cross_entropy"), LossKind::kSoftmaxCrossEntropy);
  EXPECT_FALSE(parse_loss("hinge"));
  EXPECT_EQ(parse_metric("accuracy"), Metric::kAccuracy);
  EXPECT_EQ(parse_metric("mse"), Metric::kMse);
  EXPECT_FALSE(parse_metric("f1"));
}

TEST(Optimizer, RejectsBadConfig) {
  EXPECT_LG_ERROR(Optimizer({OptimizerKind::kSgd, -0.1, 0.0}), kInvalidArgument);
  EXPECT_LG_ERROR(Optimizer({OptimizerKind::kSgd, std::nan(""), 0.0}), kInvalidArgument);
  EXPECT_LG_ERROR(Optimizer({OptimizerKind::kSgdMomentum, 0.1, 1.0}), kInvalidArgument);
  EXPECT_LG_ERROR(Optimizer({OptimizerKind::kSgdMomentum, 0.1, -0.5}), kInvalidArgument);
  Optimizer ok({OptimizerKind::kSgd, 0.0, 0.0});
  EXPECT_EQ(ok.config().learning_rate, 0.0);
}

TEST(Optimizer, SgdStep) {
  auto state = std::make_shared<LayerState>("opt");
  state->declare("w", Tensor(Shape{3}, std::vector<double>{1.0, -2.0, 0.5}), true);
  state->declare("frozen", Tensor(Shape{1}, std::vector<double>{4.0}), false);
  Optimizer sgd({OptimizerKind::kSgd, 0.25, 0.0});
  const std::vector<SlotGradient> grads{
      {{state, "w"}, Tensor(Shape{3}, std::vector<double>{4.0, 8.0, -2.0})},
      {{state, "frozen"}, Tensor(Shape{1}, std::vector<double>{1.0})}};
  sgd.apply(grads);
  EXPECT_EQ(state->get("w").to_doubles(), (std::vector<double>{0.0, -4.0, 1.0}));
  EXPECT_EQ(state->get("frozen").to_doubles(), (std::vector<double>{4.0}));
}

TEST(Optimizer, MomentumAccumulatesVelocity) {
  auto state = std::make_shared<LayerState>("mom");
  state->declare("w", Tensor(Shape{2}, std::vector<double>{0.0, 0.0}), true);
  Optimizer opt({OptimizerKind::kSgdMomentum, 0.5, 0.5});
  const Tensor g1(Shape{2}, std::vector<double>{1.0, 2.0});
  const Tensor g2(Shape{2}, std::vector<double>{3.0, -1.0});
  EXPECT_EQ(opt.velocity(*state, "w"), nullptr);
  opt.apply(std::vector<SlotGradient>{{{state, "w"}, g1}});
  EXPECT_EQ(state->get("w").to_doubles(), (std::vector<double>{-0.5, -1.0}));
  opt.apply(std::vector<SlotGradient>{{{state, "w"}, g2}});
  // v2 = 0.5 * g1 + g2 = (3.5, 0); w = w1 - 0.5 * v2
  EXPECT_EQ(opt.velocity(*state, "w")->to_doubles(), (std::vector<double>{3.5, 0.0}));
  EXPECT_EQ(state->get("w").to_doubles(), (std::vector<double>{-2.25, -1.0}));
}

TEST(Optimizer, ZeroRateLeavesSlotsBitwise) {
  auto state = std::make_shared<LayerState>("zero");
  const Tensor w(Shape{2}, std::vector<float>{-0.0f, 1.5f});
  state->declare("w", w, true);
  Optimizer opt({OptimizerKind::kSgd, 0.0, 0.0});
  opt.apply(std::vector<SlotGradient>{{{state, "w"}, Tensor(Shape{2}, std::vector<float>{1e30f, 2.0f})}});
  EXPECT_TRUE(state->get("w").bitwise_equal(w));
}

TEST(Model, TrainStepReturnsPreUpdateLossAndMovesWeights) {
  std::mt19937_64 rng(72);
  Model model(small_regressor("ts"), {.optimizer = {OptimizerKind::kSgd, 0.1, 0.0}});
  const Feed batch = regression_batch(rng, "ts", 4);
  const double before = execute(model.training_graph(), batch, Mode::kTrain).front().item(0);
  const Tensor w0 = model.prediction()->state()->get("weights");
  EXPECT_EQ(model.train_step(batch), before);
  EXPECT_EQ(model.step(), 1u);
  EXPECT_FALSE(model.prediction()->state()->get("weights").bitwise_equal(w0));
  EXPECT_LT(execute(model.training_graph(), batch, Mode::kTrain).front().item(0), before);
}

TEST(Model, ZeroRateStepKeepsStateBitwise) {
  std::mt19937_64 rng(73);
  Model model(small_regressor("zr"), {.optimizer = {OptimizerKind::kSgd, 0.0, 0.0}});
  const Tensor w0 = model.prediction()->state()->get("weights");
  const Tensor b0 = model.prediction()->state()->get("bias");
  model.train_step(regression_batch(rng, "zr", 3));
  EXPECT_TRUE(model.prediction()->state()->get("weights").bitwise_equal(w0));
  EXPECT_TRUE(model.prediction()->state()->get("bias").bitwise_equal(b0));
}

TEST(Model, NonFiniteLossLeavesStateUntouched) {
  Model model(small_regressor("nf", DType::kFloat32), {});
  const Tensor w0 = model.prediction()->state()->get("weights");
  const Feed batch{{"nf_x", Tensor::full(Shape{2, 3}, 1e30)}, {"target", Tensor::zeros(Shape{2, 2})}};
  EXPECT_LG_ERROR(model.train_step(batch), kNonFiniteLoss);
  EXPECT_TRUE(model.prediction()->state()->get("weights").bitwise_equal(w0));
  EXPECT_EQ(model.step(), 0u);
}

TEST(Model, PredictIgnoresTargetAndUsesInferenceMode) {
  std::mt19937_64 rng(74);
  auto x = input_layer(3, {"pd_x", kF64});
  auto d = dropout(linear(x, 3, {.name = "pd_l"}), 0.5, {"pd_d", 1});
  for (bool compile : {false, true}) {
    Model model(d, {.compile = compile});
    const Feed batch = {{"pd_x", testing::random_tensor(rng, Shape{4, 3})},
                        {"target", testing::random_tensor(rng, Shape{4, 3})}};
    const Tensor p = model.predict(batch);
    EXPECT_TRUE(p.bitwise_equal(execute(model.inference_graph(), {{"pd_x", batch.at("pd_x")}}).front()));
  }
}

TEST(Model, EvaluateWeightsByRows) {
  std::mt19937_64 rng(75);
  Model model(small_regressor("ev"));
  const Dataset data{regression_batch(rng, "ev", 1), regression_batch(rng, "ev", 5)};
  std::vector<double> preds, targets;
  for (const Feed& b : data) {
    const auto p = model.predict(b).to_doubles();
    const auto t = b.at("target").to_doubles();
    preds.insert(preds.end(), p.begin(), p.end());
    targets.insert(targets.end(), t.begin(), t.end());
  }
  const std::vector<Metric> metrics{Metric::kMse};
  const auto out = evaluate(model, data, metrics);
  EXPECT_NEAR(out.at("mse"), testing::loop_mse(preds, targets), 1e-14);
  EXPECT_LG_ERROR(evaluate(model, {}, metrics), kEmptyDataset);
}

TEST(Model, EvaluateDoesNotMutate) {
  std::mt19937_64 rng(76);
  Model model(small_regressor("em"));
  const Tensor w0 = model.prediction()->state()->get("weights");
  const std::vector<Metric> metrics{Metric::kMse, Metric::kAccuracy};
  evaluate(model, {regression_batch(rng, "em", 3)}, metrics);
  EXPECT_TRUE(model.prediction()->state()->get("weights").bitwise_equal(w0));
  EXPECT_EQ(model.step(), 0u);
}

TEST(Accuracy, ThresholdAndArgmax) {
  const Tensor p1 = Tensor::from_doubles(Shape{4, 1}, std::vector<double>{0.2, 0.5, 0.9, 0.49});
  const Tensor t1 = Tensor::from_doubles(Shape{4, 1}, std::vector<double>{0, 1, 1, 1});
  EXPECT_DOUBLE_EQ(accuracy(p1, t1), 0.75);
  const Tensor p2 = Tensor::from_doubles(Shape{2, 3}, std::vector<double>{0.1, 0.7, 0.2, 0.5, 0.5, 0.0});
  const Tensor t2 = Tensor::from_doubles(Shape{2, 3}, std::vector<double>{0, 1, 0, 0, 1, 0});
  EXPECT_DOUBLE_EQ(accuracy(p2, t2), 0.5);
  EXPECT_LG_ERROR(accuracy(p1, p2), kShapeMismatch);
}

TEST(Fit, MatchesManualLoop) {
  std::mt19937_64 rng(77);
  const Dataset data{regression_batch(rng, "fa", 2), regression_batch(rng, "fa", 3)};
  Dataset data_b;
  for (const Feed& f : data) data_b.push_back({{"fb_x", f.at("fa_x")}, {"target", f.at("target")}});
  Model a(small_regressor("fa", kF64, 9), {.optimizer = {OptimizerKind::kSgdMomentum, 0.05, 0.9}});
  Model b(small_regressor("fb", kF64, 9), {.optimizer = {OptimizerKind::kSgdMomentum, 0.05, 0.9}});
  const History h = fit(a, data, {.epochs = 3, .metrics = {Metric::kMse}});
  ASSERT_EQ(h.epochs.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) {
    double total = 0.0;
    for (const Feed& f : data_b) total += b.train_step(f);
    EXPECT_EQ(h.epochs[e].mean_loss, total / 2.0);
    EXPECT_EQ(h.epochs[e].epoch, e + 1);
    const std::vector<Metric> metrics{Metric::kMse};
    EXPECT_EQ(h.epochs[e].metrics.front(), evaluate(b, data_b, metrics).at("mse"));
  }
  EXPECT_EQ(a.epoch(), 3u);
  EXPECT_EQ(a.step(), 6u);
  EXPECT_EQ(h.final_loss(), h.epochs.back().mean_loss);
}

TEST(Fit, Errors) {
  std::mt19937_64 rng(78);
  Model model(small_regressor("fe"));
  EXPECT_LG_ERROR(fit(model, {regression_batch(rng, "fe", 2)}, {.epochs = 0}), kInvalidArgument);
  EXPECT_LG_ERROR(fit(model, {}, {}), kEmptyDataset);
}

TEST(Fit, LearnsXor) {
  auto x = input_layer(2, {"xor_x", kF64});
  auto h = activation(linear(x, 8, {.name = "xor_h", .seed = 3}), UnaryOp::kTanh);
  auto out = activation(linear(h, 1, {.name = "xor_o", .seed = 4}), UnaryOp::kSigmoid);
  Model model(out, {.optimizer = {OptimizerKind::kSgd, 0.5, 0.0}});
  const Dataset data{{{"xor_x", Tensor(Shape{4, 2}, std::vector<double>{0, 0, 0, 1, 1, 0, 1, 1})},
                      {"target", Tensor(Shape{4, 1}, std::vector<double>{0, 1, 1, 0})}}};
  const History hist = fit(model, data, {.epochs = 2000, .metrics = {Metric::kAccuracy}});
  EXPECT_LT(hist.final_loss(), 0.05);
  EXPECT_EQ(hist.epochs.back().metrics.front(), 1.0);
}

TEST(History, TsvLayout) {
  History h;
  h.metrics = {Metric::kAccuracy, Metric::kMse};
  h.epochs.push_back({1, 0.5, {1.0, 0.25}});
  h.epochs.push_back({2, 1.0 / 3.0, {0.75, 0.125}});
  EXPECT_EQ(h.to_tsv(),
            "version: 1\nepoch\tmean_loss\taccuracy\tmse\n1\t0.5\t1\t0.25\n2\t0.333333333\t0.75\t0.125\n");
}

TEST(SharedState, StepThroughReuseChangesOriginal) {
  auto r = testing::make_reuse_graph(kF64, 5);
  Model model(r.l3, {.optimizer = {OptimizerKind::kSgd, 0.1, 0.0}});
  const Tensor xv = Tensor::from_doubles(Shape{2, 2}, std::vector<double>{0.3, 0.9, 0.7, 0.1}, kF64);
  r.x1->set_value(xv);
  const Tensor before = forward(r.l2);
  model.train_step({{"x1", xv}, {"target", Tensor::ones(Shape{2, 4}, kF64)}});
  EXPECT_FALSE(forward(r.l2).bitwise_equal(before));
}

TEST(Fit, OneEpochOneBatchHistoryIsThatLoss) {
  std::mt19937_64 rng(79);
  const Feed batch = regression_batch(rng, "fo", 4);
  Model a(small_regressor("fo", kF64, 2));
  const History h = fit(a, {batch}, {.epochs = 1});
  Model b(small_regressor("fo2", kF64, 2));
  const double loss = b.train_step({{"fo2_x", batch.at("fo_x")}, {"target", batch.at("target")}});
  ASSERT_EQ(h.epochs.size(), 1u);
  EXPECT_EQ(h.epochs.front().mean_loss, loss);
}

TEST(Fit, IdenticalSeedsGiveIdenticalHistories) {
  auto run = [](const std::string& prefix) {
    auto x = input_layer(3, {prefix + "_x", kF64});
    auto d = dropout(linear(x, 4, {.name = prefix + "_h", .seed = 12}), 0.25, {prefix + "_d", 5});
    Model model(linear(d, 2, {.name = prefix + "_o", .seed = 13}),
                {.optimizer = {OptimizerKind::kSgdMomentum, 0.05, 0.9}});
    std::mt19937_64 rng(80);
    Dataset data;
    for (int i = 0; i < 3; ++i) data.push_back(regression_batch(rng, prefix, 4));
    return fit(model, data, {.epochs = 5, .metrics = {Metric::kMse}}).to_tsv();
  };
  EXPECT_EQ(run("ia"), run("ia"));
}

TEST(Accuracy, ConstantPredictorOnBalancedData) {
  std::mt19937_64 rng(81);
  std::vector<double> labels(1000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2 == 0 ? 1.0 : 0.0;
  std::shuffle(labels.begin(), labels.end(), rng);
  const Tensor target = Tensor::from_doubles(Shape{1000, 1}, labels, kF64);
  const Tensor constant = Tensor::from_doubles(Shape{1000, 1}, std::vector<double>(1000, 0.9), kF64);
  double hits = 0.0;
  for (double l : labels) hits += l == 1.0 ? 1.0 : 0.0;
  EXPECT_DOUBLE_EQ(accuracy(constant, target), hits / 1000.0);
  EXPECT_NEAR(accuracy(constant, target), 0.5, 0.05);
}

TEST(Model, LeastSquaresLossDecreasesStrictly) {
  std::mt19937_64 rng(82);
  const Tensor xv = testing::random_tensor(rng, Shape{16, 3});
  const std::vector<double> xs = xv.to_doubles();
  const double w[3][2] = {{0.5, -1.0}, {2.0, 0.25}, {-0.75, 1.5}};
  std::vector<double> ys(16 * 2);
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      ys[i * 2 + j] = 0.1 * static_cast<double>(j);
      for (std::size_t k = 0; k < 3; ++k) ys[i * 2 + j] += xs[i * 3 + k] * w[k][j];
    }
  }
  Model model(small_regressor("ls", kF64, 6), {.optimizer = {OptimizerKind::kSgd, 0.1, 0.0}});
  const Feed batch{{"ls_x", xv}, {"target", Tensor::from_doubles(Shape{16, 2}, ys, kF64)}};
  double prev = model.train_step(batch);
  for (int step = 1; step < 10; ++step) {
    const double loss = model.train_step(batch);
    EXPECT_LT(loss, prev) << "step " << step;
    prev = loss;
  }
}

TEST(Model, InferenceSeesUpdatesWithoutCopies) {
  std::mt19937_64 rng(83);
  for (bool compile : {false, true}) {
    const std::string prefix = compile ? "nc" : "np";
    Model model(small_regressor(prefix, kF64, 4), {.optimizer = {OptimizerKind::kSgd, 0.1, 0.0}, .compile = compile});
    const Feed batch = regression_batch(rng, prefix, 3);
    const Tensor before = model.predict(batch);
    model.train_step(batch);
    const Tensor after = model.predict(batch);
    EXPECT_FALSE(after.bitwise_equal(before));
    const LayerPtr& l = model.prediction();
    EXPECT_TRUE(after.bitwise_equal(compute(*l, {batch.at(prefix + "_x")})));
  }
}

}  // namespace
}  // namespace layergraph

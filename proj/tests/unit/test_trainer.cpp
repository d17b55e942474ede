//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "chemlm/trainer.h"
#include "testkit.h"

using namespace chemlm;

namespace {

std::vector<Example> toy_corpus(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    Example ex;
    ex.ids.resize(3 + rng() % 6);
    for (int &x: ex.ids)
      x = static_cast<int>(rng() % 11);
    ex.ids.push_back(11);
    out.push_back(ex);
  }
  return out;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  cfg.learning_rate = 4e-4;
  cfg.warmup_ratio = 0.05;
  cfg.min_lr_factor = 0.1;
  const std::int64_t total = 1000;
  CHECK(lr_at(0, total, cfg) == 0.0);
  CHECK(lr_at(25, total, cfg) == doctest::Approx(2e-4));
  CHECK(lr_at(50, total, cfg) == 4e-4);
  CHECK(lr_at(total, total, cfg) == doctest::Approx(4e-5).epsilon(1e-12));
  const double mid = 4e-4 * (0.1 + 0.9 * 0.5 * (1.0 + std::cos(std::numbers::pi * 0.5)));
  CHECK(lr_at(525, total, cfg) == doctest::Approx(mid).epsilon(1e-12));
  // Continuity at the warmup junction, on a fine grid.
  cfg.warmup_ratio = 0.1;
  const std::int64_t big = 100000000;
  CHECK(std::abs(lr_at(10000000, big, cfg) - lr_at(9999999, big, cfg)) < 1e-10);
  CHECK(std::abs(lr_at(10000000, big, cfg) - lr_at(10000001, big, cfg)) < 1e-12);
  CHECK_THROWS_AS(lr_at(1001, total, cfg), std::out_of_range);

  cfg.warmup_ratio = 0.0;
  CHECK(lr_at(0, total, cfg) == 4e-4);
}

TEST_CASE("config json") {
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 3;
  cfg.precision = Precision::kF32;
  cfg.task = TaskMode::kReaction;
  const TrainConfig back = TrainConfig::from_json(cfg.to_json());
  CHECK(back.learning_rate == 1e-3);
  CHECK(back.epochs == 3);
  CHECK(back.precision == Precision::kF32);
  CHECK(back.task == TaskMode::kReaction);
  CHECK(TrainConfig::from_json("{}").weight_decay == 0.01);
  CHECK_THROWS_AS(TrainConfig::from_json(R"({"lr": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(TrainConfig::from_json(R"({"warmup_ratio": 1.0})"), std::invalid_argument);
  CHECK_THROWS_AS(TrainConfig::from_json(R"({"min_lr_factor": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(TrainConfig::from_json("[1]"), std::invalid_argument);
  CHECK(parse_task_mode("conditional") == TaskMode::kConditional);
  CHECK_THROWS_AS(parse_task_mode("other"), std::invalid_argument);
}

TEST_CASE("decoupled weight decay") {
  ModelParams p = init_model(testkit::tiny_config(), 1);
  const ModelParams before = p;
  TrainConfig cfg;
  cfg.weight_decay = 0.1;
  AdamW opt(p, cfg);
  opt.step(p, zeros_like(p), 0.01);
  // Zero gradient: Adam moments stay zero and only the decay acts.
  const Matrix expected = before.layers[0].wq - 0.01 * 0.1 * before.layers[0].wq;
  CHECK(p.layers[0].wq == expected);
  CHECK(opt.steps() == 1);
}

TEST_CASE("adam step against a hand computation") {
  ModelParams p = init_model(testkit::tiny_config(), 2);
  ModelParams g = zeros_like(p);
  g.final_norm.setConstant(0.5);
  const Vector w0 = p.final_norm;
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW opt(p, cfg);
  opt.step(p, g, 0.1);
  // First step: m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
  for (Eigen::Index i = 0; i < w0.size(); ++i)
    CHECK(p.final_norm(i) == doctest::Approx(w0(i) - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
}

TEST_CASE("zero learning rate keeps parameters") {
  ModelParams p = init_model(testkit::tiny_config(), 3);
  const ModelParams before = p;
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  const TrainResult r = train(p, fixed_builder(toy_corpus(10, 4)), cfg);
  CHECK(r.steps == 6);
  CHECK(p.tok_emb == before.tok_emb);
  CHECK(p.layers[1].w_up == before.layers[1].w_up);
  CHECK(p.final_norm == before.final_norm);
}

TEST_CASE("training reduces the loss and is reproducible") {
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 30;
  cfg.batch_size = 4;
  cfg.seed = 5;
  const auto data = fixed_builder(toy_corpus(12, 6));
  ModelParams a = init_model(testkit::tiny_config(), 7);
  ModelParams b = a;
  const double initial = compute_loss(a, data(0), LossKind::kPretrain);
  const TrainResult ra = train(a, data, cfg);
  const TrainResult rb = train(b, data, cfg);
  CHECK(compute_loss(a, data(0), LossKind::kPretrain) < 0.5 * initial);
  REQUIRE(ra.trace.size() == rb.trace.size());
  for (std::size_t i = 0; i < ra.trace.size(); ++i)
    CHECK(ra.trace[i].loss == rb.trace[i].loss);
  CHECK(a.lm_head == b.lm_head);

  std::ostringstream csv;
  write_trace_csv(csv, ra.trace);
  const std::string text = csv.str();
  CHECK(text.rfind("step,lr,loss\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + ra.steps);
}

TEST_CASE("float32 mode keeps trainable tensors representable") {
  TrainConfig cfg;
  cfg.precision = Precision::kF32;
  cfg.epochs = 1;
  ModelParams p = init_model(testkit::tiny_config(), 8);
  train(p, fixed_builder(toy_corpus(8, 9)), cfg);
  for (const TensorView &t: tensor_views(p)) {
    for (Eigen::Index i = 0; i < t.size(); ++i)
      REQUIRE(static_cast<double>(static_cast<float>(t.data[i])) == t.data[i]);
  }
}

TEST_CASE("divergence is reported") {
  ModelParams p = init_model(testkit::tiny_config(), 10);
  p.layers[0].wq(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  try {
    train(p, fixed_builder(toy_corpus(4, 11)), cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError &e) {
    CHECK(e.step() == 0);
  }
  CHECK_THROWS_AS(train(p, fixed_builder({}), cfg), std::invalid_argument);
}

TEST_CASE("overlong examples are dropped") {
  std::vector<Example> data = toy_corpus(5, 12);
  Example long_one;
  long_one.ids.assign(40, 1);
  data.push_back(long_one);
  ModelParams p = init_model(testkit::tiny_config(), 13);
  TrainConfig cfg;
  const TrainResult r = train(p, fixed_builder(data), cfg);
  CHECK(r.dropped_overlong == 1);
}

TEST_CASE("perplexity") {
  const ModelParams p = init_model(testkit::tiny_config(), 14);
  const auto data = toy_corpus(6, 15);
  const TokenStats s = token_statistics(p, data, LossKind::kPretrain);
  CHECK(std::abs(perplexity(p, data, LossKind::kPretrain) - std::exp(s.mean_nll())) < 1e-6);
}

}  // TEST_SUITE

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "chemlm/model.h"
#include "chemlm/transformer.h"
#include "testkit.h"

using namespace chemlm;

namespace {

std::vector<int> random_ids(std::mt19937_64 &rng, int n, int vocab) {
  std::vector<int> ids(n);
  for (int &x: ids)
    x = static_cast<int>(rng() % vocab);
  return ids;
}

std::vector<Example> lm_batch(std::mt19937_64 &rng, int vocab) {
  std::vector<Example> batch;
  for (int len: { 7, 4, 10 }) {
    Example ex;
    ex.ids = random_ids(rng, len, vocab);
    batch.push_back(ex);
  }
  return batch;
}

// Larger-than-default weights so every gradient is well above the
// finite-difference noise floor.
ModelParams scaled_model(const ModelConfig &cfg, std::uint64_t seed) {
  ModelParams p = init_model(cfg, seed);
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> n(1.0, 0.2);
  for (TensorView &t: tensor_views(p)) {
    if (t.cols == 1) {
      for (Eigen::Index i = 0; i < t.size(); ++i)
        t.data[i] = n(rng);
    } else {
      t.matrix() *= 10.0;
    }
  }
  return p;
}

void with_threads(const char *n) {
  setenv("CHEMLM_THREADS", n, 1);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("shapes and initial loss") {
  ModelConfig cfg;
  cfg.vocab_size = 40;
  const ModelParams p = init_model(cfg, 1);
  CHECK(p.tok_emb.rows() == 40);
  CHECK(p.tok_emb.cols() == 64);
  CHECK(p.layers.size() == 2);
  CHECK(p.layers[0].w_gate.rows() == cfg.d_ff);
  CHECK(p.layers[0].w_down.cols() == cfg.d_ff);

  std::mt19937_64 rng(2);
  std::vector<Example> batch;
  for (int i = 0; i < 8; ++i)
    batch.push_back({ random_ids(rng, 20, 40) });
  const double loss = compute_loss(p, batch, LossKind::kPretrain);
  CHECK(std::abs(loss - std::log(40.0)) < 0.05 * std::log(40.0));

  const ForwardResult one = forward(p, std::vector<int>{ 3 });
  CHECK(one.logits.rows() == 1);
  CHECK(one.logits.allFinite());

  CHECK_THROWS_AS(forward(p, std::vector<int>(129, 1)), std::invalid_argument);
  CHECK_THROWS_AS(forward(p, std::vector<int>{ 40 }), std::out_of_range);
  CHECK_THROWS_AS(forward(p, std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(compute_loss(p, std::vector<Example>{}, LossKind::kPretrain),
                  std::invalid_argument);

  ModelConfig bad = cfg;
  bad.n_heads = 5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("causal mask") {
  const ModelParams p = init_model(testkit::tiny_config(), 3);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<int> ids = random_ids(rng, 12, 12);
    const Matrix base = forward(p, ids).logits;
    for (int j = 1; j < 12; ++j) {
      std::vector<int> mutated = ids;
      mutated[j] = (mutated[j] + 1 + static_cast<int>(rng() % 11)) % 12;
      const Matrix m = forward(p, mutated).logits;
      CHECK(m.topRows(j) == base.topRows(j));
      CHECK(m.row(j) != base.row(j));
    }
  }
}

TEST_CASE("continuous slots") {
  ModelParams p = init_model(testkit::tiny_config(), 5);
  attach_value_projection(p, 6);
  const std::vector<int> ids{ 1, 2, 3, 4, 5, 6 };
  const std::vector<ContinuousSlot> a{ { 2, 0.5 } };
  const std::vector<ContinuousSlot> b{ { 2, -1.5 } };
  const Matrix la = forward(p, ids, a).logits;
  const Matrix lb = forward(p, ids, b).logits;
  CHECK(la.topRows(2) == lb.topRows(2));
  for (int r = 2; r < 6; ++r)
    CHECK(la.row(r) != lb.row(r));
  // The slot replaces the token embedding, so the placeholder id is irrelevant.
  std::vector<int> other = ids;
  other[2] = 9;
  CHECK(forward(p, other, a).logits == la);

  const ModelParams plain = init_model(testkit::tiny_config(), 5);
  CHECK_THROWS_AS(forward(plain, ids, a), std::invalid_argument);
}

TEST_CASE("perplexity identity") {
  const ModelParams p = init_model(testkit::tiny_config(), 7);
  std::mt19937_64 rng(8);
  const std::vector<Example> batch = lm_batch(rng, 12);
  const TokenStats s = token_statistics(p, batch, LossKind::kPretrain);
  CHECK(s.tokens == 6 + 3 + 9);
  double nll = 0.0;
  for (const Example &ex: batch) {
    const Matrix logits = forward(p, ex.ids).logits;
    for (std::size_t j = 1; j < ex.ids.size(); ++j) {
      const Eigen::RowVectorXd row = logits.row(static_cast<Eigen::Index>(j) - 1);
      const double lse = row.maxCoeff() + std::log((row.array() - row.maxCoeff()).exp().sum());
      nll += lse - row(ex.ids[j]);
    }
  }
  CHECK(s.nll_sum == doctest::Approx(nll).epsilon(1e-12));
  CHECK(std::abs(std::exp(s.mean_nll()) - std::exp(nll / 18.0)) < 1e-6);
}

TEST_CASE("sequence-to-sequence masking") {
  const ModelParams p = init_model(testkit::tiny_config(), 9);
  std::mt19937_64 rng(10);
  std::vector<Example> batch = lm_batch(rng, 12);
  CHECK(compute_loss(p, batch, LossKind::kSeq2Seq)
        == compute_loss(p, batch, LossKind::kPretrain));

  for (Example &ex: batch)
    ex.boundary = 3;
  ModelParams g1;
  const double l1 = compute_loss(p, batch, LossKind::kSeq2Seq, &g1);
  std::vector<Example> perturbed = batch;
  for (Example &ex: perturbed) {
    ex.labels = ex.ids;
    for (int j = 0; j < 3; ++j)
      ex.labels[j] = (ex.labels[j] + 5) % 12;
  }
  ModelParams g2;
  const double l2 = compute_loss(p, perturbed, LossKind::kSeq2Seq, &g2);
  CHECK(l1 == l2);
  CHECK(testkit::max_abs_diff(g1.lm_head, g2.lm_head) == 0.0);

  Example no_targets;
  no_targets.ids = { 1, 2, 3 };
  no_targets.boundary = 3;
  CHECK_THROWS_AS(compute_loss(p, std::vector<Example>{ no_targets }, LossKind::kSeq2Seq),
                  std::invalid_argument);
}

TEST_CASE("property head") {
  ModelParams p = init_model(testkit::tiny_config(), 11);
  attach_head(p, 2, 12);
  p.head->setZero();
  const std::vector<int> ids{ 1, 2, 3, 11 };
  CHECK(predict_properties(p, ids).isZero());

  Example ex;
  ex.ids = ids;
  ex.targets = { 0.0, 0.0 };
  CHECK(compute_loss(p, std::vector<Example>{ ex }, LossKind::kRegression) == 0.0);
  ex.targets = { 1.0, std::nullopt };
  CHECK(compute_loss(p, std::vector<Example>{ ex }, LossKind::kClassification)
        == doctest::Approx(std::log(2.0)));
  CHECK(compute_loss(p, std::vector<Example>{ ex }, LossKind::kRegression)
        == doctest::Approx(1.0));

  ex.targets = { 1.0 };
  CHECK_THROWS_AS(compute_loss(p, std::vector<Example>{ ex }, LossKind::kRegression),
                  std::invalid_argument);
  ex.targets = { std::nullopt, std::nullopt };
  CHECK_THROWS_AS(compute_loss(p, std::vector<Example>{ ex }, LossKind::kRegression),
                  std::invalid_argument);
  const ModelParams headless = init_model(testkit::tiny_config(), 11);
  CHECK_THROWS_AS(predict_properties(headless, ids), std::logic_error);
}

TEST_CASE("gradients match finite differences") {
  std::mt19937_64 rng(13);
  ModelParams p = scaled_model(testkit::tiny_config(), 14);
  attach_value_projection(p, 15);
  attach_head(p, 2, 16);

  std::vector<Example> lm = lm_batch(rng, 12);
  lm[0].slots = { { 2, 0.7 } };
  SUBCASE("pretrain") {
    const auto r = testkit::check_gradients(p, lm, LossKind::kPretrain);
    INFO(r.worst_tensor);
    CHECK(r.worst < 1e-4);
  }
  SUBCASE("seq2seq") {
    for (Example &ex: lm)
      ex.boundary = 3;
    const auto r = testkit::check_gradients(p, lm, LossKind::kSeq2Seq);
    INFO(r.worst_tensor);
    CHECK(r.worst < 1e-4);
  }
  SUBCASE("regression") {
    lm[0].targets = { 0.3, -1.2 };
    lm[1].targets = { std::nullopt, 2.0 };
    lm[2].targets = { 0.5, std::nullopt };
    const auto r = testkit::check_gradients(p, lm, LossKind::kRegression);
    INFO(r.worst_tensor);
    CHECK(r.worst < 1e-4);
  }
  SUBCASE("classification") {
    lm[0].targets = { 1.0, 0.0 };
    lm[1].targets = { std::nullopt, 1.0 };
    lm[2].targets = { 0.0, std::nullopt };
    const auto r = testkit::check_gradients(p, lm, LossKind::kClassification);
    INFO(r.worst_tensor);
    CHECK(r.worst < 1e-4);
  }
}

TEST_CASE("losses do not depend on the thread count") {
  ModelParams p = init_model(testkit::tiny_config(), 17);
  std::mt19937_64 rng(18);
  std::vector<Example> batch;
  for (int i = 0; i < 9; ++i)
    batch.push_back({ random_ids(rng, 5 + i, 12) });
  with_threads("1");
  ModelParams g1;
  const double l1 = compute_loss(p, batch, LossKind::kPretrain, &g1);
  with_threads("4");
  ModelParams g4;
  const double l4 = compute_loss(p, batch, LossKind::kPretrain, &g4);
  unsetenv("CHEMLM_THREADS");
  CHECK(l1 == l4);
  for (std::size_t i = 0; i < g1.layers.size(); ++i)
    CHECK(g1.layers[i].wq == g4.layers[i].wq);
  CHECK(g1.tok_emb == g4.tok_emb);
}

TEST_CASE("vocabulary growth keeps old rows") {
  ModelParams p = init_model(testkit::tiny_config(), 19);
  const Matrix emb = p.tok_emb;
  const Matrix head = p.lm_head;
  grow_vocabulary(p, 15, 20);
  CHECK(p.config.vocab_size == 15);
  CHECK(p.tok_emb.topRows(12) == emb);
  CHECK(p.lm_head.topRows(12) == head);
  CHECK(p.tok_emb.rows() == 15);
}

}  // TEST_SUITE

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chemlm/eval_stats.h"
#include "testkit.h"

using namespace chemlm;

namespace {

using Ints = std::vector<int>;
using Reals = std::vector<double>;

}  // namespace

TEST_SUITE("eval_stats") {

TEST_CASE("roc auc") {
  CHECK(roc_auc(Ints{ 1, 0, 1, 0 }, Reals{ 0.9, 0.8, 0.7, 0.1 }) == 0.75);
  CHECK(roc_auc(Ints{ 0, 0, 1, 1 }, Reals{ 0.1, 0.2, 0.3, 0.4 }) == 1.0);
  CHECK(roc_auc(Ints{ 0, 1 }, Reals{ 0.5, 0.5 }) == 0.5);
  CHECK_THROWS_AS(roc_auc(Ints{ 1, 1 }, Reals{ 0.1, 0.2 }), std::invalid_argument);

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Ints labels;
  Reals scores;
  for (int i = 0; i < 20000; ++i) {
    labels.push_back(static_cast<int>(rng() & 1));
    scores.push_back(u(rng));
  }
  CHECK(std::abs(roc_auc(labels, scores) - 0.5) < 0.02);

  for (int trial = 0; trial < 20; ++trial) {
    Ints l;
    Reals s;
    for (int i = 0; i < 60; ++i) {
      l.push_back(i < 2 ? i : static_cast<int>(rng() & 1));
      s.push_back(std::round(u(rng) * 10.0) / 10.0);
    }
    CHECK(std::abs(roc_auc(l, s) - testkit::roc_auc_pairwise(l, s)) < 1e-12);
  }
}

TEST_CASE("prc auc") {
  CHECK(prc_auc(Ints{ 0, 0, 1, 1 }, Reals{ 0.1, 0.2, 0.3, 0.4 }) == 1.0);
  // Ranked 1,0,1,0: recall steps of 0.5 at precisions 1 and 2/3.
  CHECK(prc_auc(Ints{ 1, 0, 1, 0 }, Reals{ 0.9, 0.8, 0.7, 0.1 })
        == doctest::Approx(0.5 * 1.0 + 0.5 * 2.0 / 3.0));
  CHECK_THROWS_AS(prc_auc(Ints{ 0, 0 }, Reals{ 0.1, 0.2 }), std::invalid_argument);
}

TEST_CASE("regression metrics") {
  const Reals x{ 1, 2, 3 };
  CHECK(rmse(x, x) == 0.0);
  CHECK(mae(x, Reals{ 2, 2, 1 }) == 1.0);
  CHECK(rmse(x, Reals{ 2, 3, 4 }) == 1.0);
  CHECK(spearman(x, x) == doctest::Approx(1.0));
  CHECK(spearman(x, Reals{ 3, 2, 1 }) == doctest::Approx(-1.0));
  CHECK(spearman(x, Reals{ 1, 3, 2 }) == doctest::Approx(0.5));
  CHECK(average_ranks(Reals{ 10, 20, 10, 30 }) == Reals{ 1.5, 3, 1.5, 4 });
  CHECK_THROWS_AS(rmse(x, Reals{ 1 }), std::invalid_argument);
}

TEST_CASE("bootstrap") {
  const auto constant = [](std::span<const int>, std::span<const double>) { return 0.7; };
  const ConfidenceInterval c = bootstrap_ci(constant, Ints{ 0, 1, 1 }, Reals{ 1, 2, 3 });
  CHECK(c.point == 0.7);
  CHECK(c.lo == 0.7);
  CHECK(c.hi == 0.7);

  Ints labels;
  Reals scores;
  std::mt19937_64 rng(52);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 80; ++i) {
    labels.push_back(i % 2);
    scores.push_back(n(rng) + labels.back());
  }
  const MetricFn auc = [](std::span<const int> l, std::span<const double> s) {
    return roc_auc(l, s);
  };
  const ConfidenceInterval a = bootstrap_ci(auc, labels, scores, 100, 0.95, 3);
  const ConfidenceInterval b = bootstrap_ci(auc, labels, scores, 100, 0.95, 3);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.lo <= a.point);
  CHECK(a.point <= a.hi);

  const Reals sorted{ 1, 2, 3, 4 };
  CHECK(quantile_sorted(sorted, 0.0) == 1.0);
  CHECK(quantile_sorted(sorted, 1.0) == 4.0);

  // A resample without positives is redrawn; a dataset without any is not
  // recoverable.
  Ints rare(200, 0);
  rare[0] = 1;
  CHECK_NOTHROW(bootstrap_ci(auc, rare, Reals(200, 0.0), 100, 0.95, 1));
  CHECK_THROWS(bootstrap_ci(auc, Ints(200, 0), Reals(200, 0.0), 100, 0.95, 1));
}

TEST_CASE("top-k aggregation") {
  const std::vector<std::vector<BeamCandidate>> single{ { { "B", -0.1 }, { "A", -0.5 },
                                                          { "C", -0.9 } } };
  const auto one = aggregate_topk(single, 3);
  REQUIRE(one.size() == 3);
  CHECK(one[0].candidate == "B");
  CHECK(one[1].candidate == "A");
  CHECK(one[2].candidate == "C");

  std::vector<std::vector<BeamCandidate>> votes(5);
  for (int i = 0; i < 3; ++i)
    votes[i].push_back({ "X", -9.0 });
  for (int i = 3; i < 5; ++i)
    votes[i].push_back({ "Y", -0.01 });
  const auto v = aggregate_topk(votes, 2);
  CHECK(v[0].candidate == "X");
  CHECK(v[0].votes == 3);
  CHECK(v[0].total_logprob == -27.0);

  const std::vector<std::vector<BeamCandidate>> tie{ { { "b", -1.0 } }, { { "a", -1.0 } } };
  const auto t = aggregate_topk(tie, 0);
  CHECK(t[0].candidate == "a");
  CHECK(t[1].candidate == "b");
  CHECK_THROWS_AS(aggregate_topk({}, 1), std::invalid_argument);

  const Ints ks{ 1, 3, 5 };
  std::vector<ScoredPrediction> ranked;
  for (const char *c: { "p", "q", "r", "s", "u" })
    ranked.push_back({ c, 1, 0.0 });
  CHECK(topk_accuracy(ranked, "p", ks) == std::vector<bool>{ true, true, true });
  CHECK(topk_accuracy(ranked, "s", ks) == std::vector<bool>{ false, false, true });
  CHECK(topk_accuracy(ranked, "z", ks) == std::vector<bool>{ false, false, false });
  const std::vector<int> wide{ 10 };
  CHECK(topk_accuracy(ranked, "z", wide) == std::vector<bool>{ false });
  CHECK(topk_accuracy(ranked, "u", wide) == std::vector<bool>{ true });
}

TEST_CASE("aggregation ignores beam order") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<BeamCandidate>> beams(6);
    for (auto &b: beams) {
      for (int j = 0; j < 5; ++j)
        b.push_back({ std::string(1, static_cast<char>('a' + rng() % 6)),
                      -static_cast<double>(rng() % 8) });
    }
    const auto before = aggregate_topk(beams, 0);
    std::shuffle(beams.begin(), beams.end(), rng);
    const auto after = aggregate_topk(beams, 0);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(before[i].candidate == after[i].candidate);
      CHECK(before[i].votes == after[i].votes);
    }
  }
}

TEST_CASE("power law") {
  Reals n, loss;
  for (int i = 0; i < 8; ++i) {
    n.push_back(1e6 * std::pow(100.0, i / 7.0));
    loss.push_back(2.0 * std::pow(n.back(), -0.3) + 1.0);
  }
  const PowerLawFit fit = fit_power_law(n, loss);
  CHECK(fit.a == doctest::Approx(2.0).epsilon(0.01));
  CHECK(fit.b == doctest::Approx(0.3).epsilon(0.01));
  CHECK(fit.c == doctest::Approx(1.0).epsilon(0.01));
  for (std::size_t i = 1; i < fit.residual_trace.size(); ++i)
    CHECK(fit.residual_trace[i] <= fit.residual_trace[i - 1]);

  const PowerLawFit flat = fit_power_law(n, Reals(8, 2.0));
  CHECK(flat.degenerate);
  CHECK_THROWS_AS(fit_power_law(Reals{ 1, 2, 3 }, Reals{ 3, 2, 1 }), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law(Reals{ 1, 3, 2, 4 }, Reals{ 4, 3, 2, 1 }), std::invalid_argument);
}

}  // TEST_SUITE

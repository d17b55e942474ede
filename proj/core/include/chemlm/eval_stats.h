//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_EVAL_STATS_H_
#define CHEMLM_EVAL_STATS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace chemlm {

// Mann-Whitney statistic, ties count one half. Labels are 0/1; throws
// std::invalid_argument unless both classes are present.
double roc_auc(std::span<const int> labels, std::span<const double> scores);

// Step-wise average precision; tied scores enter as one threshold. Throws
// std::invalid_argument without a positive label.
double prc_auc(std::span<const int> labels, std::span<const double> scores);

double rmse(std::span<const double> xs, std::span<const double> ys);
double mae(std::span<const double> xs, std::span<const double> ys);
// Pearson correlation of average ranks; NaN when either side is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> xs);

struct ConfidenceInterval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

using MetricFn = std::function<double(std::span<const int>, std::span<const double>)>;

// Percentile bootstrap. Resample b draws from its own stream seeded by
// (seed, b). A resample on which the metric throws std::invalid_argument is
// redrawn up to 10 times before the error propagates.
ConfidenceInterval bootstrap_ci(const MetricFn &metric, std::span<const int> labels,
                                std::span<const double> scores,
                                int n_resamples = 100, double level = 0.95,
                                std::uint64_t seed = 0);

// Linear-interpolation quantile of sorted values.
double quantile_sorted(std::span<const double> sorted, double q);

struct BeamCandidate {
  std::string candidate;
  double logprob = 0.0;
};

struct ScoredPrediction {
  std::string candidate;
  int votes = 0;
  double total_logprob = 0.0;
};

// Groups beams from all augmentations by candidate string. votes = number of
// augmentations producing it; total_logprob = sum of each augmentation's
// best log-probability for it. Ranked by votes, then total_logprob, then
// candidate string. k <= 0 returns every candidate. Throws
// std::invalid_argument when no beams are given.
std::vector<ScoredPrediction> aggregate_topk(
    const std::vector<std::vector<BeamCandidate>> &per_augmentation, int k);

std::vector<bool> topk_accuracy(std::span<const ScoredPrediction> ranked,
                                const std::string &truth,
                                std::span<const int> ks);

struct PowerLawFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double residual = 0.0;  // Euclidean norm of residuals
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
  std::vector<double> residual_trace;  // after grid search, then per step
};

// Least squares for L(N) = a N^-b + c: grid over c in [0, min L) with a
// log-linear fit of (a, b) per grid point, then damped Gauss-Newton
// polishing. Throws std::invalid_argument for fewer than 4 points or N not
// strictly increasing.
PowerLawFit fit_power_law(std::span<const double> n, std::span<const double> loss);

}  // namespace chemlm

#endif  // CHEMLM_EVAL_STATS_H_

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "chemlm/eval_stats.h"
#include "chemlm/random.h"

namespace chemlm {
namespace {

void check_lengths(std::size_t a, std::size_t b, const char *what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": length mismatch");
  if (a == 0)
    throw std::invalid_argument(std::string(what) + ": empty input");
}

constexpr int kMaxRedraws = 10;
constexpr int kGridPoints = 200;
constexpr int kMaxPolishIterations = 200;
constexpr double kGradientTolerance = 1e-10;

double sum_squares(const Eigen::VectorXd &r) { return r.squaredNorm(); }

}  // namespace

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]])
      ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double roc_auc(std::span<const int> labels, std::span<const double> scores) {
  check_lengths(labels.size(), scores.size(), "roc_auc");
  const std::vector<double> ranks = average_ranks(scores);
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0) {
      pos += 1.0;
      rank_sum += ranks[i];
    }
  }
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0.0 || neg == 0.0)
    throw std::invalid_argument("roc_auc: both classes must be present");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double prc_auc(std::span<const int> labels, std::span<const double> scores) {
  check_lengths(labels.size(), scores.size(), "prc_auc");
  const std::size_t n = labels.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double total_pos = 0.0;
  for (int l: labels)
    total_pos += l != 0 ? 1.0 : 0.0;
  if (total_pos == 0.0)
    throw std::invalid_argument("prc_auc: no positive labels");

  double tp = 0.0;
  double fp = 0.0;
  double ap = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    double group_pos = 0.0;
    while (j < n && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]] != 0)
        group_pos += 1.0;
      else
        fp += 1.0;
      ++j;
    }
    tp += group_pos;
    if (group_pos > 0.0)
      ap += (tp / (tp + fp)) * (group_pos / total_pos);
    i = j;
  }
  return ap;
}

double rmse(std::span<const double> xs, std::span<const double> ys) {
  check_lengths(xs.size(), ys.size(), "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += (xs[i] - ys[i]) * (xs[i] - ys[i]);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

double mae(std::span<const double> xs, std::span<const double> ys) {
  check_lengths(xs.size(), ys.size(), "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += std::abs(xs[i] - ys[i]);
  return s / static_cast<double>(xs.size());
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  check_lengths(xs.size(), ys.size(), "spearman");
  if (xs.size() < 2)
    throw std::invalid_argument("spearman: need at least two points");
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty())
    throw std::invalid_argument("quantile of empty sample");
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ConfidenceInterval bootstrap_ci(const MetricFn &metric, std::span<const int> labels,
                                std::span<const double> scores, int n_resamples,
                                double level, std::uint64_t seed) {
  check_lengths(labels.size(), scores.size(), "bootstrap_ci");
  if (n_resamples < 1)
    throw std::invalid_argument("bootstrap_ci: need at least one resample");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_ci: level must lie in (0, 1)");

  ConfidenceInterval ci;
  ci.point = metric(labels, scores);
  const std::size_t n = labels.size();
  std::vector<int> l(n);
  std::vector<double> s(n);
  std::vector<double> values;
  values.reserve(n_resamples);
  for (int b = 0; b < n_resamples; ++b) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int attempt = 0;; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = pick(rng);
        l[i] = labels[k];
        s[i] = scores[k];
      }
      try {
        values.push_back(metric(l, s));
        break;
      } catch (const std::invalid_argument &) {
        if (attempt + 1 >= kMaxRedraws)
          throw;
      }
    }
  }
  std::sort(values.begin(), values.end());
  const double tail = (1.0 - level) / 2.0;
  ci.lo = quantile_sorted(values, tail);
  ci.hi = quantile_sorted(values, 1.0 - tail);
  return ci;
}

std::vector<ScoredPrediction> aggregate_topk(
    const std::vector<std::vector<BeamCandidate>> &per_augmentation, int k) {
  std::map<std::string, std::vector<double>> best;
  bool any = false;
  for (const auto &beams: per_augmentation) {
    std::map<std::string, double> local;
    for (const BeamCandidate &c: beams) {
      any = true;
      auto [it, inserted] = local.emplace(c.candidate, c.logprob);
      if (!inserted)
        it->second = std::max(it->second, c.logprob);
    }
    for (const auto &[cand, lp]: local)
      best[cand].push_back(lp);
  }
  if (!any)
    throw std::invalid_argument("aggregate_topk: no candidates");

  std::vector<ScoredPrediction> out;
  out.reserve(best.size());
  for (auto &[cand, lps]: best) {
    std::sort(lps.begin(), lps.end());
    double total = 0.0;
    for (double lp: lps)
      total += lp;
    out.push_back({ cand, static_cast<int>(lps.size()), total });
  }
  std::sort(out.begin(), out.end(), [](const ScoredPrediction &x, const ScoredPrediction &y) {
    if (x.votes != y.votes)
      return x.votes > y.votes;
    if (x.total_logprob != y.total_logprob)
      return x.total_logprob > y.total_logprob;
    return x.candidate < y.candidate;
  });
  if (k > 0 && static_cast<std::size_t>(k) < out.size())
    out.resize(k);
  return out;
}

std::vector<bool> topk_accuracy(std::span<const ScoredPrediction> ranked,
                                const std::string &truth, std::span<const int> ks) {
  std::optional<std::size_t> position;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].candidate == truth) {
      position = i;
      break;
    }
  }
  std::vector<bool> out;
  for (int k: ks)
    out.push_back(position && k > 0 && *position < static_cast<std::size_t>(k));
  return out;
}

PowerLawFit fit_power_law(std::span<const double> n, std::span<const double> loss) {
  check_lengths(n.size(), loss.size(), "fit_power_law");
  if (n.size() < 4)
    throw std::invalid_argument("fit_power_law: need at least 4 points");
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || (i > 0 && !(n[i] > n[i - 1])))
      throw std::invalid_argument("fit_power_law: N must be positive and strictly increasing");
  }

  // Work with x = N / N_0 so the design matrix stays well conditioned.
  const int m = static_cast<int>(n.size());
  const double scale = n[0];
  Eigen::VectorXd x(m);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    x(i) = n[i] / scale;
    y(i) = loss[i];
  }
  const Eigen::VectorXd log_x = x.array().log();

  auto residuals = [&](double a, double b, double c) {
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i)
      r(i) = a * std::pow(x(i), -b) + c - y(i);
    return r;
  };

  PowerLawFit fit;
  const double min_loss = y.minCoeff();
  const double max_loss = y.maxCoeff();
  double best_a = 0.0;
  double best_b = 0.0;
  double best_c = 0.0;
  double best_rss = std::numeric_limits<double>::infinity();
  if (min_loss > 0.0) {
    for (int g = 0; g < kGridPoints; ++g) {
      const double c = min_loss * static_cast<double>(g) / kGridPoints;
      const Eigen::VectorXd t = (y.array() - c).log();
      const double mx = log_x.mean();
      const double mt = t.mean();
      const double sxx = (log_x.array() - mx).square().sum();
      const double slope = ((log_x.array() - mx) * (t.array() - mt)).sum() / sxx;
      const double a = std::exp(mt - slope * mx);
      const double b = -slope;
      const double rss = sum_squares(residuals(a, b, c));
      if (rss < best_rss) {
        best_rss = rss;
        best_a = a;
        best_b = b;
        best_c = c;
      }
    }
  } else {
    best_rss = sum_squares(residuals(0.0, 0.0, y.mean()));
    best_c = y.mean();
  }
  fit.residual_trace.push_back(std::sqrt(best_rss));

  double a = best_a;
  double b = best_b;
  double c = best_c;
  double rss = best_rss;
  double lambda = 1e-3;
  for (int it = 0; it < kMaxPolishIterations; ++it) {
    const Eigen::VectorXd r = residuals(a, b, c);
    Eigen::MatrixXd jac(m, 3);
    for (int i = 0; i < m; ++i) {
      const double p = std::pow(x(i), -b);
      jac(i, 0) = p;
      jac(i, 1) = -a * p * log_x(i);
      jac(i, 2) = 1.0;
    }
    const Eigen::Vector3d grad = jac.transpose() * r;
    fit.iterations = it;
    if (grad.norm() < kGradientTolerance) {
      fit.converged = true;
      break;
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::Matrix3d damped = jtj;
      for (int d = 0; d < 3; ++d)
        damped(d, d) += lambda * std::max(jtj(d, d), 1e-300);
      const Eigen::Vector3d step = damped.ldlt().solve(-grad);
      const double na = a + step(0);
      const double nb = b + step(1);
      const double nc = c + step(2);
      const double nrss = sum_squares(residuals(na, nb, nc));
      if (std::isfinite(nrss) && nrss < rss) {
        a = na;
        b = nb;
        c = nc;
        rss = nrss;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    fit.iterations = it + 1;
    if (!accepted) {
      // No descent direction left at machine precision.
      fit.converged = true;
      break;
    }
    fit.residual_trace.push_back(std::sqrt(rss));
  }

  fit.a = a * std::pow(scale, b);
  fit.b = b;
  fit.c = c;
  fit.residual = std::sqrt(rss);
  fit.degenerate = max_loss - min_loss <= 1e-12 * std::max(1.0, std::abs(max_loss))
                   || !(b > 1e-8) || !std::isfinite(fit.a);
  return fit;
}

}  // namespace chemlm

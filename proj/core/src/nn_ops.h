//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_SRC_NN_OPS_H_
#define CHEMLM_SRC_NN_OPS_H_

#include <cmath>

#include "chemlm/model.h"

namespace chemlm::detail {

// Row-wise RMS normalization; inv_rms receives 1 / rms per row.
inline Matrix rms_norm(const Matrix &x, const Vector &g, double eps, Vector *inv_rms = nullptr) {
  Matrix y(x.rows(), x.cols());
  if (inv_rms)
    inv_rms->resize(x.rows());
  const double d = static_cast<double>(x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const double r = 1.0 / std::sqrt(x.row(t).squaredNorm() / d + eps);
    y.row(t) = (x.row(t) * r).cwiseProduct(g.transpose());
    if (inv_rms)
      (*inv_rms)(t) = r;
  }
  return y;
}

inline Matrix rms_norm_backward(const Matrix &dy, const Matrix &x, const Vector &g,
                                const Vector &inv_rms, Vector *dg) {
  Matrix dx(x.rows(), x.cols());
  const double d = static_cast<double>(x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const double r = inv_rms(t);
    const Eigen::RowVectorXd gy = dy.row(t).cwiseProduct(g.transpose());
    const double dot = x.row(t).dot(gy);
    dx.row(t) = r * gy - (r * r * r / d) * dot * x.row(t);
    if (dg)
      *dg += (dy.row(t).cwiseProduct(x.row(t)) * r).transpose();
  }
  return dx;
}

// Rotates pairs (2i, 2i+1) of every head; row t sits at position first + t.
// sign = -1 applies the inverse rotation.
inline void apply_rope(Matrix &x, int n_heads, double base, int first, double sign = 1.0) {
  const int hd = static_cast<int>(x.cols()) / n_heads;
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const double pos = static_cast<double>(first + t);
    for (int i = 0; i < hd / 2; ++i) {
      const double angle = sign * pos * std::pow(base, -2.0 * i / hd);
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      for (int h = 0; h < n_heads; ++h) {
        const int j = h * hd + 2 * i;
        const double x0 = x(t, j);
        const double x1 = x(t, j + 1);
        x(t, j) = x0 * c - x1 * s;
        x(t, j + 1) = x0 * s + x1 * c;
      }
    }
  }
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double silu(double x) { return x * sigmoid(x); }

inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

// log-sum-exp of a row.
template <typename Row>
double log_sum_exp(const Row &row) {
  const double m = row.maxCoeff();
  return m + std::log((row.array() - m).exp().sum());
}

}  // namespace chemlm::detail

#endif  // CHEMLM_SRC_NN_OPS_H_

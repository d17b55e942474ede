//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "chemlm/parallel.h"
#include "chemlm/random.h"
#include "chemlm/transformer.h"
#include "nn_ops.h"

namespace chemlm {
namespace {

using detail::rms_norm;
using detail::rms_norm_backward;

struct LinearCache {
  Matrix u;     // adapter input after dropout
  Matrix z;     // u A^T
  Matrix keep;  // dropout mask scaled by 1 / (1 - p); empty without dropout
};

struct Adapter {
  const LoraAdapter *weights = nullptr;
  double scale = 0.0;
  double dropout = 0.0;
  std::mt19937_64 *rng = nullptr;  // null disables dropout
};

Matrix linear(const Matrix &x, const Matrix &w, const Adapter &ad, LinearCache &c) {
  Matrix y = x * w.transpose();
  if (!ad.weights)
    return y;
  if (ad.rng && ad.dropout > 0.0) {
    std::bernoulli_distribution drop(ad.dropout);
    c.keep.resize(x.rows(), x.cols());
    const double kept = 1.0 / (1.0 - ad.dropout);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        c.keep(i, j) = drop(*ad.rng) ? 0.0 : kept;
    }
    c.u = x.cwiseProduct(c.keep);
  } else {
    c.u = x;
  }
  c.z = c.u * ad.weights->a.transpose();
  y.noalias() += ad.scale * (c.z * ad.weights->b.transpose());
  return y;
}

Matrix linear_backward(const Matrix &dy, const Matrix &x, const Matrix &w, Matrix *dw,
                       const Adapter &ad, LoraAdapter *dad, const LinearCache &c) {
  if (dw)
    dw->noalias() += dy.transpose() * x;
  Matrix dx = dy * w;
  if (ad.weights) {
    dad->b.noalias() += ad.scale * (dy.transpose() * c.z);
    const Matrix dz = ad.scale * (dy * ad.weights->b);
    dad->a.noalias() += dz.transpose() * c.u;
    Matrix du = dz * ad.weights->a;
    if (c.keep.size())
      du = du.cwiseProduct(c.keep);
    dx += du;
  }
  return dx;
}

struct LayerCache {
  Matrix x;
  Vector inv_attn;
  Matrix a;
  Matrix q, k, v;  // q, k after rotation
  std::vector<Matrix> probs;
  Matrix attn;
  Matrix x_mid;
  Vector inv_mlp;
  Matrix m;
  Matrix gate, up, act, hidden;
  LinearCache lin[kNumLoraTargets];
};

struct Cache {
  std::vector<LayerCache> layers;
  Matrix x_final;
  Vector inv_final;
};

void check_input(const ModelParams &p, std::span<const int> ids,
                 std::span<const ContinuousSlot> slots) {
  if (ids.empty())
    throw std::invalid_argument("empty token sequence");
  if (static_cast<int>(ids.size()) > p.config.n_ctx)
    throw std::invalid_argument("sequence of " + std::to_string(ids.size())
                                + " tokens exceeds context " + std::to_string(p.config.n_ctx));
  for (int id: ids) {
    if (id < 0 || id >= p.config.vocab_size)
      throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
  }
  if (!slots.empty() && !p.value_weight)
    throw std::invalid_argument("continuous values need a value projection");
  for (const ContinuousSlot &s: slots) {
    if (s.position < 0 || s.position >= static_cast<int>(ids.size()))
      throw std::out_of_range("value slot outside the sequence");
  }
}

Matrix embed(const ModelParams &p, std::span<const int> ids,
             std::span<const ContinuousSlot> slots) {
  Matrix x(static_cast<Eigen::Index>(ids.size()), p.config.d_model);
  for (std::size_t t = 0; t < ids.size(); ++t)
    x.row(t) = p.tok_emb.row(ids[t]);
  for (const ContinuousSlot &s: slots)
    x.row(s.position) = (*p.value_weight * s.value + *p.value_bias).transpose();
  return x;
}

// Final-normed hidden states (T x d_model).
Matrix run(const ModelParams &p, std::span<const int> ids,
           std::span<const ContinuousSlot> slots, Cache *cache, std::mt19937_64 *rng) {
  const ModelConfig &cfg = p.config;
  const int T = static_cast<int>(ids.size());
  const int hd = cfg.head_dim();
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool adapted = p.lora.has_value();

  Matrix x = embed(p, ids, slots);
  if (cache)
    cache->layers.resize(cfg.n_layers);
  LayerCache scratch;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const LayerParams &L = p.layers[l];
    LayerCache &c = cache ? cache->layers[l] : scratch;
    auto adapter = [&](int target) {
      Adapter ad;
      if (adapted) {
        ad.weights = &L.lora[target];
        ad.scale = p.lora->scale();
        ad.dropout = p.lora->dropout;
        ad.rng = rng;
      }
      return ad;
    };

    c.x = x;
    c.a = rms_norm(x, L.attn_norm, cfg.norm_eps, &c.inv_attn);
    c.q = linear(c.a, L.wq, adapter(kQ), c.lin[kQ]);
    c.k = linear(c.a, L.wk, adapter(kK), c.lin[kK]);
    c.v = linear(c.a, L.wv, adapter(kV), c.lin[kV]);
    detail::apply_rope(c.q, cfg.n_heads, cfg.rope_base, 0);
    detail::apply_rope(c.k, cfg.n_heads, cfg.rope_base, 0);

    c.attn.resize(T, cfg.d_model);
    c.probs.resize(cfg.n_heads);
    for (int h = 0; h < cfg.n_heads; ++h) {
      const auto qh = c.q.middleCols(h * hd, hd);
      const auto kh = c.k.middleCols(h * hd, hd);
      Matrix s = att_scale * (qh * kh.transpose());
      for (int i = 0; i < T; ++i) {
        const double mx = s.row(i).head(i + 1).maxCoeff();
        double sum = 0.0;
        for (int j = 0; j <= i; ++j) {
          s(i, j) = std::exp(s(i, j) - mx);
          sum += s(i, j);
        }
        for (int j = 0; j <= i; ++j)
          s(i, j) /= sum;
        for (int j = i + 1; j < T; ++j)
          s(i, j) = 0.0;
      }
      c.attn.middleCols(h * hd, hd) = s * c.v.middleCols(h * hd, hd);
      c.probs[h] = std::move(s);
    }
    c.x_mid = x + linear(c.attn, L.wo, adapter(kO), c.lin[kO]);

    c.m = rms_norm(c.x_mid, L.mlp_norm, cfg.norm_eps, &c.inv_mlp);
    c.gate = linear(c.m, L.w_gate, adapter(kGate), c.lin[kGate]);
    c.up = linear(c.m, L.w_up, adapter(kUp), c.lin[kUp]);
    c.act = c.gate.unaryExpr([](double g) { return detail::silu(g); });
    c.hidden = c.act.cwiseProduct(c.up);
    x = c.x_mid + linear(c.hidden, L.w_down, adapter(kDown), c.lin[kDown]);
  }
  Vector inv_final;
  Matrix z = rms_norm(x, p.final_norm, cfg.norm_eps, &inv_final);
  if (cache) {
    cache->x_final = std::move(x);
    cache->inv_final = std::move(inv_final);
  }
  return z;
}

void backward(const ModelParams &p, std::span<const int> ids,
              std::span<const ContinuousSlot> slots, const Cache &cache,
              const Matrix &dz, ModelParams &g) {
  const ModelConfig &cfg = p.config;
  const int hd = cfg.head_dim();
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool adapted = p.lora.has_value();
  const bool base = !adapted;

  Matrix dx = rms_norm_backward(dz, cache.x_final, p.final_norm, cache.inv_final,
                                base ? &g.final_norm : nullptr);
  for (int l = cfg.n_layers - 1; l >= 0; --l) {
    const LayerParams &L = p.layers[l];
    LayerParams &G = g.layers[l];
    const LayerCache &c = cache.layers[l];
    auto adapter = [&](int target) {
      Adapter ad;
      if (adapted) {
        ad.weights = &L.lora[target];
        ad.scale = p.lora->scale();
      }
      return ad;
    };
    auto grad_w = [&](Matrix &w) { return base ? &w : nullptr; };
    auto grad_ad = [&](int target) { return adapted ? &G.lora[target] : nullptr; };

    // MLP
    const Matrix dhidden = linear_backward(dx, c.hidden, L.w_down, grad_w(G.w_down),
                                           adapter(kDown), grad_ad(kDown), c.lin[kDown]);
    const Matrix dup = dhidden.cwiseProduct(c.act);
    const Matrix dgate = dhidden.cwiseProduct(c.up).cwiseProduct(
        c.gate.unaryExpr([](double v) { return detail::silu_grad(v); }));
    Matrix dm = linear_backward(dgate, c.m, L.w_gate, grad_w(G.w_gate),
                                adapter(kGate), grad_ad(kGate), c.lin[kGate]);
    dm += linear_backward(dup, c.m, L.w_up, grad_w(G.w_up),
                          adapter(kUp), grad_ad(kUp), c.lin[kUp]);
    Matrix dx_mid = dx + rms_norm_backward(dm, c.x_mid, L.mlp_norm, c.inv_mlp,
                                           base ? &G.mlp_norm : nullptr);

    // attention
    const Matrix dattn = linear_backward(dx_mid, c.attn, L.wo, grad_w(G.wo),
                                         adapter(kO), grad_ad(kO), c.lin[kO]);
    Matrix dq(c.q.rows(), c.q.cols());
    Matrix dk(c.k.rows(), c.k.cols());
    Matrix dv(c.v.rows(), c.v.cols());
    for (int h = 0; h < cfg.n_heads; ++h) {
      const Matrix &P = c.probs[h];
      const auto dO = dattn.middleCols(h * hd, hd);
      const Matrix dP = dO * c.v.middleCols(h * hd, hd).transpose();
      dv.middleCols(h * hd, hd) = P.transpose() * dO;
      const Eigen::VectorXd rows = dP.cwiseProduct(P).rowwise().sum();
      const Matrix dS = P.cwiseProduct(dP.colwise() - rows);
      dq.middleCols(h * hd, hd) = att_scale * (dS * c.k.middleCols(h * hd, hd));
      dk.middleCols(h * hd, hd) = att_scale * (dS.transpose() * c.q.middleCols(h * hd, hd));
    }
    detail::apply_rope(dq, cfg.n_heads, cfg.rope_base, 0, -1.0);
    detail::apply_rope(dk, cfg.n_heads, cfg.rope_base, 0, -1.0);
    Matrix da = linear_backward(dq, c.a, L.wq, grad_w(G.wq), adapter(kQ), grad_ad(kQ), c.lin[kQ]);
    da += linear_backward(dk, c.a, L.wk, grad_w(G.wk), adapter(kK), grad_ad(kK), c.lin[kK]);
    da += linear_backward(dv, c.a, L.wv, grad_w(G.wv), adapter(kV), grad_ad(kV), c.lin[kV]);
    dx = dx_mid + rms_norm_backward(da, c.x, L.attn_norm, c.inv_attn,
                                    base ? &G.attn_norm : nullptr);
  }

  std::vector<bool> is_slot(ids.size(), false);
  for (const ContinuousSlot &s: slots) {
    is_slot[s.position] = true;
    *g.value_weight += dx.row(s.position).transpose() * s.value;
    *g.value_bias += dx.row(s.position).transpose();
  }
  if (base) {
    for (std::size_t t = 0; t < ids.size(); ++t) {
      if (!is_slot[t])
        g.tok_emb.row(ids[t]) += dx.row(t);
    }
  }
}

bool is_lm(LossKind kind) {
  return kind == LossKind::kPretrain || kind == LossKind::kSeq2Seq;
}

// First label index scored for a language-model loss.
int first_target(const Example &ex, LossKind kind) {
  const int T = static_cast<int>(ex.ids.size());
  if (!ex.labels.empty() && ex.labels.size() != ex.ids.size())
    throw std::invalid_argument("labels must align with ids");
  if (kind == LossKind::kPretrain)
    return 1;
  if (ex.boundary >= T)
    throw std::invalid_argument("seq2seq example has no target tokens");
  return std::max(ex.boundary, 1);
}

int label_at(const Example &ex, int j) {
  return ex.labels.empty() ? ex.ids[j] : ex.labels[j];
}

struct ExampleLoss {
  double sum = 0.0;
  double count = 0.0;
};

ExampleLoss example_loss(const ModelParams &p, const Example &ex, LossKind kind,
                         ModelParams *g, std::mt19937_64 *rng) {
  check_input(p, ex.ids, ex.slots);
  const int T = static_cast<int>(ex.ids.size());
  ExampleLoss out;
  Cache cache;
  Matrix dz;

  if (is_lm(kind)) {
    const int first = first_target(ex, kind);
    if (first >= T)
      return out;
    const Matrix z = run(p, ex.ids, ex.slots, g ? &cache : nullptr, rng);
    const int n = T - first;
    const auto zs = z.middleRows(first - 1, n);
    Matrix logits = zs * p.lm_head.transpose();
    for (int r = 0; r < n; ++r) {
      const int label = label_at(ex, first + r);
      if (label < 0 || label >= p.config.vocab_size)
        throw std::out_of_range("label outside vocabulary");
      const double lse = detail::log_sum_exp(logits.row(r));
      out.sum += lse - logits(r, label);
      if (g) {
        logits.row(r) = (logits.row(r).array() - lse).exp().matrix();
        logits(r, label) -= 1.0;
      }
    }
    out.count = n;
    if (!g)
      return out;
    if (!p.lora)
      g->lm_head.noalias() += logits.transpose() * zs;
    dz = Matrix::Zero(T, p.config.d_model);
    dz.middleRows(first - 1, n) = logits * p.lm_head;
  } else {
    if (!p.head)
      throw std::logic_error("property loss needs a head");
    const int m = static_cast<int>(p.head->rows());
    if (static_cast<int>(ex.targets.size()) != m)
      throw std::invalid_argument("example has " + std::to_string(ex.targets.size())
                                  + " targets, head has " + std::to_string(m));
    int observed = 0;
    for (const auto &t: ex.targets)
      observed += t.has_value();
    if (observed == 0)
      return out;
    const Matrix z = run(p, ex.ids, ex.slots, g ? &cache : nullptr, rng);
    const Vector zl = z.row(T - 1).transpose();
    const Vector y = *p.head * zl;
    Vector dy = Vector::Zero(m);
    double loss = 0.0;
    for (int i = 0; i < m; ++i) {
      if (!ex.targets[i])
        continue;
      const double target = *ex.targets[i];
      if (kind == LossKind::kRegression) {
        const double e = y(i) - target;
        loss += e * e;
        dy(i) = 2.0 * e / observed;
      } else {
        loss += std::max(y(i), 0.0) - y(i) * target + std::log1p(std::exp(-std::abs(y(i))));
        dy(i) = (detail::sigmoid(y(i)) - target) / observed;
      }
    }
    out.sum = loss / observed;
    out.count = 1.0;
    if (!g)
      return out;
    *g->head += dy * zl.transpose();
    dz = Matrix::Zero(T, p.config.d_model);
    dz.row(T - 1) = (p.head->transpose() * dy).transpose();
  }
  backward(p, ex.ids, ex.slots, cache, dz, *g);
  return out;
}

}  // namespace

ForwardResult forward(const ModelParams &p, std::span<const int> ids,
                      std::span<const ContinuousSlot> slots) {
  check_input(p, ids, slots);
  ForwardResult r;
  r.hidden = run(p, ids, slots, nullptr, nullptr);
  r.logits = r.hidden * p.lm_head.transpose();
  return r;
}

Vector predict_properties(const ModelParams &p, std::span<const int> ids,
                          std::span<const ContinuousSlot> slots) {
  if (!p.head)
    throw std::logic_error("model has no property head");
  check_input(p, ids, slots);
  const Matrix z = run(p, ids, slots, nullptr, nullptr);
  return *p.head * z.row(z.rows() - 1).transpose();
}

double compute_loss(const ModelParams &p, std::span<const Example> batch, LossKind kind,
                    ModelParams *grads, const RunOptions &options) {
  if (batch.empty())
    throw std::invalid_argument("empty batch");
  std::vector<ExampleLoss> losses(batch.size());
  std::vector<ModelParams> per_example(grads ? batch.size() : 0);
  parallel_for(batch.size(), [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(options.dropout_seed, i));
    ModelParams *g = nullptr;
    if (grads) {
      per_example[i] = zeros_like(p);
      g = &per_example[i];
    }
    losses[i] = example_loss(p, batch[i], kind, g, options.training ? &rng : nullptr);
  });

  double sum = 0.0;
  double count = 0.0;
  for (const ExampleLoss &l: losses) {
    sum += l.sum;
    count += l.count;
  }
  if (count == 0.0)
    throw std::invalid_argument("batch has no scored targets");
  if (grads) {
    *grads = zeros_like(p);
    for (const ModelParams &g: per_example)
      accumulate(*grads, g);
    for (TensorView &t: tensor_views(*grads))
      t.matrix() /= count;
  }
  return sum / count;
}

TokenStats token_statistics(const ModelParams &p, std::span<const Example> batch,
                            LossKind kind) {
  if (!is_lm(kind))
    throw std::invalid_argument("token statistics need a language-model loss");
  std::vector<TokenStats> parts(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    const Example &ex = batch[i];
    const int first = first_target(ex, kind);
    const int T = static_cast<int>(ex.ids.size());
    if (first >= T)
      return;
    const ForwardResult r = forward(p, ex.ids, ex.slots);
    TokenStats &s = parts[i];
    for (int j = first; j < T; ++j) {
      const auto row = r.logits.row(j - 1);
      const int label = label_at(ex, j);
      Eigen::Index best = 0;
      row.maxCoeff(&best);
      s.nll_sum += detail::log_sum_exp(row) - row(label);
      s.correct += best == label;
      ++s.tokens;
    }
  });
  TokenStats total;
  for (const TokenStats &s: parts) {
    total.nll_sum += s.nll_sum;
    total.tokens += s.tokens;
    total.correct += s.correct;
  }
  return total;
}

}  // namespace chemlm

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <random>
#include <stdexcept>

#include "chemlm/model.h"

namespace chemlm {
namespace {

constexpr double kInitStd = 0.02;

void fill_normal(Matrix &m, std::mt19937_64 &rng) {
  std::normal_distribution<double> dist(0.0, kInitStd);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = dist(rng);
  }
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
  Matrix m(rows, cols);
  fill_normal(m, rng);
  return m;
}

template <typename Params, typename Fn>
void visit(Params &p, Fn &&fn) {
  const bool adapted = p.lora.has_value();
  const bool base = !adapted;
  fn("tok_emb", p.tok_emb, base);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto &layer = p.layers[l];
    const std::string prefix = "layers." + std::to_string(l) + ".";
    fn(prefix + "attn_norm", layer.attn_norm, base);
    fn(prefix + "wq", layer.wq, base);
    fn(prefix + "wk", layer.wk, base);
    fn(prefix + "wv", layer.wv, base);
    fn(prefix + "wo", layer.wo, base);
    fn(prefix + "mlp_norm", layer.mlp_norm, base);
    fn(prefix + "w_gate", layer.w_gate, base);
    fn(prefix + "w_up", layer.w_up, base);
    fn(prefix + "w_down", layer.w_down, base);
  }
  fn("final_norm", p.final_norm, base);
  fn("lm_head", p.lm_head, base);
  if (p.head)
    fn("head", *p.head, true);
  if (p.value_weight)
    fn("value.weight", *p.value_weight, true);
  if (p.value_bias)
    fn("value.bias", *p.value_bias, true);
  if (adapted) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      for (int t = 0; t < kNumLoraTargets; ++t) {
        const std::string prefix = "lora." + std::to_string(l) + "."
                                   + lora_target_name(t) + ".";
        fn(prefix + "a", p.layers[l].lora[t].a, true);
        fn(prefix + "b", p.layers[l].lora[t].b, true);
      }
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (n_layers < 1 || n_heads < 1 || d_model < 1 || d_ff < 1 || vocab_size < 1)
    throw std::invalid_argument("model dimensions must be positive");
  if (d_model % n_heads != 0)
    throw std::invalid_argument("d_model must be divisible by n_heads");
  if (head_dim() % 2 != 0)
    throw std::invalid_argument("head dimension must be even for rotary encoding");
  if (n_ctx < 2)
    throw std::invalid_argument("n_ctx must be at least 2");
}

const char *lora_target_name(int target) {
  static const char *names[] = { "q", "k", "v", "o", "gate", "up", "down" };
  if (target < 0 || target >= kNumLoraTargets)
    throw std::out_of_range("LoRA target out of range");
  return names[target];
}

const Matrix &LayerParams::weight(int target) const {
  switch (target) {
  case kQ: return wq;
  case kK: return wk;
  case kV: return wv;
  case kO: return wo;
  case kGate: return w_gate;
  case kUp: return w_up;
  case kDown: return w_down;
  default: throw std::out_of_range("LoRA target out of range");
  }
}

Matrix &LayerParams::weight(int target) {
  return const_cast<Matrix &>(static_cast<const LayerParams &>(*this).weight(target));
}

ModelParams init_model(const ModelConfig &config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const int d = config.d_model;
  const int f = config.d_ff;
  ModelParams p;
  p.config = config;
  p.tok_emb = normal_matrix(config.vocab_size, d, rng);
  p.layers.resize(config.n_layers);
  for (LayerParams &layer: p.layers) {
    layer.attn_norm = Vector::Ones(d);
    layer.wq = normal_matrix(d, d, rng);
    layer.wk = normal_matrix(d, d, rng);
    layer.wv = normal_matrix(d, d, rng);
    layer.wo = normal_matrix(d, d, rng);
    layer.mlp_norm = Vector::Ones(d);
    layer.w_gate = normal_matrix(f, d, rng);
    layer.w_up = normal_matrix(f, d, rng);
    layer.w_down = normal_matrix(d, f, rng);
  }
  p.final_norm = Vector::Ones(d);
  p.lm_head = normal_matrix(config.vocab_size, d, rng);
  return p;
}

void attach_head(ModelParams &p, int outputs, std::uint64_t seed) {
  if (outputs < 1)
    throw std::invalid_argument("head needs at least one output");
  std::mt19937_64 rng(seed);
  p.head = normal_matrix(outputs, p.config.d_model, rng);
}

void attach_value_projection(ModelParams &p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix w = normal_matrix(p.config.d_model, 1, rng);
  p.value_weight = Vector(w.col(0));
  p.value_bias = Vector::Zero(p.config.d_model);
}

void grow_vocabulary(ModelParams &p, int new_vocab_size, std::uint64_t seed) {
  const int old = p.config.vocab_size;
  if (new_vocab_size < old)
    throw std::invalid_argument("vocabulary cannot shrink");
  if (new_vocab_size == old)
    return;
  std::mt19937_64 rng(seed);
  const int d = p.config.d_model;
  const int extra = new_vocab_size - old;
  Matrix emb(new_vocab_size, d);
  emb.topRows(old) = p.tok_emb;
  emb.bottomRows(extra) = normal_matrix(extra, d, rng);
  Matrix head(new_vocab_size, d);
  head.topRows(old) = p.lm_head;
  head.bottomRows(extra) = normal_matrix(extra, d, rng);
  p.tok_emb = std::move(emb);
  p.lm_head = std::move(head);
  p.config.vocab_size = new_vocab_size;
  if (!p.start_distribution.empty())
    p.start_distribution.resize(new_vocab_size, 0.0);
}

std::vector<TensorView> tensor_views(ModelParams &p) {
  std::vector<TensorView> out;
  visit(p, [&](const std::string &name, auto &t, bool trainable) {
    out.push_back({ name, t.data(), t.rows(), t.cols(), trainable });
  });
  return out;
}

std::vector<TensorView> tensor_views(const ModelParams &p) {
  return tensor_views(const_cast<ModelParams &>(p));
}

ModelParams zeros_like(const ModelParams &p) {
  ModelParams z = p;
  for (TensorView &t: tensor_views(z))
    t.matrix().setZero();
  return z;
}

void accumulate(ModelParams &dst, const ModelParams &src, double scale) {
  auto d = tensor_views(dst);
  auto s = tensor_views(src);
  if (d.size() != s.size())
    throw std::invalid_argument("accumulate: structure mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].size() != s[i].size())
      throw std::invalid_argument("accumulate: shape mismatch for " + d[i].name);
    d[i].matrix() += scale * s[i].matrix();
  }
}

std::int64_t trainable_parameter_count(const ModelParams &p) {
  std::int64_t n = 0;
  for (const TensorView &t: tensor_views(p))
    n += t.trainable ? t.size() : 0;
  return n;
}

std::int64_t total_parameter_count(const ModelParams &p) {
  std::int64_t n = 0;
  for (const TensorView &t: tensor_views(p))
    n += t.size();
  return n;
}

}  // namespace chemlm

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_MODEL_H_
#define CHEMLM_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chemlm/augment.h"

namespace chemlm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ModelConfig {
  int n_layers = 2;
  int n_heads = 4;
  int n_ctx = 128;
  int d_model = 64;
  int d_ff = 172;
  int vocab_size = 266;
  double rope_base = 10000.0;
  double norm_eps = 1e-5;

  // Throws std::invalid_argument on inconsistent shapes.
  void validate() const;
  int head_dim() const { return d_model / n_heads; }
  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

struct LoraConfig {
  int rank = 4;
  double alpha = 1.0;
  double dropout = 0.0;

  double scale() const { return alpha / rank; }
  friend bool operator==(const LoraConfig &, const LoraConfig &) = default;
};

// Linear layers inside a block that carry adapters.
enum LoraTarget : int { kQ, kK, kV, kO, kGate, kUp, kDown, kNumLoraTargets };

const char *lora_target_name(int target);

struct LoraAdapter {
  Matrix a;  // rank x in
  Matrix b;  // out x rank
};

struct LayerParams {
  Vector attn_norm;
  Matrix wq, wk, wv, wo;  // d_model x d_model, stored out x in
  Vector mlp_norm;
  Matrix w_gate, w_up;    // d_ff x d_model
  Matrix w_down;          // d_model x d_ff
  std::array<LoraAdapter, kNumLoraTargets> lora;

  const Matrix &weight(int target) const;
  Matrix &weight(int target);
};

struct ModelParams {
  ModelConfig config;
  Matrix tok_emb;  // vocab x d_model
  std::vector<LayerParams> layers;
  Vector final_norm;
  Matrix lm_head;  // vocab x d_model

  // Property head W_y (m x d_model), applied to the final hidden state at
  // the last token.
  std::optional<Matrix> head;
  // Shared 1 -> d_model projection for continuous condition values.
  std::optional<Vector> value_weight;
  std::optional<Vector> value_bias;

  std::optional<LoraConfig> lora;
  ConditionStats cond_stats;
  // First-token frequencies for unconditional sampling (empty if unset).
  std::vector<double> start_distribution;
};

// Normal(0, 0.02) matrices, unit norm scales.
ModelParams init_model(const ModelConfig &config, std::uint64_t seed);

void attach_head(ModelParams &p, int outputs, std::uint64_t seed);
void attach_value_projection(ModelParams &p, std::uint64_t seed);

// Appends embedding and output rows for a grown vocabulary; rows of existing
// ids are untouched. Throws std::invalid_argument if the size shrinks.
void grow_vocabulary(ModelParams &p, int new_vocab_size, std::uint64_t seed);

struct TensorView {
  std::string name;
  double *data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  bool trainable = true;

  Eigen::Index size() const { return rows * cols; }
  Eigen::Map<Matrix> matrix() const { return { data, rows, cols }; }
};

// Every tensor in declaration order: tok_emb, layers.{i}.*, final_norm,
// lm_head, head, value.weight, value.bias, lora.{i}.{target}.{a,b}. With
// adapters attached only adapters, the head and the value projection are
// trainable.
std::vector<TensorView> tensor_views(ModelParams &p);
std::vector<TensorView> tensor_views(const ModelParams &p);

// Same shapes, all zeros (gradient buffers).
ModelParams zeros_like(const ModelParams &p);

// Elementwise dst += src over all tensors (same structure).
void accumulate(ModelParams &dst, const ModelParams &src, double scale = 1.0);

std::int64_t trainable_parameter_count(const ModelParams &p);
std::int64_t total_parameter_count(const ModelParams &p);

}  // namespace chemlm

#endif  // CHEMLM_MODEL_H_

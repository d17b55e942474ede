//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <random>

#include "chemlm/lora.h"

namespace chemlm {

void attach_lora(ModelParams &p, const LoraConfig &cfg, std::uint64_t seed) {
  if (p.lora)
    throw AdapterError("adapters are already attached");
  const int max_rank = std::min(p.config.d_model, p.config.d_ff);
  if (cfg.rank < 1 || cfg.rank > max_rank)
    throw std::invalid_argument("LoRA rank must lie in [1, " + std::to_string(max_rank) + "]");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0))
    throw std::invalid_argument("LoRA dropout must lie in [0, 1)");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.02);
  for (LayerParams &layer: p.layers) {
    for (int t = 0; t < kNumLoraTargets; ++t) {
      const Matrix &w = layer.weight(t);
      LoraAdapter &ad = layer.lora[t];
      ad.a.resize(cfg.rank, w.cols());
      for (Eigen::Index j = 0; j < ad.a.cols(); ++j) {
        for (Eigen::Index i = 0; i < ad.a.rows(); ++i)
          ad.a(i, j) = dist(rng);
      }
      ad.b = Matrix::Zero(w.rows(), cfg.rank);
    }
  }
  p.lora = cfg;
}

void merge_lora(ModelParams &p) {
  if (!p.lora)
    throw AdapterError("no adapters to merge");
  const double scale = p.lora->scale();
  for (LayerParams &layer: p.layers) {
    for (int t = 0; t < kNumLoraTargets; ++t) {
      LoraAdapter &ad = layer.lora[t];
      layer.weight(t).noalias() += scale * (ad.b * ad.a);
      ad = {};
    }
  }
  p.lora.reset();
}

std::int64_t lora_param_count(const LoraConfig &cfg, const ModelConfig &model,
                              int head_outputs, bool value_projection) {
  const std::int64_t d = model.d_model;
  const std::int64_t f = model.d_ff;
  // (in + out) summed over q, k, v, o, gate, up, down
  const std::int64_t per_layer = 4 * (d + d) + 3 * (d + f);
  std::int64_t n = static_cast<std::int64_t>(cfg.rank) * per_layer * model.n_layers;
  n += static_cast<std::int64_t>(head_outputs) * d;
  if (value_projection)
    n += 2 * d;
  return n;
}

int lora_target_count(const ModelConfig &model) {
  return kNumLoraTargets * model.n_layers;
}

}  // namespace chemlm

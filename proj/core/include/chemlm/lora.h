//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_LORA_H_
#define CHEMLM_LORA_H_

#include <cstdint>
#include <stdexcept>

#include "chemlm/model.h"

namespace chemlm {

class AdapterError: public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Adds an (A, B) pair to all seven block linears of every layer; A is
// Normal(0, 0.02), B is zero. Base weights and embeddings become frozen.
// Throws AdapterError if adapters are already attached and
// std::invalid_argument for a rank outside [1, min matrix dimension] or a
// dropout outside [0, 1).
void attach_lora(ModelParams &p, const LoraConfig &cfg, std::uint64_t seed);

// W += scale * B * A for every target, then drops the adapters. Throws
// AdapterError without adapters.
void merge_lora(ModelParams &p);

// Trainable parameters under `cfg`: r * (in + out) per targeted matrix plus
// the head (m x d_model) and the value projection when present.
std::int64_t lora_param_count(const LoraConfig &cfg, const ModelConfig &model,
                              int head_outputs = 0, bool value_projection = false);

// 7 * n_layers.
int lora_target_count(const ModelConfig &model);

}  // namespace chemlm

#endif  // CHEMLM_LORA_H_

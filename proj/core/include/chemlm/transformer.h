//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_TRANSFORMER_H_
#define CHEMLM_TRANSFORMER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chemlm/augment.h"
#include "chemlm/model.h"

namespace chemlm {

struct Example {
  std::vector<int> ids;
  // Next-token labels aligned with ids; empty means ids themselves.
  std::vector<int> labels;
  // First target index: labels[j] for j >= max(boundary, 1) are predicted
  // from position j - 1; earlier labels are ignored.
  int boundary = 0;
  std::vector<ContinuousSlot> slots;
  // Property labels; nullopt entries are missing and masked out.
  std::vector<std::optional<double>> targets;
};

enum class LossKind {
  kPretrain,        // next-token cross-entropy over every position
  kSeq2Seq,         // cross-entropy over target positions only
  kRegression,      // squared error of the property head
  kClassification,  // binary cross-entropy of the property head
};

struct RunOptions {
  // Enables adapter dropout.
  bool training = false;
  // Dropout masks for example i come from derive_seed(dropout_seed, i).
  std::uint64_t dropout_seed = 0;
};

struct ForwardResult {
  Matrix logits;  // T x vocab
  Matrix hidden;  // T x d_model, after the final norm
};

// Throws std::invalid_argument for empty or overlong input, slots without a
// value projection, and std::out_of_range for bad token ids.
ForwardResult forward(const ModelParams &p, std::span<const int> ids,
                      std::span<const ContinuousSlot> slots = {});

// Head output at the last token. Throws std::logic_error without a head.
Vector predict_properties(const ModelParams &p, std::span<const int> ids,
                          std::span<const ContinuousSlot> slots = {});

// Mean loss over the batch (token mean for the language-model losses,
// example mean for the head losses). If `grads` is non-null it receives the
// gradient of that mean with the structure of zeros_like(p); per-example
// gradients are summed in example order, so the result does not depend on
// the worker count. Frozen tensors get zero gradient.
double compute_loss(const ModelParams &p, std::span<const Example> batch,
                    LossKind kind, ModelParams *grads = nullptr,
                    const RunOptions &options = {});

struct TokenStats {
  double nll_sum = 0.0;
  std::int64_t tokens = 0;
  std::int64_t correct = 0;  // argmax equals the label

  double mean_nll() const { return tokens ? nll_sum / tokens : 0.0; }
  double accuracy() const { return tokens ? static_cast<double>(correct) / tokens : 0.0; }
};

// Next-token statistics over the positions scored by kPretrain / kSeq2Seq.
TokenStats token_statistics(const ModelParams &p, std::span<const Example> batch,
                            LossKind kind);

}  // namespace chemlm

#endif  // CHEMLM_TRANSFORMER_H_

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_TRAINER_H_
#define CHEMLM_TRAINER_H_

#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chemlm/datasets.h"
#include "chemlm/model.h"
#include "chemlm/transformer.h"

namespace chemlm {

enum class TaskMode { kPretrain, kProperty, kConditional, kReaction };
enum class Precision { kF64, kF32 };

const char *task_mode_name(TaskMode mode);
TaskMode parse_task_mode(std::string_view name);

struct TrainConfig {
  double learning_rate = 4e-4;
  double warmup_ratio = 0.05;
  double min_lr_factor = 0.1;
  double weight_decay = 0.01;
  int batch_size = 16;
  int epochs = 1;
  std::uint64_t seed = 0;
  Precision precision = Precision::kF64;
  TaskMode task = TaskMode::kPretrain;
  // Property task only: BCE instead of squared error.
  bool classification = false;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 1.0;  // global norm; <= 0 disables

  // Throws std::invalid_argument.
  void validate() const;
  // JSON keys equal the field names; precision is "f64" or "f32", task one of
  // pretrain, property, conditional, reaction.
  std::string to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(std::string_view json);
};

LossKind loss_kind(const TrainConfig &cfg);

// Linear warmup from 0 over ceil(warmup_ratio * total) steps, then cosine
// decay to min_lr_factor * learning_rate at step `total`.
double lr_at(std::int64_t step, std::int64_t total, const TrainConfig &cfg);

// Global L2 norm over the trainable tensors of a gradient.
double grad_norm(const ModelParams &grads);

class AdamW {
public:
  AdamW(const ModelParams &p, const TrainConfig &cfg);
  // Decoupled decay: w -= lr * decay * w, then the bias-corrected Adam
  // step. Only trainable tensors move.
  void step(ModelParams &p, const ModelParams &grads, double lr);
  std::int64_t steps() const { return t_; }

private:
  TrainConfig cfg_;
  std::vector<Matrix> m_, v_;
  std::int64_t t_ = 0;
};

class DivergenceError: public std::runtime_error {
public:
  DivergenceError(std::int64_t step, const std::string &msg)
      : std::runtime_error(msg), step_(step) {}
  std::int64_t step() const { return step_; }

private:
  std::int64_t step_;
};

struct TraceRow {
  std::int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainCallbacks {
  std::function<void(const TraceRow &)> on_step;
  std::function<void(int epoch, const ModelParams &)> on_epoch_end;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  std::int64_t steps = 0;
  int dropped_overlong = 0;
};

// Shuffles each epoch with derive_seed(seed, epoch), clips, steps AdamW.
// Throws DivergenceError on a non-finite loss or gradient, and
// std::invalid_argument for an empty dataset.
TrainResult train(ModelParams &p, const EpochBuilder &data, const TrainConfig &cfg,
                  const TrainCallbacks &callbacks = {});

// "step,lr,loss" rows with round-trip precision.
void write_trace_csv(std::ostream &out, const std::vector<TraceRow> &trace);

// exp(mean next-token NLL).
double perplexity(const ModelParams &p, std::span<const Example> examples, LossKind kind);

}  // namespace chemlm

#endif  // CHEMLM_TRAINER_H_

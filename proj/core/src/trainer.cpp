//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "chemlm/random.h"
#include "chemlm/trainer.h"

namespace chemlm {
namespace {

constexpr std::uint64_t kDropoutStream = 0x64726f706f7574ULL;

void round_trainable(ModelParams &p) {
  for (TensorView &t: tensor_views(p)) {
    if (!t.trainable)
      continue;
    for (Eigen::Index i = 0; i < t.size(); ++i)
      t.data[i] = static_cast<float>(t.data[i]);
  }
}

}  // namespace

const char *task_mode_name(TaskMode mode) {
  switch (mode) {
  case TaskMode::kPretrain: return "pretrain";
  case TaskMode::kProperty: return "property";
  case TaskMode::kConditional: return "conditional";
  case TaskMode::kReaction: return "reaction";
  }
  return "?";
}

TaskMode parse_task_mode(std::string_view name) {
  for (TaskMode m: { TaskMode::kPretrain, TaskMode::kProperty, TaskMode::kConditional,
                     TaskMode::kReaction }) {
    if (name == task_mode_name(m))
      return m;
  }
  throw std::invalid_argument("unknown task mode " + std::string(name));
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0))
    throw std::invalid_argument("learning_rate must be >= 0");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0))
    throw std::invalid_argument("warmup_ratio must lie in [0, 1)");
  if (!(min_lr_factor > 0.0 && min_lr_factor <= 1.0))
    throw std::invalid_argument("min_lr_factor must lie in (0, 1]");
  if (!(weight_decay >= 0.0))
    throw std::invalid_argument("weight_decay must be >= 0");
  if (batch_size < 1 || epochs < 1)
    throw std::invalid_argument("batch_size and epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_eps > 0.0))
    throw std::invalid_argument("invalid AdamW moments");
}

std::string TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["learning_rate"] = learning_rate;
  j["warmup_ratio"] = warmup_ratio;
  j["min_lr_factor"] = min_lr_factor;
  j["weight_decay"] = weight_decay;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["precision"] = precision == Precision::kF32 ? "f32" : "f64";
  j["task"] = task_mode_name(task);
  j["classification"] = classification;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["adam_eps"] = adam_eps;
  j["grad_clip"] = grad_clip;
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(std::string_view json) {
  TrainConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("train config is not JSON: ") + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("train config must be a JSON object");
  try {
    for (const auto &[key, value]: j.items()) {
      if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "warmup_ratio") c.warmup_ratio = value.get<double>();
      else if (key == "min_lr_factor") c.min_lr_factor = value.get<double>();
      else if (key == "weight_decay") c.weight_decay = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "precision") {
        const auto s = value.get<std::string>();
        if (s != "f32" && s != "f64")
          throw std::invalid_argument("precision must be f32 or f64");
        c.precision = s == "f32" ? Precision::kF32 : Precision::kF64;
      } else if (key == "task") c.task = parse_task_mode(value.get<std::string>());
      else if (key == "classification") c.classification = value.get<bool>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "adam_eps") c.adam_eps = value.get<double>();
      else if (key == "grad_clip") c.grad_clip = value.get<double>();
      else throw std::invalid_argument("unknown train config key " + key);
    }
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("bad train config value: ") + e.what());
  }
  c.validate();
  return c;
}

LossKind loss_kind(const TrainConfig &cfg) {
  switch (cfg.task) {
  case TaskMode::kPretrain: return LossKind::kPretrain;
  case TaskMode::kProperty:
    return cfg.classification ? LossKind::kClassification : LossKind::kRegression;
  case TaskMode::kConditional:
  case TaskMode::kReaction: return LossKind::kSeq2Seq;
  }
  return LossKind::kPretrain;
}

double lr_at(std::int64_t step, std::int64_t total, const TrainConfig &cfg) {
  if (total < 1 || step < 0 || step > total)
    throw std::out_of_range("step outside [0, total]");
  const auto warmup = static_cast<std::int64_t>(
      std::ceil(cfg.warmup_ratio * static_cast<double>(total)));
  if (step < warmup)
    return cfg.learning_rate * static_cast<double>(step) / static_cast<double>(warmup);
  const double progress = total == warmup ? 1.0
                                          : static_cast<double>(step - warmup)
                                                / static_cast<double>(total - warmup);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return cfg.learning_rate * (cfg.min_lr_factor + (1.0 - cfg.min_lr_factor) * cosine);
}

double grad_norm(const ModelParams &grads) {
  double sq = 0.0;
  for (const TensorView &t: tensor_views(grads)) {
    if (t.trainable)
      sq += t.matrix().squaredNorm();
  }
  return std::sqrt(sq);
}

AdamW::AdamW(const ModelParams &p, const TrainConfig &cfg): cfg_(cfg) {
  for (const TensorView &t: tensor_views(p)) {
    m_.push_back(t.trainable ? Matrix::Zero(t.rows, t.cols) : Matrix());
    v_.push_back(t.trainable ? Matrix::Zero(t.rows, t.cols) : Matrix());
  }
}

void AdamW::step(ModelParams &p, const ModelParams &grads, double lr) {
  auto params = tensor_views(p);
  const auto g = tensor_views(grads);
  if (params.size() != m_.size() || g.size() != m_.size())
    throw std::invalid_argument("optimizer state does not match the model");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable)
      continue;
    auto w = params[i].matrix();
    const auto gi = g[i].matrix();
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * gi;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * gi.cwiseAbs2();
    w -= lr * cfg_.weight_decay * w;
    w.array() -= lr * (m_[i].array() / c1)
                 / ((v_[i].array() / c2).sqrt() + cfg_.adam_eps);
  }
}

TrainResult train(ModelParams &p, const EpochBuilder &data, const TrainConfig &cfg,
                  const TrainCallbacks &callbacks) {
  cfg.validate();
  const LossKind kind = loss_kind(cfg);
  TrainResult result;

  std::vector<Example> epoch_data = data(0);
  result.dropped_overlong += drop_overlong(epoch_data, p.config.n_ctx);
  if (epoch_data.empty())
    throw std::invalid_argument("training set is empty");
  const auto batches_per_epoch = static_cast<std::int64_t>(
      (epoch_data.size() + cfg.batch_size - 1) / cfg.batch_size);
  const std::int64_t total = batches_per_epoch * cfg.epochs;

  if (cfg.precision == Precision::kF32)
    round_trainable(p);
  AdamW opt(p, cfg);
  ModelParams grads;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0) {
      epoch_data = data(epoch);
      result.dropped_overlong += drop_overlong(epoch_data, p.config.n_ctx);
    }
    std::vector<std::size_t> order(epoch_data.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<Example> batch;
      batch.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i)
        batch.push_back(epoch_data[order[i]]);

      RunOptions run;
      run.training = true;
      run.dropout_seed = derive_seed(cfg.seed ^ kDropoutStream, static_cast<std::uint64_t>(step));
      const double loss = compute_loss(p, batch, kind, &grads, run);
      const double norm = grad_norm(grads);
      if (!std::isfinite(loss) || !std::isfinite(norm))
        throw DivergenceError(step, "loss diverged at step " + std::to_string(step)
                                        + " (loss " + std::to_string(loss) + ", grad norm "
                                        + std::to_string(norm) + ")");
      if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) {
        for (TensorView &t: tensor_views(grads))
          t.matrix() *= cfg.grad_clip / norm;
      }
      const double lr = lr_at(std::min(step + 1, total), total, cfg);
      opt.step(p, grads, lr);
      if (cfg.precision == Precision::kF32)
        round_trainable(p);
      ++step;
      const TraceRow row{ step, lr, loss };
      result.trace.push_back(row);
      if (callbacks.on_step)
        callbacks.on_step(row);
    }
    if (callbacks.on_epoch_end)
      callbacks.on_epoch_end(epoch, p);
  }
  result.steps = step;
  return result;
}

void write_trace_csv(std::ostream &out, const std::vector<TraceRow> &trace) {
  out << "step,lr,loss\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const TraceRow &r: trace)
    out << r.step << ',' << r.lr << ',' << r.loss << '\n';
}

double perplexity(const ModelParams &p, std::span<const Example> examples, LossKind kind) {
  const TokenStats s = token_statistics(p, examples, kind);
  if (s.tokens == 0)
    throw std::invalid_argument("no scored tokens");
  return std::exp(s.mean_nll());
}

}  // namespace chemlm

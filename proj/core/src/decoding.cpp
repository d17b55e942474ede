//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "chemlm/decoding.h"
#include "chemlm/lora.h"
#include "chemlm/parallel.h"
#include "chemlm/random.h"
#include "nn_ops.h"

namespace chemlm {
namespace {

class TransformerState: public DecodeState {
public:
  explicit TransformerState(const ModelParams &p): p_(&p) {
    const int d = p.config.d_model;
    keys_.assign(p.config.n_layers, Matrix(p.config.n_ctx, d));
    values_.assign(p.config.n_layers, Matrix(p.config.n_ctx, d));
  }

  std::unique_ptr<DecodeState> clone() const override {
    return std::make_unique<TransformerState>(*this);
  }

  Vector next_log_probs() const override {
    if (pos_ == 0)
      throw std::logic_error("no token fed yet");
    return log_probs_;
  }

  void push(int id) override { push(id, std::nullopt); }

  void push(int id, std::optional<double> value) {
    const ModelParams &p = *p_;
    const ModelConfig &cfg = p.config;
    if (full())
      throw std::invalid_argument("context is full");
    if (id < 0 || id >= cfg.vocab_size)
      throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
    const int hd = cfg.head_dim();
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));

    Matrix x;
    if (value) {
      if (!p.value_weight)
        throw std::invalid_argument("continuous values need a value projection");
      x = (*p.value_weight * *value + *p.value_bias).transpose();
    } else {
      x = p.tok_emb.row(id);
    }
    for (int l = 0; l < cfg.n_layers; ++l) {
      const LayerParams &L = p.layers[l];
      const Matrix a = detail::rms_norm(x, L.attn_norm, cfg.norm_eps);
      Matrix q = a * L.wq.transpose();
      Matrix k = a * L.wk.transpose();
      detail::apply_rope(q, cfg.n_heads, cfg.rope_base, pos_);
      detail::apply_rope(k, cfg.n_heads, cfg.rope_base, pos_);
      keys_[l].row(pos_) = k;
      values_[l].row(pos_).noalias() = a * L.wv.transpose();
      Matrix attn(1, cfg.d_model);
      for (int h = 0; h < cfg.n_heads; ++h) {
        const auto kh = keys_[l].block(0, h * hd, pos_ + 1, hd);
        const auto vh = values_[l].block(0, h * hd, pos_ + 1, hd);
        Eigen::RowVectorXd s = att_scale * (q.middleCols(h * hd, hd) * kh.transpose());
        s = (s.array() - s.maxCoeff()).exp();
        s /= s.sum();
        attn.middleCols(h * hd, hd) = s * vh;
      }
      x += attn * L.wo.transpose();
      const Matrix m = detail::rms_norm(x, L.mlp_norm, cfg.norm_eps);
      const Matrix gate = m * L.w_gate.transpose();
      const Matrix up = m * L.w_up.transpose();
      const Matrix hidden = gate.unaryExpr([](double g) { return detail::silu(g); })
                                .cwiseProduct(up);
      x += hidden * L.w_down.transpose();
    }
    const Matrix z = detail::rms_norm(x, p.final_norm, cfg.norm_eps);
    const Eigen::RowVectorXd logits = z * p.lm_head.transpose();
    log_probs_ = (logits.array() - detail::log_sum_exp(logits)).transpose();
    ++pos_;
  }

  int length() const override { return pos_; }
  bool full() const override { return pos_ >= p_->config.n_ctx; }

private:
  const ModelParams *p_;
  std::vector<Matrix> keys_;
  std::vector<Matrix> values_;
  Vector log_probs_;
  int pos_ = 0;
};

int draw(const Vector &log_probs, double temperature, std::mt19937_64 &rng) {
  Eigen::Index best = 0;
  log_probs.maxCoeff(&best);
  if (temperature <= 1e-6)
    return static_cast<int>(best);
  const Eigen::ArrayXd scaled = log_probs.array() / temperature;
  const Eigen::ArrayXd w = (scaled - scaled.maxCoeff()).exp();
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * w.sum();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    cumulative += w(i);
    if (u < cumulative)
      return static_cast<int>(i);
  }
  return static_cast<int>(best);
}

int draw_start(std::span<const double> dist, std::mt19937_64 &rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0)
      continue;
    cumulative += dist[i];
    last = static_cast<int>(i);
    if (u < cumulative)
      return last;
  }
  return last;
}

void continue_sampling(DecodeState &state, std::vector<int> &out, int eos,
                       const SampleOptions &options, std::mt19937_64 &rng) {
  while (static_cast<int>(out.size()) < options.max_len && !state.full()) {
    const int next = draw(state.next_log_probs(), options.temperature, rng);
    if (next == eos)
      return;
    out.push_back(next);
    state.push(next);
  }
}

}  // namespace

Decoder::Decoder(const ModelParams &p): p_(&p) {
  p.config.validate();
  if (p.lora) {
    merged_ = p;
    merge_lora(*merged_);
    p_ = &*merged_;
  }
}

std::unique_ptr<DecodeState> Decoder::start() const {
  return std::make_unique<TransformerState>(*p_);
}

std::unique_ptr<DecodeState> Decoder::start(std::span<const int> prompt,
                                            std::span<const ContinuousSlot> slots) const {
  if (static_cast<int>(prompt.size()) > p_->config.n_ctx)
    throw std::invalid_argument("prompt exceeds the context");
  auto state = std::make_unique<TransformerState>(*p_);
  for (std::size_t t = 0; t < prompt.size(); ++t) {
    std::optional<double> value;
    for (const ContinuousSlot &s: slots) {
      if (s.position == static_cast<int>(t))
        value = s.value;
    }
    state->push(prompt[t], value);
  }
  return state;
}

std::vector<int> sample_ids(const Decoder &decoder, std::span<const double> start_distribution,
                            int eos, const SampleOptions &options) {
  const int V = decoder.params().config.vocab_size;
  if (static_cast<int>(start_distribution.size()) != V)
    throw std::invalid_argument("start distribution size differs from the vocabulary");
  double total = 0.0;
  for (double x: start_distribution) {
    if (!(x >= 0.0))
      throw std::invalid_argument("start distribution has a negative entry");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("start distribution does not sum to 1");

  std::mt19937_64 rng(options.seed);
  std::vector<int> out;
  if (options.max_len < 1)
    return out;
  const int first = draw_start(start_distribution, rng);
  if (first == eos)
    return out;
  out.push_back(first);
  auto state = decoder.start(std::span<const int>(out));
  continue_sampling(*state, out, eos, options, rng);
  return out;
}

std::vector<int> sample_continuation(const Decoder &decoder, const Prompt &prompt, int eos,
                                     const SampleOptions &options) {
  if (prompt.tokens.ids.empty())
    throw std::invalid_argument("empty prompt");
  std::mt19937_64 rng(options.seed);
  auto state = decoder.start(prompt.tokens.ids, prompt.slots);
  std::vector<int> out;
  continue_sampling(*state, out, eos, options, rng);
  return out;
}

std::vector<std::string> generate(const ModelParams &p, const Vocabulary &v, int n,
                                  const SampleOptions &options) {
  if (p.start_distribution.empty())
    throw std::invalid_argument("model has no start distribution");
  const Decoder decoder(p);
  std::vector<std::string> out(std::max(n, 0));
  parallel_for(out.size(), [&](std::size_t k) {
    SampleOptions o = options;
    o.seed = derive_seed(options.seed, k);
    out[k] = detokenize(sample_ids(decoder, p.start_distribution, v.eos_id(), o), v);
  });
  return out;
}

std::vector<std::string> generate_conditional(const ModelParams &p, const Vocabulary &v,
                                              const Prompt &prompt, int n,
                                              const SampleOptions &options) {
  const Decoder decoder(p);
  std::vector<std::string> out(std::max(n, 0));
  parallel_for(out.size(), [&](std::size_t k) {
    SampleOptions o = options;
    o.seed = derive_seed(options.seed, k);
    out[k] = detokenize(sample_continuation(decoder, prompt, v.eos_id(), o), v);
  });
  return out;
}

std::vector<Hypothesis> beam_search(const DecodeState &start, int beam, int m, int max_len,
                                    int eos) {
  if (beam < 1 || m < 1 || max_len < 1)
    throw std::invalid_argument("beam, m and max_len must be >= 1");

  struct Live {
    std::unique_ptr<DecodeState> state;
    std::vector<int> ids;
    double logprob = 0.0;
  };
  struct Expansion {
    double logprob;
    int parent;
    int token;
  };

  std::vector<Live> live;
  live.push_back({ start.clone(), {}, 0.0 });
  std::vector<Hypothesis> finished;
  auto by_score = [](const Hypothesis &a, const Hypothesis &b) {
    if (a.logprob != b.logprob)
      return a.logprob > b.logprob;
    return a.ids < b.ids;
  };

  while (!live.empty()) {
    std::vector<Expansion> expansions;
    std::vector<Vector> log_probs;
    for (std::size_t h = 0; h < live.size(); ++h) {
      log_probs.push_back(live[h].state->next_log_probs());
      const Vector &lp = log_probs.back();
      for (Eigen::Index v = 0; v < lp.size(); ++v)
        expansions.push_back({ live[h].logprob + lp(v), static_cast<int>(h), static_cast<int>(v) });
    }
    const std::size_t keep = std::min<std::size_t>(beam, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + keep, expansions.end(),
                      [](const Expansion &a, const Expansion &b) {
                        if (a.logprob != b.logprob)
                          return a.logprob > b.logprob;
                        if (a.parent != b.parent)
                          return a.parent < b.parent;
                        return a.token < b.token;
                      });

    std::vector<Live> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Expansion &e = expansions[i];
      const Live &parent = live[e.parent];
      if (e.token == eos) {
        finished.push_back({ parent.ids, e.logprob, true });
        continue;
      }
      Live child{ parent.state->clone(), parent.ids, e.logprob };
      child.ids.push_back(e.token);
      if (static_cast<int>(child.ids.size()) >= max_len) {
        finished.push_back({ std::move(child.ids), e.logprob, false });
        continue;
      }
      child.state->push(e.token);
      if (child.state->full()) {
        finished.push_back({ std::move(child.ids), e.logprob, false });
        continue;
      }
      next.push_back(std::move(child));
    }
    live = std::move(next);

    // Scores only decrease, so once the m-th finished hypothesis beats every
    // live one the result is fixed.
    if (static_cast<int>(finished.size()) >= m && !live.empty()) {
      std::sort(finished.begin(), finished.end(), by_score);
      double best_live = live.front().logprob;
      for (const Live &l: live)
        best_live = std::max(best_live, l.logprob);
      if (best_live < finished[m - 1].logprob)
        break;
    }
  }
  std::sort(finished.begin(), finished.end(), by_score);
  if (static_cast<int>(finished.size()) > m)
    finished.resize(m);
  return finished;
}

std::vector<Hypothesis> beam_search(const Decoder &decoder, std::span<const int> prompt,
                                    int beam, int m, int max_len, int eos) {
  if (prompt.empty())
    throw std::invalid_argument("beam search needs a non-empty prompt");
  const auto state = decoder.start(prompt);
  return beam_search(*state, beam, m, max_len, eos);
}

}  // namespace chemlm

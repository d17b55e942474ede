//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_DECODING_H_
#define CHEMLM_DECODING_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chemlm/augment.h"
#include "chemlm/model.h"
#include "chemlm/tokenizer.h"

namespace chemlm {

// Autoregressive state: a prefix plus the distribution of its next token.
class DecodeState {
public:
  virtual ~DecodeState() = default;
  virtual std::unique_ptr<DecodeState> clone() const = 0;
  // log-softmax over the vocabulary for the next token; requires length() > 0
  // unless the implementation defines a start distribution.
  virtual Vector next_log_probs() const = 0;
  virtual void push(int id) = 0;
  virtual int length() const = 0;
  // No further token fits.
  virtual bool full() const = 0;
};

// Incremental evaluation with per-layer key/value caches. Adapters are
// merged into a private copy of the weights at construction. The decoder
// must outlive its states.
class Decoder {
public:
  explicit Decoder(const ModelParams &p);
  Decoder(const Decoder &) = delete;
  Decoder &operator=(const Decoder &) = delete;

  const ModelParams &params() const { return *p_; }
  std::unique_ptr<DecodeState> start() const;
  // Feeds a prompt; slot positions receive the projected value instead of
  // the token embedding.
  std::unique_ptr<DecodeState> start(std::span<const int> prompt,
                                     std::span<const ContinuousSlot> slots = {}) const;

private:
  std::optional<ModelParams> merged_;
  const ModelParams *p_;
};

struct SampleOptions {
  double temperature = 1.0;  // <= 1e-6 means argmax
  int max_len = 128;         // generated tokens, eos excluded
  std::uint64_t seed = 0;
};

// Draws the first token from `start_distribution` (must sum to 1 within
// 1e-6), then continues until eos, max_len or the context is full. Returns
// the ids without eos.
std::vector<int> sample_ids(const Decoder &decoder, std::span<const double> start_distribution,
                            int eos, const SampleOptions &options);

// Continues after a conditioning prompt; returns the generated ids without eos.
std::vector<int> sample_continuation(const Decoder &decoder, const Prompt &prompt, int eos,
                                     const SampleOptions &options);

// n unconditional samples detokenized, sample k seeded with
// derive_seed(options.seed, k). Uses the model's start distribution.
std::vector<std::string> generate(const ModelParams &p, const Vocabulary &v, int n,
                                  const SampleOptions &options);

// n conditional samples for one prompt, seeded like generate().
std::vector<std::string> generate_conditional(const ModelParams &p, const Vocabulary &v,
                                              const Prompt &prompt, int n,
                                              const SampleOptions &options);

struct Hypothesis {
  std::vector<int> ids;  // eos excluded
  double logprob = 0.0;  // includes the eos step when it ended on eos
  bool ended_on_eos = false;
};

// Length-complete beam search: each step keeps the `beam` best expansions
// of all live hypotheses; a hypothesis finishes on eos or after max_len
// tokens. Returns the best m finished hypotheses, logprobs non-increasing
// (ties by id sequence). Pass eos = -1 for no end token. Throws
// std::invalid_argument for beam, m or max_len < 1.
std::vector<Hypothesis> beam_search(const DecodeState &start, int beam, int m, int max_len,
                                    int eos);
std::vector<Hypothesis> beam_search(const Decoder &decoder, std::span<const int> prompt,
                                    int beam, int m, int max_len, int eos);

}  // namespace chemlm

#endif  // CHEMLM_DECODING_H_

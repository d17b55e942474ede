//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <benchmark/benchmark.h>

#include <vector>

#include "chemlm/decoding.h"
#include "chemlm/transformer.h"

namespace {

chemlm::ModelParams bench_model() {
  chemlm::ModelConfig cfg;  // defaults: 2 layers, d_model 64, vocab 266
  return chemlm::init_model(cfg, 1);
}

std::vector<chemlm::Example> batch(int seq_len) {
  std::vector<chemlm::Example> out(16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int t = 0; t < seq_len; ++t)
      out[i].ids.push_back(static_cast<int>((7 * i + 13 * t) % 265));
  }
  return out;
}

void BM_Forward(benchmark::State &state) {
  const chemlm::ModelParams p = bench_model();
  const std::vector<chemlm::Example> b = batch(static_cast<int>(state.range(0)));
  for (auto _: state)
    benchmark::DoNotOptimize(chemlm::forward(p, b[0].ids));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Arg(128);

void BM_LossAndGradient(benchmark::State &state) {
  const chemlm::ModelParams p = bench_model();
  const std::vector<chemlm::Example> b = batch(static_cast<int>(state.range(0)));
  chemlm::ModelParams grads;
  for (auto _: state)
    benchmark::DoNotOptimize(chemlm::compute_loss(p, b, chemlm::LossKind::kPretrain, &grads));
  state.SetItemsProcessed(state.iterations() * b.size());
}
BENCHMARK(BM_LossAndGradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_IncrementalDecode(benchmark::State &state) {
  const chemlm::ModelParams p = bench_model();
  const chemlm::Decoder decoder(p);
  const std::vector<int> prompt{ 1 };
  for (auto _: state) {
    auto s = decoder.start(prompt);
    for (int t = 0; t < state.range(0); ++t) {
      benchmark::DoNotOptimize(s->next_log_probs());
      s->push(t % 265);
    }
  }
}
BENCHMARK(BM_IncrementalDecode)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BeamSearch(benchmark::State &state) {
  const chemlm::ModelParams p = bench_model();
  const chemlm::Decoder decoder(p);
  const std::vector<int> prompt{ 1, 2, 3 };
  const int beam = static_cast<int>(state.range(0));
  for (auto _: state)
    benchmark::DoNotOptimize(chemlm::beam_search(decoder, prompt, beam, beam, 32, 265));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

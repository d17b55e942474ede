//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "chemlm/canonical.h"
#include "chemlm/fingerprint.h"
#include "chemlm/generation_metrics.h"
#include "chemlm/smi_file.h"
#include "chemlm/smiles.h"
#include "chemlm/tokenizer.h"

namespace {

const std::vector<std::string> &corpus() {
  static const std::vector<std::string> smiles = [] {
    std::vector<std::string> out;
    for (const chemlm::SmiRecord &r: chemlm::read_smi_file(CHEMLM_BENCH_DATA "/corpus500.smi"))
      out.push_back(r.smiles);
    return out;
  }();
  return smiles;
}

void BM_Parse(benchmark::State &state) {
  for (auto _: state) {
    for (const std::string &s: corpus())
      benchmark::DoNotOptimize(chemlm::parse_smiles(s));
  }
  state.SetItemsProcessed(state.iterations() * corpus().size());
}
BENCHMARK(BM_Parse)->Unit(benchmark::kMillisecond);

void BM_Canonicalize(benchmark::State &state) {
  std::vector<chemlm::MolGraph> graphs;
  for (const std::string &s: corpus())
    graphs.push_back(chemlm::parse_smiles(s));
  for (auto _: state) {
    for (const chemlm::MolGraph &g: graphs)
      benchmark::DoNotOptimize(chemlm::canonicalize(g));
  }
  state.SetItemsProcessed(state.iterations() * graphs.size());
}
BENCHMARK(BM_Canonicalize)->Unit(benchmark::kMillisecond);

void BM_Tokenize(benchmark::State &state) {
  const chemlm::Vocabulary v = chemlm::build_base_vocab();
  for (auto _: state) {
    for (const std::string &s: corpus())
      benchmark::DoNotOptimize(chemlm::tokenize(s, v));
  }
  state.SetItemsProcessed(state.iterations() * corpus().size());
}
BENCHMARK(BM_Tokenize)->Unit(benchmark::kMillisecond);

// Pairwise Tanimoto over the corpus, the inner loop of IntDiv.
void BM_InternalDiversity(benchmark::State &state) {
  std::vector<chemlm::Fingerprint> fps;
  for (const std::string &s: corpus())
    fps.push_back(chemlm::morgan_fingerprint(chemlm::parse_smiles(s)));
  fps.resize(state.range(0));
  for (auto _: state)
    benchmark::DoNotOptimize(chemlm::internal_diversity(fps, 1));
}
BENCHMARK(BM_InternalDiversity)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

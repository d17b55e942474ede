//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <random>

#include "chemlm/datasets.h"
#include "chemlm/random.h"

namespace chemlm {
namespace {

std::string random_spelling(const std::string &smiles, std::uint64_t seed) {
  return enumerate_smiles(smiles, 1, seed).front();
}

std::uint64_t example_seed(std::uint64_t seed, int epoch, std::size_t index) {
  return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(epoch)), index);
}

}  // namespace

Example language_example(std::string_view smiles, const Vocabulary &v) {
  Example ex;
  ex.ids = tokenize(smiles, v).ids;
  return ex;
}

Example property_example(std::string_view smiles,
                         std::vector<std::optional<double>> targets, const Vocabulary &v) {
  Example ex = language_example(smiles, v);
  ex.targets = std::move(targets);
  return ex;
}

Example conditional_example(const Prompt &prompt, std::string_view smiles, const Vocabulary &v) {
  Example ex;
  ex.ids = prompt.tokens.ids;
  const TokenSeq body = tokenize(smiles, v);
  ex.ids.insert(ex.ids.end(), body.ids.begin(), body.ids.end());
  ex.boundary = static_cast<int>(prompt.tokens.ids.size());
  ex.slots = prompt.slots;
  return ex;
}

std::vector<int> reaction_prompt(std::string_view input, const Vocabulary &v) {
  std::vector<int> ids = tokenize(input, v, false).ids;
  ids.push_back(v.id_of(kSepToken));
  return ids;
}

Example reaction_example(std::string_view input, std::string_view output, const Vocabulary &v) {
  Example ex;
  ex.ids = reaction_prompt(input, v);
  ex.boundary = static_cast<int>(ex.ids.size());
  const TokenSeq body = tokenize(output, v);
  ex.ids.insert(ex.ids.end(), body.ids.begin(), body.ids.end());
  return ex;
}

std::vector<double> start_distribution(std::span<const Example> examples, int vocab_size) {
  std::vector<double> dist(vocab_size, 0.0);
  double n = 0.0;
  for (const Example &ex: examples) {
    const auto first = static_cast<std::size_t>(ex.boundary);
    if (first < ex.ids.size()) {
      dist.at(ex.ids[first]) += 1.0;
      n += 1.0;
    }
  }
  if (n == 0.0)
    throw std::invalid_argument("no examples for the start distribution");
  for (double &x: dist)
    x /= n;
  return dist;
}

EpochBuilder fixed_builder(std::vector<Example> examples) {
  return [examples = std::move(examples)](int) { return examples; };
}

EpochBuilder property_builder(std::vector<PropertyRecord> records, const Vocabulary &v,
                              std::uint64_t seed, bool enumerate) {
  return [records = std::move(records), v, seed, enumerate](int epoch) {
    std::vector<Example> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const PropertyRecord &r = records[i];
      const std::string smiles = enumerate ? random_spelling(r.smiles, example_seed(seed, epoch, i))
                                           : r.smiles;
      out.push_back(property_example(smiles, r.targets, v));
    }
    return out;
  };
}

EpochBuilder conditional_builder(std::vector<ConditionalRecord> records, const Vocabulary &v,
                                 const ConditionStats &stats, std::uint64_t seed,
                                 bool enumerate) {
  return [records = std::move(records), v, stats, seed, enumerate](int epoch) {
    std::vector<Example> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const ConditionalRecord &r = records[i];
      std::mt19937_64 rng(example_seed(seed, epoch, i));
      const ConditionSpec subset = sample_condition_subset(r.conditions, rng);
      const std::string smiles = enumerate ? random_spelling(r.smiles, rng()) : r.smiles;
      out.push_back(conditional_example(build_prompt(subset, v, stats), smiles, v));
    }
    return out;
  };
}

int drop_overlong(std::vector<Example> &examples, int n_ctx) {
  const auto before = examples.size();
  std::erase_if(examples, [n_ctx](const Example &ex) {
    return static_cast<int>(ex.ids.size()) > n_ctx;
  });
  return static_cast<int>(before - examples.size());
}

}  // namespace chemlm

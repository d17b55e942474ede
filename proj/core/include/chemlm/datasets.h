//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_DATASETS_H_
#define CHEMLM_DATASETS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chemlm/augment.h"
#include "chemlm/tokenizer.h"
#include "chemlm/transformer.h"

namespace chemlm {

// Builds the training examples of one epoch.
using EpochBuilder = std::function<std::vector<Example>(int epoch)>;

struct PropertyRecord {
  std::string smiles;
  std::vector<std::optional<double>> targets;
};

struct ConditionalRecord {
  std::string smiles;
  ConditionSpec conditions;  // every known condition of the molecule
};

// Tokenized SMILES plus eos.
Example language_example(std::string_view smiles, const Vocabulary &v);
Example property_example(std::string_view smiles,
                         std::vector<std::optional<double>> targets, const Vocabulary &v);
// prompt, molecule, eos; targets start after the prompt.
Example conditional_example(const Prompt &prompt, std::string_view smiles, const Vocabulary &v);
// input, separator, output, eos; targets start after the separator.
Example reaction_example(std::string_view input, std::string_view output, const Vocabulary &v);
// The prompt part of reaction_example().
std::vector<int> reaction_prompt(std::string_view input, const Vocabulary &v);

// First-token frequencies over `examples` (token ids at position boundary
// or 0), normalized to sum to 1.
std::vector<double> start_distribution(std::span<const Example> examples, int vocab_size);

// Fixed examples every epoch.
EpochBuilder fixed_builder(std::vector<Example> examples);

// Every epoch replaces each SMILES with a random spelling (enumeration with
// probability 1), seeded by (seed, epoch, index).
EpochBuilder property_builder(std::vector<PropertyRecord> records, const Vocabulary &v,
                              std::uint64_t seed, bool enumerate = true);

// Random spelling plus a random condition subset per molecule and epoch.
EpochBuilder conditional_builder(std::vector<ConditionalRecord> records, const Vocabulary &v,
                                 const ConditionStats &stats, std::uint64_t seed,
                                 bool enumerate = true);

// Drops examples longer than n_ctx; returns how many were dropped.
int drop_overlong(std::vector<Example> &examples, int n_ctx);

}  // namespace chemlm

#endif  // CHEMLM_DATASETS_H_

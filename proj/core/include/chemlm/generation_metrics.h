//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_GENERATION_METRICS_H_
#define CHEMLM_GENERATION_METRICS_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "chemlm/descriptors.h"
#include "chemlm/fingerprint.h"
#include "chemlm/mol_graph.h"

namespace chemlm {

struct KlBinning {
  int bins = 100;          // continuous descriptors
  double epsilon = 1e-10;  // smoothing mass per bin
};

// exp(-KL(gen || ref)). Continuous values are histogrammed over the combined
// range; integer values are categorical over the combined support. Throws
// std::invalid_argument for empty inputs.
double klsim(std::span<const double> gen, std::span<const double> ref,
             DescriptorKind kind, const KlBinning &binning = {});

// 1 - (mean over all ordered pairs, self-pairs included, of T^p)^(1/p).
double internal_diversity(std::span<const Fingerprint> fps, int p);

// Mean |c_i - x_i|. Throws std::invalid_argument on length mismatch or
// empty input.
double mad(std::span<const double> conditioned, std::span<const double> computed);

inline constexpr double kScaffoldSimilarityThreshold = 0.8;

// Valid molecule whose Murcko scaffold fingerprint has Tanimoto >= 0.8 to
// the target scaffold.
bool scaffold_valid(const MolGraph &g, const MolGraph &target_scaffold);

struct ReferenceSet {
  std::unordered_set<std::string> canonical;
  std::vector<DescriptorVector> descriptors;

  // Invalid entries are skipped; their count is returned in `skipped`.
  static ReferenceSet from_smiles(std::span<const std::string> smiles,
                                  int *skipped = nullptr);
};

struct GenerationReport {
  int n_generated = 0;
  int n_valid = 0;
  int n_unique = 0;
  int n_novel = 0;
  double validity = 0.0;
  double uniqueness = 0.0;  // unique / valid
  double novelty = 0.0;     // novel / unique
  double intdiv1 = 0.0;
  double intdiv2 = 0.0;
  double klsim = 0.0;
  std::map<std::string, double> klsim_per_descriptor;
  KlBinning binning;
  std::map<std::string, double> mad;
  std::optional<int> scaffold_matches;
  std::optional<int> scaffold_exact_matches;

  std::string to_json() const;
};

// Throws std::invalid_argument for an empty generated list. `descriptor_set`
// selects descriptor_table() indices for KLSim (all when empty).
GenerationReport generation_metrics(std::span<const std::string> generated,
                                    const ReferenceSet &reference,
                                    std::span<const int> descriptor_set = {},
                                    const KlBinning &binning = {});

}  // namespace chemlm

#endif  // CHEMLM_GENERATION_METRICS_H_

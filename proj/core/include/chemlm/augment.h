//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_AUGMENT_H_
#define CHEMLM_AUGMENT_H_

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chemlm/mol_graph.h"
#include "chemlm/tokenizer.h"

namespace chemlm {

// `n` random spellings of `smiles`: uniform random root, shuffled neighbour
// order. Throws ParseError.
std::vector<std::string> enumerate_smiles(std::string_view smiles, int n,
                                          std::uint64_t seed);

enum class ReactionDirection : std::uint8_t {
  kForward,  // reactants -> products
  kRetro,    // products -> reactants
};

struct ReactionRecord {
  MolGraph reactants;
  MolGraph products;
  ReactionDirection direction = ReactionDirection::kRetro;
};

class UnmappedRootError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// "reactants>>products"; a middle agents field (r>a>p) is merged into the
// reactants. Throws ParseError or std::invalid_argument.
ReactionRecord parse_reaction(std::string_view line,
                              ReactionDirection direction = ReactionDirection::kRetro);

// Product atoms whose map number also occurs among the reactants.
std::vector<int> mapped_product_atoms(const ReactionRecord &r);

struct AlignedPair {
  std::string input;
  std::string output;
  int root_map = 0;
};

// Serializes product and reactants from the same mapped atom. Maps are
// stripped and both sides standardized; traversal is deterministic. Throws
// UnmappedRootError if the product atom has no map or no reactant partner.
AlignedPair root_align(const ReactionRecord &r, int product_root);

// `folds` root-aligned pairs per reaction, roots drawn without replacement
// while distinct candidates remain. Throws UnmappedRootError for a reaction
// without any usable root and std::invalid_argument for folds < 1.
std::vector<AlignedPair> augment_reactions(const std::vector<ReactionRecord> &dataset,
                                           int folds, std::uint64_t seed);

struct ClassValue {
  int index = 0;
  friend bool operator==(const ClassValue &, const ClassValue &) = default;
};

struct ScaffoldValue {
  std::string smiles;
  friend bool operator==(const ScaffoldValue &, const ScaffoldValue &) = default;
};

struct Condition {
  std::string name;
  std::variant<double, ClassValue, ScaffoldValue> value;
  friend bool operator==(const Condition &, const Condition &) = default;
};

using ConditionSpec = std::vector<Condition>;

// Subset sizes 1..4 drawn with probabilities (0.1, 0.2, 0.3, 0.4),
// renormalized over 1..k for k < 4 properties; members chosen uniformly
// and returned in random order. Throws std::invalid_argument for an empty
// spec or more than four properties.
ConditionSpec sample_condition_subset(const ConditionSpec &spec,
                                      std::mt19937_64 &rng);
ConditionSpec sample_condition_subset(const ConditionSpec &spec,
                                      std::uint64_t seed);

// Per-property z-score statistics from the training split.
struct ConditionStats {
  std::map<std::string, std::pair<double, double>> mean_std;

  // Identity for properties without statistics.
  double normalize(const std::string &name, double value) const;
  static ConditionStats fit(const std::map<std::string, std::vector<double>> &values);
};

struct ContinuousSlot {
  int position = 0;
  double value = 0.0;  // normalized
};

struct Prompt {
  TokenSeq tokens;  // boundary = prompt length
  std::vector<ContinuousSlot> slots;
};

// Per condition: name token, then a value placeholder (continuous), a class
// token, or the tokenized scaffold; closed by the separator. Throws
// std::invalid_argument for unregistered tokens.
Prompt build_prompt(const ConditionSpec &spec, const Vocabulary &v,
                    const ConditionStats &stats = {});

}  // namespace chemlm

#endif  // CHEMLM_AUGMENT_H_

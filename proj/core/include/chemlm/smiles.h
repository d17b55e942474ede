//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_SMILES_H_
#define CHEMLM_SMILES_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chemlm/mol_graph.h"

namespace chemlm {

enum class ParseErrorKind {
  kUnexpectedChar,
  kUnclosedRingBond,
  kUnclosedBranch,
  kBadBracketAtom,
  kEmptyInput,
};

std::string_view to_string(ParseErrorKind kind);

class ParseError: public std::runtime_error {
public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string &msg);

  ParseErrorKind kind() const { return kind_; }
  // Byte offset into the input; 0 for kEmptyInput.
  std::size_t offset() const { return offset_; }

private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

// Parses the SMILES subset: organic atoms B C N O P S F Cl Br I, aromatic
// b c n o p s, bracket atoms with isotope/chirality/H/charge/map (aromatic
// se and as allowed inside brackets), bonds - = # : / \ (slashes read as
// single), ring closures 0-9 and %nn, branches and '.'.
//
// Unwritten bonds between two aromatic atoms are aromatic; aromatic bonds
// that end up outside every ring are demoted to single.
MolGraph parse_smiles(std::string_view text);

// Non-throwing variant.
std::optional<MolGraph> try_parse_smiles(std::string_view text);

enum class TraversalOrder : std::uint8_t {
  kDeterministic,  // neighbours by canonical rank
  kRandom,         // neighbours shuffled with the seed
};

// Depth-first serialization rooted at `root`. Bracket atoms are written in
// brackets, so parse(serialize(g)) reproduces every atom attribute. Other
// components follow after '.', ordered by canonical rank (deterministic) or
// shuffled (random). Throws std::out_of_range for a bad root.
std::string serialize(const MolGraph &g, int root,
                      TraversalOrder order = TraversalOrder::kDeterministic,
                      std::uint64_t seed = 0);

// Serialization driven by explicit per-atom ranks (lower = earlier). Used by
// canonicalization; `ranks` must be a permutation-free total order only for
// deterministic output, ties are broken by atom index.
std::string serialize_ranked(const MolGraph &g, int root,
                             const std::vector<int> &ranks,
                             bool write_chirality = true,
                             std::vector<int> *atom_order = nullptr);

}  // namespace chemlm

#endif  // CHEMLM_SMILES_H_

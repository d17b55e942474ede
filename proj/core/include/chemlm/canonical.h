//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_CANONICAL_H_
#define CHEMLM_CANONICAL_H_

#include <string>
#include <string_view>
#include <vector>

#include "chemlm/mol_graph.h"

namespace chemlm {

// Equitable partition from iterative neighbourhood refinement, before any
// tie-breaking. rank[i] = number of atoms in strictly lower classes, so
// symmetric atoms share a rank.
std::vector<int> refine_ranks(const MolGraph &g);

// Total order 0..n-1. Ties left by refinement are broken by an
// individualize-and-refine search that keeps the lexicographically smallest
// serialization; relabeling the input atoms does not change the string
// obtained by serializing with these ranks.
std::vector<int> canonical_ranks(const MolGraph &g);

// standardize -> canonical_ranks -> serialize rooted at rank 0.
std::string canonicalize(const MolGraph &g);
// Throws ParseError.
std::string canonicalize(std::string_view smiles);

}  // namespace chemlm

#endif  // CHEMLM_CANONICAL_H_

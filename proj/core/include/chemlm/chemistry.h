//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_CHEMISTRY_H_
#define CHEMLM_CHEMISTRY_H_

#include <stdexcept>
#include <string>
#include <string_view>

#include "chemlm/mol_graph.h"

namespace chemlm {

class KekulizeError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Replaces aromatic bonds by an alternating single/double assignment and
// clears aromatic flags. Hydrogen counts are preserved (atoms whose implicit
// count would change become bracket atoms). Throws KekulizeError when the
// aromatic subsystem has no perfect matching over the atoms that need a
// double bond, or when a connected aromatic system contains no ring with a
// 4n+2 pi-electron count.
MolGraph kekulize(const MolGraph &g);

// Marks rings (and fused ring pairs) with a 4n+2 pi-electron count as
// aromatic. Aromatic input is kekulized first. Hydrogen counts are
// preserved.
MolGraph perceive_aromaticity(const MolGraph &kekule);

// kekulize -> perceive_aromaticity -> drop redundant brackets. Both benzene
// spellings standardize to the same graph (up to atom order).
MolGraph standardize(const MolGraph &g);

struct ValidityVerdict {
  bool valid = false;
  std::string reason;

  explicit operator bool() const { return valid; }
};

// Valid iff kekulization succeeds and every atom with a checked element has
// a bond-order sum plus hydrogen count inside its allowed valence set.
ValidityVerdict check_validity(const MolGraph &g);

// Parse + check_validity; parse errors become invalid verdicts.
ValidityVerdict check_smiles(std::string_view smiles);

}  // namespace chemlm

#endif  // CHEMLM_CHEMISTRY_H_

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_SCAFFOLD_H_
#define CHEMLM_SCAFFOLD_H_

#include "chemlm/mol_graph.h"

namespace chemlm {

// Bemis-Murcko framework: ring systems plus the linkers between them.
// Non-ring atoms of degree <= 1 are pruned to a fixpoint; terminal atoms
// double-bonded to a kept atom are then restored. Kept atoms that lose
// substituents take hydrogens in their place. Acyclic input gives an empty
// graph.
MolGraph murcko_scaffold(const MolGraph &g);

}  // namespace chemlm

#endif  // CHEMLM_SCAFFOLD_H_

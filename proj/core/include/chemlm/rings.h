//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_RINGS_H_
#define CHEMLM_RINGS_H_

#include <vector>

#include "chemlm/mol_graph.h"

namespace chemlm {

struct RingInfo {
  // Each ring lists its atoms in cyclic order.
  std::vector<std::vector<int>> rings;
  // Bond indices of each ring, parallel to `rings`.
  std::vector<std::vector<int>> ring_bonds;
  // True when every bond of the ring is aromatic.
  std::vector<bool> aromatic;
  // Number of SSSR rings containing each atom / bond.
  std::vector<int> atom_membership;
  std::vector<int> bond_membership;
  // Length of the smallest cycle through each atom (0 if acyclic). Unlike
  // SSSR membership this is independent of atom order.
  std::vector<int> smallest_ring_size;

  int num_rings() const { return static_cast<int>(rings.size()); }
  bool atom_in_ring(int atom) const { return atom_membership[atom] > 0; }
  bool bond_in_ring(int bond) const { return bond_membership[bond] > 0; }
};

// Minimum cycle basis (Horton candidates + GF(2) elimination). The number of
// rings always equals |bonds| - |atoms| + |components|. Deterministic for a
// fixed atom order.
RingInfo perceive_rings(const MolGraph &g);

// Every simple cycle of at most `max_size` atoms, as atoms in cyclic order
// with the parallel bond lists. Depends only on the graph, not on atom order
// (up to the order of the returned list).
struct CycleSet {
  std::vector<std::vector<int>> atoms;
  std::vector<std::vector<int>> bonds;
};
CycleSet simple_cycles(const MolGraph &g, int max_size);

// Bonds that lie on at least one cycle (non-bridges), without computing SSSR.
std::vector<bool> cyclic_bonds(const MolGraph &g);

}  // namespace chemlm

#endif  // CHEMLM_RINGS_H_

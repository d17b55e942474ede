//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <memory>
#include <span>
#include <vector>

#include "chemlm/rings.h"
#include "chemlm/scaffold.h"

namespace chemlm {

MolGraph murcko_scaffold(const MolGraph &g) {
  const int n = g.num_atoms();
  const RingInfo &rings = g.rings();
  std::vector<bool> keep(n, true);
  std::vector<int> degree(n);
  std::vector<int> queue;
  for (int i = 0; i < n; ++i) {
    degree[i] = g.degree(i);
    if (degree[i] <= 1 && !rings.atom_in_ring(i))
      queue.push_back(i);
  }
  while (!queue.empty()) {
    const int atom = queue.back();
    queue.pop_back();
    if (!keep[atom])
      continue;
    keep[atom] = false;
    for (const Neighbor &nb: g.neighbors(atom)) {
      if (!keep[nb.atom])
        continue;
      if (--degree[nb.atom] <= 1 && !rings.atom_in_ring(nb.atom))
        queue.push_back(nb.atom);
    }
  }

  bool any = false;
  for (bool k: keep)
    any = any || k;
  if (!any)
    return MolGraph();

  std::vector<bool> core = keep;
  for (int i = 0; i < n; ++i) {
    if (!core[i])
      continue;
    for (const Neighbor &nb: g.neighbors(i)) {
      if (!core[nb.atom] && g.degree(nb.atom) == 1
          && g.bond(nb.bond).order == BondOrder::kDouble)
        keep[nb.atom] = true;
    }
  }

  std::vector<int> lost(n, 0);
  for (int i = 0; i < n; ++i) {
    if (!keep[i])
      continue;
    for (const Neighbor &nb: g.neighbors(i)) {
      if (!keep[nb.atom])
        lost[i] += sigma_order(g.bond(nb.bond).order);
    }
  }

  const auto mask = std::make_unique<bool[]>(n);
  for (int i = 0; i < n; ++i)
    mask[i] = keep[i];
  std::vector<int> index_map;
  MolGraph out = g.subgraph(std::span<const bool>(mask.get(), n), &index_map);
  for (int i = 0; i < n; ++i) {
    if (!keep[i] || lost[i] == 0)
      continue;
    const int j = index_map[i];
    const int hydrogens = total_hydrogens(g, i) + lost[i];
    Atom &a = out.mutable_atom(j);
    a.chirality.reset();
    if (a.bracket() || implicit_hydrogens(out, j) != hydrogens)
      a.explicit_h = hydrogens;
  }
  return out;
}

}  // namespace chemlm

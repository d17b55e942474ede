//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <stdexcept>

#include "chemlm/chemistry.h"
#include "chemlm/descriptors.h"
#include "chemlm/elements.h"
#include "chemlm/rings.h"

namespace chemlm {
namespace {

bool is_carbonyl_carbon(const MolGraph &g, int atom) {
  if (g.atom(atom).element != element::kC)
    return false;
  for (const Neighbor &nb: g.neighbors(atom)) {
    if (g.bond(nb.bond).order == BondOrder::kDouble
        && g.atom(nb.atom).element == element::kO)
      return true;
  }
  return false;
}

bool is_amide_bond(const MolGraph &g, const Bond &b) {
  const int za = g.atom(b.a).element;
  const int zb = g.atom(b.b).element;
  return (za == element::kN && is_carbonyl_carbon(g, b.b))
         || (zb == element::kN && is_carbonyl_carbon(g, b.a));
}

}  // namespace

const std::array<DescriptorInfo, kNumDescriptors> &descriptor_table() {
  static const std::array<DescriptorInfo, kNumDescriptors> table = { {
      { "MolWt", DescriptorKind::kContinuous },
      { "NumHAcceptors", DescriptorKind::kInteger },
      { "NumHDonors", DescriptorKind::kInteger },
      { "NumRotatableBonds", DescriptorKind::kInteger },
      { "NumAliphaticRings", DescriptorKind::kInteger },
      { "NumAromaticRings", DescriptorKind::kInteger },
      { "HeavyAtomCount", DescriptorKind::kInteger },
      { "RingAtomFraction", DescriptorKind::kContinuous },
      { "GraphComplexity", DescriptorKind::kContinuous },
  } };
  return table;
}

double descriptor_value(const DescriptorVector &d, int index) {
  switch (index) {
  case 0: return d.mol_wt;
  case 1: return d.num_h_acceptors;
  case 2: return d.num_h_donors;
  case 3: return d.num_rotatable_bonds;
  case 4: return d.num_aliphatic_rings;
  case 5: return d.num_aromatic_rings;
  case 6: return d.heavy_atom_count;
  case 7: return d.ring_atom_fraction;
  case 8: return d.graph_complexity;
  default: throw std::out_of_range("descriptor index out of range");
  }
}

std::optional<int> find_descriptor(std::string_view name) {
  const auto &table = descriptor_table();
  for (int i = 0; i < kNumDescriptors; ++i) {
    if (table[i].name == name)
      return i;
  }
  return std::nullopt;
}

DescriptorVector descriptors(const MolGraph &input) {
  const MolGraph g = standardize(input);
  const RingInfo &rings = g.rings();
  const double hydrogen_mass = atomic_mass(element::kH);
  DescriptorVector d;

  int ring_heavy = 0;
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atom(i);
    const int h = total_hydrogens(g, i);
    d.mol_wt += atomic_mass(a.element) + h * hydrogen_mass;
    if (a.element == element::kH)
      continue;
    ++d.heavy_atom_count;
    if (rings.atom_in_ring(i))
      ++ring_heavy;
    if (a.element == element::kN || a.element == element::kO) {
      if (a.formal_charge <= 0)
        ++d.num_h_acceptors;
      if (h > 0)
        ++d.num_h_donors;
    }
    const int deg = heavy_degree(g, i);
    d.graph_complexity += deg * std::log2(deg + 1.0);
  }

  for (int e = 0; e < g.num_bonds(); ++e) {
    const Bond &b = g.bond(e);
    if (g.atom(b.a).element == element::kH || g.atom(b.b).element == element::kH)
      continue;
    d.graph_complexity += 1.0;
    if (b.order != BondOrder::kSingle || rings.bond_in_ring(e))
      continue;
    if (heavy_degree(g, b.a) < 2 || heavy_degree(g, b.b) < 2)
      continue;
    if (is_amide_bond(g, b))
      continue;
    ++d.num_rotatable_bonds;
  }

  for (int r = 0; r < rings.num_rings(); ++r) {
    if (rings.aromatic[r])
      ++d.num_aromatic_rings;
    else
      ++d.num_aliphatic_rings;
  }
  d.ring_atom_fraction = d.heavy_atom_count > 0
                             ? static_cast<double>(ring_heavy) / d.heavy_atom_count
                             : 0.0;
  return d;
}

}  // namespace chemlm

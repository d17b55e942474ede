//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <set>
#include <vector>

#include "chemlm/chemistry.h"
#include "chemlm/elements.h"
#include "chemlm/rings.h"

namespace chemlm {
namespace {

constexpr int kMaxAromaticRing = 8;

std::vector<int> hydrogen_counts(const MolGraph &g) {
  std::vector<int> h(g.num_atoms());
  for (int i = 0; i < g.num_atoms(); ++i)
    h[i] = total_hydrogens(g, i);
  return h;
}

// Atoms whose implicit count drifted get their old count pinned in brackets.
void pin_hydrogens(MolGraph &g, const std::vector<int> &before) {
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (g.atom(i).bracket())
      continue;
    if (implicit_hydrogens(g, i) != before[i])
      g.mutable_atom(i).explicit_h = before[i];
  }
}

bool needs_double_bond(const MolGraph &g, int atom, int hydrogens) {
  const Atom &a = g.atom(atom);
  int s = hydrogens;
  for (const Neighbor &nb: g.neighbors(atom))
    s += sigma_order(g.bond(nb.bond).order);
  for (int v: charged_valences(a.element, a.formal_charge, true)) {
    if (v >= s)
      return v - s >= 1;
  }
  return false;
}

class Matcher {
public:
  Matcher(const MolGraph &g, const std::vector<bool> &demand)
      : g_(g), demand_(demand), match_(g.num_atoms(), -1) { }

  bool solve() {
    if (++steps_ > kMaxSteps)
      return false;

    int best = -1;
    int best_options = 0;
    for (int i = 0; i < g_.num_atoms(); ++i) {
      if (!demand_[i] || match_[i] >= 0)
        continue;
      const int options = count_options(i);
      if (best < 0 || options < best_options) {
        best = i;
        best_options = options;
        if (options == 0)
          break;
      }
    }
    if (best < 0)
      return true;
    if (best_options == 0)
      return false;

    for (const Neighbor &nb: g_.neighbors(best)) {
      if (!available(best, nb))
        continue;
      match_[best] = nb.atom;
      match_[nb.atom] = best;
      if (solve())
        return true;
      match_[best] = match_[nb.atom] = -1;
    }
    return false;
  }

  const std::vector<int> &matching() const { return match_; }

private:
  static constexpr long kMaxSteps = 1'000'000;

  bool available(int, const Neighbor &nb) const {
    return g_.bond(nb.bond).order == BondOrder::kAromatic && demand_[nb.atom]
           && match_[nb.atom] < 0;
  }

  int count_options(int atom) const {
    int n = 0;
    for (const Neighbor &nb: g_.neighbors(atom))
      n += available(atom, nb) ? 1 : 0;
    return n;
  }

  const MolGraph &g_;
  const std::vector<bool> &demand_;
  std::vector<int> match_;
  long steps_ = 0;
};

// Pi electrons an atom donates to a ring; -1 if it cannot be aromatic.
int pi_electrons(const MolGraph &g, const RingInfo &rings, int atom,
                 int hydrogens) {
  const Atom &a = g.atom(atom);
  if (!is_aromatic_capable(a.element))
    return -1;

  int doubles = 0;
  int double_bond = -1;
  for (const Neighbor &nb: g.neighbors(atom)) {
    const BondOrder order = g.bond(nb.bond).order;
    if (order == BondOrder::kTriple)
      return -1;
    if (order == BondOrder::kDouble) {
      ++doubles;
      double_bond = nb.bond;
    }
  }
  if (doubles > 1)
    return -1;
  if (doubles == 1) {
    if (rings.bond_in_ring(double_bond))
      return 1;
    const int partner = g.atom(g.bond(double_bond).other(atom)).element;
    // Exocyclic C=O / C=N / C=S keep the atom in the ring with no electrons.
    if (partner == element::kO || partner == element::kN
        || partner == element::kS || partner == element::kSe)
      return 0;
    return -1;
  }

  const int valence = g.degree(atom) + hydrogens;
  const int q = a.formal_charge;
  switch (a.element) {
  case element::kN:
  case element::kP:
  case element::kAs:
    if ((q == 0 && valence == 3) || (q == -1 && valence == 2))
      return 2;
    return -1;
  case element::kO:
  case element::kS:
  case element::kSe:
    return q == 0 && valence == 2 ? 2 : -1;
  case element::kC:
    if (q == -1 && valence == 3)
      return 2;
    if (q == 1 && valence == 3)
      return 0;
    return -1;
  case element::kB:
    return q == 0 && valence == 3 ? 0 : -1;
  default:
    return -1;
  }
}

bool huckel(const std::vector<int> &atoms, const std::vector<int> &electrons) {
  int sum = 0;
  for (int a: atoms) {
    if (electrons[a] < 0)
      return false;
    sum += electrons[a];
  }
  return sum >= 2 && (sum - 2) % 4 == 0;
}

bool has_aromaticity(const MolGraph &g) {
  for (const Atom &a: g.atoms()) {
    if (a.aromatic)
      return true;
  }
  for (const Bond &b: g.bonds()) {
    if (b.order == BondOrder::kAromatic)
      return true;
  }
  return false;
}

MolGraph assign_double_bonds(const MolGraph &g) {

  const std::vector<int> hydrogens = hydrogen_counts(g);
  std::vector<bool> demand(g.num_atoms(), false);
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (!g.atom(i).aromatic)
      continue;
    demand[i] = needs_double_bond(g, i, hydrogens[i]);
  }

  Matcher matcher(g, demand);
  if (!matcher.solve())
    throw KekulizeError("cannot kekulize aromatic system");
  const std::vector<int> &match = matcher.matching();

  MolGraph out = g;
  for (int e = 0; e < out.num_bonds(); ++e) {
    const Bond &b = out.bond(e);
    if (b.order != BondOrder::kAromatic)
      continue;
    out.set_bond_order(e, match[b.a] == b.b ? BondOrder::kDouble
                                            : BondOrder::kSingle);
  }
  for (int i = 0; i < out.num_atoms(); ++i)
    out.mutable_atom(i).aromatic = false;
  pin_hydrogens(out, hydrogens);
  return out;
}

MolGraph perceive(const MolGraph &kekule) {
  const RingInfo &rings = kekule.rings();
  if (rings.num_rings() == 0)
    return kekule;

  const std::vector<int> hydrogens = hydrogen_counts(kekule);
  std::vector<int> electrons(kekule.num_atoms(), -1);
  for (int i = 0; i < kekule.num_atoms(); ++i) {
    if (rings.atom_in_ring(i))
      electrons[i] = pi_electrons(kekule, rings, i, hydrogens[i]);
  }

  // All small cycles rather than the SSSR: the SSSR is not unique for
  // bridged systems, and perception must not depend on atom order.
  const CycleSet cycles = simple_cycles(kekule, kMaxAromaticRing);
  const int nr = static_cast<int>(cycles.atoms.size());
  std::vector<bool> aromatic_ring(nr, false);
  for (int r = 0; r < nr; ++r)
    aromatic_ring[r] = huckel(cycles.atoms[r], electrons);

  // Fused pairs whose perimeter is aromatic even if a member ring is not
  // (azulene-type systems).
  for (int r = 0; r < nr; ++r) {
    for (int s = r + 1; s < nr; ++s) {
      if (aromatic_ring[r] && aromatic_ring[s])
        continue;
      const auto &br = cycles.bonds[r];
      const auto &bs = cycles.bonds[s];
      const bool fused = std::any_of(br.begin(), br.end(), [&](int e) {
        return std::find(bs.begin(), bs.end(), e) != bs.end();
      });
      if (!fused)
        continue;
      std::set<int> atoms(cycles.atoms[r].begin(), cycles.atoms[r].end());
      atoms.insert(cycles.atoms[s].begin(), cycles.atoms[s].end());
      if (huckel(std::vector<int>(atoms.begin(), atoms.end()), electrons))
        aromatic_ring[r] = aromatic_ring[s] = true;
    }
  }

  if (std::none_of(aromatic_ring.begin(), aromatic_ring.end(),
                   [](bool x) { return x; }))
    return kekule;

  MolGraph out = kekule;
  for (int r = 0; r < nr; ++r) {
    if (!aromatic_ring[r])
      continue;
    for (int e: cycles.bonds[r])
      out.set_bond_order(e, BondOrder::kAromatic);
    for (int a: cycles.atoms[r])
      out.mutable_atom(a).aromatic = true;
  }
  pin_hydrogens(out, hydrogens);

  // Perceived systems must round-trip through kekulization; if not, keep the
  // Kekule form rather than emit an unreadable aromatic spelling.
  try {
    assign_double_bonds(out);
  } catch (const KekulizeError &) {
    return kekule;
  }
  return out;
}

}  // namespace

MolGraph kekulize(const MolGraph &g) {
  if (!has_aromaticity(g))
    return g;
  MolGraph out = assign_double_bonds(g);

  // A written aromatic system must contain at least one ring that is
  // aromatic under the electron-count rules (rejects "c1ccc1").
  const MolGraph perceived = perceive(out);
  std::vector<int> label(g.num_atoms(), -1);
  for (int start = 0; start < g.num_atoms(); ++start) {
    if (label[start] >= 0 || !g.atom(start).aromatic)
      continue;
    std::vector<int> members{ start };
    label[start] = start;
    bool aromatic = false;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const int u = members[k];
      aromatic = aromatic || perceived.atom(u).aromatic;
      for (const Neighbor &nb: g.neighbors(u)) {
        if (label[nb.atom] < 0
            && g.bond(nb.bond).order == BondOrder::kAromatic) {
          label[nb.atom] = start;
          members.push_back(nb.atom);
        }
      }
    }
    if (members.size() > 1 && !aromatic)
      throw KekulizeError("aromatic system has no 4n+2 ring");
  }
  return out;
}

MolGraph perceive_aromaticity(const MolGraph &input) {
  return perceive(kekulize(input));
}

MolGraph standardize(const MolGraph &g) {
  MolGraph out = perceive_aromaticity(kekulize(g));
  for (int i = 0; i < out.num_atoms(); ++i) {
    const Atom &a = out.atom(i);
    const int h = total_hydrogens(out, i);
    const bool needs_bracket =
        !is_organic_subset(a.element) || a.formal_charge != 0 || a.isotope
        || a.atom_map || a.chirality
        || (a.aromatic && !is_organic_aromatic(a.element))
        || implicit_hydrogens(out, i) != h;
    out.mutable_atom(i).explicit_h =
        needs_bracket ? std::optional<int>(h) : std::nullopt;
  }
  return out;
}

}  // namespace chemlm

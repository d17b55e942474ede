//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_MOL_GRAPH_H_
#define CHEMLM_MOL_GRAPH_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace chemlm {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Integer bond order for valence sums; aromatic counts as 1 (sigma only).
inline int sigma_order(BondOrder order) {
  return order == BondOrder::kAromatic ? 1 : static_cast<int>(order);
}

// Tetrahedral tag exactly as written; never interpreted.
enum class Chirality : std::uint8_t {
  kAnticlockwise,  // @
  kClockwise,      // @@
};

struct Atom {
  int element = 6;
  bool aromatic = false;
  int formal_charge = 0;
  // Present iff the atom was written in bracket notation.
  std::optional<int> explicit_h;
  std::optional<int> isotope;
  std::optional<int> atom_map;
  std::optional<Chirality> chirality;

  bool bracket() const { return explicit_h.has_value(); }
  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;

  int other(int atom) const { return atom == a ? b : a; }
  friend bool operator==(const Bond &, const Bond &) = default;
};

struct Neighbor {
  int atom;
  int bond;
};

struct RingInfo;

// Simple undirected molecular graph. Indices are stable: atoms and bonds are
// only ever appended. Ring information is computed on first use and shared
// between copies until either copy is mutated.
class MolGraph {
public:
  MolGraph();

  int add_atom(const Atom &atom);
  // Throws std::invalid_argument on self-loops, parallel bonds or bad indices.
  int add_bond(int a, int b, BondOrder order);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &mutable_atom(int i) {
    invalidate();
    return atoms_[i];
  }
  const Bond &bond(int i) const { return bonds_[i]; }
  void set_bond_order(int i, BondOrder order) {
    invalidate();
    bonds_[i].order = order;
  }

  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  std::span<const Neighbor> neighbors(int atom) const { return adj_[atom]; }
  int degree(int atom) const { return static_cast<int>(adj_[atom].size()); }

  std::optional<int> find_bond(int a, int b) const;

  // Component id per atom, numbered in order of lowest atom index.
  std::vector<int> components() const;
  int num_components() const;

  // Smallest set of smallest rings, computed lazily (thread-safe).
  const RingInfo &rings() const;

  // Induced subgraph on atoms with keep[i] = true. Atom attributes are copied
  // verbatim; mapping old -> new index is written to `index_map` (-1 if
  // dropped) when provided.
  MolGraph subgraph(std::span<const bool> keep,
                    std::vector<int> *index_map = nullptr) const;

  // Relabel: new atom i is old atom order[i].
  MolGraph permuted(std::span<const int> order) const;

private:
  struct RingCache;

  void invalidate();

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adj_;
  std::shared_ptr<RingCache> ring_cache_;
};

// Sum of bond orders with aromatic bonds counted as 1.
int sigma_valence(const MolGraph &g, int atom);

// Hydrogens implied for an unbracketed atom by the SMILES default-valence
// rule (aromatic atoms reserve one valence unit for the pi bond).
int implicit_hydrogens(const MolGraph &g, int atom);

// explicit_h for bracket atoms, implicit_hydrogens() otherwise.
int total_hydrogens(const MolGraph &g, int atom);

int heavy_degree(const MolGraph &g, int atom);

}  // namespace chemlm

#endif  // CHEMLM_MOL_GRAPH_H_

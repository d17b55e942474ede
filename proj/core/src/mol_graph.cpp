//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include "chemlm/mol_graph.h"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "chemlm/elements.h"
#include "chemlm/rings.h"

namespace chemlm {

struct MolGraph::RingCache {
  std::once_flag once;
  RingInfo info;
};

MolGraph::MolGraph(): ring_cache_(std::make_shared<RingCache>()) { }

void MolGraph::invalidate() {
  // Copies may still share the old cache; give this graph a fresh one.
  ring_cache_ = std::make_shared<RingCache>();
}

int MolGraph::add_atom(const Atom &atom) {
  invalidate();
  atoms_.push_back(atom);
  adj_.emplace_back();
  return num_atoms() - 1;
}

int MolGraph::add_bond(int a, int b, BondOrder order) {
  if (a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms())
    throw std::invalid_argument("bond atom index out of range");
  if (a == b)
    throw std::invalid_argument("self-loop bond");
  if (find_bond(a, b))
    throw std::invalid_argument("parallel bond");

  invalidate();
  const int idx = num_bonds();
  bonds_.push_back({ a, b, order });
  adj_[a].push_back({ b, idx });
  adj_[b].push_back({ a, idx });
  return idx;
}

std::optional<int> MolGraph::find_bond(int a, int b) const {
  if (adj_[a].size() > adj_[b].size())
    std::swap(a, b);
  for (const Neighbor &nb: adj_[a]) {
    if (nb.atom == b)
      return nb.bond;
  }
  return std::nullopt;
}

std::vector<int> MolGraph::components() const {
  std::vector<int> comp(num_atoms(), -1);
  std::vector<int> stack;
  int next = 0;
  for (int i = 0; i < num_atoms(); ++i) {
    if (comp[i] >= 0)
      continue;
    comp[i] = next;
    stack.push_back(i);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: adj_[v]) {
        if (comp[nb.atom] < 0) {
          comp[nb.atom] = next;
          stack.push_back(nb.atom);
        }
      }
    }
    ++next;
  }
  return comp;
}

int MolGraph::num_components() const {
  const std::vector<int> comp = components();
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

const RingInfo &MolGraph::rings() const {
  RingCache &cache = *ring_cache_;
  std::call_once(cache.once, [&] { cache.info = perceive_rings(*this); });
  return cache.info;
}

MolGraph MolGraph::subgraph(std::span<const bool> keep,
                            std::vector<int> *index_map) const {
  MolGraph out;
  std::vector<int> map(num_atoms(), -1);
  for (int i = 0; i < num_atoms(); ++i) {
    if (keep[i])
      map[i] = out.add_atom(atoms_[i]);
  }
  for (const Bond &b: bonds_) {
    if (map[b.a] >= 0 && map[b.b] >= 0)
      out.add_bond(map[b.a], map[b.b], b.order);
  }
  if (index_map != nullptr)
    *index_map = std::move(map);
  return out;
}

MolGraph MolGraph::permuted(std::span<const int> order) const {
  if (static_cast<int>(order.size()) != num_atoms())
    throw std::invalid_argument("permutation size mismatch");
  std::vector<int> inverse(num_atoms(), -1);
  MolGraph out;
  for (int i = 0; i < num_atoms(); ++i) {
    inverse[order[i]] = i;
    out.add_atom(atoms_[order[i]]);
  }
  // Bonds in the order of their new lower endpoint keep adjacency ordering
  // consistent with the relabelling.
  std::vector<Bond> relabelled;
  relabelled.reserve(bonds_.size());
  for (const Bond &b: bonds_)
    relabelled.push_back({ inverse[b.a], inverse[b.b], b.order });
  std::sort(relabelled.begin(), relabelled.end(),
            [](const Bond &x, const Bond &y) {
              return std::minmax(x.a, x.b) < std::minmax(y.a, y.b);
            });
  for (const Bond &b: relabelled)
    out.add_bond(b.a, b.b, b.order);
  return out;
}

int sigma_valence(const MolGraph &g, int atom) {
  int sum = 0;
  for (const Neighbor &nb: g.neighbors(atom))
    sum += sigma_order(g.bond(nb.bond).order);
  return sum;
}

namespace {

int smallest_at_least(std::span<const int> valences, int value) {
  for (int v: valences) {
    if (v >= value)
      return v;
  }
  return -1;
}

}  // namespace

int implicit_hydrogens(const MolGraph &g, int atom) {
  const Atom &a = g.atom(atom);
  if (a.aromatic) {
    const int s = sigma_valence(g, atom);
    const int v = smallest_at_least(
        charged_valences(a.element, a.formal_charge, true), s);
    if (v < 0)
      return 0;
    return std::max(0, v - s - 1);
  }

  const int s = sigma_valence(g, atom);
  const int v = smallest_at_least(
      charged_valences(a.element, a.formal_charge, true), s);
  return v < 0 ? 0 : v - s;
}

int total_hydrogens(const MolGraph &g, int atom) {
  const Atom &a = g.atom(atom);
  return a.explicit_h ? *a.explicit_h : implicit_hydrogens(g, atom);
}

int heavy_degree(const MolGraph &g, int atom) {
  int deg = 0;
  for (const Neighbor &nb: g.neighbors(atom)) {
    if (g.atom(nb.atom).element != element::kH)
      ++deg;
  }
  return deg;
}

}  // namespace chemlm

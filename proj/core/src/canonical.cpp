//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <numeric>
#include <utility>

#include "chemlm/canonical.h"
#include "chemlm/chemistry.h"
#include "chemlm/rings.h"
#include "chemlm/smiles.h"

namespace chemlm {
namespace {

constexpr long kMaxLeaves = 20000;

template <typename Key>
std::vector<int> ranks_from_keys(const std::vector<Key> &keys) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int x, int y) { return keys[x] < keys[y]; });
  std::vector<int> ranks(n);
  for (int i = 0; i < n; ++i) {
    ranks[idx[i]] = (i > 0 && keys[idx[i]] == keys[idx[i - 1]])
                        ? ranks[idx[i - 1]]
                        : i;
  }
  return ranks;
}

int count_classes(const std::vector<int> &ranks) {
  std::vector<int> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end())
                          - sorted.begin());
}

void refine(const MolGraph &g, std::vector<int> &ranks) {
  const int n = g.num_atoms();
  int classes = count_classes(ranks);
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  std::vector<Key> keys(n);
  while (classes < n) {
    for (int i = 0; i < n; ++i) {
      keys[i].first = ranks[i];
      auto &sig = keys[i].second;
      sig.clear();
      for (const Neighbor &nb: g.neighbors(i)) {
        sig.emplace_back(ranks[nb.atom],
                         static_cast<int>(g.bond(nb.bond).order));
      }
      std::sort(sig.begin(), sig.end());
    }
    std::vector<int> next = ranks_from_keys(keys);
    const int next_classes = count_classes(next);
    ranks = std::move(next);
    if (next_classes == classes)
      break;
    classes = next_classes;
  }
}

std::vector<int> initial_ranks(const MolGraph &g) {
  const RingInfo &rings = g.rings();
  std::vector<std::array<int, 9>> keys(g.num_atoms());
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atom(i);
    keys[i] = { a.element,
                g.degree(i),
                a.formal_charge,
                total_hydrogens(g, i),
                a.aromatic ? 1 : 0,
                rings.atom_in_ring(i) ? 1 : 0,
                rings.smallest_ring_size[i],
                a.isotope.value_or(0),
                a.atom_map.value_or(0) };
  }
  return ranks_from_keys(keys);
}

class DisjointSet {
public:
  explicit DisjointSet(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int x, int y) { parent_[find(x)] = find(y); }

private:
  std::vector<int> parent_;
};

class TieBreaker {
public:
  explicit TieBreaker(const MolGraph &g) : g_(g) { }

  std::vector<int> run(std::vector<int> ranks) {
    std::vector<int> prefix;
    search(ranks, prefix);
    return best_ranks_;
  }

private:
  void search(const std::vector<int> &ranks, std::vector<int> &prefix) {
    const int n = g_.num_atoms();
    std::vector<int> count(n, 0);
    for (int r: ranks)
      ++count[r];
    int cell_rank = -1;
    for (int r = 0; r < n; ++r) {
      if (count[r] > 1) {
        cell_rank = r;
        break;
      }
    }
    if (cell_rank < 0) {
      leaf(ranks);
      return;
    }

    std::vector<int> cell;
    for (int i = 0; i < n; ++i) {
      if (ranks[i] == cell_rank)
        cell.push_back(i);
    }
    std::vector<int> explored;
    for (int a: cell) {
      if (have_best_ && leaves_ >= kMaxLeaves)
        return;
      if (!explored.empty()) {
        DisjointSet orbits = stabilizer_orbits(prefix);
        const int root = orbits.find(a);
        const bool seen = std::any_of(explored.begin(), explored.end(),
                                      [&](int b) { return orbits.find(b) == root; });
        if (seen)
          continue;
      }
      std::vector<int> child = ranks;
      for (int m: cell) {
        if (m != a)
          child[m] = cell_rank + 1;
      }
      refine(g_, child);
      prefix.push_back(a);
      search(child, prefix);
      prefix.pop_back();
      explored.push_back(a);
    }
  }

  // Orbits under the known automorphisms that fix every individualized atom.
  DisjointSet stabilizer_orbits(const std::vector<int> &prefix) const {
    DisjointSet orbits(g_.num_atoms());
    for (const auto &gamma: automorphisms_) {
      const bool fixes = std::all_of(prefix.begin(), prefix.end(),
                                     [&](int p) { return gamma[p] == p; });
      if (!fixes)
        continue;
      for (int i = 0; i < g_.num_atoms(); ++i)
        orbits.unite(i, gamma[i]);
    }
    return orbits;
  }

  void leaf(const std::vector<int> &ranks) {
    ++leaves_;
    const int root = static_cast<int>(
        std::min_element(ranks.begin(), ranks.end()) - ranks.begin());
    std::vector<int> order;
    std::string s = serialize_ranked(g_, root, ranks, true, &order);
    if (!have_best_ || s < best_) {
      have_best_ = true;
      best_ = std::move(s);
      best_ranks_ = ranks;
      best_order_ = std::move(order);
      return;
    }
    if (s != best_)
      return;
    // Equal strings describe the same labeled graph, so matching write
    // positions is an automorphism.
    std::vector<int> gamma(g_.num_atoms());
    bool identity = true;
    for (std::size_t i = 0; i < order.size(); ++i) {
      gamma[order[i]] = best_order_[i];
      identity = identity && order[i] == best_order_[i];
    }
    if (!identity)
      automorphisms_.push_back(std::move(gamma));
  }

  const MolGraph &g_;
  bool have_best_ = false;
  std::string best_;
  std::vector<int> best_ranks_;
  std::vector<int> best_order_;
  std::vector<std::vector<int>> automorphisms_;
  long leaves_ = 0;
};

}  // namespace

std::vector<int> refine_ranks(const MolGraph &g) {
  std::vector<int> ranks = initial_ranks(g);
  refine(g, ranks);
  return ranks;
}

std::vector<int> canonical_ranks(const MolGraph &g) {
  if (g.empty())
    return {};
  return TieBreaker(g).run(refine_ranks(g));
}

std::string canonicalize(const MolGraph &g) {
  if (g.empty())
    return {};
  const MolGraph s = standardize(g);
  const std::vector<int> ranks = canonical_ranks(s);
  const int root = static_cast<int>(
      std::min_element(ranks.begin(), ranks.end()) - ranks.begin());
  return serialize_ranked(s, root, ranks);
}

std::string canonicalize(std::string_view smiles) {
  return canonicalize(parse_smiles(smiles));
}

}  // namespace chemlm

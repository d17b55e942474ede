//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include "chemlm/rings.h"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <tuple>

namespace chemlm {
namespace {

using EdgeSet = std::vector<std::uint64_t>;

struct Candidate {
  int size;
  EdgeSet edges;
  std::vector<int> atoms;  // cyclic order
};

struct BfsTree {
  std::vector<int> dist;
  std::vector<int> parent_bond;
};

BfsTree bfs(const MolGraph &g, int root) {
  BfsTree t { std::vector<int>(g.num_atoms(), -1),
              std::vector<int>(g.num_atoms(), -1) };
  std::deque<int> queue { root };
  t.dist[root] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const Neighbor &nb: g.neighbors(v)) {
      if (t.dist[nb.atom] < 0) {
        t.dist[nb.atom] = t.dist[v] + 1;
        t.parent_bond[nb.atom] = nb.bond;
        queue.push_back(nb.atom);
      }
    }
  }
  return t;
}

// Atoms on the tree path from `v` up to the root, v first.
std::vector<int> path_to_root(const MolGraph &g, const BfsTree &t, int v) {
  std::vector<int> path { v };
  while (t.parent_bond[v] >= 0) {
    v = g.bond(t.parent_bond[v]).other(v);
    path.push_back(v);
  }
  return path;
}

void set_bit(EdgeSet &s, int bit) {
  s[bit / 64] |= std::uint64_t { 1 } << (bit % 64);
}

bool test_bit(const EdgeSet &s, int bit) {
  return (s[bit / 64] >> (bit % 64)) & 1U;
}

int lowest_bit(const EdgeSet &s) {
  for (std::size_t w = 0; w < s.size(); ++w) {
    if (s[w] != 0)
      return static_cast<int>(w * 64) + __builtin_ctzll(s[w]);
  }
  return -1;
}

bool any_bit(const EdgeSet &s) {
  return std::any_of(s.begin(), s.end(), [](std::uint64_t w) { return w; });
}

}  // namespace

std::vector<bool> cyclic_bonds(const MolGraph &g) {
  // Tarjan bridge finding, iterative.
  const int n = g.num_atoms();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> cyclic(g.num_bonds(), true);
  int timer = 0;

  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (int s = 0; s < n; ++s) {
    if (disc[s] >= 0)
      continue;
    disc[s] = low[s] = timer++;
    stack.push_back({ s, -1, 0 });
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto nbrs = g.neighbors(f.atom);
      if (f.next < nbrs.size()) {
        const Neighbor nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond)
          continue;
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({ nb.atom, nb.bond, 0 });
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
        continue;
      }
      const Frame done = f;
      stack.pop_back();
      if (!stack.empty()) {
        Frame &parent = stack.back();
        low[parent.atom] = std::min(low[parent.atom], low[done.atom]);
        if (low[done.atom] > disc[parent.atom])
          cyclic[done.parent_bond] = false;
      }
    }
  }
  return cyclic;
}

CycleSet simple_cycles(const MolGraph &g, int max_size) {
  const std::vector<bool> cyclic = cyclic_bonds(g);
  CycleSet out;
  std::vector<int> path, path_bonds;
  std::vector<bool> on_path(g.num_atoms(), false);

  // Each cycle is rooted at its smallest atom and walked in the direction
  // whose second atom is smaller than its last, so it is reported once.
  auto dfs = [&](auto &self, int root, int u) -> void {
    for (const Neighbor &nb: g.neighbors(u)) {
      if (!cyclic[nb.bond] || nb.atom < root)
        continue;
      if (nb.atom == root) {
        if (path.size() >= 3 && path[1] < path.back()) {
          out.atoms.push_back(path);
          out.bonds.push_back(path_bonds);
          out.bonds.back().push_back(nb.bond);
        }
        continue;
      }
      if (on_path[nb.atom] || static_cast<int>(path.size()) >= max_size)
        continue;
      on_path[nb.atom] = true;
      path.push_back(nb.atom);
      path_bonds.push_back(nb.bond);
      self(self, root, nb.atom);
      path.pop_back();
      path_bonds.pop_back();
      on_path[nb.atom] = false;
    }
  };
  for (int s = 0; s < g.num_atoms(); ++s) {
    path.assign(1, s);
    path_bonds.clear();
    on_path[s] = true;
    dfs(dfs, s, s);
    on_path[s] = false;
  }
  return out;
}

RingInfo perceive_rings(const MolGraph &g) {
  const int n = g.num_atoms();
  const int m = g.num_bonds();
  RingInfo info;
  info.atom_membership.assign(n, 0);
  info.bond_membership.assign(m, 0);
  info.smallest_ring_size.assign(n, 0);

  const int target = m - n + g.num_components();
  if (target <= 0)
    return info;

  const std::vector<bool> cyclic = cyclic_bonds(g);
  const std::size_t words = (m + 63) / 64;

  std::vector<BfsTree> trees;
  trees.reserve(n);
  for (int v = 0; v < n; ++v)
    trees.push_back(bfs(g, v));

  // Horton candidates: for root v and edge (x, y), the cycle formed by the
  // two shortest paths v->x, v->y plus the edge, when the paths only share v.
  std::vector<Candidate> candidates;
  for (int v = 0; v < n; ++v) {
    const BfsTree &t = trees[v];
    for (int e = 0; e < m; ++e) {
      if (!cyclic[e])
        continue;
      const Bond &b = g.bond(e);
      if (t.dist[b.a] < 0 || t.parent_bond[b.a] == e || t.parent_bond[b.b] == e)
        continue;
      std::vector<int> pa = path_to_root(g, t, b.a);
      std::vector<int> pb = path_to_root(g, t, b.b);
      // Paths must intersect only at the root.
      std::vector<int> sa(pa.begin(), pa.end() - 1), sb(pb.begin(), pb.end() - 1);
      std::sort(sa.begin(), sa.end());
      std::sort(sb.begin(), sb.end());
      std::vector<int> common;
      std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                            std::back_inserter(common));
      if (!common.empty())
        continue;

      Candidate c;
      c.edges.assign(words, 0);
      set_bit(c.edges, e);
      for (std::size_t i = 0; i + 1 < pa.size(); ++i)
        set_bit(c.edges, t.parent_bond[pa[i]]);
      for (std::size_t i = 0; i + 1 < pb.size(); ++i)
        set_bit(c.edges, t.parent_bond[pb[i]]);
      // Cyclic order: root ... a, b ... (back towards root).
      c.atoms.assign(pa.rbegin(), pa.rend());
      c.atoms.insert(c.atoms.end(), pb.begin(), pb.end() - 1);
      c.size = static_cast<int>(c.atoms.size());
      candidates.push_back(std::move(c));
    }
  }

  // Deduplicate identical edge sets, keep the first occurrence.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate &x, const Candidate &y) {
                     return std::tie(x.size, x.edges) < std::tie(y.size, y.edges);
                   });
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const Candidate &x, const Candidate &y) {
                                 return x.edges == y.edges;
                               }),
                   candidates.end());

  // Smallest cycle through each atom: shortest u->v path avoiding bond (v,u).
  for (int v = 0; v < n; ++v) {
    int best = 0;
    for (const Neighbor &nb: g.neighbors(v)) {
      if (!cyclic[nb.bond])
        continue;
      std::vector<int> dist(n, -1);
      std::deque<int> queue { nb.atom };
      dist[nb.atom] = 0;
      while (!queue.empty() && dist[v] < 0) {
        const int x = queue.front();
        queue.pop_front();
        for (const Neighbor &nx: g.neighbors(x)) {
          if (nx.bond == nb.bond || dist[nx.atom] >= 0)
            continue;
          dist[nx.atom] = dist[x] + 1;
          queue.push_back(nx.atom);
        }
      }
      if (dist[v] > 0 && (best == 0 || dist[v] + 1 < best))
        best = dist[v] + 1;
    }
    info.smallest_ring_size[v] = best;
  }

  // Greedy independence test over GF(2), pivot on lowest set bit.
  std::vector<EdgeSet> basis;
  std::vector<int> pivots;
  for (Candidate &c: candidates) {
    if (static_cast<int>(info.rings.size()) == target)
      break;
    EdgeSet reduced = c.edges;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (test_bit(reduced, pivots[i])) {
        for (std::size_t w = 0; w < words; ++w)
          reduced[w] ^= basis[i][w];
      }
    }
    if (!any_bit(reduced))
      continue;
    const int pivot = lowest_bit(reduced);
    // Keep the basis in reduced echelon form so later tests stay exact.
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (test_bit(basis[i], pivot)) {
        for (std::size_t w = 0; w < words; ++w)
          basis[i][w] ^= reduced[w];
      }
    }
    basis.push_back(std::move(reduced));
    pivots.push_back(pivot);

    std::vector<int> ring_bonds;
    for (int e = 0; e < m; ++e) {
      if (test_bit(c.edges, e))
        ring_bonds.push_back(e);
    }
    bool aromatic = true;
    for (int e: ring_bonds) {
      ++info.bond_membership[e];
      aromatic = aromatic && g.bond(e).order == BondOrder::kAromatic;
    }
    for (int a: c.atoms)
      ++info.atom_membership[a];
    info.rings.push_back(std::move(c.atoms));
    info.ring_bonds.push_back(std::move(ring_bonds));
    info.aromatic.push_back(aromatic);
  }
  return info;
}

}  // namespace chemlm

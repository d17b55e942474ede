//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemlm/canonical.h"
#include "chemlm/elements.h"
#include "chemlm/smiles.h"

namespace chemlm {
namespace {

void append_atom(std::string &out, const Atom &a, bool write_chirality) {
  std::string symbol(element_symbol(a.element));
  if (a.aromatic)
    symbol[0] = static_cast<char>(std::tolower(symbol[0]));
  if (!a.bracket()) {
    out += symbol;
    return;
  }
  out += '[';
  if (a.isotope)
    out += std::to_string(*a.isotope);
  out += symbol;
  if (write_chirality && a.chirality)
    out += *a.chirality == Chirality::kClockwise ? "@@" : "@";
  if (*a.explicit_h > 0) {
    out += 'H';
    if (*a.explicit_h > 1)
      out += std::to_string(*a.explicit_h);
  }
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? '+' : '-';
    const int magnitude = std::abs(a.formal_charge);
    if (magnitude > 1)
      out += std::to_string(magnitude);
  }
  if (a.atom_map)
    out += ':' + std::to_string(*a.atom_map);
  out += ']';
}

void append_bond(std::string &out, const MolGraph &g, int bond) {
  const Bond &b = g.bond(bond);
  const bool both_aromatic = g.atom(b.a).aromatic && g.atom(b.b).aromatic;
  switch (b.order) {
  case BondOrder::kSingle:
    if (both_aromatic)
      out += '-';
    break;
  case BondOrder::kDouble:
    out += '=';
    break;
  case BondOrder::kTriple:
    out += '#';
    break;
  case BondOrder::kAromatic:
    if (!both_aromatic)
      out += ':';
    break;
  }
}

void append_ring_digit(std::string &out, int digit) {
  if (digit < 10) {
    out += static_cast<char>('0' + digit);
  } else {
    out += '%';
    out += std::to_string(digit);
  }
}

class Writer {
public:
  Writer(const MolGraph &g, const std::vector<int> &ranks, bool chirality)
      : g_(g), ranks_(ranks), chirality_(chirality), visited_(g.num_atoms()),
        on_stack_(g.num_atoms()), children_(g.num_atoms()),
        closures_(g.num_atoms()), closure_bond_(g.num_bonds()),
        digit_of_bond_(g.num_bonds(), -1) { }

  void component(int root, std::string &out, std::vector<int> &order) {
    plan(root, -1);
    emit(root, out, order);
  }

  bool visited(int atom) const { return visited_[atom]; }

private:
  std::vector<Neighbor> sorted_neighbors(int atom) const {
    auto span = g_.neighbors(atom);
    std::vector<Neighbor> nbs(span.begin(), span.end());
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor &x, const Neighbor &y) {
      if (ranks_[x.atom] != ranks_[y.atom])
        return ranks_[x.atom] < ranks_[y.atom];
      return x.atom < y.atom;
    });
    return nbs;
  }

  // First pass: spanning tree plus ring-closure bonds, in emission order.
  void plan(int root, int parent_bond) {
    struct Frame {
      int atom;
      int parent_bond;
      std::vector<Neighbor> nbs;
      std::size_t next = 0;
    };
    std::vector<Frame> stack;
    visited_[root] = on_stack_[root] = true;
    stack.push_back({ root, parent_bond, sorted_neighbors(root) });
    while (!stack.empty()) {
      Frame &f = stack.back();
      if (f.next == f.nbs.size()) {
        on_stack_[f.atom] = false;
        stack.pop_back();
        continue;
      }
      const Neighbor nb = f.nbs[f.next++];
      if (nb.bond == f.parent_bond)
        continue;
      if (visited_[nb.atom]) {
        if (on_stack_[nb.atom] && !closure_bond_[nb.bond]) {
          closure_bond_[nb.bond] = true;
          // Opened at the ancestor, closed here.
          closures_[nb.atom].push_back({ nb.bond, true });
          closures_[f.atom].push_back({ nb.bond, false });
        }
        continue;
      }
      children_[f.atom].push_back(nb);
      visited_[nb.atom] = on_stack_[nb.atom] = true;
      stack.push_back({ nb.atom, nb.bond, sorted_neighbors(nb.atom) });
    }
  }

  void emit(int root, std::string &out, std::vector<int> &order) {
    struct Frame {
      int atom;
      std::size_t next_child = 0;
    };
    std::vector<Frame> stack;
    write_atom(root, out, order);
    stack.push_back({ root });
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto &kids = children_[f.atom];
      if (f.next_child == kids.size()) {
        stack.pop_back();
        if (!stack.empty()
            && stack.back().next_child < children_[stack.back().atom].size())
          out += ')';
        continue;
      }
      const std::size_t i = f.next_child++;
      const bool branch = i + 1 < kids.size();
      if (branch)
        out += '(';
      append_bond(out, g_, kids[i].bond);
      write_atom(kids[i].atom, out, order);
      stack.push_back({ kids[i].atom });
    }
  }

  void write_atom(int atom, std::string &out, std::vector<int> &order) {
    append_atom(out, g_.atom(atom), chirality_);
    order.push_back(atom);
    std::vector<int> freed;
    for (const auto &[bond, opening]: closures_[atom]) {
      if (opening) {
        int digit = 1;
        while (std::find(used_.begin(), used_.end(), digit) != used_.end())
          ++digit;
        used_.push_back(digit);
        digit_of_bond_[bond] = digit;
        append_bond(out, g_, bond);
        append_ring_digit(out, digit);
      } else {
        append_ring_digit(out, digit_of_bond_[bond]);
        freed.push_back(digit_of_bond_[bond]);
      }
    }
    // Digits closed here become reusable only after this atom.
    for (int d: freed)
      used_.erase(std::find(used_.begin(), used_.end(), d));
  }

  struct Closure {
    int bond;
    bool opening;
  };

  const MolGraph &g_;
  const std::vector<int> &ranks_;
  bool chirality_;
  std::vector<char> visited_;
  std::vector<char> on_stack_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<Closure>> closures_;
  std::vector<char> closure_bond_;
  std::vector<int> digit_of_bond_;
  std::vector<int> used_;
};

}  // namespace

std::string serialize_ranked(const MolGraph &g, int root,
                             const std::vector<int> &ranks,
                             bool write_chirality,
                             std::vector<int> *atom_order) {
  if (root < 0 || root >= g.num_atoms())
    throw std::out_of_range("root atom " + std::to_string(root)
                            + " out of range");
  if (static_cast<int>(ranks.size()) != g.num_atoms())
    throw std::invalid_argument("rank vector size does not match graph");

  std::vector<int> by_rank(g.num_atoms());
  std::iota(by_rank.begin(), by_rank.end(), 0);
  std::stable_sort(by_rank.begin(), by_rank.end(),
                   [&](int x, int y) { return ranks[x] < ranks[y]; });

  Writer writer(g, ranks, write_chirality);
  std::string out;
  std::vector<int> order;
  order.reserve(g.num_atoms());
  writer.component(root, out, order);
  for (int atom: by_rank) {
    if (writer.visited(atom))
      continue;
    out += '.';
    writer.component(atom, out, order);
  }
  if (atom_order)
    *atom_order = std::move(order);
  return out;
}

std::string serialize(const MolGraph &g, int root, TraversalOrder order,
                      std::uint64_t seed) {
  if (root < 0 || root >= g.num_atoms())
    throw std::out_of_range("root atom " + std::to_string(root)
                            + " out of range");
  if (order == TraversalOrder::kDeterministic)
    return serialize_ranked(g, root, canonical_ranks(g));

  std::vector<int> ranks(g.num_atoms());
  std::iota(ranks.begin(), ranks.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(ranks.begin(), ranks.end(), rng);
  return serialize_ranked(g, root, ranks);
}

}  // namespace chemlm

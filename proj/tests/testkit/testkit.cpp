//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include "testkit.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "chemlm/elements.h"
#include "chemlm/smi_file.h"

#ifndef CHEMLM_TEST_DATA_DIR
#error "CHEMLM_TEST_DATA_DIR must point at tests/data"
#endif

namespace testkit {

using namespace chemlm;

std::filesystem::path data_path(const std::string &name) {
  return std::filesystem::path(CHEMLM_TEST_DATA_DIR) / name;
}

std::vector<std::string> read_smiles_column(const std::string &name) {
  std::vector<std::string> out;
  for (const SmiRecord &r: read_smi_file(data_path(name)))
    out.push_back(r.smiles);
  return out;
}

namespace {

struct Builder {
  MolGraph g;
  std::vector<int> cap;  // free bonding capacity
  std::vector<bool> bracket;

  int atom(const Atom &a, int capacity, bool in_bracket = false) {
    const int i = g.add_atom(a);
    cap.push_back(capacity);
    bracket.push_back(in_bracket);
    return i;
  }

  void bond(int a, int b, BondOrder order) {
    g.add_bond(a, b, order);
    const int used = order == BondOrder::kAromatic ? 0 : static_cast<int>(order);
    cap[a] -= used;
    cap[b] -= used;
  }
};

Atom aromatic_atom(int element) {
  Atom a;
  a.element = element;
  a.aromatic = true;
  return a;
}

// Returns the ring atoms' indices.
std::vector<int> add_ring(Builder &b, std::mt19937_64 &rng, bool six) {
  std::vector<int> ring;
  if (six) {
    const bool pyridine = std::uniform_real_distribution<>(0, 1)(rng) < 0.3;
    for (int i = 0; i < 6; ++i) {
      if (pyridine && i == 3)
        ring.push_back(b.atom(aromatic_atom(element::kN), 0));
      else
        ring.push_back(b.atom(aromatic_atom(element::kC), 1));
    }
  } else {
    const int kind = std::uniform_int_distribution<>(0, 2)(rng);
    Atom hetero = aromatic_atom(kind == 0 ? element::kN : kind == 1 ? element::kO : element::kS);
    if (kind == 0)
      hetero.explicit_h = 1;
    ring.push_back(b.atom(hetero, 0, kind == 0));
    for (int i = 0; i < 4; ++i)
      ring.push_back(b.atom(aromatic_atom(element::kC), 1));
  }
  for (std::size_t i = 0; i < ring.size(); ++i)
    b.bond(ring[i], ring[(i + 1) % ring.size()], BondOrder::kAromatic);
  return ring;
}

int add_single_atom(Builder &b, std::mt19937_64 &rng) {
  struct Choice {
    int element;
    int capacity;
    int charge;
    double weight;
  };
  static const Choice choices[] = {
    { element::kC, 4, 0, 10.0 }, { element::kN, 3, 0, 3.0 }, { element::kO, 2, 0, 3.0 },
    { element::kS, 2, 0, 1.0 },  { element::kF, 1, 0, 0.7 }, { element::kCl, 1, 0, 0.7 },
    { element::kBr, 1, 0, 0.4 }, { element::kN, 4, 1, 0.4 }, { element::kO, 1, -1, 0.4 },
    { element::kC, 4, 0, 0.3 },  // isotopic carbon
  };
  std::vector<double> weights;
  for (const Choice &c: choices)
    weights.push_back(c.weight);
  const int k = std::discrete_distribution<int>(weights.begin(), weights.end())(rng);
  Atom a;
  a.element = choices[k].element;
  a.formal_charge = choices[k].charge;
  const bool isotope = k == 9;
  if (isotope)
    a.isotope = 13;
  return b.atom(a, choices[k].capacity, a.formal_charge != 0 || isotope);
}

int hop_distance(const MolGraph &g, int from, int to) {
  std::vector<int> dist(g.num_atoms(), -1);
  std::vector<int> queue{ from };
  dist[from] = 0;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const int u = queue[q];
    for (const Neighbor &n: g.neighbors(u)) {
      if (dist[n.atom] < 0) {
        dist[n.atom] = dist[u] + 1;
        queue.push_back(n.atom);
      }
    }
  }
  return dist[to];
}

}  // namespace

MolGraph random_molecule(std::mt19937_64 &rng, int max_heavy) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Builder b;
  const int target = std::uniform_int_distribution<int>(1, max_heavy)(rng);

  while (b.g.num_atoms() < target) {
    const int room = target - b.g.num_atoms();
    std::vector<int> piece;
    const double r = u(rng);
    if (room >= 6 && r < 0.25)
      piece = add_ring(b, rng, true);
    else if (room >= 5 && r < 0.35)
      piece = add_ring(b, rng, false);
    else
      piece = { add_single_atom(b, rng) };

    const int first_new = piece.front();
    if (first_new == 0)
      continue;
    std::vector<int> anchors;
    for (int i = 0; i < first_new; ++i) {
      if (b.cap[i] > 0)
        anchors.push_back(i);
    }
    std::vector<int> sockets;
    for (int i: piece) {
      if (b.cap[i] > 0)
        sockets.push_back(i);
    }
    if (anchors.empty() || sockets.empty())
      break;  // the molecule cannot grow; keep what we have
    const int x = anchors[std::uniform_int_distribution<std::size_t>(0, anchors.size() - 1)(rng)];
    const int y = sockets[std::uniform_int_distribution<std::size_t>(0, sockets.size() - 1)(rng)];
    BondOrder order = BondOrder::kSingle;
    const bool aliphatic = !b.g.atom(x).aromatic && !b.g.atom(y).aromatic;
    const int room_order = std::min(b.cap[x], b.cap[y]);
    if (aliphatic && room_order >= 3 && u(rng) < 0.08)
      order = BondOrder::kTriple;
    else if (aliphatic && room_order >= 2 && u(rng) < 0.25)
      order = BondOrder::kDouble;
    b.bond(x, y, order);
  }

  // Ring closures between aliphatic atoms at least two bonds apart.
  const int closures = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int attempt = 0, made = 0; attempt < 20 && made < closures; ++attempt) {
    const int n = b.g.num_atoms();
    if (n < 3)
      break;
    const int x = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const int y = std::uniform_int_distribution<int>(0, n - 1)(rng);
    if (x == y || b.cap[x] < 1 || b.cap[y] < 1 || b.g.atom(x).aromatic || b.g.atom(y).aromatic)
      continue;
    if (b.g.find_bond(x, y) || hop_distance(b.g, x, y) < 2)
      continue;
    b.bond(x, y, BondOrder::kSingle);
    ++made;
  }

  // Occasional counter-ion.
  if (u(rng) < 0.05) {
    Atom ion;
    const bool cation = u(rng) < 0.5;
    ion.element = cation ? 11 : element::kCl;
    ion.formal_charge = cation ? 1 : -1;
    b.atom(ion, 0, true);
  }

  for (int i = 0; i < b.g.num_atoms(); ++i) {
    if (b.bracket[i] && !b.g.atom(i).explicit_h)
      b.g.mutable_atom(i).explicit_h = b.g.atom(i).aromatic ? 0 : std::max(b.cap[i], 0);
  }
  return b.g;
}

MolGraph shuffled(const MolGraph &g, std::mt19937_64 &rng) {
  std::vector<int> order(g.num_atoms());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return g.permuted(order);
}

namespace {

using AtomLabel = std::tuple<int, bool, int, int, int, int>;

AtomLabel label(const Atom &a) {
  return { a.element, a.aromatic, a.formal_charge, a.explicit_h.value_or(-1),
           a.isotope.value_or(-1), a.atom_map.value_or(-1) };
}

class Matcher {
public:
  Matcher(const MolGraph &a, const MolGraph &b): a_(a), b_(b) {
    // Visit order: BFS per component so that most atoms have a mapped
    // neighbour when they are tried.
    std::vector<bool> seen(a.num_atoms(), false);
    for (int s = 0; s < a.num_atoms(); ++s) {
      if (seen[s])
        continue;
      seen[s] = true;
      std::size_t head = order_.size();
      order_.push_back(s);
      while (head < order_.size()) {
        const int u = order_[head++];
        for (const Neighbor &n: a.neighbors(u)) {
          if (!seen[n.atom]) {
            seen[n.atom] = true;
            order_.push_back(n.atom);
          }
        }
      }
    }
    map_.assign(a.num_atoms(), -1);
    used_.assign(b.num_atoms(), false);
  }

  bool run() { return extend(0); }

private:
  bool feasible(int u, int v) const {
    if (label(a_.atom(u)) != label(b_.atom(v)) || a_.degree(u) != b_.degree(v))
      return false;
    int mapped = 0;
    for (const Neighbor &n: a_.neighbors(u)) {
      const int w = map_[n.atom];
      if (w < 0)
        continue;
      ++mapped;
      const auto bond = b_.find_bond(v, w);
      if (!bond || b_.bond(*bond).order != a_.bond(n.bond).order)
        return false;
    }
    int mapped_b = 0;
    for (const Neighbor &n: b_.neighbors(v))
      mapped_b += used_[n.atom];
    return mapped == mapped_b;
  }

  bool extend(std::size_t k) {
    if (k == order_.size())
      return true;
    const int u = order_[k];
    for (int v = 0; v < b_.num_atoms(); ++v) {
      if (used_[v] || !feasible(u, v))
        continue;
      map_[u] = v;
      used_[v] = true;
      if (extend(k + 1))
        return true;
      map_[u] = -1;
      used_[v] = false;
    }
    return false;
  }

  const MolGraph &a_;
  const MolGraph &b_;
  std::vector<int> order_;
  std::vector<int> map_;
  std::vector<bool> used_;
};

}  // namespace

bool isomorphic(const MolGraph &a, const MolGraph &b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return false;
  std::multiset<AtomLabel> la, lb;
  for (const Atom &x: a.atoms())
    la.insert(label(x));
  for (const Atom &x: b.atoms())
    lb.insert(label(x));
  if (la != lb)
    return false;
  return Matcher(a, b).run();
}

double tanimoto_sets(const std::vector<int> &a, const std::vector<int> &b) {
  std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty())
    return 1.0;
  std::size_t common = 0;
  for (int x: sa)
    common += sb.count(x);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

double roc_auc_pairwise(const std::vector<int> &labels, const std::vector<double> &scores) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1)
      continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0)
        continue;
      pairs += 1.0;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / pairs;
}

PositionTable::PositionTable(std::vector<Vector> logits, int capacity)
    : logits_(std::move(logits)), capacity_(capacity) {
  if (logits_.empty())
    throw std::invalid_argument("empty table");
}

std::unique_ptr<DecodeState> PositionTable::clone() const {
  return std::make_unique<PositionTable>(*this);
}

Vector PositionTable::next_log_probs() const {
  const Vector &row = logits_[std::min<std::size_t>(prefix_.size(), logits_.size() - 1)];
  const double m = row.maxCoeff();
  const double lse = m + std::log((row.array() - m).exp().sum());
  return (row.array() - lse).matrix();
}

void PositionTable::push(int id) { prefix_.push_back(id); }

std::vector<Hypothesis> enumerate_paths(const DecodeState &start, int max_len, int eos) {
  std::vector<Hypothesis> out;
  std::function<void(const DecodeState &, std::vector<int> &, double)> walk =
      [&](const DecodeState &state, std::vector<int> &ids, double lp) {
        const Vector probs = state.next_log_probs();
        for (int v = 0; v < probs.size(); ++v) {
          const double score = lp + probs(v);
          if (v == eos) {
            out.push_back({ ids, score, true });
            continue;
          }
          ids.push_back(v);
          if (static_cast<int>(ids.size()) >= max_len) {
            out.push_back({ ids, score, false });
          } else {
            auto next = state.clone();
            next->push(v);
            walk(*next, ids, score);
          }
          ids.pop_back();
        }
      };
  std::vector<int> ids;
  walk(start, ids, 0.0);
  std::sort(out.begin(), out.end(), [](const Hypothesis &a, const Hypothesis &b) {
    if (a.logprob != b.logprob)
      return a.logprob > b.logprob;
    return a.ids < b.ids;
  });
  return out;
}

std::vector<ScoredPrediction> aggregate_bruteforce(
    const std::vector<std::vector<BeamCandidate>> &per_augmentation, int k) {
  std::vector<std::string> distinct;
  for (const auto &beams: per_augmentation) {
    for (const BeamCandidate &c: beams) {
      if (std::find(distinct.begin(), distinct.end(), c.candidate) == distinct.end())
        distinct.push_back(c.candidate);
    }
  }
  std::vector<ScoredPrediction> out;
  for (const std::string &cand: distinct) {
    ScoredPrediction s;
    s.candidate = cand;
    for (const auto &beams: per_augmentation) {
      bool found = false;
      double best = 0.0;
      for (const BeamCandidate &c: beams) {
        if (c.candidate == cand && (!found || c.logprob > best)) {
          best = c.logprob;
          found = true;
        }
      }
      if (found) {
        ++s.votes;
        s.total_logprob += best;
      }
    }
    out.push_back(s);
  }
  // Selection sort by (votes desc, total desc, candidate asc).
  auto better = [](const ScoredPrediction &a, const ScoredPrediction &b) {
    if (a.votes != b.votes)
      return a.votes > b.votes;
    if (a.total_logprob != b.total_logprob)
      return a.total_logprob > b.total_logprob;
    return a.candidate < b.candidate;
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t pick = i;
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (better(out[j], out[pick]))
        pick = j;
    }
    std::swap(out[i], out[pick]);
  }
  if (k > 0 && static_cast<int>(out.size()) > k)
    out.resize(k);
  return out;
}

ModelConfig tiny_config(int vocab) {
  ModelConfig c;
  c.n_layers = 2;
  c.n_heads = 2;
  c.n_ctx = 16;
  c.d_model = 16;
  c.d_ff = 44;
  c.vocab_size = vocab;
  return c;
}

GradCheck check_gradients(const ModelParams &p, std::span<const Example> batch, LossKind kind,
                          double step, double floor) {
  ModelParams grads;
  compute_loss(p, batch, kind, &grads);
  ModelParams probe = p;
  auto views = tensor_views(probe);
  const auto gviews = tensor_views(grads);
  GradCheck result;
  for (std::size_t t = 0; t < views.size(); ++t) {
    if (!views[t].trainable)
      continue;
    for (Eigen::Index i = 0; i < views[t].size(); ++i) {
      double &w = views[t].data[i];
      const double saved = w;
      auto central = [&](double h) {
        w = saved + h;
        const double up = compute_loss(probe, batch, kind);
        w = saved - h;
        const double down = compute_loss(probe, batch, kind);
        w = saved;
        return (up - down) / (2.0 * h);
      };
      // Richardson extrapolation cancels the h^2 truncation term.
      const double fd = (4.0 * central(step) - central(2.0 * step)) / 3.0;
      const double g = gviews[t].data[i];
      const double rel = std::abs(g - fd) / std::max({ std::abs(g), std::abs(fd), floor });
      ++result.checked;
      if (rel > result.worst) {
        result.worst = rel;
        result.worst_tensor = views[t].name;
      }
    }
  }
  return result;
}

double max_abs_diff(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("shape mismatch");
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testkit

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "chemlm/augment.h"
#include "chemlm/chemistry.h"
#include "chemlm/random.h"
#include "chemlm/smiles.h"

namespace chemlm {
namespace {

MolGraph strip_maps(const MolGraph &g) {
  MolGraph out = g;
  for (int i = 0; i < out.num_atoms(); ++i) {
    if (out.atom(i).atom_map)
      out.mutable_atom(i).atom_map.reset();
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> enumerate_smiles(std::string_view smiles, int n,
                                          std::uint64_t seed) {
  const MolGraph g = parse_smiles(smiles);
  std::vector<std::string> out;
  out.reserve(std::max(n, 0));
  for (int k = 0; k < n; ++k) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    std::uniform_int_distribution<int> pick(0, g.num_atoms() - 1);
    const int root = pick(rng);
    out.push_back(serialize(g, root, TraversalOrder::kRandom, rng()));
  }
  return out;
}

ReactionRecord parse_reaction(std::string_view line, ReactionDirection direction) {
  line = trim(line);
  const auto first = line.find('>');
  const auto second = first == std::string_view::npos
                          ? std::string_view::npos
                          : line.find('>', first + 1);
  if (second == std::string_view::npos
      || line.find('>', second + 1) != std::string_view::npos)
    throw std::invalid_argument("reaction must have the form reactants>>products");

  std::string reactants(line.substr(0, first));
  const std::string_view agents = line.substr(first + 1, second - first - 1);
  if (!agents.empty())
    reactants += "." + std::string(agents);
  ReactionRecord r;
  r.reactants = parse_smiles(reactants);
  r.products = parse_smiles(line.substr(second + 1));
  r.direction = direction;
  return r;
}

std::vector<int> mapped_product_atoms(const ReactionRecord &r) {
  std::vector<int> reactant_maps;
  for (const Atom &a: r.reactants.atoms()) {
    if (a.atom_map)
      reactant_maps.push_back(*a.atom_map);
  }
  std::sort(reactant_maps.begin(), reactant_maps.end());
  std::vector<int> out;
  for (int i = 0; i < r.products.num_atoms(); ++i) {
    const auto &map = r.products.atom(i).atom_map;
    if (map && std::binary_search(reactant_maps.begin(), reactant_maps.end(), *map))
      out.push_back(i);
  }
  return out;
}

AlignedPair root_align(const ReactionRecord &r, int product_root) {
  if (product_root < 0 || product_root >= r.products.num_atoms())
    throw UnmappedRootError("product root out of range");
  const auto map = r.products.atom(product_root).atom_map;
  if (!map)
    throw UnmappedRootError("product root atom has no map number");
  int reactant_root = -1;
  for (int i = 0; i < r.reactants.num_atoms(); ++i) {
    if (r.reactants.atom(i).atom_map == map) {
      reactant_root = i;
      break;
    }
  }
  if (reactant_root < 0)
    throw UnmappedRootError("map number " + std::to_string(*map)
                            + " has no reactant partner");

  const MolGraph products = standardize(strip_maps(r.products));
  const MolGraph reactants = standardize(strip_maps(r.reactants));
  std::string product_smiles = serialize(products, product_root);
  std::string reactant_smiles = serialize(reactants, reactant_root);

  AlignedPair pair;
  pair.root_map = *map;
  if (r.direction == ReactionDirection::kRetro) {
    pair.input = std::move(product_smiles);
    pair.output = std::move(reactant_smiles);
  } else {
    pair.input = std::move(reactant_smiles);
    pair.output = std::move(product_smiles);
  }
  return pair;
}

std::vector<AlignedPair> augment_reactions(const std::vector<ReactionRecord> &dataset,
                                           int folds, std::uint64_t seed) {
  if (folds < 1)
    throw std::invalid_argument("folds must be >= 1");
  std::vector<AlignedPair> out;
  out.reserve(dataset.size() * static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::vector<int> candidates = mapped_product_atoms(dataset[i]);
    if (candidates.empty())
      throw UnmappedRootError("reaction " + std::to_string(i)
                              + " has no mapped product atom");
    std::mt19937_64 rng(derive_seed(seed, i));
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<int> roots(candidates.begin(),
                           candidates.begin()
                               + std::min<std::size_t>(candidates.size(), folds));
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    while (static_cast<int>(roots.size()) < folds)
      roots.push_back(candidates[pick(rng)]);
    for (int root: roots)
      out.push_back(root_align(dataset[i], root));
  }
  return out;
}

ConditionSpec sample_condition_subset(const ConditionSpec &spec,
                                      std::mt19937_64 &rng) {
  static constexpr double kSizeProbabilities[] = { 0.1, 0.2, 0.3, 0.4 };
  const int k = static_cast<int>(spec.size());
  if (k == 0)
    throw std::invalid_argument("empty condition spec");
  if (k > 4)
    throw std::invalid_argument("at most four conditions are supported");

  double total = 0.0;
  for (int i = 0; i < k; ++i)
    total += kSizeProbabilities[i];
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  int m = 1;
  double cumulative = kSizeProbabilities[0];
  while (u >= cumulative && m < k)
    cumulative += kSizeProbabilities[m++];

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < m; ++i) {
    const int j = std::uniform_int_distribution<int>(i, k - 1)(rng);
    std::swap(order[i], order[j]);
  }
  ConditionSpec out;
  out.reserve(m);
  for (int i = 0; i < m; ++i)
    out.push_back(spec[order[i]]);
  return out;
}

ConditionSpec sample_condition_subset(const ConditionSpec &spec,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_condition_subset(spec, rng);
}

double ConditionStats::normalize(const std::string &name, double value) const {
  auto it = mean_std.find(name);
  if (it == mean_std.end())
    return value;
  return (value - it->second.first) / it->second.second;
}

ConditionStats ConditionStats::fit(const std::map<std::string, std::vector<double>> &values) {
  ConditionStats stats;
  for (const auto &[name, xs]: values) {
    if (xs.empty())
      continue;
    double mean = 0.0;
    for (double x: xs)
      mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x: xs)
      var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    stats.mean_std[name] = { mean, sd };
  }
  return stats;
}

Prompt build_prompt(const ConditionSpec &spec, const Vocabulary &v,
                    const ConditionStats &stats) {
  auto lookup = [&v](const std::string &token) {
    auto id = v.find(token);
    if (!id)
      throw std::invalid_argument("token " + token + " is not registered");
    return *id;
  };

  Prompt p;
  auto &ids = p.tokens.ids;
  for (const Condition &c: spec) {
    ids.push_back(lookup(property_token(c.name)));
    if (const double *x = std::get_if<double>(&c.value)) {
      if (!std::isfinite(*x))
        throw std::invalid_argument("condition " + c.name + " is not finite");
      p.slots.push_back({ static_cast<int>(ids.size()), stats.normalize(c.name, *x) });
      ids.push_back(lookup(std::string(kValueToken)));
    } else if (const auto *cls = std::get_if<ClassValue>(&c.value)) {
      ids.push_back(lookup(class_token(cls->index)));
    } else {
      const auto &scaffold = std::get<ScaffoldValue>(c.value);
      const TokenSeq body = tokenize(scaffold.smiles, v, false);
      ids.insert(ids.end(), body.ids.begin(), body.ids.end());
    }
  }
  ids.push_back(lookup(std::string(kSepToken)));
  p.tokens.boundary = static_cast<int>(ids.size());
  return p;
}

}  // namespace chemlm

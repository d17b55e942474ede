//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "chemlm/canonical.h"
#include "chemlm/chemistry.h"
#include "chemlm/generation_metrics.h"
#include "chemlm/parallel.h"
#include "chemlm/scaffold.h"
#include "chemlm/smiles.h"

namespace chemlm {
namespace {

double smoothed_kl(const std::vector<double> &gen_counts,
                   const std::vector<double> &ref_counts, double n_gen,
                   double n_ref, double epsilon) {
  const double bins = static_cast<double>(gen_counts.size());
  double kl = 0.0;
  for (std::size_t i = 0; i < gen_counts.size(); ++i) {
    const double p = (gen_counts[i] / n_gen + epsilon) / (1.0 + bins * epsilon);
    const double q = (ref_counts[i] / n_ref + epsilon) / (1.0 + bins * epsilon);
    kl += p * std::log(p / q);
  }
  return std::max(kl, 0.0);
}

struct Evaluated {
  bool valid = false;
  std::string canonical;
  Fingerprint fp;
  DescriptorVector desc;
};

Evaluated evaluate_smiles(const std::string &smiles) {
  Evaluated e;
  auto g = try_parse_smiles(smiles);
  if (!g || g->empty() || !check_validity(*g))
    return e;
  const MolGraph s = standardize(*g);
  e.valid = true;
  e.canonical = canonicalize(s);
  e.fp = morgan_fingerprint(s);
  e.desc = descriptors(s);
  return e;
}

}  // namespace

double klsim(std::span<const double> gen, std::span<const double> ref,
             DescriptorKind kind, const KlBinning &binning) {
  if (gen.empty() || ref.empty())
    throw std::invalid_argument("klsim needs non-empty samples");
  std::vector<double> gen_counts;
  std::vector<double> ref_counts;

  if (kind == DescriptorKind::kInteger) {
    std::vector<long long> support;
    for (double x: gen)
      support.push_back(std::llround(x));
    for (double x: ref)
      support.push_back(std::llround(x));
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    gen_counts.assign(support.size(), 0.0);
    ref_counts.assign(support.size(), 0.0);
    auto index = [&](double x) {
      return std::lower_bound(support.begin(), support.end(), std::llround(x))
             - support.begin();
    };
    for (double x: gen)
      gen_counts[index(x)] += 1.0;
    for (double x: ref)
      ref_counts[index(x)] += 1.0;
  } else {
    double lo = gen[0];
    double hi = gen[0];
    for (double x: gen) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    for (double x: ref) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    const int bins = hi > lo ? std::max(binning.bins, 1) : 1;
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    auto index = [&](double x) {
      const int i = static_cast<int>(std::floor((x - lo) / width));
      return std::clamp(i, 0, bins - 1);
    };
    gen_counts.assign(bins, 0.0);
    ref_counts.assign(bins, 0.0);
    for (double x: gen)
      gen_counts[index(x)] += 1.0;
    for (double x: ref)
      ref_counts[index(x)] += 1.0;
  }
  const double kl = smoothed_kl(gen_counts, ref_counts,
                                static_cast<double>(gen.size()),
                                static_cast<double>(ref.size()), binning.epsilon);
  return std::exp(-kl);
}

double internal_diversity(std::span<const Fingerprint> fps, int p) {
  if (fps.empty())
    return 0.0;
  if (p < 1)
    throw std::invalid_argument("IntDiv order must be >= 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    for (std::size_t j = 0; j < fps.size(); ++j)
      sum += std::pow(tanimoto(fps[i], fps[j]), p);
  }
  const double n = static_cast<double>(fps.size());
  return 1.0 - std::pow(sum / (n * n), 1.0 / p);
}

double mad(std::span<const double> conditioned, std::span<const double> computed) {
  if (conditioned.size() != computed.size())
    throw std::invalid_argument("mad: length mismatch");
  if (conditioned.empty())
    throw std::invalid_argument("mad: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < conditioned.size(); ++i)
    sum += std::abs(conditioned[i] - computed[i]);
  return sum / static_cast<double>(conditioned.size());
}

bool scaffold_valid(const MolGraph &g, const MolGraph &target_scaffold) {
  if (g.empty() || !check_validity(g))
    return false;
  const MolGraph scaffold = murcko_scaffold(standardize(g));
  const Fingerprint a = morgan_fingerprint(scaffold.empty() ? scaffold
                                                            : standardize(scaffold));
  const Fingerprint b = morgan_fingerprint(target_scaffold.empty()
                                               ? target_scaffold
                                               : standardize(target_scaffold));
  return tanimoto(a, b) >= kScaffoldSimilarityThreshold;
}

ReferenceSet ReferenceSet::from_smiles(std::span<const std::string> smiles,
                                       int *skipped) {
  std::vector<Evaluated> evaluated(smiles.size());
  parallel_for(smiles.size(),
               [&](std::size_t i) { evaluated[i] = evaluate_smiles(smiles[i]); });
  ReferenceSet ref;
  int bad = 0;
  for (Evaluated &e: evaluated) {
    if (!e.valid) {
      ++bad;
      continue;
    }
    ref.canonical.insert(std::move(e.canonical));
    ref.descriptors.push_back(e.desc);
  }
  if (skipped)
    *skipped = bad;
  return ref;
}

GenerationReport generation_metrics(std::span<const std::string> generated,
                                    const ReferenceSet &reference,
                                    std::span<const int> descriptor_set,
                                    const KlBinning &binning) {
  if (generated.empty())
    throw std::invalid_argument("generation_metrics: empty generated list");
  std::vector<Evaluated> evaluated(generated.size());
  parallel_for(generated.size(),
               [&](std::size_t i) { evaluated[i] = evaluate_smiles(generated[i]); });

  GenerationReport r;
  r.binning = binning;
  r.n_generated = static_cast<int>(generated.size());
  std::vector<Fingerprint> fps;
  std::vector<DescriptorVector> descs;
  std::unordered_set<std::string> unique;
  for (const Evaluated &e: evaluated) {
    if (!e.valid)
      continue;
    ++r.n_valid;
    fps.push_back(e.fp);
    descs.push_back(e.desc);
    if (unique.insert(e.canonical).second && !reference.canonical.contains(e.canonical))
      ++r.n_novel;
  }
  r.n_unique = static_cast<int>(unique.size());
  r.validity = static_cast<double>(r.n_valid) / r.n_generated;
  r.uniqueness = r.n_valid > 0 ? static_cast<double>(r.n_unique) / r.n_valid : 0.0;
  r.novelty = r.n_unique > 0 ? static_cast<double>(r.n_novel) / r.n_unique : 0.0;
  r.intdiv1 = internal_diversity(fps, 1);
  r.intdiv2 = internal_diversity(fps, 2);

  std::vector<int> selected(descriptor_set.begin(), descriptor_set.end());
  if (selected.empty()) {
    for (int i = 0; i < kNumDescriptors; ++i)
      selected.push_back(i);
  }
  if (!descs.empty() && !reference.descriptors.empty()) {
    double total = 0.0;
    for (int d: selected) {
      std::vector<double> gen_values;
      std::vector<double> ref_values;
      for (const auto &x: descs)
        gen_values.push_back(descriptor_value(x, d));
      for (const auto &x: reference.descriptors)
        ref_values.push_back(descriptor_value(x, d));
      const auto &info = descriptor_table()[d];
      const double s = klsim(gen_values, ref_values, info.kind, binning);
      r.klsim_per_descriptor[std::string(info.name)] = s;
      total += s;
    }
    r.klsim = total / static_cast<double>(selected.size());
  }
  return r;
}

std::string GenerationReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_generated"] = n_generated;
  j["n_valid"] = n_valid;
  j["n_unique"] = n_unique;
  j["n_novel"] = n_novel;
  j["validity"] = validity;
  j["uniqueness"] = uniqueness;
  j["novelty"] = novelty;
  j["intdiv1"] = intdiv1;
  j["intdiv2"] = intdiv2;
  j["klsim"] = klsim;
  j["klsim_per_descriptor"] = klsim_per_descriptor;
  j["binning"] = { { "bins", binning.bins }, { "epsilon", binning.epsilon } };
  if (!mad.empty())
    j["mad"] = mad;
  if (scaffold_matches)
    j["scaffold_matches"] = *scaffold_matches;
  if (scaffold_exact_matches)
    j["scaffold_exact_matches"] = *scaffold_exact_matches;
  return j.dump(2);
}

}  // namespace chemlm

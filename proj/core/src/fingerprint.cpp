//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <utility>

#include "chemlm/fingerprint.h"
#include "chemlm/random.h"
#include "chemlm/rings.h"

namespace chemlm {
namespace {

std::uint64_t combine(std::uint64_t h, std::uint64_t value) {
  return splitmix64(h ^ splitmix64(value));
}

}  // namespace

Fingerprint::Fingerprint(int nbits) : nbits_(nbits) {
  if (nbits <= 0 || !std::has_single_bit(static_cast<unsigned>(nbits)))
    throw std::invalid_argument("fingerprint length must be a power of two");
  words_.assign((nbits + 63) / 64, 0);
}

int Fingerprint::count() const {
  int n = 0;
  for (std::uint64_t w: words_)
    n += std::popcount(w);
  return n;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> out;
  for (int i = 0; i < nbits_; ++i) {
    if (test(i))
      out.push_back(i);
  }
  return out;
}

Fingerprint morgan_fingerprint(const MolGraph &g, int radius, int nbits) {
  if (radius < 0)
    throw std::invalid_argument("radius must be non-negative");
  Fingerprint fp(nbits);
  const int n = g.num_atoms();
  if (n == 0)
    return fp;

  const RingInfo &rings = g.rings();
  std::vector<std::uint64_t> hash(n);
  for (int i = 0; i < n; ++i) {
    const Atom &a = g.atom(i);
    std::uint64_t h = 0x4d6f7267616e3031ULL;
    h = combine(h, static_cast<std::uint64_t>(a.element));
    h = combine(h, static_cast<std::uint64_t>(heavy_degree(g, i)));
    h = combine(h, static_cast<std::uint64_t>(total_hydrogens(g, i)));
    h = combine(h, static_cast<std::uint64_t>(a.formal_charge + 64));
    h = combine(h, a.aromatic ? 1 : 0);
    h = combine(h, rings.atom_in_ring(i) ? 1 : 0);
    h = combine(h, static_cast<std::uint64_t>(a.isotope.value_or(0)));
    hash[i] = h;
  }
  const auto mask = static_cast<std::uint64_t>(nbits - 1);
  for (int i = 0; i < n; ++i)
    fp.set(static_cast<int>(hash[i] & mask));

  std::vector<std::pair<int, std::uint64_t>> env;
  for (int round = 1; round <= radius; ++round) {
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      env.clear();
      for (const Neighbor &nb: g.neighbors(i))
        env.emplace_back(static_cast<int>(g.bond(nb.bond).order), hash[nb.atom]);
      std::sort(env.begin(), env.end());
      std::uint64_t h = combine(hash[i], static_cast<std::uint64_t>(round));
      for (const auto &[order, nh]: env)
        h = combine(combine(h, static_cast<std::uint64_t>(order)), nh);
      next[i] = h;
    }
    hash = std::move(next);
    for (int i = 0; i < n; ++i)
      fp.set(static_cast<int>(hash[i] & mask));
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.size() != b.size())
    throw std::invalid_argument("fingerprint length mismatch");
  int both = 0;
  int either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += std::popcount(a.words()[i] & b.words()[i]);
    either += std::popcount(a.words()[i] | b.words()[i]);
  }
  if (either == 0)
    return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace chemlm

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_FINGERPRINT_H_
#define CHEMLM_FINGERPRINT_H_

#include <cstdint>
#include <vector>

#include "chemlm/mol_graph.h"

namespace chemlm {

class Fingerprint {
public:
  Fingerprint() = default;
  // nbits must be a power of two; throws std::invalid_argument otherwise.
  explicit Fingerprint(int nbits);

  int size() const { return nbits_; }
  void set(int bit) { words_[bit >> 6] |= std::uint64_t{ 1 } << (bit & 63); }
  bool test(int bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1; }
  int count() const;
  std::vector<int> on_bits() const;
  const std::vector<std::uint64_t> &words() const { return words_; }

  friend bool operator==(const Fingerprint &, const Fingerprint &) = default;

private:
  int nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

// Circular fingerprint: atom invariants hashed with SplitMix64, refined
// `radius` times from sorted (bond order, neighbour hash) pairs; every
// round's atom hash sets bit hash mod nbits. radius 2 corresponds to ECFP4.
Fingerprint morgan_fingerprint(const MolGraph &g, int radius = 2, int nbits = 2048);

// |a & b| / |a | b|; 1 when both are empty. Throws std::invalid_argument on
// length mismatch.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

}  // namespace chemlm

#endif  // CHEMLM_FINGERPRINT_H_

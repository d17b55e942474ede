//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_RANDOM_H_
#define CHEMLM_RANDOM_H_

#include <cstdint>

namespace chemlm {

// SplitMix64 finalizer; also used as the fingerprint hash mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for item `counter` under `master`; results do not
// depend on which thread handles the item.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  return splitmix64(splitmix64(master) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

}  // namespace chemlm

#endif  // CHEMLM_RANDOM_H_

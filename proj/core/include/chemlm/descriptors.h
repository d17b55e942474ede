//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_DESCRIPTORS_H_
#define CHEMLM_DESCRIPTORS_H_

#include <array>
#include <optional>
#include <string_view>

#include "chemlm/mol_graph.h"

namespace chemlm {

struct DescriptorVector {
  double mol_wt = 0.0;
  int num_h_acceptors = 0;
  int num_h_donors = 0;
  int num_rotatable_bonds = 0;
  int num_aliphatic_rings = 0;
  int num_aromatic_rings = 0;
  int heavy_atom_count = 0;
  double ring_atom_fraction = 0.0;
  // Sum over heavy atoms of d*log2(d+1) plus the heavy bond count.
  double graph_complexity = 0.0;
};

enum class DescriptorKind { kContinuous, kInteger };

struct DescriptorInfo {
  std::string_view name;
  DescriptorKind kind;
};

inline constexpr int kNumDescriptors = 9;

// Names and kinds in DescriptorVector field order.
const std::array<DescriptorInfo, kNumDescriptors> &descriptor_table();

double descriptor_value(const DescriptorVector &d, int index);

// Index into descriptor_table() by name.
std::optional<int> find_descriptor(std::string_view name);

// Computed on the standardized (aromatic-perceived) form, so Kekule and
// aromatic spellings agree. Throws KekulizeError for invalid aromatic input.
DescriptorVector descriptors(const MolGraph &g);

}  // namespace chemlm

#endif  // CHEMLM_DESCRIPTORS_H_

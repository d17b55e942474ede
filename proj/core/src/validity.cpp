//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <string>

#include "chemlm/chemistry.h"
#include "chemlm/elements.h"
#include "chemlm/smiles.h"

namespace chemlm {

ValidityVerdict check_validity(const MolGraph &g) {
  if (g.empty())
    return { false, "empty molecule" };

  MolGraph kekule;
  try {
    kekule = kekulize(g);
  } catch (const KekulizeError &e) {
    return { false, e.what() };
  }

  for (int i = 0; i < kekule.num_atoms(); ++i) {
    const Atom &a = kekule.atom(i);
    const auto allowed = charged_valences(a.element, a.formal_charge);
    if (allowed.empty())
      continue;
    const int bonds = sigma_valence(kekule, i);
    const std::string where = std::string(element_symbol(a.element))
                              + " at atom " + std::to_string(i);
    if (a.bracket()) {
      const int total = bonds + *a.explicit_h;
      if (std::find(allowed.begin(), allowed.end(), total) == allowed.end())
        return { false, "valence " + std::to_string(total) + " not allowed for "
                            + where };
    } else if (bonds > allowed.back()) {
      return { false, "valence " + std::to_string(bonds) + " exceeds maximum for "
                          + where };
    }
  }
  return { true, {} };
}

ValidityVerdict check_smiles(std::string_view smiles) {
  try {
    return check_validity(parse_smiles(smiles));
  } catch (const ParseError &e) {
    return { false, e.what() };
  }
}

}  // namespace chemlm

//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_ELEMENTS_H_
#define CHEMLM_ELEMENTS_H_

#include <optional>
#include <span>
#include <string_view>

namespace chemlm {

inline constexpr int kNumElements = 118;

// Title-case symbol for atomic number 1..118.
std::string_view element_symbol(int atomic_number);

// Standard atomic weight in daltons (most stable isotope for elements
// without a conventional weight).
double atomic_mass(int atomic_number);

// Exact title-case symbol lookup; nullopt for unknown symbols.
std::optional<int> find_element(std::string_view symbol);

// Allowed valences used both for implicit hydrogens and for validity
// checking. Empty span means "unchecked". The table is intentionally
// small: B, C, N, O, P, S and the halogens.
std::span<const int> checked_valences(int atomic_number);

// Valences used during kekulization and aromaticity perception. Extends
// checked_valences() with the remaining aromatic-capable elements (Se, As).
std::span<const int> bonding_valences(int atomic_number);

// Valence list for a charged atom by the isoelectronic rule: an atom with
// charge q bonds like element Z - q (N+ like C, O- like F, C- like N).
std::span<const int> charged_valences(int atomic_number, int formal_charge,
                                      bool extended = false);

// Elements allowed to carry an aromatic flag: B C N O P S Se As.
bool is_aromatic_capable(int atomic_number);

// Elements that may appear unbracketed: B C N O P S F Cl Br I.
bool is_organic_subset(int atomic_number);

// Elements that may appear unbracketed in lowercase: b c n o p s.
bool is_organic_aromatic(int atomic_number);

namespace element {
inline constexpr int kH = 1;
inline constexpr int kB = 5;
inline constexpr int kC = 6;
inline constexpr int kN = 7;
inline constexpr int kO = 8;
inline constexpr int kF = 9;
inline constexpr int kP = 15;
inline constexpr int kS = 16;
inline constexpr int kCl = 17;
inline constexpr int kAs = 33;
inline constexpr int kSe = 34;
inline constexpr int kBr = 35;
inline constexpr int kI = 53;
}  // namespace element

}  // namespace chemlm

#endif  // CHEMLM_ELEMENTS_H_

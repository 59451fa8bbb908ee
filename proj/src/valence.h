//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef GRAPPA_SRC_VALENCE_H_
#define GRAPPA_SRC_VALENCE_H_

#include <span>
#include <string_view>

#include "grappa/molecule.h"

namespace grappa {

// 0 if the symbol is not an element.
int atomic_number_from_symbol(std::string_view symbol);

// Allowed neutral valences, ascending; empty for elements without a model.
std::span<const int> standard_valences(int atomic_number);

// Sum of bond orders with aromatic bonds counted as 1.
int bond_valence(const Molecule &mol, int atom);

// Aromatic C, N, P (and B) spend one valence on the pi system.
bool reserves_pi_valence(const Atom &atom);

}  // namespace grappa

#endif  // GRAPPA_SRC_VALENCE_H_

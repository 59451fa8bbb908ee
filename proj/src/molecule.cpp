//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/molecule.h"

#include <algorithm>
#include <array>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "valence.h"

namespace grappa {
namespace {
constexpr std::array<std::string_view, 119> kSymbols = {
  "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
  "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
  "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
  "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
  "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
  "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
  "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
  "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
  "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};
}  // namespace

std::string_view element_symbol(int atomic_number) {
  if (atomic_number < 1 || atomic_number > 118)
    return "?";
  return kSymbols[atomic_number];
}

int atomic_number_from_symbol(std::string_view symbol) {
  for (int z = 1; z <= 118; ++z) {
    if (kSymbols[z] == symbol)
      return z;
  }
  return 0;
}

double atomic_weight(int atomic_number) {
  switch (atomic_number) {
  case 1: return 1.008;
  case 5: return 10.81;
  case 6: return 12.011;
  case 7: return 14.007;
  case 8: return 15.999;
  case 9: return 18.998;
  case 14: return 28.085;
  case 15: return 30.974;
  case 16: return 32.06;
  case 17: return 35.45;
  case 35: return 79.904;
  case 53: return 126.904;
  default:
    // Rough estimate for elements outside the modelled set.
    return 2.5 * atomic_number;
  }
}

std::span<const int> standard_valences(int atomic_number) {
  static constexpr std::array<int, 1> kOne = { 1 };
  static constexpr std::array<int, 1> kTwo = { 2 };
  static constexpr std::array<int, 1> kThree = { 3 };
  static constexpr std::array<int, 1> kFour = { 4 };
  static constexpr std::array<int, 2> kPhosphorus = { 3, 5 };
  static constexpr std::array<int, 3> kSulfur = { 2, 4, 6 };
  switch (atomic_number) {
  case element::kH:
  case element::kF:
  case element::kCl:
  case element::kBr:
  case element::kI: return kOne;
  case element::kO: return kTwo;
  case 5:
  case element::kN: return kThree;
  case element::kC: return kFour;
  case element::kP: return kPhosphorus;
  case element::kS: return kSulfur;
  default: return {};
  }
}

int bond_valence(const Molecule &mol, int atom) {
  int sum = 0;
  for (int b: mol.incident_bonds(atom)) {
    switch (mol.bonds()[b].order) {
    case BondOrder::kSingle:
    case BondOrder::kAromatic: sum += 1; break;
    case BondOrder::kDouble: sum += 2; break;
    case BondOrder::kTriple: sum += 3; break;
    }
  }
  return sum;
}

bool reserves_pi_valence(const Atom &atom) {
  return atom.aromatic
         && (atom.atomic_number == element::kC
             || atom.atomic_number == element::kN
             || atom.atomic_number == element::kP || atom.atomic_number == 5);
}

Molecule::Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds,
                   std::vector<TetraCenter> tetra_centers)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)),
      tetra_centers_(std::move(tetra_centers)), adjacency_(atoms_.size()) {
  const int n = num_atoms();
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < num_bonds(); ++i) {
    const Bond &b = bonds_[i];
    if (b.begin < 0 || b.begin >= n || b.end < 0 || b.end >= n)
      throw std::invalid_argument("bond endpoint out of range");
    if (b.begin == b.end)
      throw std::invalid_argument("bond endpoints must be distinct");
    if (!seen.emplace(std::min(b.begin, b.end), std::max(b.begin, b.end))
             .second)
      throw std::invalid_argument("duplicate bond between atoms "
                                  + std::to_string(b.begin) + " and "
                                  + std::to_string(b.end));
    if (b.order == BondOrder::kAromatic
        && !(atoms_[b.begin].aromatic && atoms_[b.end].aromatic))
      throw std::invalid_argument(
          "aromatic bond between non-aromatic atoms");
    adjacency_[b.begin].push_back(i);
    adjacency_[b.end].push_back(i);
  }
  for (const TetraCenter &t: tetra_centers_) {
    if (t.atom < 0 || t.atom >= n)
      throw std::invalid_argument("stereo center out of range");
  }
}

std::optional<int> Molecule::find_bond(int a, int b) const {
  for (int bi: adjacency_[a]) {
    if (bonds_[bi].other(a) == b)
      return bi;
  }
  return std::nullopt;
}

Molecule Molecule::permuted(const std::vector<int> &permutation) const {
  if (static_cast<int>(permutation.size()) != num_atoms())
    throw std::invalid_argument("permutation size mismatch");
  std::vector<Atom> atoms(atoms_.size());
  for (int i = 0; i < num_atoms(); ++i)
    atoms[permutation[i]] = atoms_[i];
  std::vector<Bond> bonds = bonds_;
  for (Bond &b: bonds) {
    b.begin = permutation[b.begin];
    b.end = permutation[b.end];
  }
  std::vector<TetraCenter> centers = tetra_centers_;
  for (TetraCenter &t: centers)
    t.atom = permutation[t.atom];
  return Molecule(std::move(atoms), std::move(bonds), std::move(centers));
}

ParseError::ParseError(Kind kind, std::size_t offset,
                       const std::string &message)
    : std::runtime_error(std::string(to_string(kind)) + " at offset "
                         + std::to_string(offset) + ": " + message),
      kind_(kind), offset_(offset) { }

std::string_view to_string(ParseError::Kind kind) {
  switch (kind) {
  case ParseError::Kind::kUnbalancedParenthesis:
    return "unbalanced parenthesis";
  case ParseError::Kind::kUnclosedRing: return "unclosed ring";
  case ParseError::Kind::kUnknownAtom: return "unknown atom";
  case ParseError::Kind::kValenceOverflow: return "valence overflow";
  case ParseError::Kind::kDanglingBond: return "dangling bond";
  case ParseError::Kind::kDuplicateBond: return "duplicate bond";
  case ParseError::Kind::kInvalidSyntax: return "invalid syntax";
  case ParseError::Kind::kEmptyInput: return "empty input";
  }
  return "parse error";
}

std::vector<int> implicit_hydrogens(const Molecule &mol) {
  std::vector<int> hs(mol.num_atoms(), 0);
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom &atom = mol.atoms()[i];
    const int base = bond_valence(mol, i);
    const auto valences = standard_valences(atom.atomic_number);

    if (atom.bracket) {
      hs[i] = atom.explicit_h.value_or(0);
      if (!valences.empty()) {
        const int limit = valences.back() + std::abs(atom.formal_charge);
        if (base + hs[i] > limit)
          throw ValenceError(i);
      }
      continue;
    }
    if (valences.empty())
      continue;
    if (base > valences.back())
      throw ValenceError(i);

    const int target = base + (reserves_pi_valence(atom) ? 1 : 0);
    auto fit = std::find_if(valences.begin(), valences.end(),
                            [target](int v) { return v >= target; });
    hs[i] = fit == valences.end() ? 0 : *fit - target;
  }
  return hs;
}

RingMembership ring_membership(const Molecule &mol) {
  const int n = mol.num_atoms();
  RingMembership out;
  out.atom_in_ring.assign(n, false);
  out.bond_in_ring.assign(mol.num_bonds(), true);

  // Tarjan bridge finding, iterative to avoid deep recursion on long chains.
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0)
      continue;
    std::vector<Frame> stack { { root, -1, 0 } };
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto &inc = mol.incident_bonds(f.atom);
      if (f.next < inc.size()) {
        const int b = inc[f.next++];
        if (b == f.parent_bond)
          continue;
        const int nb = mol.bonds()[b].other(f.atom);
        if (disc[nb] < 0) {
          disc[nb] = low[nb] = timer++;
          stack.push_back({ nb, b, 0 });
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb]);
        }
        continue;
      }
      const Frame done = f;
      stack.pop_back();
      if (!stack.empty()) {
        const int parent = stack.back().atom;
        low[parent] = std::min(low[parent], low[done.atom]);
        if (low[done.atom] > disc[parent])
          out.bond_in_ring[done.parent_bond] = false;
      }
    }
  }
  for (int b = 0; b < mol.num_bonds(); ++b) {
    if (out.bond_in_ring[b]) {
      out.atom_in_ring[mol.bonds()[b].begin] = true;
      out.atom_in_ring[mol.bonds()[b].end] = true;
    }
  }
  return out;
}

bool is_allowed_element(int z) {
  switch (z) {
  case element::kC:
  case element::kN:
  case element::kO:
  case element::kCl:
  case element::kS:
  case element::kF:
  case element::kBr:
  case element::kI:
  case element::kP: return true;
  default: return false;
  }
}

std::string_view to_string(ScopeViolation v) {
  switch (v) {
  case ScopeViolation::kNoCarbon: return "no_carbon";
  case ScopeViolation::kDisallowedElement: return "disallowed_element";
  case ScopeViolation::kFormalCharge: return "formal_charge";
  case ScopeViolation::kUnpairedElectrons: return "unpaired_electrons";
  case ScopeViolation::kIsotope: return "isotope";
  }
  return "unknown";
}

std::string ScopeVerdict::reason() const {
  std::string out;
  for (ScopeViolation v: violations) {
    if (!out.empty())
      out += ',';
    out += to_string(v);
  }
  return out;
}

ScopeVerdict validate_scope(const Molecule &mol) {
  bool carbon = false, disallowed = false, charged = false, radical = false,
       isotope = false;
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom &atom = mol.atoms()[i];
    carbon |= atom.atomic_number == element::kC;
    disallowed |= !is_allowed_element(atom.atomic_number);
    charged |= atom.formal_charge != 0;
    isotope |= atom.isotope != 0;
    if (atom.bracket && atom.formal_charge == 0) {
      const auto valences = standard_valences(atom.atomic_number);
      if (!valences.empty()) {
        const int total = bond_valence(mol, i) + atom.explicit_h.value_or(0)
                          + (reserves_pi_valence(atom) ? 1 : 0);
        radical |= total < valences.front();
      }
    }
  }
  ScopeVerdict verdict;
  if (!carbon)
    verdict.violations.push_back(ScopeViolation::kNoCarbon);
  if (disallowed)
    verdict.violations.push_back(ScopeViolation::kDisallowedElement);
  if (charged)
    verdict.violations.push_back(ScopeViolation::kFormalCharge);
  if (radical)
    verdict.violations.push_back(ScopeViolation::kUnpairedElectrons);
  if (isotope)
    verdict.violations.push_back(ScopeViolation::kIsotope);
  return verdict;
}

int carbon_count(const Molecule &mol) {
  return static_cast<int>(std::count_if(
      mol.atoms().begin(), mol.atoms().end(),
      [](const Atom &a) { return a.atomic_number == element::kC; }));
}

}  // namespace grappa

//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef GRAPPA_MOLECULE_H_
#define GRAPPA_MOLECULE_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace grappa {

// Atomic numbers of the elements the model is trained on.
namespace element {
constexpr int kH = 1;
constexpr int kC = 6;
constexpr int kN = 7;
constexpr int kO = 8;
constexpr int kF = 9;
constexpr int kP = 15;
constexpr int kS = 16;
constexpr int kCl = 17;
constexpr int kBr = 35;
constexpr int kI = 53;
}  // namespace element

// Element symbol for an atomic number in [1, 118].
std::string_view element_symbol(int atomic_number);
// Standard atomic weight in g/mol.
double atomic_weight(int atomic_number);

enum class BondOrder { kSingle, kDouble, kTriple, kAromatic };
enum class BondStereo { kNone, kZ, kE };

struct Atom {
  int atomic_number = element::kC;
  bool aromatic = false;
  // Set for bracket atoms; organic-subset atoms derive H from valence.
  std::optional<int> explicit_h;
  int formal_charge = 0;
  // Mass number for isotope-labelled bracket atoms, 0 otherwise.
  int isotope = 0;
  bool bracket = false;
  // Character offset of the atom in the source string.
  std::size_t offset = 0;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;
  BondStereo stereo = BondStereo::kNone;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct TetraCenter {
  int atom = 0;
  // true for '@@', false for '@'.
  bool clockwise = false;
};

// Heavy-atom molecular structure. Immutable once constructed; the constructor
// enforces the structural invariants.
class Molecule {
public:
  Molecule() = default;
  Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds,
           std::vector<TetraCenter> tetra_centers = {});

  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const std::vector<TetraCenter> &tetra_centers() const {
    return tetra_centers_;
  }
  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }

  // Bond indices incident to an atom, in bond order.
  const std::vector<int> &incident_bonds(int atom) const {
    return adjacency_[atom];
  }
  int degree(int atom) const {
    return static_cast<int>(adjacency_[atom].size());
  }
  // Bond index joining two atoms, if any.
  std::optional<int> find_bond(int a, int b) const;

  // Returns a copy with atoms renumbered so that old atom i becomes
  // permutation[i].
  Molecule permuted(const std::vector<int> &permutation) const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<TetraCenter> tetra_centers_;
  std::vector<std::vector<int>> adjacency_;
};

class ParseError: public std::runtime_error {
public:
  enum class Kind {
    kUnbalancedParenthesis,
    kUnclosedRing,
    kUnknownAtom,
    kValenceOverflow,
    kDanglingBond,
    kDuplicateBond,
    kInvalidSyntax,
    kEmptyInput,
  };

  ParseError(Kind kind, std::size_t offset, const std::string &message);

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

private:
  Kind kind_;
  std::size_t offset_;
};

std::string_view to_string(ParseError::Kind kind);

// Bond orders at an atom exceed its largest standard valence.
class ValenceError: public std::runtime_error {
public:
  explicit ValenceError(int atom)
      : std::runtime_error("valence exceeded at atom " + std::to_string(atom)),
        atom_(atom) { }
  int atom() const { return atom_; }

private:
  int atom_;
};

// Parses the supported SMILES subset: organic-subset atoms, aromatic
// lowercase atoms, bracket atoms with isotope/chirality/H-count/charge,
// bonds - = # : / \, branches, ring closures 1-9 and %nn, and '.'.
Molecule parse_smiles(std::string_view text);

// Hydrogen count per atom: bracket atoms keep their explicit count, others
// take the smallest standard valence that fits their bonds.
std::vector<int> implicit_hydrogens(const Molecule &mol);

struct RingMembership {
  std::vector<bool> atom_in_ring;
  std::vector<bool> bond_in_ring;
};

// An atom or bond is in a ring iff it lies on a cycle (i.e. the bond is not
// a bridge, the atom has a non-bridge bond).
RingMembership ring_membership(const Molecule &mol);

enum class ScopeViolation {
  kNoCarbon,
  kDisallowedElement,
  kFormalCharge,
  kUnpairedElectrons,
  kIsotope,
};

std::string_view to_string(ScopeViolation v);

struct ScopeVerdict {
  std::vector<ScopeViolation> violations;

  bool accepted() const { return violations.empty(); }
  std::string reason() const;
};

ScopeVerdict validate_scope(const Molecule &mol);

int carbon_count(const Molecule &mol);

bool is_allowed_element(int atomic_number);

}  // namespace grappa

#endif  // GRAPPA_MOLECULE_H_

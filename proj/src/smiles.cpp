//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grappa/molecule.h"
#include "valence.h"

namespace grappa {
namespace {
using Kind = ParseError::Kind;

struct PendingBond {
  char symbol;
  std::size_t offset;
};

struct RingOpening {
  int atom;
  std::optional<PendingBond> bond;
  std::size_t offset;
};

// A '/' or '\' bond as written: `left` precedes `right` in the string.
struct DirectionalBond {
  int bond;
  int left;
  int right;
  char symbol;
};

struct RawBond {
  int begin;
  int end;
  BondOrder order;
  // No bond symbol was written; aromatic-by-default bonds become single if
  // they turn out not to lie on a ring.
  bool implicit;
};

char flip(char c) { return c == '/' ? '\\' : '/'; }

// Two-sphere approximation of CIP priority for `atom` seen from `from`:
// atomic number, then the neighbours' atomic numbers (multiple bonds
// duplicated, implicit H included) in descending order.
std::vector<int> priority_key(const Molecule &mol,
                              const std::vector<int> &hydrogens, int atom,
                              int from) {
  std::vector<int> shell;
  for (int b: mol.incident_bonds(atom)) {
    const Bond &bond = mol.bonds()[b];
    const int nb = bond.other(atom);
    if (nb == from)
      continue;
    const int z = mol.atoms()[nb].atomic_number;
    const int mult = bond.order == BondOrder::kDouble   ? 2
                     : bond.order == BondOrder::kTriple ? 3
                                                        : 1;
    shell.insert(shell.end(), mult, z);
  }
  shell.insert(shell.end(), hydrogens[atom], element::kH);
  std::sort(shell.rbegin(), shell.rend());
  shell.resize(4, 0);
  shell.insert(shell.begin(), mol.atoms()[atom].atomic_number);
  return shell;
}

// Whether substituent `sub` outranks the other substituent on `center`
// (excluding the double-bond partner). nullopt when the two tie.
std::optional<bool> is_top_substituent(const Molecule &mol,
                                       const std::vector<int> &hydrogens,
                                       int center, int partner, int sub) {
  for (int b: mol.incident_bonds(center)) {
    const int nb = mol.bonds()[b].other(center);
    if (nb == partner || nb == sub)
      continue;
    const auto mine = priority_key(mol, hydrogens, sub, center);
    const auto theirs = priority_key(mol, hydrogens, nb, center);
    if (mine == theirs)
      return std::nullopt;
    return mine > theirs;
  }
  // The only other substituent is hydrogen.
  return true;
}

void assign_double_bond_stereo(const Molecule &mol,
                               const std::vector<int> &hydrogens,
                               const std::vector<DirectionalBond> &dirs,
                               std::vector<Bond> &bonds) {
  const RingMembership rings = ring_membership(mol);
  auto find_dir = [&](int atom, int skip) -> const DirectionalBond * {
    for (const DirectionalBond &d: dirs) {
      if (d.bond != skip && (d.left == atom || d.right == atom))
        return &d;
    }
    return nullptr;
  };
  for (int i = 0; i < mol.num_bonds(); ++i) {
    const Bond &db = mol.bonds()[i];
    if (db.order != BondOrder::kDouble || rings.bond_in_ring[i])
      continue;
    const int a = db.begin, b = db.end;
    const DirectionalBond *da = find_dir(a, i);
    const DirectionalBond *dbn = find_dir(b, i);
    if (!da || !dbn)
      continue;
    const char ua = da->right == a ? da->symbol : flip(da->symbol);
    const char ub = dbn->left == b ? dbn->symbol : flip(dbn->symbol);
    const bool trans = ua == ub;
    const int s = da->left == a ? da->right : da->left;
    const int t = dbn->left == b ? dbn->right : dbn->left;
    const auto s_top = is_top_substituent(mol, hydrogens, a, b, s);
    const auto t_top = is_top_substituent(mol, hydrogens, b, a, t);
    if (!s_top || !t_top)
      continue;
    const bool e = trans != (*s_top != *t_top);
    bonds[i].stereo = e ? BondStereo::kE : BondStereo::kZ;
  }
}

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text): s_(text) { }

  Molecule parse();

private:
  [[noreturn]] void fail(Kind kind, std::size_t offset,
                         const std::string &msg) const {
    throw ParseError(kind, offset, msg);
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }

  int parse_organic_atom();
  int parse_bracket_atom();
  void connect(int atom);
  void ring_bond(int number, std::size_t offset);
  void add_bond(int a, int b, std::optional<PendingBond> sym,
                std::size_t offset);
  int read_number(int max_digits);

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<RawBond> bonds_;
  std::vector<DirectionalBond> directional_;
  std::vector<TetraCenter> tetra_;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, RingOpening> rings_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
};

int SmilesParser::read_number(int max_digits) {
  int value = 0, digits = 0;
  while (digits < max_digits && std::isdigit(static_cast<unsigned char>(peek()))) {
    value = value * 10 + (peek() - '0');
    ++pos_;
    ++digits;
  }
  return digits == 0 ? -1 : value;
}

int SmilesParser::parse_organic_atom() {
  const std::size_t start = pos_;
  Atom atom;
  atom.offset = start;
  const char c = peek();
  if (c == 'C' && peek(1) == 'l') {
    atom.atomic_number = element::kCl;
    pos_ += 2;
  } else if (c == 'B' && peek(1) == 'r') {
    atom.atomic_number = element::kBr;
    pos_ += 2;
  } else {
    switch (c) {
    case 'B': atom.atomic_number = 5; break;
    case 'C': atom.atomic_number = element::kC; break;
    case 'N': atom.atomic_number = element::kN; break;
    case 'O': atom.atomic_number = element::kO; break;
    case 'S': atom.atomic_number = element::kS; break;
    case 'P': atom.atomic_number = element::kP; break;
    case 'F': atom.atomic_number = element::kF; break;
    case 'I': atom.atomic_number = element::kI; break;
    case 'b': atom.atomic_number = 5; atom.aromatic = true; break;
    case 'c': atom.atomic_number = element::kC; atom.aromatic = true; break;
    case 'n': atom.atomic_number = element::kN; atom.aromatic = true; break;
    case 'o': atom.atomic_number = element::kO; atom.aromatic = true; break;
    case 's': atom.atomic_number = element::kS; atom.aromatic = true; break;
    case 'p': atom.atomic_number = element::kP; atom.aromatic = true; break;
    default:
      fail(Kind::kUnknownAtom, start,
           std::string("unknown atom symbol '") + c + "'");
    }
    ++pos_;
  }
  atoms_.push_back(atom);
  return static_cast<int>(atoms_.size()) - 1;
}

int SmilesParser::parse_bracket_atom() {
  const std::size_t start = pos_;
  ++pos_;  // '['
  Atom atom;
  atom.bracket = true;
  atom.offset = start;
  atom.explicit_h = 0;

  const int isotope = read_number(3);
  if (isotope >= 0)
    atom.isotope = isotope;

  const std::size_t sym_start = pos_;
  if (std::islower(static_cast<unsigned char>(peek()))) {
    std::string sym(1, static_cast<char>(std::toupper(peek())));
    int len = 1;
    if (peek() == 's' && peek(1) == 'e') {
      sym = "Se";
      len = 2;
    }
    const int z = atomic_number_from_symbol(sym);
    if (len == 1 && std::string_view("bcnosp").find(peek()) == std::string_view::npos)
      fail(Kind::kUnknownAtom, sym_start, "unknown aromatic symbol");
    atom.atomic_number = z;
    atom.aromatic = true;
    pos_ += len;
  } else if (std::isupper(static_cast<unsigned char>(peek()))) {
    std::string two { peek(), peek(1) };
    int z = 0;
    if (std::islower(static_cast<unsigned char>(peek(1))))
      z = atomic_number_from_symbol(two);
    if (z > 0) {
      pos_ += 2;
    } else {
      z = atomic_number_from_symbol(std::string(1, peek()));
      if (z == 0)
        fail(Kind::kUnknownAtom, sym_start,
             std::string("unknown element in bracket atom"));
      ++pos_;
    }
    atom.atomic_number = z;
  } else {
    fail(Kind::kUnknownAtom, sym_start, "missing element symbol");
  }

  if (peek() == '@') {
    ++pos_;
    bool clockwise = false;
    if (peek() == '@') {
      clockwise = true;
      ++pos_;
    }
    if (std::isupper(static_cast<unsigned char>(peek())) && peek() != 'H')
      fail(Kind::kInvalidSyntax, pos_, "only @ and @@ chirality supported");
    tetra_.push_back({ static_cast<int>(atoms_.size()), clockwise });
  }

  if (peek() == 'H') {
    ++pos_;
    const int h = read_number(1);
    atom.explicit_h = h < 0 ? 1 : h;
  }

  if (peek() == '+' || peek() == '-') {
    const char sign = peek();
    const int unit = sign == '+' ? 1 : -1;
    ++pos_;
    const int n = read_number(2);
    if (n >= 0) {
      atom.formal_charge = unit * n;
    } else {
      int count = 1;
      while (peek() == sign) {
        ++count;
        ++pos_;
      }
      atom.formal_charge = unit * count;
    }
  }

  if (peek() == ':') {
    ++pos_;
    if (read_number(6) < 0)
      fail(Kind::kInvalidSyntax, pos_, "atom class needs digits");
  }

  if (peek() != ']')
    fail(Kind::kInvalidSyntax, at_end() ? s_.size() : pos_,
         "expected ']' to close bracket atom opened at "
             + std::to_string(start));
  ++pos_;
  atoms_.push_back(atom);
  return static_cast<int>(atoms_.size()) - 1;
}

void SmilesParser::add_bond(int a, int b, std::optional<PendingBond> sym,
                            std::size_t offset) {
  if (a == b)
    fail(Kind::kInvalidSyntax, offset, "ring closure onto the same atom");
  for (const RawBond &rb: bonds_) {
    if ((rb.begin == a && rb.end == b) || (rb.begin == b && rb.end == a))
      fail(Kind::kDuplicateBond, offset, "atoms are already bonded");
  }
  RawBond bond { a, b, BondOrder::kSingle, !sym.has_value() };
  if (!sym) {
    if (atoms_[a].aromatic && atoms_[b].aromatic)
      bond.order = BondOrder::kAromatic;
  } else {
    switch (sym->symbol) {
    case '-':
    case '/':
    case '\\': bond.order = BondOrder::kSingle; break;
    case '=': bond.order = BondOrder::kDouble; break;
    case '#': bond.order = BondOrder::kTriple; break;
    case ':':
      if (!(atoms_[a].aromatic && atoms_[b].aromatic))
        fail(Kind::kInvalidSyntax, sym->offset,
             "aromatic bond between non-aromatic atoms");
      bond.order = BondOrder::kAromatic;
      break;
    }
    if (sym->symbol == '/' || sym->symbol == '\\')
      directional_.push_back({ static_cast<int>(bonds_.size()), a, b,
                               sym->symbol });
  }
  bonds_.push_back(bond);
}

void SmilesParser::connect(int atom) {
  if (prev_ >= 0)
    add_bond(prev_, atom, pending_, atoms_[atom].offset);
  else if (pending_)
    fail(Kind::kDanglingBond, pending_->offset, "bond has no left atom");
  pending_.reset();
  prev_ = atom;
}

void SmilesParser::ring_bond(int number, std::size_t offset) {
  if (prev_ < 0)
    fail(Kind::kInvalidSyntax, offset, "ring closure without an atom");
  auto it = rings_.find(number);
  if (it == rings_.end()) {
    rings_.emplace(number, RingOpening { prev_, pending_, offset });
    pending_.reset();
    return;
  }
  RingOpening open = it->second;
  rings_.erase(it);
  std::optional<PendingBond> sym = pending_ ? pending_ : open.bond;
  if (pending_ && open.bond && pending_->symbol != open.bond->symbol) {
    const bool both_directional =
        (pending_->symbol == '/' || pending_->symbol == '\\')
        && (open.bond->symbol == '/' || open.bond->symbol == '\\');
    if (!both_directional)
      fail(Kind::kInvalidSyntax, offset, "conflicting ring-closure bonds");
  }
  // A symbol written at the opening digit reads from the opening atom.
  if (sym && !pending_)
    add_bond(open.atom, prev_, sym, offset);
  else
    add_bond(prev_, open.atom, sym, offset);
  pending_.reset();
}

Molecule SmilesParser::parse() {
  if (s_.empty())
    fail(Kind::kEmptyInput, 0, "empty SMILES");
  while (!at_end()) {
    const char c = peek();
    const std::size_t here = pos_;
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      break;
    if (c == '[') {
      connect(parse_bracket_atom());
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      connect(parse_organic_atom());
    } else if (c == '(') {
      if (prev_ < 0)
        fail(Kind::kInvalidSyntax, here, "branch without a preceding atom");
      if (pending_)
        fail(Kind::kDanglingBond, pending_->offset, "bond before branch");
      branches_.emplace_back(prev_, here);
      ++pos_;
    } else if (c == ')') {
      if (branches_.empty())
        fail(Kind::kUnbalancedParenthesis, here, "unmatched ')'");
      if (pending_)
        fail(Kind::kDanglingBond, pending_->offset, "bond ends a branch");
      if (prev_ < 0 || atoms_.empty())
        fail(Kind::kInvalidSyntax, here, "empty branch");
      prev_ = branches_.back().first;
      branches_.pop_back();
      ++pos_;
    } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/'
               || c == '\\') {
      if (pending_)
        fail(Kind::kInvalidSyntax, here, "two consecutive bond symbols");
      if (prev_ < 0)
        fail(Kind::kDanglingBond, here, "bond has no left atom");
      pending_ = PendingBond { c, here };
      ++pos_;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      ++pos_;
      ring_bond(c - '0', here);
    } else if (c == '%') {
      ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek()))
          || !std::isdigit(static_cast<unsigned char>(peek(1))))
        fail(Kind::kInvalidSyntax, here, "'%' needs two digits");
      const int number = (peek() - '0') * 10 + (peek(1) - '0');
      pos_ += 2;
      ring_bond(number, here);
    } else if (c == '.') {
      if (pending_)
        fail(Kind::kDanglingBond, pending_->offset, "bond before '.'");
      prev_ = -1;
      ++pos_;
    } else if (c == '$') {
      fail(Kind::kInvalidSyntax, here, "quadruple bonds are not supported");
    } else {
      fail(Kind::kInvalidSyntax, here,
           std::string("unexpected character '") + c + "'");
    }
  }
  if (pending_)
    fail(Kind::kDanglingBond, pending_->offset, "bond has no right atom");
  if (!branches_.empty())
    fail(Kind::kUnbalancedParenthesis, branches_.back().second,
         "unclosed '('");
  if (!rings_.empty())
    fail(Kind::kUnclosedRing, rings_.begin()->second.offset,
         "ring bond " + std::to_string(rings_.begin()->first)
             + " is never closed");
  if (atoms_.empty())
    fail(Kind::kEmptyInput, 0, "no atoms");

  // Fold plain explicit hydrogens into their heavy neighbour.
  std::vector<int> degree(atoms_.size(), 0);
  for (const RawBond &b: bonds_) {
    ++degree[b.begin];
    ++degree[b.end];
  }
  std::vector<bool> drop(atoms_.size(), false);
  for (const RawBond &b: bonds_) {
    for (auto [h, heavy]: { std::pair { b.begin, b.end },
                            std::pair { b.end, b.begin } }) {
      const Atom &ha = atoms_[h];
      if (ha.atomic_number == element::kH && ha.isotope == 0
          && ha.formal_charge == 0 && ha.explicit_h.value_or(0) == 0
          && degree[h] == 1 && atoms_[heavy].atomic_number != element::kH
          && b.order == BondOrder::kSingle) {
        drop[h] = true;
        if (atoms_[heavy].bracket)
          atoms_[heavy].explicit_h = atoms_[heavy].explicit_h.value_or(0) + 1;
      }
    }
  }
  std::vector<int> remap(atoms_.size(), -1);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!drop[i]) {
      remap[i] = static_cast<int>(atoms.size());
      atoms.push_back(atoms_[i]);
    }
  }
  std::vector<int> bond_remap(bonds_.size(), -1);
  std::vector<Bond> bonds;
  std::vector<bool> implicit;
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    const RawBond &b = bonds_[i];
    if (remap[b.begin] < 0 || remap[b.end] < 0)
      continue;
    bond_remap[i] = static_cast<int>(bonds.size());
    bonds.push_back({ remap[b.begin], remap[b.end], b.order,
                      BondStereo::kNone });
    implicit.push_back(b.implicit);
  }
  std::vector<TetraCenter> tetra;
  for (const TetraCenter &t: tetra_) {
    if (remap[t.atom] >= 0)
      tetra.push_back({ remap[t.atom], t.clockwise });
  }

  // Default bonds between aromatic atoms that are not ring bonds (biphenyl
  // written without '-') are single bonds.
  {
    const Molecule draft(atoms, bonds);
    const RingMembership rings = ring_membership(draft);
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      if (implicit[i] && bonds[i].order == BondOrder::kAromatic
          && !rings.bond_in_ring[i])
        bonds[i].order = BondOrder::kSingle;
    }
  }

  Molecule mol(atoms, bonds, tetra);
  std::vector<int> hydrogens;
  try {
    hydrogens = implicit_hydrogens(mol);
  } catch (const ValenceError &e) {
    fail(Kind::kValenceOverflow, mol.atoms()[e.atom()].offset,
         "bond orders exceed the allowed valence of "
             + std::string(element_symbol(mol.atoms()[e.atom()].atomic_number)));
  }

  // Double-bond stereo from directional single bonds.
  std::vector<DirectionalBond> dirs;
  for (const DirectionalBond &d: directional_) {
    if (bond_remap[d.bond] >= 0)
      dirs.push_back({ bond_remap[d.bond], remap[d.left], remap[d.right],
                       d.symbol });
  }
  if (!dirs.empty())
    assign_double_bond_stereo(mol, hydrogens, dirs, bonds);
  return Molecule(std::move(atoms), std::move(bonds), std::move(tetra));
}
}  // namespace

Molecule parse_smiles(std::string_view text) {
  return SmilesParser(text).parse();
}

}  // namespace grappa

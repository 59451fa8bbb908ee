//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/molgraph.h"

#include <algorithm>
#include <vector>

#include "valence.h"

namespace grappa {
namespace {
int element_slot(int z) {
  switch (z) {
  case element::kC: return 0;
  case element::kN: return 1;
  case element::kO: return 2;
  case element::kCl: return 3;
  case element::kS: return 4;
  case element::kF: return 5;
  case element::kBr: return 6;
  case element::kI: return 7;
  case element::kP: return 8;
  default: return -1;
  }
}

int order_slot(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle: return 0;
  case BondOrder::kDouble: return 1;
  case BondOrder::kTriple: return 2;
  case BondOrder::kAromatic: return 3;
  }
  return 0;
}

int stereo_slot(BondStereo stereo) {
  switch (stereo) {
  case BondStereo::kNone: return 0;
  case BondStereo::kZ: return 1;
  case BondStereo::kE: return 2;
  }
  return 0;
}
}  // namespace

std::vector<Hybridization> hybridizations(const Molecule &mol,
                                          const std::vector<int> &hydrogens) {
  std::vector<Hybridization> out(mol.num_atoms(), Hybridization::kSP3);
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom &atom = mol.atoms()[i];
    int doubles = 0, triples = 0;
    for (int b: mol.incident_bonds(i)) {
      doubles += mol.bonds()[b].order == BondOrder::kDouble;
      triples += mol.bonds()[b].order == BondOrder::kTriple;
    }
    const bool can_expand_octet =
        atom.atomic_number == element::kS || atom.atomic_number == element::kP;
    if (can_expand_octet && !atom.aromatic) {
      const auto valences = standard_valences(atom.atomic_number);
      if (bond_valence(mol, i) + hydrogens[i] > valences.front()) {
        out[i] = Hybridization::kOther;
        continue;
      }
    }
    if (triples > 0 || doubles >= 2)
      out[i] = Hybridization::kSP;
    else if (atom.aromatic || doubles == 1)
      out[i] = Hybridization::kSP2;
    else
      out[i] = Hybridization::kSP3;
  }
  return out;
}

MolGraph featurize(const Molecule &mol) {
  const ScopeVerdict verdict = validate_scope(mol);
  if (!verdict.accepted())
    throw ScopeError(verdict);

  const std::vector<int> hs = implicit_hydrogens(mol);
  const RingMembership rings = ring_membership(mol);
  const std::vector<Hybridization> hyb = hybridizations(mol, hs);
  const int n = mol.num_atoms();

  MolGraph g;
  g.node_features = Matrix(n, node_feature::kWidth);
  for (int i = 0; i < n; ++i) {
    const Atom &atom = mol.atoms()[i];
    auto row = g.node_features.row_span(i);
    row[node_feature::kElement + element_slot(atom.atomic_number)] = 1.0;
    row[node_feature::kDegree + std::min(mol.degree(i), 4)] = 1.0;
    row[node_feature::kHydrogens + std::min(hs[i], 3)] = 1.0;
    row[node_feature::kHybridization + static_cast<int>(hyb[i])] = 1.0;
    row[node_feature::kAromatic] = atom.aromatic ? 1.0 : 0.0;
    row[node_feature::kInRing] = rings.atom_in_ring[i] ? 1.0 : 0.0;

    const bool n_or_o = atom.atomic_number == element::kN
                        || atom.atomic_number == element::kO;
    g.h_acceptors += n_or_o;
    g.h_donors += n_or_o && hs[i] > 0;
    g.mol_weight +=
        atomic_weight(atom.atomic_number) + hs[i] * atomic_weight(element::kH);
  }

  g.edges.reserve(2 * mol.num_bonds());
  g.edge_features = Matrix(2 * mol.num_bonds(), edge_feature::kWidth);
  for (int b = 0; b < mol.num_bonds(); ++b) {
    const Bond &bond = mol.bonds()[b];
    auto conj = [&](int atom) {
      return hyb[atom] == Hybridization::kSP
             || hyb[atom] == Hybridization::kSP2;
    };
    for (int dir = 0; dir < 2; ++dir) {
      const int r = 2 * b + dir;
      g.edges.emplace_back(dir == 0 ? bond.begin : bond.end,
                           dir == 0 ? bond.end : bond.begin);
      auto row = g.edge_features.row_span(r);
      row[edge_feature::kOrder + order_slot(bond.order)] = 1.0;
      row[edge_feature::kConjugated] =
          conj(bond.begin) && conj(bond.end) ? 1.0 : 0.0;
      row[edge_feature::kInRing] = rings.bond_in_ring[b] ? 1.0 : 0.0;
      row[edge_feature::kStereo + stereo_slot(bond.stereo)] = 1.0;
    }
  }
  return g;
}

MolGraph featurize_smiles(std::string_view smiles) {
  return featurize(parse_smiles(smiles));
}

}  // namespace grappa

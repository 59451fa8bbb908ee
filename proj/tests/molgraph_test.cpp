//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "grappa/molecule.h"
#include "grappa/molgraph.h"
#include "grappa/random.h"

namespace grappa {
namespace {

// Per-atom hydrogen counts, ring flags, Lipinski counts and molecular weight
// recorded from RDKit 2024 for the same strings.
struct ToolkitRecord {
  std::string smiles;
  std::vector<int> hydrogens;
  std::vector<int> atom_ring;
  std::vector<int> bond_ring;
  int donors;
  int acceptors;
  double mol_weight;
};

const std::vector<ToolkitRecord> &toolkit_records() {
  static const std::vector<ToolkitRecord> records = {
    { "CCO", { 3, 2, 1 }, { 0, 0, 0 }, { 0, 0 }, 1, 1, 46.0690 },
    { "c1ccccc1", { 1, 1, 1, 1, 1, 1 }, { 1, 1, 1, 1, 1, 1 },
      { 1, 1, 1, 1, 1, 1 }, 0, 0, 78.1140 },
    { "c1ccncc1", { 1, 1, 1, 0, 1, 1 }, { 1, 1, 1, 1, 1, 1 },
      { 1, 1, 1, 1, 1, 1 }, 0, 1, 79.1020 },
    { "C1CC1CC", { 2, 2, 1, 2, 3 }, { 1, 1, 1, 0, 0 }, { 1, 1, 0, 0, 1 }, 0,
      0, 70.1350 },
    { "CC(=O)O", { 3, 0, 0, 1 }, { 0, 0, 0, 0 }, { 0, 0, 0 }, 1, 2, 60.0520 },
    { "C#N", { 1, 0 }, { 0, 0 }, { 0 }, 0, 1, 27.0260 },
    { "CC(C)(C)C", { 3, 0, 3, 3, 3 }, { 0, 0, 0, 0, 0 }, { 0, 0, 0, 0 }, 0, 0,
      72.1510 },
    { "c1ccoc1", { 1, 1, 1, 0, 1 }, { 1, 1, 1, 1, 1 }, { 1, 1, 1, 1, 1 }, 0,
      1, 68.0750 },
    { "c1cc[nH]c1", { 1, 1, 1, 1, 1 }, { 1, 1, 1, 1, 1 }, { 1, 1, 1, 1, 1 }, 1,
      1, 67.0910 },
    { "CSC", { 3, 0, 3 }, { 0, 0, 0 }, { 0, 0 }, 0, 0, 62.1370 },
    { "CS(=O)(=O)C", { 3, 0, 0, 0, 3 }, { 0, 0, 0, 0, 0 }, { 0, 0, 0, 0 }, 0,
      2, 94.1350 },
    { "ClC(Cl)Cl", { 0, 1, 0, 0 }, { 0, 0, 0, 0 }, { 0, 0, 0 }, 0, 0,
      119.3780 },
    { "CCN(CC)CC", { 3, 2, 0, 2, 3, 2, 3 }, { 0, 0, 0, 0, 0, 0, 0 },
      { 0, 0, 0, 0, 0, 0 }, 0, 1, 101.1930 },
    { "OCCO", { 1, 2, 2, 1 }, { 0, 0, 0, 0 }, { 0, 0, 0 }, 2, 2, 62.0680 },
    { "C=CC=C", { 2, 1, 1, 2 }, { 0, 0, 0, 0 }, { 0, 0, 0 }, 0, 0, 54.0920 },
    { "c1ccc2ccccc2c1", { 1, 1, 1, 0, 1, 1, 1, 1, 0, 1 },
      { 1, 1, 1, 1, 1, 1, 1, 1, 1, 1 }, { 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1 },
      0, 0, 128.1740 },
    { "CC(=O)OC", { 3, 0, 0, 0, 3 }, { 0, 0, 0, 0, 0 }, { 0, 0, 0, 0 }, 0, 2,
      74.0790 },
    { "FC(F)(F)Br", { 0, 0, 0, 0, 0 }, { 0, 0, 0, 0, 0 }, { 0, 0, 0, 0 }, 0,
      0, 148.9090 },
    { "CP(C)C", { 3, 0, 3, 3 }, { 0, 0, 0, 0 }, { 0, 0, 0 }, 0, 0, 76.0790 },
    { "C1CCC2(CC1)CC2", { 2, 2, 2, 0, 2, 2, 2, 2 }, { 1, 1, 1, 1, 1, 1, 1, 1 },
      { 1, 1, 1, 1, 1, 1, 1, 1, 1 }, 0, 0, 110.2000 },
    { "O=C1CCCCC1", { 0, 0, 2, 2, 2, 2, 2 }, { 0, 1, 1, 1, 1, 1, 1 },
      { 0, 1, 1, 1, 1, 1, 1 }, 0, 1, 98.1450 },
    { "CC#CC", { 3, 0, 0, 3 }, { 0, 0, 0, 0 }, { 0, 0, 0 }, 0, 0, 54.0920 },
    { "c1ccsc1", { 1, 1, 1, 0, 1 }, { 1, 1, 1, 1, 1 }, { 1, 1, 1, 1, 1 }, 0,
      0, 84.1430 },
    { "N#CC#N", { 0, 0, 0, 0 }, { 0, 0, 0, 0 }, { 0, 0, 0 }, 0, 2, 52.0360 },
    { "CI", { 3, 0 }, { 0, 0 }, { 0 }, 0, 0, 141.9390 },
  };
  return records;
}

std::vector<int> as_ints(const std::vector<bool> &v) {
  return { v.begin(), v.end() };
}

int count_in_block(std::span<const double> row, int begin, int width) {
  int n = 0;
  for (int k = begin; k < begin + width; ++k)
    n += row[k] == 1.0;
  return n;
}

TEST(ParseSmiles, Ethanol) {
  const Molecule m = parse_smiles("CCO");
  ASSERT_EQ(m.num_atoms(), 3);
  ASSERT_EQ(m.num_bonds(), 2);
  EXPECT_EQ(m.atoms()[0].atomic_number, element::kC);
  EXPECT_EQ(m.atoms()[1].atomic_number, element::kC);
  EXPECT_EQ(m.atoms()[2].atomic_number, element::kO);
  for (const Bond &b: m.bonds())
    EXPECT_EQ(b.order, BondOrder::kSingle);
}

TEST(ParseSmiles, Benzene) {
  const Molecule m = parse_smiles("c1ccccc1");
  ASSERT_EQ(m.num_atoms(), 6);
  ASSERT_EQ(m.num_bonds(), 6);
  for (const Atom &a: m.atoms())
    EXPECT_TRUE(a.aromatic);
  for (const Bond &b: m.bonds())
    EXPECT_EQ(b.order, BondOrder::kAromatic);
  const RingMembership rings = ring_membership(m);
  EXPECT_EQ(std::count(rings.atom_in_ring.begin(), rings.atom_in_ring.end(),
                       true),
            6);
}

TEST(ParseSmiles, DoubleBondStereoMatchesToolkit) {
  struct Case {
    const char *smiles;
    BondStereo stereo;
  };
  // Labels as assigned by RDKit relative to the written neighbours.
  const Case cases[] = {
    { "F/C=C/F", BondStereo::kE },
    { "F/C=C\\F", BondStereo::kZ },
    { "C/C=C/C", BondStereo::kE },
    { "F\\C=C\\F", BondStereo::kE },
    { "CC/C(C)=C(/F)Cl", BondStereo::kZ },
  };
  for (const Case &c: cases) {
    const Molecule m = parse_smiles(c.smiles);
    int doubles = 0;
    for (const Bond &b: m.bonds()) {
      if (b.order == BondOrder::kDouble) {
        ++doubles;
        EXPECT_EQ(b.stereo, c.stereo) << c.smiles;
      } else {
        EXPECT_EQ(b.stereo, BondStereo::kNone) << c.smiles;
      }
    }
    EXPECT_EQ(doubles, 1);
  }
}

TEST(ParseSmiles, UnmarkedDoubleBondHasNoStereo) {
  const Molecule m = parse_smiles("FC=CF");
  EXPECT_EQ(m.bonds()[1].stereo, BondStereo::kNone);
}

TEST(ParseSmiles, BracketAtoms) {
  const Molecule m = parse_smiles("[13CH3][NH3+]");
  ASSERT_EQ(m.num_atoms(), 2);
  EXPECT_EQ(m.atoms()[0].isotope, 13);
  EXPECT_EQ(m.atoms()[0].explicit_h, 3);
  EXPECT_EQ(m.atoms()[1].formal_charge, 1);
  EXPECT_EQ(m.atoms()[1].explicit_h, 3);
}

TEST(ParseSmiles, TetrahedralCentersAreRecorded) {
  const Molecule m = parse_smiles("C[C@@H](O)CC");
  ASSERT_EQ(m.tetra_centers().size(), 1u);
  EXPECT_EQ(m.tetra_centers()[0].atom, 1);
  EXPECT_TRUE(m.tetra_centers()[0].clockwise);
}

TEST(ParseSmiles, PercentRingClosure) {
  const Molecule m = parse_smiles("C%12CCCCC%12");
  EXPECT_EQ(m.num_bonds(), 6);
  EXPECT_TRUE(m.find_bond(0, 5).has_value());
}

TEST(ParseSmiles, DisconnectedComponents) {
  const Molecule m = parse_smiles("CC.O");
  EXPECT_EQ(m.num_atoms(), 3);
  EXPECT_EQ(m.num_bonds(), 1);
}

TEST(ParseSmiles, ErrorsCarryKindAndOffset) {
  struct Case {
    const char *smiles;
    ParseError::Kind kind;
    std::size_t offset;
  };
  const Case cases[] = {
    { "CC(C", ParseError::Kind::kUnbalancedParenthesis, 2 },
    { "CC)C", ParseError::Kind::kUnbalancedParenthesis, 2 },
    { "C1CC", ParseError::Kind::kUnclosedRing, 1 },
    { "CXC", ParseError::Kind::kUnknownAtom, 1 },
    { "C=", ParseError::Kind::kDanglingBond, 1 },
    { "=C", ParseError::Kind::kDanglingBond, 0 },
    { "C(=C)(C)(C)(C)C", ParseError::Kind::kValenceOverflow, 0 },
    { "", ParseError::Kind::kEmptyInput, 0 },
  };
  for (const Case &c: cases) {
    try {
      parse_smiles(c.smiles);
      ADD_FAILURE() << c.smiles << " parsed";
    } catch (const ParseError &e) {
      EXPECT_EQ(e.kind(), c.kind) << c.smiles << ": " << e.what();
      EXPECT_EQ(e.offset(), c.offset) << c.smiles << ": " << e.what();
    }
  }
}

TEST(ImplicitHydrogens, SmallCases) {
  EXPECT_EQ(implicit_hydrogens(parse_smiles("C")), std::vector<int>{ 4 });
  EXPECT_EQ(implicit_hydrogens(parse_smiles("CCO")),
            (std::vector<int>{ 3, 2, 1 }));
  EXPECT_EQ(implicit_hydrogens(parse_smiles("c1ccncc1"))[3], 0);
}

TEST(ImplicitHydrogens, MatchesToolkit) {
  for (const ToolkitRecord &r: toolkit_records())
    EXPECT_EQ(implicit_hydrogens(parse_smiles(r.smiles)), r.hydrogens)
        << r.smiles;
}

TEST(ImplicitHydrogens, ValenceOverflowRaises) {
  // A pentavalent carbon assembled directly bypasses the parser check.
  std::vector<Atom> atoms(6);
  std::vector<Bond> bonds;
  for (int i = 1; i < 6; ++i)
    bonds.push_back({ 0, i, BondOrder::kSingle, BondStereo::kNone });
  EXPECT_THROW(implicit_hydrogens(Molecule(atoms, bonds)), ValenceError);
}

TEST(RingMembership, Cases) {
  const RingMembership tri = ring_membership(parse_smiles("C1CC1"));
  EXPECT_EQ(as_ints(tri.atom_in_ring), (std::vector<int>{ 1, 1, 1 }));
  EXPECT_EQ(as_ints(tri.bond_in_ring), (std::vector<int>{ 1, 1, 1 }));
  const RingMembership chain = ring_membership(parse_smiles("CCO"));
  EXPECT_EQ(as_ints(chain.atom_in_ring), (std::vector<int>{ 0, 0, 0 }));
  const RingMembership ethyl = ring_membership(parse_smiles("C1CC1CC"));
  EXPECT_EQ(as_ints(ethyl.atom_in_ring), (std::vector<int>{ 1, 1, 1, 0, 0 }));
}

// A bond lies on a cycle iff its endpoints stay connected without it.
std::vector<int> brute_force_bond_rings(const Molecule &m) {
  std::vector<int> out;
  for (int skip = 0; skip < m.num_bonds(); ++skip) {
    std::vector<int> seen(m.num_atoms(), 0);
    std::vector<int> stack = { m.bonds()[skip].begin };
    seen[stack[0]] = 1;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (int b: m.incident_bonds(a)) {
        if (b == skip)
          continue;
        const int o = m.bonds()[b].other(a);
        if (!seen[o]) {
          seen[o] = 1;
          stack.push_back(o);
        }
      }
    }
    out.push_back(seen[m.bonds()[skip].end]);
  }
  return out;
}

TEST(RingMembership, MatchesToolkitAndBruteForce) {
  for (const ToolkitRecord &r: toolkit_records()) {
    const Molecule m = parse_smiles(r.smiles);
    const RingMembership rings = ring_membership(m);
    EXPECT_EQ(as_ints(rings.atom_in_ring), r.atom_ring) << r.smiles;
    // Bond numbering differs between toolkits; compare ring-bond totals and
    // check each bond against the brute-force oracle.
    EXPECT_EQ(std::count(rings.bond_in_ring.begin(), rings.bond_in_ring.end(),
                         true),
              std::count(r.bond_ring.begin(), r.bond_ring.end(), 1))
        << r.smiles;
    EXPECT_EQ(as_ints(rings.bond_in_ring), brute_force_bond_rings(m))
        << r.smiles;
  }
}

TEST(Featurize, EthanolOxygen) {
  const MolGraph g = featurize_smiles("CCO");
  const auto o = g.node_features.row_span(2);
  EXPECT_EQ(o[node_feature::kElement + 2], 1.0);
  EXPECT_EQ(o[node_feature::kDegree + 1], 1.0);
  EXPECT_EQ(o[node_feature::kHydrogens + 1], 1.0);
  EXPECT_EQ(o[node_feature::kHybridization + 2], 1.0);
  EXPECT_EQ(o[node_feature::kAromatic], 0.0);
  EXPECT_EQ(o[node_feature::kInRing], 0.0);
  EXPECT_EQ(g.h_donors, 1);
  EXPECT_EQ(g.h_acceptors, 1);
}

TEST(Featurize, BenzeneRowsIdentical) {
  const MolGraph g = featurize_smiles("c1ccccc1");
  for (int i = 0; i < 6; ++i) {
    const auto r = g.node_features.row_span(i);
    EXPECT_EQ(r[node_feature::kAromatic], 1.0);
    EXPECT_EQ(r[node_feature::kInRing], 1.0);
    EXPECT_EQ(r[node_feature::kHybridization + 1], 1.0);
    EXPECT_EQ(r[node_feature::kDegree + 2], 1.0);
    EXPECT_EQ(r[node_feature::kHydrogens + 1], 1.0);
    EXPECT_TRUE(std::equal(r.begin(), r.end(),
                           g.node_features.row_span(0).begin()));
  }
}

TEST(Featurize, NitrileCarbonIsSp) {
  const MolGraph g = featurize_smiles("C#N");
  EXPECT_EQ(g.node_features(0, node_feature::kHybridization + 0), 1.0);
}

TEST(Featurize, HypervalentSulfurIsOther) {
  const MolGraph g = featurize_smiles("CS(=O)(=O)C");
  EXPECT_EQ(g.node_features(1, node_feature::kHybridization + 3), 1.0);
}

TEST(Featurize, StereoReachesEdgeFeatures) {
  const MolGraph g = featurize_smiles("F/C=C/F");
  // Bond 1 is the double bond; both directions carry E.
  EXPECT_EQ(g.edge_features(2, edge_feature::kStereo + 2), 1.0);
  EXPECT_EQ(g.edge_features(3, edge_feature::kStereo + 2), 1.0);
  EXPECT_EQ(g.edge_features(2, edge_feature::kConjugated), 1.0);
  EXPECT_EQ(g.edge_features(0, edge_feature::kConjugated), 0.0);
}

TEST(Featurize, LipinskiCountsAndWeightMatchToolkit) {
  for (const ToolkitRecord &r: toolkit_records()) {
    const MolGraph g = featurize_smiles(r.smiles);
    EXPECT_EQ(g.h_donors, r.donors) << r.smiles;
    EXPECT_EQ(g.h_acceptors, r.acceptors) << r.smiles;
    EXPECT_NEAR(g.mol_weight, r.mol_weight, 0.01) << r.smiles;
  }
}

TEST(Featurize, LayoutInvariantsOnCorpus) {
  for (const ToolkitRecord &r: toolkit_records()) {
    const MolGraph g = featurize_smiles(r.smiles);
    ASSERT_EQ(g.node_features.cols(), 24);
    ASSERT_EQ(g.edge_features.cols(), 9);
    for (int i = 0; i < g.num_nodes(); ++i) {
      const auto row = g.node_features.row_span(i);
      EXPECT_EQ(count_in_block(row, node_feature::kElement, 9), 1);
      EXPECT_EQ(count_in_block(row, node_feature::kDegree, 5), 1);
      EXPECT_EQ(count_in_block(row, node_feature::kHydrogens, 4), 1);
      EXPECT_EQ(count_in_block(row, node_feature::kHybridization, 4), 1);
      const double sum = std::accumulate(row.begin(), row.end(), 0.0);
      EXPECT_GE(sum, 4.0);
      EXPECT_LE(sum, 6.0);
    }
    ASSERT_EQ(g.num_edges() % 2, 0);
    for (int e = 0; e < g.num_edges(); e += 2) {
      EXPECT_EQ(g.edges[e].first, g.edges[e + 1].second);
      EXPECT_EQ(g.edges[e].second, g.edges[e + 1].first);
      const auto a = g.edge_features.row_span(e);
      const auto b = g.edge_features.row_span(e + 1);
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin())) << r.smiles;
      EXPECT_EQ(count_in_block(a, edge_feature::kOrder, 4), 1);
      EXPECT_EQ(count_in_block(a, edge_feature::kStereo, 3), 1);
    }
  }
}

TEST(ValidateScope, Cases) {
  EXPECT_TRUE(validate_scope(parse_smiles("CCO")).accepted());

  const ScopeVerdict ammonium = validate_scope(parse_smiles("[NH4+]"));
  EXPECT_FALSE(ammonium.accepted());
  const auto &v = ammonium.violations;
  EXPECT_NE(std::find(v.begin(), v.end(), ScopeViolation::kNoCarbon), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), ScopeViolation::kFormalCharge),
            v.end());

  const ScopeVerdict acid = validate_scope(parse_smiles("O=S(=O)(O)O"));
  EXPECT_EQ(acid.violations,
            std::vector<ScopeViolation>{ ScopeViolation::kNoCarbon });

  EXPECT_FALSE(validate_scope(parse_smiles("[13CH4]")).accepted());
  EXPECT_FALSE(validate_scope(parse_smiles("C[Si](C)(C)C")).accepted());
  EXPECT_FALSE(validate_scope(parse_smiles("[CH3]")).accepted());
  EXPECT_FALSE(validate_scope(parse_smiles("CB(C)C")).accepted());
  EXPECT_THROW(featurize_smiles("[CH3]"), ScopeError);
}

TEST(CarbonCount, Cases) {
  EXPECT_EQ(carbon_count(parse_smiles("CCO")), 2);
  EXPECT_EQ(carbon_count(parse_smiles("c1ccccc1")), 6);
  EXPECT_EQ(carbon_count(parse_smiles("O=C(O)C")), 2);
}

// Brute-force labeled-graph isomorphism for small molecules.
bool isomorphic(const Molecule &a, const Molecule &b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return false;
  std::vector<int> perm(a.num_atoms());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < a.num_atoms() && ok; ++i)
      ok = a.atoms()[i].atomic_number == b.atoms()[perm[i]].atomic_number
           && a.atoms()[i].aromatic == b.atoms()[perm[i]].aromatic;
    for (const Bond &bond: a.bonds()) {
      if (!ok)
        break;
      const auto hit = b.find_bond(perm[bond.begin], perm[bond.end]);
      ok = hit && b.bonds()[*hit].order == bond.order;
    }
    if (ok)
      return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

TEST(ParseSmiles, EquivalentSpellingsAreIsomorphic) {
  const std::pair<const char *, const char *> pairs[] = {
    { "CCO", "OCC" },
    { "CC(=O)O", "OC(C)=O" },
    { "c1ccncc1", "n1ccccc1" },
    { "C1CC1CC", "CCC1CC1" },
    { "CC(C)(C)C", "C(C)(C)(C)C" },
    { "ClC(Cl)Cl", "C(Cl)(Cl)Cl" },
    { "CCN(CC)CC", "N(CC)(CC)CC" },
  };
  for (const auto &[a, b]: pairs)
    EXPECT_TRUE(isomorphic(parse_smiles(a), parse_smiles(b))) << a << " " << b;
  EXPECT_FALSE(isomorphic(parse_smiles("CCO"), parse_smiles("COC")));
}

TEST(Molecule, PermutedIsIsomorphic) {
  Rng rng(7);
  for (const char *s: { "CC(=O)OC", "c1ccoc1", "CCN(CC)CC" }) {
    const Molecule m = parse_smiles(s);
    std::vector<int> perm(m.num_atoms());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    EXPECT_TRUE(isomorphic(m, m.permuted(perm))) << s;
  }
}

}  // namespace
}  // namespace grappa

//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef GRAPPA_MOLGRAPH_H_
#define GRAPPA_MOLGRAPH_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grappa/matrix.h"
#include "grappa/molecule.h"

namespace grappa {

// Node feature layout (24 columns).
namespace node_feature {
constexpr int kElement = 0;         // C N O Cl S F Br I P
constexpr int kDegree = 9;          // 0 1 2 3 >=4 heavy neighbours
constexpr int kHydrogens = 14;      // 0 1 2 >=3
constexpr int kHybridization = 18;  // SP SP2 SP3 OTHER
constexpr int kAromatic = 22;
constexpr int kInRing = 23;
constexpr int kWidth = 24;
}  // namespace node_feature

// Edge feature layout (9 columns).
namespace edge_feature {
constexpr int kOrder = 0;  // single double triple aromatic
constexpr int kConjugated = 4;
constexpr int kInRing = 5;
constexpr int kStereo = 6;  // none Z E
constexpr int kWidth = 9;
}  // namespace edge_feature

enum class Hybridization { kSP, kSP2, kSP3, kOther };

// Featurized molecular graph consumed by the message-passing layers.
// Every chemical bond appears as two directed edges with identical features.
struct MolGraph {
  Matrix node_features;  // N x 24, 0/1
  std::vector<std::pair<int, int>> edges;
  Matrix edge_features;  // 2 * bonds x 9
  int h_donors = 0;
  int h_acceptors = 0;
  double mol_weight = 0.0;

  int num_nodes() const { return node_features.rows(); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

class ScopeError: public std::invalid_argument {
public:
  explicit ScopeError(const ScopeVerdict &verdict)
      : std::invalid_argument("molecule outside the model scope: "
                              + verdict.reason()),
        verdict_(verdict) { }
  const ScopeVerdict &verdict() const { return verdict_; }

private:
  ScopeVerdict verdict_;
};

std::vector<Hybridization> hybridizations(const Molecule &mol,
                                          const std::vector<int> &hydrogens);

// Throws ScopeError for molecules rejected by validate_scope.
MolGraph featurize(const Molecule &mol);

// parse_smiles followed by featurize.
MolGraph featurize_smiles(std::string_view smiles);

}  // namespace grappa

#endif  // GRAPPA_MOLGRAPH_H_

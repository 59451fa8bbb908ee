//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// Graph attention message passing (GATv2 form with edge features).
//
// Each node attends over its neighbours and itself. The self-loop carries a
// zero edge-feature vector. Head outputs are averaged.

#ifndef GRAPPA_GNN_H_
#define GRAPPA_GNN_H_

#include <span>
#include <stdexcept>
#include <vector>

#include "grappa/matrix.h"
#include "grappa/molgraph.h"
#include "grappa/random.h"
#include "grappa/tensor.h"

namespace grappa {

struct GatHead {
  ad::Tensor theta_v;  // in_dim x out_dim
  ad::Tensor theta_e;  // edge_dim x out_dim
  ad::Tensor att;      // out_dim x 1
};

struct GatLayer {
  int in_dim = 0;
  int out_dim = 0;
  int edge_dim = edge_feature::kWidth;
  double negative_slope = 0.2;
  std::vector<GatHead> heads;

  static GatLayer create(int in_dim, int out_dim, int num_heads, Rng &rng,
                         int edge_dim = edge_feature::kWidth);
  int num_heads() const { return static_cast<int>(heads.size()); }
  std::size_t num_parameters() const;
};

// Directed message edges of a graph including one self-loop per node.
// Edge m carries a message from source[m] into target[m].
struct AttentionGraph {
  int num_nodes = 0;
  std::vector<int> source;
  std::vector<int> target;
  Matrix edge_features;

  static AttentionGraph from(const MolGraph &graph);
  int num_edges() const { return static_cast<int>(source.size()); }
};

// Attention coefficients of one layer: alpha[h][m] for head h and message
// edge m of the AttentionGraph.
using AttentionWeights = std::vector<std::vector<double>>;

class DimensionError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

ad::Tensor gat_forward(const ad::Tensor &x, const AttentionGraph &graph,
                       const GatLayer &layer,
                       AttentionWeights *attention = nullptr);

// Convenience overload building the AttentionGraph on the fly.
ad::Tensor gat_forward(const ad::Tensor &x, const MolGraph &graph,
                       const GatLayer &layer,
                       AttentionWeights *attention = nullptr);

// Applies the layers in sequence to the node features. With no layers the
// node features are returned unchanged. The last layer's coefficients are
// stored in last_attention when given.
ad::Tensor encode(const MolGraph &graph, std::span<const GatLayer> layers,
                  AttentionWeights *last_attention = nullptr);

// Per-atom mean of outgoing attention in the last layer (heads averaged),
// min-max normalized; all ones when the scores do not vary.
std::vector<double> attention_scores(const MolGraph &graph,
                                     std::span<const GatLayer> layers);

}  // namespace grappa

#endif  // GRAPPA_GNN_H_

//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/gnn.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace grappa {
namespace {
constexpr double kScoreTieTolerance = 1e-12;
}  // namespace

GatLayer GatLayer::create(int in_dim, int out_dim, int num_heads, Rng &rng,
                          int edge_dim) {
  if (in_dim < 1 || out_dim < 1 || num_heads < 1 || edge_dim < 1)
    throw DimensionError("GatLayer: dimensions and head count must be >= 1");
  GatLayer layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.edge_dim = edge_dim;
  for (int h = 0; h < num_heads; ++h) {
    GatHead head;
    head.theta_v = ad::Tensor::parameter(glorot_uniform(in_dim, out_dim, rng));
    head.theta_e =
        ad::Tensor::parameter(glorot_uniform(edge_dim, out_dim, rng));
    head.att = ad::Tensor::parameter(glorot_uniform(out_dim, 1, rng));
    layer.heads.push_back(std::move(head));
  }
  return layer;
}

std::size_t GatLayer::num_parameters() const {
  const std::size_t per_head =
      static_cast<std::size_t>(in_dim) * out_dim
      + static_cast<std::size_t>(edge_dim) * out_dim + out_dim;
  return per_head * heads.size();
}

AttentionGraph AttentionGraph::from(const MolGraph &graph) {
  AttentionGraph g;
  g.num_nodes = graph.num_nodes();
  const int e = graph.num_edges();
  const int width = graph.edge_features.cols() > 0 ? graph.edge_features.cols()
                                                   : edge_feature::kWidth;
  g.edge_features = Matrix(e + g.num_nodes, width);
  g.source.reserve(e + g.num_nodes);
  g.target.reserve(e + g.num_nodes);
  for (int m = 0; m < e; ++m) {
    g.source.push_back(graph.edges[m].first);
    g.target.push_back(graph.edges[m].second);
    std::copy_n(graph.edge_features.row_span(m).begin(), width,
                g.edge_features.row_span(m).begin());
  }
  for (int i = 0; i < g.num_nodes; ++i) {
    g.source.push_back(i);
    g.target.push_back(i);
  }
  return g;
}

ad::Tensor gat_forward(const ad::Tensor &x, const AttentionGraph &graph,
                       const GatLayer &layer, AttentionWeights *attention) {
  if (x.rows() != graph.num_nodes)
    throw DimensionError("gat_forward: " + std::to_string(x.rows())
                         + " feature rows for "
                         + std::to_string(graph.num_nodes) + " nodes");
  if (x.cols() != layer.in_dim)
    throw DimensionError("gat_forward: expected input width "
                         + std::to_string(layer.in_dim) + ", got "
                         + std::to_string(x.cols()));
  if (graph.edge_features.cols() != layer.edge_dim)
    throw DimensionError("gat_forward: expected edge width "
                         + std::to_string(layer.edge_dim) + ", got "
                         + std::to_string(graph.edge_features.cols()));
  if (layer.heads.empty())
    throw DimensionError("gat_forward: layer has no heads");

  const ad::Tensor edges = ad::Tensor::constant(graph.edge_features);
  if (attention)
    attention->clear();

  ad::Tensor total;
  for (const GatHead &head: layer.heads) {
    const ad::Tensor xv = ad::matmul(x, head.theta_v);
    const ad::Tensor xi = ad::gather_rows(xv, graph.target);
    const ad::Tensor xj = ad::gather_rows(xv, graph.source);
    const ad::Tensor pre =
        ad::add(ad::add(xi, xj), ad::matmul(edges, head.theta_e));
    const ad::Tensor logits =
        ad::matmul(ad::leaky_relu(pre, layer.negative_slope), head.att);
    const ad::Tensor alpha =
        ad::segment_softmax(logits, graph.target, graph.num_nodes);
    if (attention)
      attention->push_back(alpha.value().values());
    const ad::Tensor out = ad::segment_sum(ad::mul_col(xj, alpha),
                                           graph.target, graph.num_nodes);
    total = total.defined() ? ad::add(total, out) : out;
  }
  if (layer.heads.size() == 1)
    return total;
  return ad::scale(total, 1.0 / static_cast<double>(layer.heads.size()));
}

ad::Tensor gat_forward(const ad::Tensor &x, const MolGraph &graph,
                       const GatLayer &layer, AttentionWeights *attention) {
  return gat_forward(x, AttentionGraph::from(graph), layer, attention);
}

ad::Tensor encode(const MolGraph &graph, std::span<const GatLayer> layers,
                  AttentionWeights *last_attention) {
  ad::Tensor x = ad::Tensor::constant(graph.node_features);
  if (layers.empty())
    return x;
  const AttentionGraph ag = AttentionGraph::from(graph);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const bool last = l + 1 == layers.size();
    x = gat_forward(x, ag, layers[l], last ? last_attention : nullptr);
  }
  return x;
}

std::vector<double> attention_scores(const MolGraph &graph,
                                     std::span<const GatLayer> layers) {
  if (layers.empty())
    throw DimensionError("attention_scores: no GAT layers");
  const int n = graph.num_nodes();
  if (n == 0)
    return {};
  AttentionWeights alpha;
  {
    ad::NoGradGuard no_grad;
    encode(graph, layers, &alpha);
  }
  const AttentionGraph ag = AttentionGraph::from(graph);

  std::vector<double> sum(n, 0.0);
  std::vector<int> count(n, 0);
  for (int m = 0; m < ag.num_edges(); ++m) {
    double mean = 0.0;
    for (const auto &head: alpha)
      mean += head[m];
    sum[ag.source[m]] += mean / static_cast<double>(alpha.size());
    ++count[ag.source[m]];
  }
  std::vector<double> scores(n);
  for (int i = 0; i < n; ++i)
    scores[i] = sum[i] / count[i];

  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min = *lo, max = *hi;
  // Round-off between symmetric atoms must not be stretched to [0, 1].
  if (max - min <= kScoreTieTolerance * std::max(1.0, std::abs(max))) {
    std::fill(scores.begin(), scores.end(), 1.0);
    return scores;
  }
  for (double &s: scores)
    s = (s - min) / (max - min);
  return scores;
}

}  // namespace grappa

//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/pooling.h"

#include <cmath>
#include <stdexcept>

namespace grappa {

std::string to_string(Pooling pooling) {
  return pooling == Pooling::kSum ? "sum" : "interaction";
}

std::optional<Pooling> parse_pooling(std::string_view text) {
  if (text == "sum")
    return Pooling::kSum;
  if (text == "interaction")
    return Pooling::kInteraction;
  return std::nullopt;
}

InteractionPoolParams InteractionPoolParams::create(int dim, Rng &rng) {
  InteractionPoolParams p;
  p.wq = ad::Tensor::parameter(glorot_uniform(dim, dim, rng));
  p.wk = ad::Tensor::parameter(glorot_uniform(dim, dim, rng));
  p.wv = ad::Tensor::parameter(glorot_uniform(dim, dim, rng));
  return p;
}

std::size_t InteractionPoolParams::num_parameters() const {
  return 3 * static_cast<std::size_t>(dim()) * dim();
}

ad::Tensor sum_pool(const ad::Tensor &x) {
  if (x.rows() < 1)
    throw std::invalid_argument("sum_pool: empty graph");
  return ad::row_sum(x);
}

ad::Tensor interaction_pool(const ad::Tensor &x,
                            const InteractionPoolParams &params,
                            Matrix *attention) {
  if (x.rows() < 1)
    throw std::invalid_argument("interaction_pool: empty graph");
  const ad::Tensor q = ad::matmul(x, params.wq);
  const ad::Tensor k = ad::matmul(x, params.wk);
  const ad::Tensor v = ad::matmul(x, params.wv);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(k.cols()));
  const ad::Tensor weights =
      ad::softmax_rows(ad::scale(ad::matmul(q, ad::transpose(k)), inv_sqrt_d));
  if (attention)
    *attention = weights.value();
  return ad::row_sum(ad::matmul(weights, v));
}

}  // namespace grappa

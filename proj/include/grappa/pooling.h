//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef GRAPPA_POOLING_H_
#define GRAPPA_POOLING_H_

#include <optional>
#include <string>
#include <string_view>

#include "grappa/matrix.h"
#include "grappa/random.h"
#include "grappa/tensor.h"

namespace grappa {

enum class Pooling { kSum, kInteraction };

std::string to_string(Pooling pooling);
// Accepts "sum" and "interaction".
std::optional<Pooling> parse_pooling(std::string_view text);

struct InteractionPoolParams {
  ad::Tensor wq;  // d x d
  ad::Tensor wk;
  ad::Tensor wv;

  static InteractionPoolParams create(int dim, Rng &rng);
  int dim() const { return wq.rows(); }
  std::size_t num_parameters() const;
};

// h = sum of node embeddings, as a 1 x d row.
ad::Tensor sum_pool(const ad::Tensor &x);

// Single-head self-attention over the nodes followed by summation of the
// context vectors. The N x N attention matrix is stored when requested.
ad::Tensor interaction_pool(const ad::Tensor &x,
                            const InteractionPoolParams &params,
                            Matrix *attention = nullptr);

}  // namespace grappa

#endif  // GRAPPA_POOLING_H_

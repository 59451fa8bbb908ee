//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// Antoine equation ln(p/kPa) = A - B / (C + T/K) and the prediction head that
// maps a molecule embedding to bounded (A, B, C).

#ifndef GRAPPA_ANTOINE_H_
#define GRAPPA_ANTOINE_H_

#include <stdexcept>
#include <vector>

#include "grappa/random.h"
#include "grappa/tensor.h"

namespace grappa {

struct AntoineParams {
  double A = 0.0;
  double B = 0.0;  // K
  double C = 0.0;  // K
};

struct ParamRanges {
  double a_lo = 5.0, a_hi = 20.0;
  double b_lo = 1500.0, b_hi = 6000.0;
  double c_lo = -300.0, c_hi = 0.0;

  // Strict interior test.
  bool contains(const AntoineParams &p) const {
    return p.A > a_lo && p.A < a_hi && p.B > b_lo && p.B < b_hi && p.C > c_lo
           && p.C < c_hi;
  }
};

class DomainError: public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Throws DomainError when C + T <= 0.
double ln_vapor_pressure(const AntoineParams &p, double temperature_k);
double vapor_pressure_pa(const AntoineParams &p, double temperature_k);
// Throws DomainError when ln(p/kPa) >= A or pressure <= 0.
double boiling_temperature(const AntoineParams &p, double pressure_pa);

// lo + (hi - lo) * sigmoid(raw) per parameter.
AntoineParams scale_raw(double raw_a, double raw_b, double raw_c,
                        const ParamRanges &ranges);

struct HeadLayer {
  ad::Tensor weight;  // in x out
  ad::Tensor bias;    // 1 x out
  ad::BatchNorm bn;
};

struct HeadParams {
  std::vector<HeadLayer> hidden;
  ad::Tensor out_weight;  // width x 3
  ad::Tensor out_bias;    // 1 x 3
  ParamRanges ranges;
  // Affine transform of the (donors, acceptors) inputs; identity by default.
  double count_shift[2] = { 0.0, 0.0 };
  double count_scale[2] = { 1.0, 1.0 };

  static HeadParams create(int embed_dim, int hidden_layers, int width,
                           Rng &rng, const ParamRanges &ranges = {});
  int input_dim() const;
  std::size_t num_parameters() const;
};

// h: B x d embeddings, counts: B x 2 raw (donors, acceptors).
// Returns B x 3 columns (A, B, C). Training mode updates batch-norm state.
ad::Tensor head_forward(const ad::Tensor &h, const Matrix &counts,
                        HeadParams &params, ad::Mode mode);
// Inference mode without touching any state.
ad::Tensor head_forward(const ad::Tensor &h, const Matrix &counts,
                        const HeadParams &params);
AntoineParams head_forward(const ad::Tensor &h, int donors, int acceptors,
                           const HeadParams &params);

ad::Tensor scale_to_ranges(const ad::Tensor &raw, const ParamRanges &ranges);

// Differentiable ln(p/kPa) for B x 3 parameters and B temperatures. The
// denominator C + T is clamped below at min_denominator, which keeps early
// training away from the singular branch.
ad::Tensor ln_vapor_pressure(const ad::Tensor &params,
                             const std::vector<double> &temperature_k,
                             double min_denominator = 1.0);

}  // namespace grappa

#endif  // GRAPPA_ANTOINE_H_

//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/antoine.h"

#include <cmath>
#include <sstream>

namespace grappa {
namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ad::Tensor linear(const ad::Tensor &x, const ad::Tensor &w,
                  const ad::Tensor &b) {
  return ad::add_row(ad::matmul(x, w), b);
}

ad::Tensor head_input(const ad::Tensor &h, const Matrix &counts,
                      const HeadParams &params) {
  if (counts.rows() != h.rows() || counts.cols() != 2)
    throw std::invalid_argument("head_forward: counts must be "
                                + std::to_string(h.rows()) + " x 2, got "
                                + counts.shape_string());
  Matrix c = counts;
  for (int i = 0; i < c.rows(); ++i)
    for (int j = 0; j < 2; ++j)
      c(i, j) = (c(i, j) - params.count_shift[j]) * params.count_scale[j];
  return ad::concat_cols(h, ad::Tensor::constant(std::move(c)));
}

// Shared body; state is null in inference mode.
ad::Tensor head_body(const ad::Tensor &h, const Matrix &counts,
                     const HeadParams &params, HeadParams *state) {
  ad::Tensor x = head_input(h, counts, params);
  for (std::size_t i = 0; i < params.hidden.size(); ++i) {
    const HeadLayer &layer = params.hidden[i];
    x = linear(x, layer.weight, layer.bias);
    x = state ? ad::batch_norm(x, state->hidden[i].bn, ad::Mode::kTrain)
              : ad::batch_norm(x, layer.bn);
    x = ad::elu(x);
  }
  const ad::Tensor raw = linear(x, params.out_weight, params.out_bias);
  return scale_to_ranges(raw, params.ranges);
}
}  // namespace

double ln_vapor_pressure(const AntoineParams &p, double temperature_k) {
  const double denom = p.C + temperature_k;
  if (!(denom > 0.0)) {
    std::ostringstream msg;
    msg << "Antoine equation undefined: C + T = " << denom << " K <= 0";
    throw DomainError(msg.str());
  }
  return p.A - p.B / denom;
}

double vapor_pressure_pa(const AntoineParams &p, double temperature_k) {
  return 1000.0 * std::exp(ln_vapor_pressure(p, temperature_k));
}

double boiling_temperature(const AntoineParams &p, double pressure_pa) {
  if (!(pressure_pa > 0.0))
    throw DomainError("boiling temperature needs a positive pressure");
  const double ln_p = std::log(pressure_pa / 1000.0);
  if (ln_p >= p.A) {
    std::ostringstream msg;
    msg << "no boiling temperature: ln(p/kPa) = " << ln_p << " >= A = "
        << p.A;
    throw DomainError(msg.str());
  }
  return p.B / (p.A - ln_p) - p.C;
}

AntoineParams scale_raw(double raw_a, double raw_b, double raw_c,
                        const ParamRanges &r) {
  return { r.a_lo + (r.a_hi - r.a_lo) * sigmoid(raw_a),
           r.b_lo + (r.b_hi - r.b_lo) * sigmoid(raw_b),
           r.c_lo + (r.c_hi - r.c_lo) * sigmoid(raw_c) };
}

HeadParams HeadParams::create(int embed_dim, int hidden_layers, int width,
                              Rng &rng, const ParamRanges &ranges) {
  if (embed_dim < 1 || hidden_layers < 0 || width < 1)
    throw std::invalid_argument("HeadParams: invalid dimensions");
  HeadParams p;
  p.ranges = ranges;
  int in = embed_dim + 2;
  for (int i = 0; i < hidden_layers; ++i) {
    HeadLayer layer{ ad::Tensor::parameter(glorot_uniform(in, width, rng)),
                     ad::Tensor::parameter(Matrix(1, width)),
                     ad::BatchNorm(width) };
    p.hidden.push_back(std::move(layer));
    in = width;
  }
  p.out_weight = ad::Tensor::parameter(glorot_uniform(in, 3, rng));
  p.out_bias = ad::Tensor::parameter(Matrix(1, 3));
  return p;
}

int HeadParams::input_dim() const {
  return hidden.empty() ? out_weight.rows() : hidden.front().weight.rows();
}

std::size_t HeadParams::num_parameters() const {
  std::size_t n = out_weight.value().size() + out_bias.value().size();
  for (const HeadLayer &l: hidden)
    n += l.weight.value().size() + l.bias.value().size()
         + l.bn.gamma.value().size() + l.bn.beta.value().size();
  return n;
}

ad::Tensor head_forward(const ad::Tensor &h, const Matrix &counts,
                        HeadParams &params, ad::Mode mode) {
  return head_body(h, counts, params,
                   mode == ad::Mode::kTrain ? &params : nullptr);
}

ad::Tensor head_forward(const ad::Tensor &h, const Matrix &counts,
                        const HeadParams &params) {
  return head_body(h, counts, params, nullptr);
}

AntoineParams head_forward(const ad::Tensor &h, int donors, int acceptors,
                           const HeadParams &params) {
  if (h.rows() != 1)
    throw std::invalid_argument("head_forward: expected a single embedding");
  Matrix counts(1, 2);
  counts(0, 0) = donors;
  counts(0, 1) = acceptors;
  const Matrix out = head_forward(h, counts, params).value();
  return { out(0, 0), out(0, 1), out(0, 2) };
}

ad::Tensor scale_to_ranges(const ad::Tensor &raw, const ParamRanges &r) {
  if (raw.cols() != 3)
    throw std::invalid_argument("scale_to_ranges: expected 3 columns");
  Matrix lo(1, 3), span(1, 3);
  lo(0, 0) = r.a_lo;
  lo(0, 1) = r.b_lo;
  lo(0, 2) = r.c_lo;
  span(0, 0) = r.a_hi - r.a_lo;
  span(0, 1) = r.b_hi - r.b_lo;
  span(0, 2) = r.c_hi - r.c_lo;
  return ad::add_row(
      ad::mul_row(ad::sigmoid(raw), ad::Tensor::constant(std::move(span))),
      ad::Tensor::constant(std::move(lo)));
}

ad::Tensor ln_vapor_pressure(const ad::Tensor &params,
                             const std::vector<double> &temperature_k,
                             double min_denominator) {
  if (params.cols() != 3
      || static_cast<std::size_t>(params.rows()) != temperature_k.size())
    throw std::invalid_argument("ln_vapor_pressure: shape mismatch");
  const ad::Tensor t = ad::Tensor::constant(
      Matrix(params.rows(), 1, std::vector<double>(temperature_k)));
  const ad::Tensor a = ad::slice_cols(params, 0, 1);
  const ad::Tensor b = ad::slice_cols(params, 1, 2);
  const ad::Tensor c = ad::slice_cols(params, 2, 3);
  const ad::Tensor denom = ad::clamp_min(ad::add(c, t), min_denominator);
  return ad::sub(a, ad::div(b, denom));
}

}  // namespace grappa

//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// Reverse-mode automatic differentiation over dense double matrices.
//
// Every op returns a Tensor holding a node of a dynamically recorded graph.
// The graph is owned by the tensors that reference it: dropping the final
// loss tensor releases the whole tape. Parameters are leaf tensors that
// survive across tapes and accumulate gradients until zero_grad() is called.
//
// Forward values are checked after every op; NaN or Inf raises
// NonFiniteError naming the op.

#ifndef GRAPPA_TENSOR_H_
#define GRAPPA_TENSOR_H_

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grappa/matrix.h"

namespace grappa::ad {

class NonFiniteError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  bool is_leaf = true;
  const char *op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node &)> backward_fn;

  Matrix &ensure_grad() {
    if (!grad.same_shape(value))
      grad = Matrix(value.rows(), value.cols());
    return grad;
  }
};

class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node): node_(std::move(node)) { }

  static Tensor constant(Matrix value);
  static Tensor parameter(Matrix value);
  static Tensor scalar(double v) { return constant(Matrix(1, 1, v)); }

  bool defined() const { return node_ != nullptr; }
  int rows() const { return node_->value.rows(); }
  int cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }

  const Matrix &value() const { return node_->value; }
  // Parameter values are updated in place by optimizers.
  Matrix &mutable_value() { return node_->value; }

  // Gradient accumulated by backward(); a zero matrix if none was recorded.
  Matrix grad() const;
  void zero_grad();

  // Value of a 1 x 1 tensor.
  double item() const;

  const std::shared_ptr<Node> &node() const { return node_; }

private:
  std::shared_ptr<Node> node_;
};

// Disables recording for the current thread while alive; ops then produce
// constants. Used for inference.
class NoGradGuard {
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

private:
  bool previous_;
};

bool grad_enabled();

// Propagates d(output)/d(leaf) into every reachable leaf that requires grad.
// Intermediate gradients are reset first, so repeated calls on the same tape
// with zeroed leaves are bitwise reproducible.
void backward(const Tensor &output);

// Linear algebra and structure.
Tensor matmul(const Tensor &a, const Tensor &b);
Tensor transpose(const Tensor &a);
Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);
Tensor div(const Tensor &a, const Tensor &b);
Tensor scale(const Tensor &a, double s);
Tensor add_scalar(const Tensor &a, double s);
// a (r x c) + row (1 x c), broadcast over rows.
Tensor add_row(const Tensor &a, const Tensor &row);
// a (r x c) * row (1 x c), broadcast over rows.
Tensor mul_row(const Tensor &a, const Tensor &row);
// a (r x c) * col (r x 1), broadcast over columns.
Tensor mul_col(const Tensor &a, const Tensor &col);
Tensor concat_cols(const Tensor &a, const Tensor &b);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor &a, int begin, int end);
// Sum over rows: (r x c) -> (1 x c).
Tensor row_sum(const Tensor &a);
Tensor row_mean(const Tensor &a);
Tensor sum_all(const Tensor &a);
Tensor mean_all(const Tensor &a);
Tensor gather_rows(const Tensor &a, std::span<const int> index);
// out[segment[i]] += a[i]; output has num_segments rows.
Tensor segment_sum(const Tensor &a, std::span<const int> segment,
                   int num_segments);
// Softmax of a column vector taken separately within each segment.
Tensor segment_softmax(const Tensor &logits, std::span<const int> segment,
                       int num_segments);

// Element-wise.
Tensor softmax_rows(const Tensor &a);
Tensor leaky_relu(const Tensor &a, double negative_slope = 0.2);
Tensor elu(const Tensor &a, double alpha = 1.0);
Tensor sigmoid(const Tensor &a);
Tensor exp(const Tensor &a);
Tensor log(const Tensor &a);
Tensor square(const Tensor &a);
Tensor abs(const Tensor &a);
Tensor pow_scalar(const Tensor &a, double p);
// max(a, lo) with zero gradient where clamped.
Tensor clamp_min(const Tensor &a, double lo);
// 0.5 r^2 for |r| <= delta, delta (|r| - 0.5 delta) otherwise.
Tensor huber(const Tensor &a, double delta);

enum class Mode { kTrain, kInfer };

struct BatchNorm {
  Tensor gamma;
  Tensor beta;
  Matrix running_mean;
  Matrix running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  explicit BatchNorm(int features = 0)
      : gamma(Tensor::parameter(Matrix(1, features, 1.0))),
        beta(Tensor::parameter(Matrix(1, features, 0.0))),
        running_mean(1, features, 0.0), running_var(1, features, 1.0) { }

  int features() const { return running_mean.cols(); }
};

// Training mode normalizes by the (biased) batch statistics and updates the
// running estimates with the unbiased variance; requires at least two rows.
Tensor batch_norm(const Tensor &x, BatchNorm &state, Mode mode);
// Inference-mode normalization with the running statistics.
Tensor batch_norm(const Tensor &x, const BatchNorm &state);

}  // namespace grappa::ad

#endif  // GRAPPA_TENSOR_H_

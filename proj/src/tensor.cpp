//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace grappa::ad {
namespace {
using NodePtr = std::shared_ptr<Node>;

thread_local bool g_grad_enabled = true;

void require(bool cond, const char *op, const std::string &what) {
  if (!cond)
    throw ShapeError(std::string(op) + ": " + what);
}

void check_finite(const Matrix &m, const char *op) {
  for (double v: m.values()) {
    if (!std::isfinite(v))
      throw NonFiniteError(std::string("non-finite value produced by ") + op);
  }
}

// Records a new node. The backward function is kept only when some parent
// participates in differentiation.
Tensor make(const char *op, Matrix value, std::vector<NodePtr> parents,
            std::function<void(Node &)> backward_fn) {
  check_finite(value, op);
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  node->is_leaf = false;
  node->requires_grad = g_grad_enabled
                        && std::any_of(parents.begin(), parents.end(),
                                       [](const NodePtr &p) {
                                         return p->requires_grad;
                                       });
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

template <class F>
Matrix map(const Matrix &a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = f(a[i]);
  return out;
}

// Element-wise op whose derivative is a function of input and output.
template <class F, class DF>
Tensor unary(const char *op, const Tensor &a, F f, DF df) {
  Matrix out = map(a.value(), f);
  return make(op, std::move(out), { a.node() }, [df](Node &self) {
    Node &p = *self.parents[0];
    if (!p.requires_grad)
      return;
    Matrix &g = p.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] += self.grad[i] * df(p.value[i], self.value[i]);
  });
}

void accumulate(Node &p, const Matrix &delta) {
  if (!p.requires_grad)
    return;
  Matrix &g = p.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] += delta[i];
}

Matrix matmul_raw(const Matrix &a, const Matrix &b) {
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double *orow = out.row_span(i).data();
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0)
        continue;
      const double *brow = b.row_span(k).data();
      for (int j = 0; j < b.cols(); ++j)
        orow[j] += aik * brow[j];
    }
  }
  return out;
}

// a^T b without materializing the transpose.
Matrix matmul_tn(const Matrix &a, const Matrix &b) {
  Matrix out(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k) {
    const double *arow = a.row_span(k).data();
    const double *brow = b.row_span(k).data();
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0)
        continue;
      double *orow = out.row_span(i).data();
      for (int j = 0; j < b.cols(); ++j)
        orow[j] += aki * brow[j];
    }
  }
  return out;
}

// a b^T without materializing the transpose.
Matrix matmul_nt(const Matrix &a, const Matrix &b) {
  Matrix out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double *arow = a.row_span(i).data();
    for (int j = 0; j < b.rows(); ++j) {
      const double *brow = b.row_span(j).data();
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k)
        s += arow[k] * brow[k];
      out(i, j) = s;
    }
  }
  return out;
}
}  // namespace

NoGradGuard::NoGradGuard(): previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Tensor Tensor::constant(Matrix value) {
  check_finite(value, "constant");
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
  check_finite(value, "parameter");
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->op = "parameter";
  return Tensor(std::move(node));
}

Matrix Tensor::grad() const {
  if (node_->grad.same_shape(node_->value))
    return node_->grad;
  return Matrix(rows(), cols());
}

void Tensor::zero_grad() {
  if (node_->grad.same_shape(node_->value))
    node_->grad.fill(0.0);
}

double Tensor::item() const {
  require(rows() == 1 && cols() == 1, "item", "tensor is not 1x1, got "
                                                  + value().shape_string());
  return value()[0];
}

void backward(const Tensor &output) {
  require(output.rows() == 1 && output.cols() == 1, "backward",
          "output must be a scalar, got " + output.value().shape_string());
  Node *root = output.node().get();
  if (!root->requires_grad)
    return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node *> order;
  std::unordered_set<Node *> seen;
  std::vector<std::pair<Node *, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->parents.size()) {
      Node *parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second)
        stack.emplace_back(parent, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  for (Node *n: order) {
    if (!n->is_leaf)
      n->ensure_grad().fill(0.0);
  }
  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node *n = *it;
    if (!n->is_leaf && n->backward_fn)
      n->backward_fn(*n);
  }
}

Tensor matmul(const Tensor &a, const Tensor &b) {
  require(a.cols() == b.rows(), "matmul",
          a.value().shape_string() + " x " + b.value().shape_string());
  return make("matmul", matmul_raw(a.value(), b.value()),
              { a.node(), b.node() }, [](Node &self) {
                Node &pa = *self.parents[0];
                Node &pb = *self.parents[1];
                if (pa.requires_grad)
                  accumulate(pa, matmul_nt(self.grad, pb.value));
                if (pb.requires_grad)
                  accumulate(pb, matmul_tn(pa.value, self.grad));
              });
}

Tensor transpose(const Tensor &a) {
  const Matrix &v = a.value();
  Matrix out(v.cols(), v.rows());
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j)
      out(j, i) = v(i, j);
  return make("transpose", std::move(out), { a.node() }, [](Node &self) {
    Node &p = *self.parents[0];
    Matrix &g = p.ensure_grad();
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j)
        g(i, j) += self.grad(j, i);
  });
}

Tensor add(const Tensor &a, const Tensor &b) {
  require(a.value().same_shape(b.value()), "add",
          a.value().shape_string() + " vs " + b.value().shape_string());
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += b.value()[i];
  return make("add", std::move(out), { a.node(), b.node() }, [](Node &self) {
    accumulate(*self.parents[0], self.grad);
    accumulate(*self.parents[1], self.grad);
  });
}

Tensor sub(const Tensor &a, const Tensor &b) {
  require(a.value().same_shape(b.value()), "sub",
          a.value().shape_string() + " vs " + b.value().shape_string());
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] -= b.value()[i];
  return make("sub", std::move(out), { a.node(), b.node() }, [](Node &self) {
    accumulate(*self.parents[0], self.grad);
    Node &pb = *self.parents[1];
    if (pb.requires_grad) {
      Matrix &g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor &a, const Tensor &b) {
  require(a.value().same_shape(b.value()), "mul",
          a.value().shape_string() + " vs " + b.value().shape_string());
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= b.value()[i];
  return make("mul", std::move(out), { a.node(), b.node() }, [](Node &self) {
    Node &pa = *self.parents[0];
    Node &pb = *self.parents[1];
    if (pa.requires_grad) {
      Matrix &g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      Matrix &g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += self.grad[i] * pa.value[i];
    }
  });
}

Tensor div(const Tensor &a, const Tensor &b) {
  require(a.value().same_shape(b.value()), "div",
          a.value().shape_string() + " vs " + b.value().shape_string());
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] /= b.value()[i];
  return make("div", std::move(out), { a.node(), b.node() }, [](Node &self) {
    Node &pa = *self.parents[0];
    Node &pb = *self.parents[1];
    if (pa.requires_grad) {
      Matrix &g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += self.grad[i] / pb.value[i];
    }
    if (pb.requires_grad) {
      Matrix &g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] -= self.grad[i] * self.value[i] / pb.value[i];
    }
  });
}

Tensor scale(const Tensor &a, double s) {
  return unary(
      "scale", a, [s](double x) { return s * x; },
      [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor &a, double s) {
  return unary(
      "add_scalar", a, [s](double x) { return x + s; },
      [](double, double) { return 1.0; });
}

Tensor add_row(const Tensor &a, const Tensor &row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row",
          a.value().shape_string() + " + " + row.value().shape_string());
  Matrix out = a.value();
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j)
      out(i, j) += row.value()(0, j);
  return make("add_row", std::move(out), { a.node(), row.node() },
              [](Node &self) {
                accumulate(*self.parents[0], self.grad);
                Node &pr = *self.parents[1];
                if (pr.requires_grad) {
                  Matrix &g = pr.ensure_grad();
                  for (int i = 0; i < self.grad.rows(); ++i)
                    for (int j = 0; j < self.grad.cols(); ++j)
                      g(0, j) += self.grad(i, j);
                }
              });
}

Tensor mul_row(const Tensor &a, const Tensor &row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "mul_row",
          a.value().shape_string() + " * " + row.value().shape_string());
  Matrix out = a.value();
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j)
      out(i, j) *= row.value()(0, j);
  return make("mul_row", std::move(out), { a.node(), row.node() },
              [](Node &self) {
                Node &pa = *self.parents[0];
                Node &pr = *self.parents[1];
                if (pa.requires_grad) {
                  Matrix &g = pa.ensure_grad();
                  for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < g.cols(); ++j)
                      g(i, j) += self.grad(i, j) * pr.value(0, j);
                }
                if (pr.requires_grad) {
                  Matrix &g = pr.ensure_grad();
                  for (int i = 0; i < self.grad.rows(); ++i)
                    for (int j = 0; j < self.grad.cols(); ++j)
                      g(0, j) += self.grad(i, j) * pa.value(i, j);
                }
              });
}

Tensor mul_col(const Tensor &a, const Tensor &col) {
  require(col.cols() == 1 && col.rows() == a.rows(), "mul_col",
          a.value().shape_string() + " * " + col.value().shape_string());
  Matrix out = a.value();
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j)
      out(i, j) *= col.value()(i, 0);
  return make("mul_col", std::move(out), { a.node(), col.node() },
              [](Node &self) {
                Node &pa = *self.parents[0];
                Node &pc = *self.parents[1];
                if (pa.requires_grad) {
                  Matrix &g = pa.ensure_grad();
                  for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < g.cols(); ++j)
                      g(i, j) += self.grad(i, j) * pc.value(i, 0);
                }
                if (pc.requires_grad) {
                  Matrix &g = pc.ensure_grad();
                  for (int i = 0; i < self.grad.rows(); ++i)
                    for (int j = 0; j < self.grad.cols(); ++j)
                      g(i, 0) += self.grad(i, j) * pa.value(i, j);
                }
              });
}

Tensor concat_cols(const Tensor &a, const Tensor &b) {
  require(a.rows() == b.rows(), "concat_cols",
          a.value().shape_string() + " | " + b.value().shape_string());
  const int ca = a.cols();
  Matrix out(a.rows(), ca + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < ca; ++j)
      out(i, j) = a.value()(i, j);
    for (int j = 0; j < b.cols(); ++j)
      out(i, ca + j) = b.value()(i, j);
  }
  return make("concat_cols", std::move(out), { a.node(), b.node() },
              [ca](Node &self) {
                Node &pa = *self.parents[0];
                Node &pb = *self.parents[1];
                if (pa.requires_grad) {
                  Matrix &g = pa.ensure_grad();
                  for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < g.cols(); ++j)
                      g(i, j) += self.grad(i, j);
                }
                if (pb.requires_grad) {
                  Matrix &g = pb.ensure_grad();
                  for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < g.cols(); ++j)
                      g(i, j) += self.grad(i, ca + j);
                }
              });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  const int cols = parts.front().cols();
  int rows = 0;
  std::vector<NodePtr> parents;
  parents.reserve(parts.size());
  for (const Tensor &t: parts) {
    require(t.cols() == cols, "concat_rows", "column mismatch");
    rows += t.rows();
    parents.push_back(t.node());
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Tensor &t: parts) {
    std::copy(t.value().values().begin(), t.value().values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += t.value().size();
  }
  return make("concat_rows", std::move(out), std::move(parents),
              [](Node &self) {
                std::size_t off = 0;
                for (const NodePtr &p: self.parents) {
                  if (p->requires_grad) {
                    Matrix &g = p->ensure_grad();
                    for (std::size_t i = 0; i < g.size(); ++i)
                      g[i] += self.grad[off + i];
                  }
                  off += p->value.size();
                }
              });
}

Tensor slice_cols(const Tensor &a, int begin, int end) {
  require(0 <= begin && begin <= end && end <= a.cols(), "slice_cols",
          "range out of bounds");
  Matrix out(a.rows(), end - begin);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = begin; j < end; ++j)
      out(i, j - begin) = a.value()(i, j);
  return make("slice_cols", std::move(out), { a.node() },
              [begin](Node &self) {
                Matrix &g = self.parents[0]->ensure_grad();
                for (int i = 0; i < self.grad.rows(); ++i)
                  for (int j = 0; j < self.grad.cols(); ++j)
                    g(i, begin + j) += self.grad(i, j);
              });
}

Tensor row_sum(const Tensor &a) {
  Matrix out(1, a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out(0, j) += a.value()(i, j);
  return make("row_sum", std::move(out), { a.node() }, [](Node &self) {
    Matrix &g = self.parents[0]->ensure_grad();
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j)
        g(i, j) += self.grad(0, j);
  });
}

Tensor row_mean(const Tensor &a) {
  require(a.rows() > 0, "row_mean", "no rows");
  return scale(row_sum(a), 1.0 / a.rows());
}

Tensor sum_all(const Tensor &a) {
  double s = 0.0;
  for (double v: a.value().values())
    s += v;
  return make("sum_all", Matrix(1, 1, s), { a.node() }, [](Node &self) {
    Matrix &g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] += self.grad[0];
  });
}

Tensor mean_all(const Tensor &a) {
  require(a.value().size() > 0, "mean_all", "empty tensor");
  return scale(sum_all(a), 1.0 / static_cast<double>(a.value().size()));
}

Tensor gather_rows(const Tensor &a, std::span<const int> index) {
  const int cols = a.cols();
  Matrix out(static_cast<int>(index.size()), cols);
  for (std::size_t r = 0; r < index.size(); ++r) {
    require(0 <= index[r] && index[r] < a.rows(), "gather_rows",
            "index out of range");
    auto src = a.value().row_span(index[r]);
    std::copy(src.begin(), src.end(),
              out.row_span(static_cast<int>(r)).begin());
  }
  std::vector<int> idx(index.begin(), index.end());
  return make("gather_rows", std::move(out), { a.node() },
              [idx = std::move(idx)](Node &self) {
                Matrix &g = self.parents[0]->ensure_grad();
                for (std::size_t r = 0; r < idx.size(); ++r) {
                  auto dst = g.row_span(idx[r]);
                  auto src = self.grad.row_span(static_cast<int>(r));
                  for (std::size_t j = 0; j < dst.size(); ++j)
                    dst[j] += src[j];
                }
              });
}

Tensor segment_sum(const Tensor &a, std::span<const int> segment,
                   int num_segments) {
  require(static_cast<int>(segment.size()) == a.rows(), "segment_sum",
          "segment ids must match row count");
  Matrix out(num_segments, a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    require(0 <= segment[r] && segment[r] < num_segments, "segment_sum",
            "segment id out of range");
    auto dst = out.row_span(segment[r]);
    auto src = a.value().row_span(r);
    for (std::size_t j = 0; j < dst.size(); ++j)
      dst[j] += src[j];
  }
  std::vector<int> seg(segment.begin(), segment.end());
  return make("segment_sum", std::move(out), { a.node() },
              [seg = std::move(seg)](Node &self) {
                Matrix &g = self.parents[0]->ensure_grad();
                for (int r = 0; r < g.rows(); ++r) {
                  auto dst = g.row_span(r);
                  auto src = self.grad.row_span(seg[r]);
                  for (std::size_t j = 0; j < dst.size(); ++j)
                    dst[j] += src[j];
                }
              });
}

Tensor segment_softmax(const Tensor &logits, std::span<const int> segment,
                       int num_segments) {
  require(logits.cols() == 1, "segment_softmax", "logits must be a column");
  require(static_cast<int>(segment.size()) == logits.rows(),
          "segment_softmax", "segment ids must match row count");
  const int m = logits.rows();
  std::vector<double> seg_max(num_segments,
                              -std::numeric_limits<double>::infinity());
  for (int r = 0; r < m; ++r) {
    require(0 <= segment[r] && segment[r] < num_segments, "segment_softmax",
            "segment id out of range");
    seg_max[segment[r]] = std::max(seg_max[segment[r]], logits.value()[r]);
  }
  Matrix out(m, 1);
  std::vector<double> seg_sum(num_segments, 0.0);
  for (int r = 0; r < m; ++r) {
    out[r] = std::exp(logits.value()[r] - seg_max[segment[r]]);
    seg_sum[segment[r]] += out[r];
  }
  for (int r = 0; r < m; ++r)
    out[r] /= seg_sum[segment[r]];
  std::vector<int> seg(segment.begin(), segment.end());
  return make("segment_softmax", std::move(out), { logits.node() },
              [seg = std::move(seg), num_segments](Node &self) {
                std::vector<double> dot(num_segments, 0.0);
                for (std::size_t r = 0; r < seg.size(); ++r)
                  dot[seg[r]] += self.grad[r] * self.value[r];
                Matrix &g = self.parents[0]->ensure_grad();
                for (std::size_t r = 0; r < seg.size(); ++r)
                  g[r] += self.value[r] * (self.grad[r] - dot[seg[r]]);
              });
}

Tensor softmax_rows(const Tensor &a) {
  const Matrix &v = a.value();
  Matrix out(v.rows(), v.cols());
  for (int i = 0; i < v.rows(); ++i) {
    auto in = v.row_span(i);
    auto o = out.row_span(i);
    const double mx = *std::max_element(in.begin(), in.end());
    double s = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      s += o[j];
    }
    for (double &x: o)
      x /= s;
  }
  return make("softmax_rows", std::move(out), { a.node() }, [](Node &self) {
    Matrix &g = self.parents[0]->ensure_grad();
    for (int i = 0; i < g.rows(); ++i) {
      auto y = self.value.row_span(i);
      auto gy = self.grad.row_span(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j)
        dot += gy[j] * y[j];
      auto gx = g.row_span(i);
      for (std::size_t j = 0; j < y.size(); ++j)
        gx[j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor leaky_relu(const Tensor &a, double negative_slope) {
  return unary(
      "leaky_relu", a,
      [negative_slope](double x) { return x >= 0.0 ? x : negative_slope * x; },
      [negative_slope](double x, double) {
        return x >= 0.0 ? 1.0 : negative_slope;
      });
}

Tensor elu(const Tensor &a, double alpha) {
  return unary(
      "elu", a,
      [alpha](double x) { return x > 0.0 ? x : alpha * std::expm1(x); },
      [alpha](double x, double y) { return x > 0.0 ? 1.0 : y + alpha; });
}

Tensor sigmoid(const Tensor &a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0.0)
          return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor &a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor &a) {
  return unary(
      "log", a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor square(const Tensor &a) {
  return unary(
      "square", a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Tensor abs(const Tensor &a) {
  return unary(
      "abs", a, [](double x) { return std::fabs(x); },
      [](double x, double) {
        return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
      });
}

Tensor pow_scalar(const Tensor &a, double p) {
  return unary(
      "pow_scalar", a, [p](double x) { return std::pow(x, p); },
      [p](double x, double) { return p * std::pow(x, p - 1.0); });
}

Tensor clamp_min(const Tensor &a, double lo) {
  return unary(
      "clamp_min", a, [lo](double x) { return x < lo ? lo : x; },
      [lo](double x, double) { return x < lo ? 0.0 : 1.0; });
}

Tensor huber(const Tensor &a, double delta) {
  if (!(delta > 0.0))
    throw std::invalid_argument("huber: delta must be positive");
  return unary(
      "huber", a,
      [delta](double r) {
        const double ar = std::fabs(r);
        return ar <= delta ? 0.5 * r * r : delta * (ar - 0.5 * delta);
      },
      [delta](double r, double) {
        if (std::fabs(r) <= delta)
          return r;
        return r > 0.0 ? delta : -delta;
      });
}

Tensor batch_norm(const Tensor &x, const BatchNorm &state) {
  require(x.cols() == state.features(), "batch_norm",
          "feature count mismatch: " + x.value().shape_string());
  Matrix shift(1, x.cols());
  Matrix inv(1, x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    inv(0, j) = 1.0 / std::sqrt(state.running_var(0, j) + state.eps);
    shift(0, j) = -state.running_mean(0, j);
  }
  Tensor centered = add_row(x, Tensor::constant(std::move(shift)));
  Tensor normed = mul_row(centered, Tensor::constant(std::move(inv)));
  return add_row(mul_row(normed, state.gamma), state.beta);
}

Tensor batch_norm(const Tensor &x, BatchNorm &state, Mode mode) {
  require(x.cols() == state.features(), "batch_norm",
          "feature count mismatch: " + x.value().shape_string());
  if (mode == Mode::kInfer)
    return batch_norm(x, std::as_const(state));

  if (x.rows() < 2)
    throw std::invalid_argument(
        "batch_norm: training mode needs at least two rows");
  Tensor mean = row_mean(x);
  Tensor centered = add_row(x, scale(mean, -1.0));
  Tensor var = row_mean(square(centered));
  Tensor inv_std = pow_scalar(add_scalar(var, state.eps), -0.5);
  Tensor normed = mul_row(centered, inv_std);

  const double n = x.rows();
  for (int j = 0; j < x.cols(); ++j) {
    const double m = state.momentum;
    state.running_mean(0, j) =
        (1.0 - m) * state.running_mean(0, j) + m * mean.value()(0, j);
    state.running_var(0, j) = (1.0 - m) * state.running_var(0, j)
                              + m * var.value()(0, j) * n / (n - 1.0);
  }
  return add_row(mul_row(normed, state.gamma), state.beta);
}

}  // namespace grappa::ad

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <type_traits>
#include <vector>

#include "offtrack/common.hpp"

// Reverse-mode tape over dense matrices. Every intermediate of a model
// forward pass is a node holding its value; backward() walks the tape in
// reverse creation order and accumulates adjoints. Row dimension is
// batch-like (windows x agents or windows x edges), so the heavy lifting
// stays in Eigen GEMMs. All reductions run in fixed orders, which keeps
// gradients bit-reproducible.

namespace ot::ad {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using RowIndices = std::shared_ptr<const std::vector<int>>;

struct Var {
  int idx = -1;
  int rows = 0;
  int cols = 0;
  bool valid() const { return idx >= 0; }
};

template <typename Scalar>
class Tape {
 public:
  using M = Mat<Scalar>;

  Tape() { nodes_.reserve(1024); }

  const M& value(Var v) const { return nodes_[v.idx].value; }

  // Zero matrix if the node never received gradient.
  M grad(Var v) const {
    const Node& n = nodes_[v.idx];
    if (n.grad.size() == 0) return M::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  std::size_t size() const { return nodes_.size(); }

  Var constant(M value) { return push_plain(std::move(value), false); }

  Var leaf(M value) { return push_plain(std::move(value), true); }

  Var add(Var a, Var b) {
    check_same_shape(a, b, "add");
    M out = value(a) + value(b);
    return push(std::move(out), wants(a) || wants(b), [a, b](Tape& t, const M& g) {
      t.accumulate(a, g);
      t.accumulate(b, g);
    });
  }

  Var sub(Var a, Var b) {
    check_same_shape(a, b, "sub");
    M out = value(a) - value(b);
    return push(std::move(out), wants(a) || wants(b), [a, b](Tape& t, const M& g) {
      t.accumulate(a, g);
      t.accumulate_neg(b, g);
    });
  }

  // Elementwise product.
  Var cmul(Var a, Var b) {
    check_same_shape(a, b, "cmul");
    M out = value(a).cwiseProduct(value(b));
    return push(std::move(out), wants(a) || wants(b), [a, b](Tape& t, const M& g) {
      if (t.wants(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
      if (t.wants(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
    });
  }

  Var scale(Var a, Scalar s) {
    M out = value(a) * s;
    return push(std::move(out), wants(a), [a, s](Tape& t, const M& g) {
      t.accumulate(a, (g * s).eval());
    });
  }

  Var add_scalar(Var a, Scalar c) {
    M out = value(a).array() + c;
    return push(std::move(out), wants(a),
                [a](Tape& t, const M& g) { t.accumulate(a, g); });
  }

  Var matmul(Var a, Var b) {
    OT_REQUIRE(a.cols == b.rows, ArgumentError, "matmul shape mismatch");
    M out = value(a) * value(b);
    return push(std::move(out), wants(a) || wants(b), [a, b](Tape& t, const M& g) {
      if (t.wants(a)) t.accumulate(a, (g * t.value(b).transpose()).eval());
      if (t.wants(b)) t.accumulate(b, (t.value(a).transpose() * g).eval());
    });
  }

  // Y = X * W + 1 * b, b broadcast over rows (b is 1 x out).
  Var affine(Var x, Var w, Var b) {
    OT_REQUIRE(x.cols == w.rows && b.rows == 1 && b.cols == w.cols, ArgumentError,
               "affine shape mismatch");
    M out = value(x) * value(w);
    out.rowwise() += value(b).row(0);
    return push(std::move(out), wants(x) || wants(w) || wants(b),
                [x, w, b](Tape& t, const M& g) {
      if (t.wants(x)) t.accumulate(x, (g * t.value(w).transpose()).eval());
      if (t.wants(w)) t.accumulate(w, (t.value(x).transpose() * g).eval());
      if (t.wants(b)) t.accumulate(b, g.colwise().sum().eval());
    });
  }

  Var concat_cols(Var a, Var b) {
    OT_REQUIRE(a.rows == b.rows, ArgumentError, "concat_cols row mismatch");
    M out(a.rows, a.cols + b.cols);
    out.leftCols(a.cols) = value(a);
    out.rightCols(b.cols) = value(b);
    return push(std::move(out), wants(a) || wants(b),
                [a, b](Tape& t, const M& g) {
                  t.accumulate(a, g.leftCols(a.cols).eval());
                  t.accumulate(b, g.rightCols(b.cols).eval());
                });
  }

  Var slice_cols(Var a, int start, int n) {
    OT_REQUIRE(start >= 0 && start + n <= a.cols, ArgumentError,
               "slice_cols out of range");
    M out = value(a).middleCols(start, n);
    return push(std::move(out), wants(a), [a, start, n](Tape& t, const M& g) {
      if (!t.wants(a)) return;
      Node& pa = t.nodes_[a.idx];
      t.ensure_grad(pa);
      pa.grad.middleCols(start, n) += g;
    });
  }

  // out.row(k) = a.row((*idx)[k])
  Var gather_rows(Var a, RowIndices idx) {
    const auto& ix = *idx;
    M out(static_cast<int>(ix.size()), a.cols);
    const M& av = value(a);
    for (std::size_t k = 0; k < ix.size(); ++k) out.row(k) = av.row(ix[k]);
    return push(std::move(out), wants(a), [a, idx](Tape& t, const M& g) {
      if (!t.wants(a)) return;
      Node& pa = t.nodes_[a.idx];
      t.ensure_grad(pa);
      const auto& ix = *idx;
      for (std::size_t k = 0; k < ix.size(); ++k) pa.grad.row(ix[k]) += g.row(k);
    });
  }

  // out.row((*idx)[k]) += a.row(k), out has out_rows rows. Fixed k order.
  Var scatter_sum_rows(Var a, RowIndices idx, int out_rows) {
    const auto& ix = *idx;
    OT_REQUIRE(static_cast<int>(ix.size()) == a.rows, ArgumentError,
               "scatter_sum_rows index count mismatch");
    M out = M::Zero(out_rows, a.cols);
    const M& av = value(a);
    for (std::size_t k = 0; k < ix.size(); ++k) out.row(ix[k]) += av.row(k);
    return push(std::move(out), wants(a), [a, idx](Tape& t, const M& g) {
      if (!t.wants(a)) return;
      const auto& ix = *idx;
      M ga(a.rows, a.cols);
      for (std::size_t k = 0; k < ix.size(); ++k) ga.row(k) = g.row(ix[k]);
      t.accumulate(a, std::move(ga));
    });
  }

  Var tanh_(Var a) {
    M out = value(a).array().tanh();
    return push(std::move(out), wants(a), [a](Tape& t, const M& g, const M& y) {
      t.accumulate(a, (g.array() * (Scalar(1) - y.array().square())).matrix());
    });
  }

  Var sigmoid(Var a) {
    M out = value(a).unaryExpr([](Scalar x) {
      if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
      const Scalar e = std::exp(x);
      return e / (Scalar(1) + e);
    });
    return push(std::move(out), wants(a), [a](Tape& t, const M& g, const M& y) {
      t.accumulate(a, (g.array() * y.array() * (Scalar(1) - y.array())).matrix());
    });
  }

  Var relu(Var a) {
    M out = value(a).cwiseMax(Scalar(0));
    return push(std::move(out), wants(a), [a](Tape& t, const M& g) {
      const M& x = t.value(a);
      t.accumulate(
          a, (g.array() * (x.array() > Scalar(0)).template cast<Scalar>()).matrix());
    });
  }

  Var exp_(Var a) {
    M out = value(a).array().exp();
    return push(std::move(out), wants(a), [a](Tape& t, const M& g, const M& y) {
      t.accumulate(a, g.cwiseProduct(y));
    });
  }

  Var square(Var a) {
    M out = value(a).array().square();
    return push(std::move(out), wants(a), [a](Tape& t, const M& g) {
      t.accumulate(a, (g.array() * Scalar(2) * t.value(a).array()).matrix());
    });
  }

  // Hard clamp; zero gradient outside (lo, hi).
  Var clamp(Var a, Scalar lo, Scalar hi) {
    M out = value(a).cwiseMax(lo).cwiseMin(hi);
    return push(std::move(out), wants(a), [a, lo, hi](Tape& t, const M& g) {
      const M& x = t.value(a);
      M gx(x.rows(), x.cols());
      for (Eigen::Index j = 0; j < x.size(); ++j)
        gx(j) = (x(j) > lo && x(j) < hi) ? g(j) : Scalar(0);
      t.accumulate(a, std::move(gx));
    });
  }

  Var sum_all(Var a) {
    M out(1, 1);
    out(0, 0) = value(a).sum();
    return push(std::move(out), wants(a), [a](Tape& t, const M& g) {
      t.accumulate(a, M::Constant(a.rows, a.cols, g(0, 0)));
    });
  }

  Var stop_gradient(Var a) { return push_plain(M(value(a)), false); }

  Var zeros(int rows, int cols) { return constant(M::Zero(rows, cols)); }

  // Seeds d(root)/d(root) = 1 and sweeps the tape backwards.
  void backward(Var root) {
    OT_REQUIRE(root.rows == 1 && root.cols == 1, ArgumentError,
               "backward root must be scalar");
    Node& r = nodes_[root.idx];
    ensure_grad(r);
    r.grad(0, 0) = Scalar(1);
    for (int i = root.idx; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.grad.size() == 0 || !n.backprop) continue;
      n.backprop(*this, n.grad, n.value);
    }
  }

 private:
  struct Node {
    M value;
    M grad;
    bool requires_grad = false;
    std::function<void(Tape&, const M&, const M&)> backprop;
  };

  bool wants(Var v) const { return nodes_[v.idx].requires_grad; }

  void check_same_shape(Var a, Var b, const char* op) const {
    OT_REQUIRE(a.rows == b.rows && a.cols == b.cols, ArgumentError,
               std::string(op) + ": shape mismatch");
  }

  void ensure_grad(Node& n) {
    if (n.grad.size() == 0) n.grad = M::Zero(n.value.rows(), n.value.cols());
  }

  void accumulate(Var v, const M& g) {
    Node& n = nodes_[v.idx];
    if (!n.requires_grad) return;
    ensure_grad(n);
    n.grad += g;
  }
  void accumulate(Var v, M&& g) {
    Node& n = nodes_[v.idx];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = std::move(g);
    else
      n.grad += g;
  }
  void accumulate_neg(Var v, const M& g) {
    Node& n = nodes_[v.idx];
    if (!n.requires_grad) return;
    ensure_grad(n);
    n.grad -= g;
  }

  template <typename Fn>
  Var push(M&& value, bool requires_grad, Fn&& backprop) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if constexpr (std::is_invocable_v<Fn, Tape&, const M&, const M&>) {
      if (requires_grad) n.backprop = std::forward<Fn>(backprop);
    } else if constexpr (std::is_invocable_v<Fn, Tape&, const M&>) {
      if (requires_grad) {
        n.backprop = [fn = std::forward<Fn>(backprop)](Tape& t, const M& g,
                                                       const M&) { fn(t, g); };
      }
    }
    Var v;
    v.idx = static_cast<int>(nodes_.size());
    v.rows = static_cast<int>(n.value.rows());
    v.cols = static_cast<int>(n.value.cols());
    nodes_.push_back(std::move(n));
    return v;
  }

  Var push_plain(M&& value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    Var v;
    v.idx = static_cast<int>(nodes_.size());
    v.rows = static_cast<int>(n.value.rows());
    v.cols = static_cast<int>(n.value.cols());
    nodes_.push_back(std::move(n));
    return v;
  }

  std::vector<Node> nodes_;
};

}  // namespace ot::ad

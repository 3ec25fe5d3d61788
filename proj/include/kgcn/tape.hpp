#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "kgcn/tensor.hpp"

// Minimal reverse-mode engine: eager forward, recorded reverse. A Tape owns
// every intermediate value; Vars are cheap handles. Single-threaded during
// construction and backward; distinct tapes are independent.
namespace kgcn::ad {

class Tape;
class GradSink;

struct Var {
  Tape* tape = nullptr;
  int id = -1;
  const Tensor& val() const;
  bool valid() const { return tape != nullptr && id >= 0; }
};

class GradSink {
 public:
  GradSink(Tape& t, std::vector<Tensor>& grads) : tape_(&t), grads_(&grads) {}
  bool wants(int id) const;
  void add(int id, Tensor g);

 private:
  Tape* tape_;
  std::vector<Tensor>* grads_;
};

class Tape {
 public:
  using BackFn = std::function<void(const Tensor& g, Tape& t, GradSink& sink)>;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }
  Var scalar(double v, bool requires_grad = false) {
    return leaf(Tensor::scalar(v), requires_grad);
  }

  const Tensor& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor& value(Var v) const { return value(v.id); }
  bool requires_grad(int id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }
  size_t num_nodes() const { return nodes_.size(); }
  const char* op_name(int id) const { return nodes_[static_cast<size_t>(id)].name; }

  // Reverse sweep from a scalar loss. Returns one slot per node id; leaf
  // gradients are populated, unreachable leaves stay empty (read as zero).
  std::vector<Tensor> backward(Var loss);

  Var emit(Tensor value, const std::vector<Var>& parents, BackFn back, const char* name);

 private:
  struct Node {
    Tensor value;
    BackFn back;
    const char* name;
    bool needs_grad;
  };
  std::vector<Node> nodes_;
};

// Read a gradient slot, materializing zeros for untouched leaves.
Tensor grad_or_zero(const std::vector<Tensor>& grads, Var v);

// ---- op registry ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, std::vector<int> shape);
Var broadcast_to(Var a, std::vector<int> shape);
Var sum(Var a);
Var row_sum(Var a);
Var col_sum(Var a);
Var norm2(Var a);
Var tanh(Var a);
Var tan(Var a);
Var atan(Var a);
Var artanh(Var a);
Var asin(Var a);
Var asinh(Var a);
Var sqrt(Var a);
Var exp(Var a);
Var log(Var a);
Var relu(Var a);
Var clamp(Var a, double lo, double hi);
// x when |x| >= eps, otherwise +-eps keeping the sign (0 maps to +eps);
// gradient is identity inside, zero where floored.
Var signed_floor(Var a, double eps);
Var slice_cols(Var a, int j0, int width);
Var concat_cols(const std::vector<Var>& parts);
Var softmax_rows(Var a);
// Mean cross-entropy over masked rows; labels[i] in [0, C).
Var softmax_xent(Var logits, std::shared_ptr<const std::vector<int>> labels,
                 std::shared_ptr<const std::vector<unsigned char>> mask);

// Fused curvature trigonometry; u elementwise, kappa a scalar Var. These
// saturate at chart boundaries (see manifold::detail) so training never
// leaves the domain of the trig functions.
Var tan_k(Var u, Var kappa);
Var atan_k(Var u, Var kappa);
Var asin_k(Var u, Var kappa);
Var ratio_tan_k(Var u, Var kappa);   // tan_k(u)/u with limit 1 at u = 0
Var ratio_atan_k(Var u, Var kappa);  // atan_k(u)/u with limit 1 at u = 0

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }
inline Var operator-(Var a) { return neg(a); }

// Central differences (f(theta+h e_i) - f(theta-h e_i)) / 2h per coordinate.
Tensor finite_diff(const std::function<double(const Tensor&)>& f, const Tensor& theta,
                   double h);

}  // namespace kgcn::ad

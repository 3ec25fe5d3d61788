#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kgcn/common.hpp"

namespace kgcn::ad {

// Dense row-major real tensor of rank 0..2. Rank 0 is a scalar, rank 1 a
// vector (broadcast like a row), rank 2 a matrix.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

  static Tensor scalar(double v) { return Tensor({}, {v}); }
  static Tensor zeros(std::vector<int> s);
  static Tensor full(std::vector<int> s, double v);
  static Tensor from_eigen(const Eigen::MatrixXd& m);
  static Tensor row(const Eigen::VectorXd& v);  // [1, d]

  Eigen::MatrixXd to_eigen() const;

  int64_t size() const {
    int64_t n = 1;
    for (int s : shape) n *= s;
    return n;
  }
  int rank() const { return static_cast<int>(shape.size()); }
  // rows/cols of the 2-D view (rank padded on the left with 1s)
  int rows() const { return rank() == 2 ? shape[0] : 1; }
  int cols() const {
    if (rank() == 2) return shape[1];
    if (rank() == 1) return shape[0];
    return 1;
  }
  bool empty() const { return data.empty() && shape.empty(); }
  double& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }
  double& at(int i, int j) { return data[static_cast<size_t>(i) * cols() + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * cols() + j]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
};

// NumPy-style broadcast of two shapes (rank <= 2), throws ShapeError.
std::vector<int> broadcast_shape(const std::vector<int>& a, const std::vector<int>& b);

// Sum-reduce g over broadcast axes so the result has shape `target`.
Tensor reduce_to(const Tensor& g, const std::vector<int>& target);

// Elementwise combine with broadcasting; result shape = broadcast of inputs.
template <class F>
Tensor broadcast_combine(const Tensor& a, const Tensor& b, F f) {
  const std::vector<int> out_shape = broadcast_shape(a.shape, b.shape);
  Tensor out = Tensor::zeros(out_shape);
  const int R = out.rows(), C = out.cols();
  const int ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  for (int i = 0; i < R; ++i) {
    const int ia = (ar == 1) ? 0 : i;
    const int ib = (br == 1) ? 0 : i;
    for (int j = 0; j < C; ++j) {
      const int ja = (ac == 1) ? 0 : j;
      const int jb = (bc == 1) ? 0 : j;
      out.data[static_cast<size_t>(i) * C + j] =
          f(a.data[static_cast<size_t>(ia) * ac + ja], b.data[static_cast<size_t>(ib) * bc + jb]);
    }
  }
  return out;
}

// Three-way variant used by backward passes (g has the broadcast shape).
template <class F>
Tensor broadcast_combine3(const Tensor& g, const Tensor& a, const Tensor& b, F f) {
  Tensor out = Tensor::zeros(g.shape);
  const int R = g.rows(), C = g.cols();
  const int ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  for (int i = 0; i < R; ++i) {
    const int ia = (ar == 1) ? 0 : i;
    const int ib = (br == 1) ? 0 : i;
    for (int j = 0; j < C; ++j) {
      const int ja = (ac == 1) ? 0 : j;
      const int jb = (bc == 1) ? 0 : j;
      out.data[static_cast<size_t>(i) * C + j] =
          f(g.data[static_cast<size_t>(i) * C + j],
            a.data[static_cast<size_t>(ia) * ac + ja],
            b.data[static_cast<size_t>(ib) * bc + jb]);
    }
  }
  return out;
}

}  // namespace kgcn::ad

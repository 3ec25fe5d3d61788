#pragma once

#include <vector>

#include "kgcn/manifold.hpp"

// Weighted combination machinery on the kappa-stereographic model:
// gyromidpoints, kappa-right/left matrix multiplication and tangential
// aggregation.
namespace kgcn::agg {

using manifold::Mat;
using manifold::Point;
using manifold::Vec;

// n points of shared curvature, one per row.
struct PointMatrix {
  Mat rows;
  double kappa = 0.0;

  int n() const { return static_cast<int>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
  Point point(int i) const { return Point{rows.row(i).transpose(), kappa}; }
};

PointMatrix make_points(Mat raw, double kappa);  // projects rows into the domain

// Weighted gyro-barycenter. Invariant under positive rescaling of alpha.
Point gyromidpoint(const PointMatrix& X, const Vec& alpha);

// Row-wise exp0(log0(X) * W).
PointMatrix right_matmul(const PointMatrix& X, const Mat& W);

// Row i: (sum_j A_ij) (x) gyromidpoint(X; A_i*). Rows of A that are entirely
// zero map to the origin; their indices are reported through zero_rows when
// given (the scaling by a zero row sum sends any midpoint to the origin).
PointMatrix left_matmul(const Mat& A, const PointMatrix& X,
                        std::vector<int>* zero_rows = nullptr);

// exp_x( sum_i alpha_i log_x(x_i) )
Point tangential_agg(const Point& x, const PointMatrix& X, const Vec& alpha);

}  // namespace kgcn::agg

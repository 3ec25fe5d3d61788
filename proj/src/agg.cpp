#include "kgcn/agg.hpp"

#include <cmath>
#include <string>

namespace kgcn::agg {

using manifold::conformal_factor;
using manifold::exp_map;
using manifold::kappa_scale;
using manifold::log_map;
using manifold::project_to_domain;
using manifold::TangentVector;

PointMatrix make_points(Mat raw, double kappa) {
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    Point p = project_to_domain(raw.row(i).transpose(), kappa);
    raw.row(i) = p.coords.transpose();
  }
  return PointMatrix{std::move(raw), kappa};
}

namespace {

Vec conformal_factors(const PointMatrix& X) {
  Vec lam(X.n());
  for (int i = 0; i < X.n(); ++i)
    lam(i) = 2.0 / (1.0 + X.kappa * X.rows.row(i).squaredNorm());
  return lam;
}

// Midpoint given precomputed conformal factors; throws on a degenerate
// denominator. `row` only labels the error message.
Point midpoint_impl(const PointMatrix& X, const Vec& alpha, const Vec& lam, int row) {
  const double k = X.kappa;
  const double denom = alpha.dot((lam.array() - 1.0).matrix());
  if (std::abs(denom) < kCondEps) {
    if (k == 0.0)
      throw ZeroWeightError("gyromidpoint: weights sum to zero at kappa = 0");
    throw DegenerateMidpointError(
        "gyromidpoint: sum_j alpha_j (lambda_j - 1) vanishes" +
            (row >= 0 ? " (row " + std::to_string(row) + ")" : std::string()),
        row);
  }
  Vec inner = X.rows.transpose() * (alpha.array() * lam.array() / denom).matrix();
  return kappa_scale(0.5, project_to_domain(std::move(inner), k));
}

}  // namespace

Point gyromidpoint(const PointMatrix& X, const Vec& alpha) {
  if (X.n() < 1) throw ShapeError("gyromidpoint: empty point matrix");
  if (alpha.size() != X.n()) throw ShapeError("gyromidpoint: weight length mismatch");
  return midpoint_impl(X, alpha, conformal_factors(X), -1);
}

PointMatrix right_matmul(const PointMatrix& X, const Mat& W) {
  if (W.rows() != X.dim()) throw ShapeError("right_matmul: shape mismatch");
  const double k = X.kappa;
  Mat logs(X.n(), X.dim());
  for (int i = 0; i < X.n(); ++i) {
    const double n = X.rows.row(i).norm();
    const double f = (n < kMinNorm) ? 1.0 : manifold::atan_k(n, k) / n;
    logs.row(i) = f * X.rows.row(i);
  }
  Mat t = logs * W;
  Mat out(X.n(), W.cols());
  for (int i = 0; i < X.n(); ++i) {
    const double n = t.row(i).norm();
    const double f = (n < kMinNorm) ? 1.0 : manifold::tan_k(n, k) / n;
    Point p = project_to_domain(f * t.row(i).transpose(), k);
    out.row(i) = p.coords.transpose();
  }
  return PointMatrix{std::move(out), k};
}

PointMatrix left_matmul(const Mat& A, const PointMatrix& X, std::vector<int>* zero_rows) {
  if (A.cols() != X.n()) throw ShapeError("left_matmul: shape mismatch");
  const Vec lam = conformal_factors(X);
  Mat out(A.rows(), X.dim());
  for (int i = 0; i < A.rows(); ++i) {
    const Vec alpha = A.row(i).transpose();
    if (alpha.cwiseAbs().sum() == 0.0) {
      out.row(i).setZero();
      if (zero_rows) zero_rows->push_back(i);
      continue;
    }
    const Point m = midpoint_impl(X, alpha, lam, i);
    const Point scaled = kappa_scale(alpha.sum(), m);
    out.row(i) = scaled.coords.transpose();
  }
  return PointMatrix{std::move(out), X.kappa};
}

Point tangential_agg(const Point& x, const PointMatrix& X, const Vec& alpha) {
  if (alpha.size() != X.n()) throw ShapeError("tangential_agg: weight length mismatch");
  Vec v = Vec::Zero(x.coords.size());
  for (int i = 0; i < X.n(); ++i)
    v += alpha(i) * log_map(x, X.point(i)).coords;
  return exp_map(x, TangentVector{std::move(v), x});
}

}  // namespace kgcn::agg

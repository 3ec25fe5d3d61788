#include "kgcn/tensor.hpp"

#include <cmath>

namespace kgcn::ad {

Tensor Tensor::zeros(std::vector<int> s) {
  Tensor t;
  t.shape = std::move(s);
  t.data.assign(static_cast<size_t>(t.size()), 0.0);
  return t;
}

Tensor Tensor::full(std::vector<int> s, double v) {
  Tensor t = zeros(std::move(s));
  for (double& x : t.data) x = v;
  return t;
}

Tensor Tensor::from_eigen(const Eigen::MatrixXd& m) {
  Tensor t = zeros({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) t.at(i, j) = m(i, j);
  return t;
}

Tensor Tensor::row(const Eigen::VectorXd& v) {
  Tensor t = zeros({1, static_cast<int>(v.size())});
  for (int j = 0; j < v.size(); ++j) t.at(0, j) = v(j);
  return t;
}

Eigen::MatrixXd Tensor::to_eigen() const {
  Eigen::MatrixXd m(rows(), cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = at(i, j);
  return m;
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::vector<int> broadcast_shape(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() > 2 || b.size() > 2) throw ShapeError("broadcast: rank > 2 unsupported");
  const int ra = a.size() >= 1 ? a[a.size() - 1] : 1;  // trailing dim
  const int la = a.size() == 2 ? a[0] : 1;             // leading dim
  const int rb = b.size() >= 1 ? b[b.size() - 1] : 1;
  const int lb = b.size() == 2 ? b[0] : 1;
  auto join = [](int x, int y) {
    if (x == y) return x;
    if (x == 1) return y;
    if (y == 1) return x;
    throw ShapeError("broadcast: incompatible dimensions");
  };
  const int lead = join(la, lb);
  const int trail = join(ra, rb);
  const size_t rank = std::max(a.size(), b.size());
  if (rank == 0) return {};
  if (rank == 1) return {trail};
  return {lead, trail};
}

Tensor reduce_to(const Tensor& g, const std::vector<int>& target) {
  if (g.shape == target) return g;
  Tensor out = Tensor::zeros(target);
  const int R = g.rows(), C = g.cols();
  const int tr = out.rows(), tc = out.cols();
  if ((tr != R && tr != 1) || (tc != C && tc != 1))
    throw ShapeError("reduce_to: target is not a broadcast source of g");
  for (int i = 0; i < R; ++i) {
    const int ti = (tr == 1) ? 0 : i;
    for (int j = 0; j < C; ++j) {
      const int tj = (tc == 1) ? 0 : j;
      out.data[static_cast<size_t>(ti) * tc + tj] += g.data[static_cast<size_t>(i) * C + j];
    }
  }
  return out;
}

}  // namespace kgcn::ad

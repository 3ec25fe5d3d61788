#include <doctest.h>

#include <cmath>
#include <functional>

#include "kgcn/agg.hpp"
#include "kgcn/geo.hpp"
#include "oracles.hpp"

namespace man = kgcn::manifold;
namespace agg = kgcn::agg;
namespace geo = kgcn::geo;
using kgcn::ad::Tape;
using kgcn::ad::Tensor;
using kgcn::ad::Var;
namespace ad = kgcn::ad;

namespace {

Tensor random_rows(kgcn::Rng& rng, int n, int d, double kappa, double frac = 0.6) {
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    m.row(i) = oracles::random_point(rng, d, kappa, frac).coords.transpose();
  return Tensor::from_eigen(m);
}

// FD-checks d(sum(op))/d(input) and d/d(kappa) for a two-input geo builder.
void fd_check_binary(const char* /*name*/, double kappa, const Tensor& a, const Tensor& b,
                     const std::function<Var(Var, Var, Var)>& op, double tol = 1e-4) {
  auto eval = [&](const Tensor& av, const Tensor& bv, double kv) {
    Tape t;
    Var x = t.leaf(av);
    Var y = t.leaf(bv);
    Var k = t.leaf(Tensor::scalar(kv));
    return ad::sum(op(x, y, k)).val()[0];
  };
  Tape t;
  Var x = t.leaf(a);
  Var y = t.leaf(b);
  Var k = t.leaf(Tensor::scalar(kappa));
  Var loss = ad::sum(op(x, y, k));
  auto grads = t.backward(loss);

  Tensor fdx = ad::finite_diff([&](const Tensor& p) { return eval(p, b, kappa); }, a, 1e-6);
  Tensor gx = ad::grad_or_zero(grads, x);
  for (size_t i = 0; i < fdx.data.size(); ++i)
    CHECK(oracles::grad_close(gx.data[i], fdx.data[i], tol));

  Tensor fdy = ad::finite_diff([&](const Tensor& p) { return eval(a, p, kappa); }, b, 1e-6);
  Tensor gy = ad::grad_or_zero(grads, y);
  for (size_t i = 0; i < fdy.data.size(); ++i)
    CHECK(oracles::grad_close(gy.data[i], fdy.data[i], tol));

  Tensor fdk = ad::finite_diff(
      [&](const Tensor& p) { return eval(a, b, p[0]); }, Tensor::scalar(kappa), 1e-7);
  Tensor gk = ad::grad_or_zero(grads, k);
  CHECK(oracles::grad_close(gk[0], fdk[0], tol));
}

}  // namespace

TEST_SUITE("geo") {

TEST_CASE("tape composites match the plain kernels") {
  kgcn::Rng rng(211);
  for (double k : {-1.2, -0.5, 0.0, 0.6}) {
    const int n = 5, d = 3;
    Tensor xs = random_rows(rng, n, d, k);
    Tensor ys = random_rows(rng, n, d, k);
    Tape t;
    Var X = t.leaf(xs);
    Var Y = t.leaf(ys);
    Var kap = t.leaf(Tensor::scalar(k));

    Eigen::MatrixXd xe = xs.to_eigen();
    Eigen::MatrixXd ye = ys.to_eigen();

    // kappa_add rows
    Tensor sum_t = geo::kappa_add(X, Y, kap).val();
    for (int i = 0; i < n; ++i) {
      man::Point p = man::kappa_add(man::Point{xe.row(i).transpose(), k},
                                    man::Point{ye.row(i).transpose(), k});
      for (int j = 0; j < d; ++j)
        CHECK(sum_t.at(i, j) == doctest::Approx(p.coords(j)).epsilon(1e-12));
    }

    // exp/log at a base point
    Tensor logs = geo::log_at(X, Y, kap).val();
    for (int i = 0; i < n; ++i) {
      auto v = man::log_map(man::Point{xe.row(i).transpose(), k},
                            man::Point{ye.row(i).transpose(), k});
      for (int j = 0; j < d; ++j)
        CHECK(logs.at(i, j) == doctest::Approx(v.coords(j)).epsilon(1e-11));
    }

    // distances
    Tensor dist = geo::distance_rows(X, Y, kap).val();
    Tensor dsq = geo::pairwise_distance_sq(X, kap).val();
    for (int i = 0; i < n; ++i) {
      const double want = man::distance(man::Point{xe.row(i).transpose(), k},
                                        man::Point{ye.row(i).transpose(), k});
      CHECK(dist.at(i, 0) == doctest::Approx(want).epsilon(1e-11));
      for (int j = 0; j < n; ++j) {
        const double dd = man::distance(man::Point{xe.row(i).transpose(), k},
                                        man::Point{xe.row(j).transpose(), k});
        CHECK(std::abs(std::sqrt(dsq.at(i, j)) - dd) < 1e-9);
      }
    }

    // gyration
    Tensor gy = geo::gyration(X, Y, X, kap).val();
    for (int i = 0; i < n; ++i) {
      man::Point w = man::gyration(man::Point{xe.row(i).transpose(), k},
                                   man::Point{ye.row(i).transpose(), k},
                                   man::Point{xe.row(i).transpose(), k});
      for (int j = 0; j < d; ++j)
        CHECK(gy.at(i, j) == doctest::Approx(w.coords(j)).epsilon(1e-10));
    }
  }
}

TEST_CASE("tape aggregation matches the plain kernels") {
  kgcn::Rng rng(223);
  for (double k : {-1.0, 0.0, 0.5}) {
    const int n = 4, d = 3, e = 2;
    Tensor xs = random_rows(rng, n, d, k);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(0.05, 1.0);
      A.row(i) /= A.row(i).sum();
    }
    Eigen::MatrixXd W(d, e);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < e; ++j) W(i, j) = rng.uniform(-0.7, 0.7);

    agg::PointMatrix X{xs.to_eigen(), k};

    Tape t;
    Var Xv = t.leaf(xs);
    Var Av = t.constant(Tensor::from_eigen(A));
    Var Wv = t.leaf(Tensor::from_eigen(W));
    Var kap = t.leaf(Tensor::scalar(k));

    Tensor lm = geo::left_matmul(Av, Xv, kap).val();
    agg::PointMatrix lm_plain = agg::left_matmul(A, X);
    CHECK((lm.to_eigen() - lm_plain.rows).cwiseAbs().maxCoeff() < 1e-10);

    Tensor rm = geo::right_matmul(Xv, Wv, kap).val();
    agg::PointMatrix rm_plain = agg::right_matmul(X, W);
    CHECK((rm.to_eigen() - rm_plain.rows).cwiseAbs().maxCoeff() < 1e-10);

    // tangential aggregation at a base point
    Tensor base = random_rows(rng, 1, d, k);
    Eigen::VectorXd alpha(n);
    for (int i = 0; i < n; ++i) alpha(i) = rng.uniform(0.1, 1.0);
    Tape t2;
    Var xb = t2.leaf(base);
    Var Xs = t2.leaf(xs);
    Var al = t2.constant(Tensor::row(alpha));
    Var kv = t2.leaf(Tensor::scalar(k));
    Tensor tg = geo::tangential_agg(xb, Xs, al, kv).val();
    man::Point tg_plain =
        agg::tangential_agg(man::Point{base.to_eigen().row(0).transpose(), k}, X, alpha);
    for (int j = 0; j < d; ++j)
      CHECK(tg.at(0, j) == doctest::Approx(tg_plain.coords(j)).epsilon(1e-10));
  }
}

TEST_CASE("geo op gradients match finite differences") {
  kgcn::Rng rng(227);
  for (double k : {-1.0, -0.2, 0.4}) {
    const int n = 3, d = 3;
    Tensor xs = random_rows(rng, n, d, k, 0.5);
    Tensor ys = random_rows(rng, n, d, k, 0.5);

    fd_check_binary("kappa_add", k, xs, ys,
                    [](Var x, Var y, Var kap) { return geo::kappa_add(x, y, kap); });
    fd_check_binary("distance", k, xs, ys,
                    [](Var x, Var y, Var kap) { return geo::distance_rows(x, y, kap); });
    fd_check_binary("exp_at", k, xs, ys,
                    [](Var x, Var y, Var kap) { return geo::exp_at(x, y, kap); });
    fd_check_binary("log_at", k, xs, ys,
                    [](Var x, Var y, Var kap) { return geo::log_at(x, y, kap); });
    fd_check_binary("gyration", k, xs, ys,
                    [](Var x, Var y, Var kap) { return geo::gyration(x, y, y, kap); });
    fd_check_binary("pairwise", k, xs, ys, [](Var x, Var y, Var kap) {
      (void)y;
      return geo::pairwise_distance_sq(x, kap);
    });
    fd_check_binary("midpoint", k, xs, ys, [n](Var x, Var y, Var kap) {
      (void)y;
      Tape& t = *x.tape;
      Tensor w = Tensor::zeros({2, n});
      for (int j = 0; j < n; ++j) {
        w.at(0, j) = 0.2 + 0.1 * j;
        w.at(1, j) = 0.5;
      }
      return geo::gyromidpoint(t.constant(w), x, kap);
    });
  }
}

TEST_CASE("kappa gradient of the distance is two-sided at zero") {
  Eigen::MatrixXd xe(1, 3), ye(1, 3);
  xe << 0.31, -0.2, 0.11;
  ye << -0.05, 0.4, 0.22;
  auto dk_at = [&](double kv) {
    Tape t;
    Var x = t.leaf(Tensor::from_eigen(xe));
    Var y = t.leaf(Tensor::from_eigen(ye));
    Var k = t.leaf(Tensor::scalar(kv));
    Var d = geo::distance_rows(x, y, k);
    auto g = t.backward(ad::sum(d));
    return ad::grad_or_zero(g, k)[0];
  };
  const double right = dk_at(1e-8);
  const double left = dk_at(-1e-8);
  CHECK(std::abs(right - left) / std::max(std::abs(right), 1e-12) < 1e-4);

  // both match the Taylor coefficient -2(|x-y|^3/3 + <x,y>|x-y|^2)
  const Eigen::VectorXd xd = xe.row(0), yd = ye.row(0);
  const double u = (xd - yd).norm();
  const double coef = -2.0 * (u * u * u / 3.0 + xd.dot(yd) * u);
  CHECK(right == doctest::Approx(coef).epsilon(1e-4));
}

TEST_CASE("preprocess scales into the ball and stays differentiable in kappa") {
  Eigen::MatrixXd f(3, 2);
  f << 4, 0, 1, 1, 0, 0;
  for (double k : {-1.0, 0.25}) {
    Tape t;
    Var x = t.constant(Tensor::from_eigen(f));
    Var kap = t.leaf(Tensor::scalar(k));
    Tensor out = geo::preprocess_features(x, kap, 4.0).val();
    // max row norm becomes 1/(2 sqrt|kappa|)
    double mx = 0;
    for (int i = 0; i < 3; ++i) {
      double nrm = 0;
      for (int j = 0; j < 2; ++j) nrm += out.at(i, j) * out.at(i, j);
      mx = std::max(mx, std::sqrt(nrm));
    }
    CHECK(mx == doctest::Approx(0.5 / std::sqrt(std::abs(k))).epsilon(1e-12));
  }
  // kappa = 0 passes through
  Tape t;
  Var x = t.constant(Tensor::from_eigen(f));
  Var kap = t.leaf(Tensor::scalar(0.0));
  CHECK(geo::preprocess_features(x, kap, 4.0).val().to_eigen() == f);
}

TEST_CASE("logit column: zero inner product gives zero logit") {
  Tape t;
  Eigen::MatrixXd h(2, 2);
  h << 0.3, 0.0, -0.2, 0.0;
  Eigen::MatrixXd a(1, 2), p(1, 2);
  a << 0.0, 1.0;  // orthogonal to z for rows on the first axis
  p << 0.0, 0.0;
  Var H = t.leaf(Tensor::from_eigen(h));
  Var av = t.leaf(Tensor::from_eigen(a));
  Var pv = t.leaf(Tensor::from_eigen(p));
  Var k = t.leaf(Tensor::scalar(-1.0));
  Tensor col = geo::logit_column(H, av, pv, k).val();
  CHECK(std::abs(col.at(0, 0)) < 1e-14);
  CHECK(std::abs(col.at(1, 0)) < 1e-14);
}

TEST_CASE("logits are continuous across kappa = 0") {
  kgcn::Rng rng(229);
  Eigen::MatrixXd h(3, 4), a(1, 4), p(1, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) h(i, j) = rng.uniform(-0.4, 0.4);
  for (int j = 0; j < 4; ++j) {
    a(0, j) = rng.uniform(-1, 1);
    p(0, j) = rng.uniform(-0.3, 0.3);
  }
  auto eval = [&](double kv) {
    Tape t;
    Var H = t.leaf(Tensor::from_eigen(h));
    Var av = t.leaf(Tensor::from_eigen(a));
    Var pv = t.leaf(Tensor::from_eigen(p));
    Var k = t.leaf(Tensor::scalar(kv));
    return geo::logit_column(H, av, pv, k).val();
  };
  Tensor plus = eval(1e-7), minus = eval(-1e-7);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(plus.at(i, 0) - minus.at(i, 0)) /
              std::max(1e-6, std::abs(plus.at(i, 0))) <
          1e-6);
}

TEST_CASE("hyperbolic logit magnitude recovers the hyperplane distance") {
  // brute-force oracle: min_t d(x, gamma(t)) over a fine sampling of the
  // geodesic hyperplane through p with normal a (2-D, kappa = -1)
  const double k = -1.0;
  Eigen::MatrixXd h(1, 2), a(1, 2), p(1, 2);
  h << 0.45, 0.1;
  a << 1.0, 0.0;
  p << 0.0, 0.2;

  Tape t;
  Var H = t.leaf(Tensor::from_eigen(h));
  Var av = t.leaf(Tensor::from_eigen(a));
  Var pv = t.leaf(Tensor::from_eigen(p));
  Var kv = t.leaf(Tensor::scalar(k));
  const double logit = geo::logit_column(H, av, pv, kv).val().at(0, 0);

  // tangent norm |a|_p = lambda_p |a|
  man::Point pp{p.row(0).transpose(), k};
  const double lam_p = man::conformal_factor(pp);
  const double implied = std::abs(logit) / (lam_p * a.row(0).norm());

  // the hyperplane is exp_p of tangent vectors orthogonal to a
  man::Point x{h.row(0).transpose(), k};
  Eigen::Vector2d dir(0.0, 1.0);  // orthogonal to a
  double best = 1e100;
  for (int i = -4000; i <= 4000; ++i) {
    const double s = i * 1e-3;
    man::Point q = man::exp_map(pp, man::TangentVector{s * dir, pp});
    best = std::min(best, man::distance(x, q));
  }
  CHECK(implied == doctest::Approx(best).epsilon(1e-4));
}

TEST_CASE("stereo lift on tape matches the plain lift") {
  kgcn::Rng rng(233);
  for (double k : {-0.8, 1.1}) {
    Tensor xs = random_rows(rng, 4, 3, k);
    Tape t;
    Var X = t.leaf(xs);
    Var kap = t.leaf(Tensor::scalar(k));
    Tensor lifted = geo::stereo_lift(X, kap).val();
    Eigen::MatrixXd xe = xs.to_eigen();
    for (int i = 0; i < 4; ++i) {
      auto amb = man::stereo_lift(man::Point{xe.row(i).transpose(), k});
      for (int j = 0; j < 4; ++j)
        CHECK(lifted.at(i, j) == doctest::Approx(amb.coords(j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("saturation keeps extreme inputs finite and zero-sloped") {
  Tape t;
  // kappa < 0: arguments at the artanh edge
  Var u = t.leaf(Tensor({2}, {0.999999999999, 1.5}));
  Var k = t.leaf(Tensor::scalar(-1.0));
  Var v = ad::atan_k(u, k);
  CHECK(v.val().all_finite());
  auto g = t.backward(ad::sum(v));
  CHECK(ad::grad_or_zero(g, u)[1] == 0.0);

  // kappa > 0: angles beyond pi/2 saturate instead of throwing
  Tape t2;
  Var u2 = t2.leaf(Tensor({2}, {0.3, 40.0}));
  Var k2 = t2.leaf(Tensor::scalar(1.0));
  Var w = ad::tan_k(u2, k2);
  CHECK(w.val().all_finite());
  auto g2 = t2.backward(ad::sum(w));
  CHECK(ad::grad_or_zero(g2, u2)[1] == 0.0);
  CHECK(ad::grad_or_zero(g2, u2)[0] > 0.0);
}

}  // TEST_SUITE

#include "kgcn/selftest.hpp"

#include <chrono>
#include <cmath>

#include "kgcn/agg.hpp"
#include "kgcn/geo.hpp"
#include "kgcn/graph.hpp"
#include "kgcn/manifold.hpp"
#include "kgcn/train.hpp"

namespace kgcn::selftest {

namespace man = kgcn::manifold;
using man::Point;

namespace {

struct Checker {
  int pass = 0;
  int fail = 0;
  void check(bool ok) { ok ? ++pass : ++fail; }
};

Point random_point(Rng& rng, int d, double kappa, double max_frac = 0.7) {
  Eigen::VectorXd dir(d);
  for (int i = 0; i < d; ++i) dir(i) = rng.normal();
  if (dir.norm() < 1e-12) dir(0) = 1.0;
  dir.normalize();
  const double cap = kappa == 0.0 ? 1.0 : max_frac / std::sqrt(std::abs(kappa));
  return man::project_to_domain(rng.uniform(0.0, cap) * dir, kappa);
}

double ambient_distance(const Point& x, const Point& y) {
  const auto ax = man::stereo_lift(x);
  const auto ay = man::stereo_lift(y);
  const double k = x.kappa;
  if (k > 0.0) {
    const double c = std::clamp(k * ax.coords.dot(ay.coords), -1.0, 1.0);
    return std::acos(c) / std::sqrt(k);
  }
  const int d = static_cast<int>(ax.coords.size()) - 1;
  const double mink =
      ax.coords.head(d).dot(ay.coords.head(d)) - ax.coords(d) * ay.coords(d);
  return std::acosh(std::max(k * mink, 1.0)) / std::sqrt(-k);
}

SuiteResult timed(const std::string& name, Checker c, double seconds) {
  return SuiteResult{name, c.pass, c.fail, seconds};
}

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SuiteResult gyro_identities(uint64_t seed) {
  const auto t0 = Clock::now();
  Checker c;
  Rng rng(seed);
  const double kappas[] = {-2.0, -1.0, -0.1, 0.1, 1.0};
  for (double k : kappas) {
    for (int rep = 0; rep < 20; ++rep) {
      const int d = 3;
      Point x = random_point(rng, d, k);
      Point y = random_point(rng, d, k);
      Point w = random_point(rng, d, k);
      // left-cancellation
      Point lc = man::kappa_add(x, man::kappa_add(man::neg(x), y));
      c.check((lc.coords - y.coords).norm() < 1e-10);
      // gyration preserves norms
      Point gy = man::gyration(x, y, w);
      c.check(std::abs(gy.coords.norm() - w.coords.norm()) < 1e-10);
      // definition form matches the closed form
      Point a = man::kappa_add(x, y);
      Point b = man::kappa_add(x, man::kappa_add(y, w));
      Point def = man::kappa_add(man::neg(a), b);
      c.check((def.coords - gy.coords).norm() < 1e-10);
      // orthogonal maps commute with the addition
      man::Isometry iso = man::random_isometry(rng, d, k);
      Point rx{iso.rotation * x.coords, k};
      Point ry{iso.rotation * y.coords, k};
      Point lhs = man::kappa_add(rx, ry);
      Eigen::VectorXd rhs = iso.rotation * man::kappa_add(x, y).coords;
      c.check((lhs.coords - rhs).norm() < 1e-12);
      // exp/log round trip
      auto v = man::log_map(x, y);
      Point back = man::exp_map(x, v);
      c.check((back.coords - y.coords).norm() < 1e-9);
    }
  }
  return timed("gyro-identities", c, since(t0));
}

SuiteResult oracle_equivalence(uint64_t seed) {
  const auto t0 = Clock::now();
  Checker c;
  Rng rng(seed);
  for (double k : {1.0, -1.0}) {
    for (int rep = 0; rep < 200; ++rep) {
      Point x = random_point(rng, 3, k);
      Point y = random_point(rng, 3, k);
      c.check(std::abs(man::distance(x, y) - ambient_distance(x, y)) < 1e-9);
      Point rt = man::stereo_project(man::stereo_lift(x));
      c.check((rt.coords - x.coords).norm() < 1e-12);
      c.check(man::ambient_defect(man::stereo_lift(x)) < 1e-9);
    }
  }
  return timed("oracle-equivalence", c, since(t0));
}

SuiteResult curvature_smoothness(uint64_t seed) {
  const auto t0 = Clock::now();
  Checker c;
  Rng rng(seed);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXd xv(3), yv(3);
    for (int i = 0; i < 3; ++i) {
      xv(i) = rng.uniform(-0.5, 0.5);
      yv(i) = rng.uniform(-0.5, 0.5);
    }
    const double u = (xv - yv).norm();
    if (u < 1e-3) continue;
    const double coef = xv.dot(yv) * u + u * u * u / 3.0;
    // remainder of the first-order expansion shrinks as kappa^2
    std::vector<double> lk, le;
    bool ok = true;
    for (double k : {1e-3, -1e-3, 1e-4, -1e-4, 1e-5, -1e-5}) {
      const double d = man::distance(Point{xv, k}, Point{yv, k});
      const double err = std::abs(d - (2.0 * u - 2.0 * k * coef));
      if (err <= 0.0) {
        ok = false;
        break;
      }
      lk.push_back(std::log(std::abs(k)));
      le.push_back(std::log(err));
    }
    if (!ok) continue;
    double mx = 0, my = 0;
    for (size_t i = 0; i < lk.size(); ++i) {
      mx += lk[i];
      my += le[i];
    }
    mx /= lk.size();
    my /= le.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < lk.size(); ++i) {
      num += (lk[i] - mx) * (le[i] - my);
      den += (lk[i] - mx) * (lk[i] - mx);
    }
    const double slope = num / den;
    c.check(std::abs(slope - 2.0) < 0.2);
    // one-sided central difference at kappa = 0 matches the Taylor coefficient
    const double h = 1e-6;
    const double dp = man::distance(Point{xv, h}, Point{yv, h});
    const double dm = man::distance(Point{xv, -h}, Point{yv, -h});
    const double deriv = (dp - dm) / (2.0 * h);
    c.check(std::abs(deriv - (-2.0 * coef)) < 1e-4 * std::max(1.0, std::abs(2.0 * coef)));
  }
  return timed("curvature-smoothness", c, since(t0));
}

SuiteResult aggregation_theorems(uint64_t seed) {
  const auto t0 = Clock::now();
  Checker c;
  Rng rng(seed);
  for (double k : {-1.0, 0.5}) {
    for (int rep = 0; rep < 10; ++rep) {
      const int n = 4, d = 3;
      Eigen::MatrixXd xs(n, d), ys(n, d);
      for (int i = 0; i < n; ++i) {
        xs.row(i) = random_point(rng, d, k).coords.transpose();
        ys.row(i) = random_point(rng, d, k).coords.transpose();
      }
      agg::PointMatrix X{xs, k}, Y{ys, k};
      // neuter element
      agg::PointMatrix ix = agg::left_matmul(Eigen::MatrixXd::Identity(n, n), X);
      c.check((ix.rows - X.rows).norm() < 1e-10);
      // scalar associativity
      Eigen::MatrixXd A(n, n), B(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          A(i, j) = rng.uniform();
          B(i, j) = rng.uniform();
        }
        A.row(i) /= A.row(i).sum();
        B.row(i) /= B.row(i).sum();
      }
      const double r = 0.7;
      agg::PointMatrix ax = agg::left_matmul(A, X);
      agg::PointMatrix rax = agg::left_matmul(r * A, X);
      for (int i = 0; i < n; ++i) {
        Point scaled = man::kappa_scale(r, ax.point(i));
        c.check((scaled.coords - rax.point(i).coords).norm() < 1e-10);
      }
      // right-stochastic left-multiplication is intrinsic
      man::Isometry iso = man::random_isometry(rng, d, k);
      Eigen::MatrixXd xphi(n, d), yphi(n, d);
      for (int i = 0; i < n; ++i) {
        xphi.row(i) = man::apply(iso, X.point(i)).coords.transpose();
        yphi.row(i) = man::apply(iso, Y.point(i)).coords.transpose();
      }
      agg::PointMatrix AX = agg::left_matmul(A, X), BY = agg::left_matmul(B, Y);
      agg::PointMatrix AXp = agg::left_matmul(A, agg::PointMatrix{xphi, k});
      agg::PointMatrix BYp = agg::left_matmul(B, agg::PointMatrix{yphi, k});
      for (int i = 0; i < n; ++i) {
        const double d0 = man::distance(AX.point(i), BY.point(i));
        const double d1 = man::distance(AXp.point(i), BYp.point(i));
        c.check(std::abs(d0 - d1) < 1e-8);
      }
      // tangential aggregation is equivariant
      Point base = random_point(rng, d, k);
      Eigen::VectorXd alpha(n);
      for (int i = 0; i < n; ++i) alpha(i) = rng.uniform(0.2, 1.0);
      Point tg = agg::tangential_agg(base, X, alpha);
      Point tg_phi = agg::tangential_agg(man::apply(iso, base),
                                         agg::PointMatrix{xphi, k}, alpha);
      c.check((tg_phi.coords - man::apply(iso, tg).coords).norm() < 1e-8);
      // weight rescaling by powers of two is exact
      Point m1 = agg::gyromidpoint(X, alpha);
      Point m2 = agg::gyromidpoint(X, 2.0 * alpha);
      c.check((m1.coords - m2.coords).norm() == 0.0);
    }
  }
  return timed("aggregation-theorems", c, since(t0));
}

SuiteResult gradient_checks(uint64_t seed) {
  const auto t0 = Clock::now();
  Checker c;
  Rng rng(seed);
  for (double k : {-1.0, 0.8}) {
    for (int rep = 0; rep < 5; ++rep) {
      const int n = 3, d = 3;
      Eigen::MatrixXd xs(n, d);
      for (int i = 0; i < n; ++i)
        xs.row(i) = random_point(rng, d, k, 0.5).coords.transpose();
      // d/dX and d/dkappa of sum of pairwise squared distances
      ad::Tape tape;
      ad::Var X = tape.leaf(ad::Tensor::from_eigen(xs));
      ad::Var kap = tape.leaf(ad::Tensor::scalar(k));
      ad::Var loss = ad::sum(geo::pairwise_distance_sq(X, kap));
      auto grads = tape.backward(loss);
      ad::Tensor gx = ad::grad_or_zero(grads, X);
      ad::Tensor gk = ad::grad_or_zero(grads, kap);

      ad::Tensor fdx = ad::finite_diff(
          [&](const ad::Tensor& xt) {
            ad::Tape t;
            ad::Var Xv = t.leaf(xt);
            ad::Var kv = t.leaf(ad::Tensor::scalar(k));
            return ad::sum(geo::pairwise_distance_sq(Xv, kv)).val()[0];
          },
          ad::Tensor::from_eigen(xs), 1e-5);
      bool ok = true;
      for (size_t i = 0; i < gx.data.size(); ++i) {
        const double a = gx.data[i], b = fdx.data[i];
        const double scale = std::max({1e-3, std::abs(a), std::abs(b)});
        if (std::abs(a - b) / scale > 1e-4 && std::abs(a - b) > 1e-7) ok = false;
      }
      c.check(ok);
      ad::Tensor fdk = ad::finite_diff(
          [&](const ad::Tensor& kt) {
            ad::Tape t;
            ad::Var Xv = t.leaf(ad::Tensor::from_eigen(xs));
            ad::Var kv = t.leaf(kt);
            return ad::sum(geo::pairwise_distance_sq(Xv, kv)).val()[0];
          },
          ad::Tensor::scalar(k), 1e-6);
      const double scale = std::max({1e-3, std::abs(gk[0]), std::abs(fdk[0])});
      c.check(std::abs(gk[0] - fdk[0]) / scale < 1e-4 || std::abs(gk[0] - fdk[0]) < 1e-7);
    }
  }
  return timed("gradient-checks", c, since(t0));
}

SuiteResult graph_invariants(uint64_t seed) {
  const auto t0 = Clock::now();
  Checker c;
  Rng rng(seed);
  graph::Graph tree = graph::gen_balanced_tree(3, 3);
  Eigen::MatrixXd left = graph::normalize_adjacency(tree, graph::AdjacencyMode::kLeft);
  bool rows_ok = true;
  for (int i = 0; i < tree.n; ++i)
    if (std::abs(left.row(i).sum() - 1.0) > 1e-12) rows_ok = false;
  c.check(rows_ok);
  Eigen::MatrixXd sym = graph::normalize_adjacency(tree, graph::AdjacencyMode::kSymmetric);
  c.check((sym - sym.transpose()).cwiseAbs().maxCoeff() < 1e-15);

  Rng r1(seed), r2(seed);
  graph::Graph g1 = graph::gen_geometric_graph(graph::GeometricKind::kTorus, 60, 0.2, r1);
  graph::Graph g2 = graph::gen_geometric_graph(graph::GeometricKind::kTorus, 60, 0.2, r2);
  c.check(g1.edges == g2.edges);

  Rng rc(seed + 1);
  auto est_tree = graph::estimate_curvature(graph::gen_balanced_tree(4, 3), 200, rc);
  c.check(est_tree.kappa_hat < 0.0);
  auto est_cycle = graph::estimate_curvature(graph::gen_cycle(20), 200, rc);
  c.check(est_cycle.kappa_hat > 0.0);
  (void)rng;
  return timed("graph-invariants", c, since(t0));
}

}  // namespace

Report run_all(uint64_t seed) {
  Report rep;
  rep.suites.push_back(gyro_identities(Rng::derive(seed, 1)));
  rep.suites.push_back(oracle_equivalence(Rng::derive(seed, 2)));
  rep.suites.push_back(curvature_smoothness(Rng::derive(seed, 3)));
  rep.suites.push_back(aggregation_theorems(Rng::derive(seed, 4)));
  rep.suites.push_back(gradient_checks(Rng::derive(seed, 5)));
  rep.suites.push_back(graph_invariants(Rng::derive(seed, 6)));
  return rep;
}

}  // namespace kgcn::selftest

#include <doctest.h>

#include <cmath>

#include "kgcn/manifold.hpp"
#include "oracles.hpp"

namespace man = kgcn::manifold;
using man::Point;
using Eigen::Vector2d;

namespace {

Point pt2(double x, double y, double kappa) {
  Eigen::VectorXd v(2);
  v << x, y;
  return Point{v, kappa};
}

}  // namespace

TEST_SUITE("manifold") {

TEST_CASE("tan_k branches") {
  CHECK(man::tan_k(0.3, 0.0) == doctest::Approx(0.3).epsilon(1e-15));
  // high-precision tanh oracle
  CHECK(man::tan_k(0.3, -1.0) == doctest::Approx(std::tanh(0.3)).epsilon(1e-14));
  CHECK(man::tan_k(0.3, -1.0) == doctest::Approx(0.2913126124515909).epsilon(1e-12));
  CHECK(man::tan_k(M_PI / 4.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(man::tan_k(2.0, 1.0), kgcn::DomainError);
}

TEST_CASE("tan_k odd and smooth at the branch boundary") {
  for (double k : {-0.5, 0.0, 0.7}) {
    for (double u : {1e-7, 1e-4, 0.3}) {
      CHECK(man::tan_k(-u, k) == doctest::Approx(-man::tan_k(u, k)).epsilon(1e-15));
    }
  }
  // series and closed form agree around |kappa| u^2 = kTaylorEps
  const double u = 0.5;
  const double k_edge = kgcn::kTaylorEps / (u * u);
  const double below = man::tan_k(u, k_edge * 0.99);
  const double above = man::tan_k(u, k_edge * 1.01);
  CHECK(std::abs(below - above) < 1e-12);
}

TEST_CASE("atan_k") {
  CHECK(man::atan_k(0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(man::atan_k(0.5, 1.0) == doctest::Approx(std::atan(0.5)).epsilon(1e-14));
  CHECK(man::atan_k(0.5, 1.0) == doctest::Approx(0.4636476090008061).epsilon(1e-12));
  CHECK(man::atan_k(man::tan_k(0.2, -0.7), -0.7) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(man::atan_k(1.5, -1.0), kgcn::DomainError);
}

TEST_CASE("conformal factor") {
  CHECK(man::conformal_factor(pt2(0, 0, -1.0)) == doctest::Approx(2.0));
  CHECK(man::conformal_factor(pt2(0.4, -0.2, 0.0)) == doctest::Approx(2.0));
  CHECK(man::conformal_factor(pt2(0.5, 0, -1.0)) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("kappa_add") {
  Point s = man::kappa_add(pt2(0.1, 0.2, 0.0), pt2(0.3, -0.1, 0.0));
  CHECK(s.coords(0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(s.coords(1) == doctest::Approx(0.1).epsilon(1e-15));

  Point y = pt2(0.3, -0.4, -1.0);
  Point n = man::kappa_add(pt2(0, 0, -1.0), y);
  CHECK((n.coords - y.coords).norm() < 1e-15);

  // 1-D Moebius oracle (a+b)/(1+ab)
  Point m = man::kappa_add(pt2(0.5, 0, -1.0), pt2(0.2, 0, -1.0));
  CHECK(m.coords(0) == doctest::Approx(0.7 / 1.1).epsilon(1e-14));
  CHECK(m.coords(1) == doctest::Approx(0.0));

  CHECK_THROWS_AS(man::kappa_add(pt2(2.0, 0, 1.0), pt2(0.5, 0, 1.0)), kgcn::AntipodalError);
}

TEST_CASE("kappa_scale") {
  Point x = pt2(0.3, -0.2, -0.8);
  Point s1 = man::kappa_scale(1.0, x);
  CHECK((s1.coords - x.coords).norm() < 1e-14);

  Point e = man::kappa_scale(-1.7, pt2(0.3, -0.2, 0.0));
  CHECK(e.coords(0) == doctest::Approx(-0.51).epsilon(1e-14));
  CHECK(e.coords(1) == doctest::Approx(0.34).epsilon(1e-14));

  // tanh(2 artanh 0.5) = 0.8
  Point d = man::kappa_scale(2.0, pt2(0.5, 0, -1.0));
  CHECK(d.coords(0) == doctest::Approx(0.8).epsilon(1e-14));

  CHECK_THROWS_AS(man::kappa_scale(10.0, pt2(0.9, 0, 1.0)), kgcn::DomainError);
}

TEST_CASE("exp/log maps") {
  Point x = pt2(0.2, 0.1, -1.0);
  Point same = man::exp_map(x, man::TangentVector{Eigen::Vector2d(0, 0), x});
  CHECK((same.coords - x.coords).norm() == 0.0);

  Point e0 = pt2(0.2, 0.1, 0.0);
  Point moved = man::exp_map(e0, man::TangentVector{Eigen::Vector2d(0.3, -0.4), e0});
  CHECK(moved.coords(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(moved.coords(1) == doctest::Approx(-0.3).epsilon(1e-14));

  Point o = pt2(0, 0, -1.0);
  Point t = man::exp_map(o, man::TangentVector{Eigen::Vector2d(0.3, 0), o});
  CHECK(t.coords(0) == doctest::Approx(std::tanh(0.3)).epsilon(1e-14));

  CHECK(man::log_map(x, x).coords.norm() == 0.0);
  Point y0 = pt2(-0.3, 0.4, 0.0);
  CHECK((man::log_map(e0, y0).coords - (y0.coords - e0.coords)).norm() < 1e-15);

  kgcn::Rng rng(7);
  for (double k : {-1.0, 1.0}) {
    for (int i = 0; i < 50; ++i) {
      Point a = oracles::random_point(rng, 3, k, 0.5);
      Point b = oracles::random_point(rng, 3, k, 0.5);
      Point back = man::exp_map(a, man::log_map(a, b));
      CHECK((back.coords - b.coords).norm() < 1e-9);
    }
  }
}

TEST_CASE("distance") {
  Point x = pt2(0.1, -0.2, -1.0);
  CHECK(man::distance(x, x) < 1e-15);
  CHECK(man::distance(pt2(0, 0, 0.0), pt2(0.3, 0.4, 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
  // sphere-lift oracle: lift of 0 is (0,0,1), lift of (0.5,0) is (0.8,0,0.6)
  const double d = man::distance(pt2(0, 0, 1.0), pt2(0.5, 0, 1.0));
  CHECK(d == doctest::Approx(std::acos(0.6)).epsilon(1e-12));
  CHECK(d == doctest::Approx(0.9272952180016122).epsilon(1e-12));
  CHECK(d == doctest::Approx(oracles::ambient_distance(pt2(0, 0, 1.0), pt2(0.5, 0, 1.0)))
               .epsilon(1e-12));
}

TEST_CASE("distance matches the ambient oracles at |kappa| = 1") {
  kgcn::Rng rng(11);
  for (double k : {1.0, -1.0}) {
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      Point x = oracles::random_point(rng, 3, k);
      Point y = oracles::random_point(rng, 3, k);
      worst = std::max(worst, std::abs(man::distance(x, y) - oracles::ambient_distance(x, y)));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("gyration") {
  kgcn::Rng rng(3);
  Point u = oracles::random_point(rng, 3, -1.0);
  Point w = oracles::random_point(rng, 3, -1.0);
  Point z = man::origin(3, -1.0);
  CHECK((man::gyration(u, z, w).coords - w.coords).norm() < 1e-14);

  Point u0 = oracles::random_point(rng, 3, 0.0);
  Point v0 = oracles::random_point(rng, 3, 0.0);
  Point w0 = oracles::random_point(rng, 3, 0.0);
  CHECK((man::gyration(u0, v0, w0).coords - w0.coords).norm() == 0.0);

  for (int i = 0; i < 50; ++i) {
    Point a = oracles::random_point(rng, 3, -1.0);
    Point b = oracles::random_point(rng, 3, -1.0);
    Point c = oracles::random_point(rng, 3, -1.0);
    // definition -(a(+)b) (+) (a(+)(b(+)c)) against the closed form
    Point def = man::kappa_add(man::neg(man::kappa_add(a, b)),
                               man::kappa_add(a, man::kappa_add(b, c)));
    Point alt = man::gyration(a, b, c);
    CHECK((def.coords - alt.coords).norm() < 1e-10);
    CHECK(std::abs(alt.coords.norm() - c.coords.norm()) < 1e-10);
  }
}

TEST_CASE("stereographic lift and projection") {
  const auto north = man::stereo_lift(pt2(0, 0, 1.0));
  CHECK(north.coords(0) == doctest::Approx(0.0));
  CHECK(north.coords(1) == doctest::Approx(0.0));
  CHECK(north.coords(2) == doctest::Approx(1.0).epsilon(1e-14));

  const auto lifted = man::stereo_lift(pt2(0.5, 0, 1.0));
  CHECK(lifted.coords(0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(lifted.coords(1) == doctest::Approx(0.0));
  CHECK(lifted.coords(2) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(man::ambient_defect(lifted) < 1e-9);

  Point back = man::stereo_project(lifted);
  CHECK(back.coords(0) == doctest::Approx(0.5).epsilon(1e-13));

  kgcn::Rng rng(5);
  for (double k : {0.7, -1.3}) {
    for (int i = 0; i < 30; ++i) {
      Point x = oracles::random_point(rng, 4, k);
      CHECK(man::ambient_defect(man::stereo_lift(x)) < 1e-9);
      Point rt = man::stereo_project(man::stereo_lift(x));
      CHECK((rt.coords - x.coords).norm() < 1e-12);
    }
  }

  Eigen::VectorXd south(3);
  south << 0, 0, -1;
  CHECK_THROWS_AS(man::stereo_project(man::AmbientPoint{south, 1.0}), kgcn::DomainError);
  CHECK_THROWS_AS(man::stereo_lift(pt2(0.1, 0.1, 0.0)), kgcn::DomainError);
}

TEST_CASE("project_to_domain") {
  Point inside = man::project_to_domain(Eigen::Vector2d(0.5, 0), -1.0);
  CHECK(inside.coords(0) == doctest::Approx(0.5));
  Point clamped = man::project_to_domain(Eigen::Vector2d(2.0, 0), -1.0);
  CHECK(clamped.coords(0) == doctest::Approx(1.0 - 1e-5).epsilon(1e-12));
  Point flat = man::project_to_domain(Eigen::Vector2d(2.0, 0), 1.0);
  CHECK(flat.coords(0) == doctest::Approx(2.0));
}

TEST_CASE("isometries preserve distances") {
  kgcn::Rng rng(13);
  // identity isometry
  man::Isometry id{Eigen::MatrixXd::Identity(3, 3), man::origin(3, -1.0)};
  Point x = oracles::random_point(rng, 3, -1.0);
  CHECK((man::apply(id, x).coords - x.coords).norm() == 0.0);

  for (double k : {-1.0, 0.5}) {
    man::Isometry phi = man::random_isometry(rng, 3, k);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Point a = oracles::random_point(rng, 3, k);
      Point b = oracles::random_point(rng, 3, k);
      const double before = man::distance(a, b);
      const double after = man::distance(man::apply(phi, a), man::apply(phi, b));
      worst = std::max(worst, std::abs(before - after));
      // isometries compose to isometries
      const double twice =
          man::distance(man::apply(phi, man::apply(phi, a)), man::apply(phi, man::apply(phi, b)));
      worst = std::max(worst, std::abs(before - twice));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("left cancellation across signed curvatures") {
  kgcn::Rng rng(17);
  for (double k : {-2.0, -1.0, -0.1, 0.1, 1.0}) {
    for (int i = 0; i < 40; ++i) {
      Point x = oracles::random_point(rng, 3, k);
      Point y = oracles::random_point(rng, 3, k);
      Point out = man::kappa_add(x, man::kappa_add(man::neg(x), y));
      CHECK((out.coords - y.coords).norm() < 1e-10);
    }
  }
}

TEST_CASE("orthogonal maps commute with kappa-addition") {
  kgcn::Rng rng(19);
  for (double k : {-1.0, 0.5}) {
    for (int i = 0; i < 30; ++i) {
      man::Isometry iso = man::random_isometry(rng, 3, k);
      Point x = oracles::random_point(rng, 3, k);
      Point y = oracles::random_point(rng, 3, k);
      Point lhs = man::kappa_add(Point{iso.rotation * x.coords, k}, Point{iso.rotation * y.coords, k});
      Eigen::VectorXd rhs = iso.rotation * man::kappa_add(x, y).coords;
      CHECK((lhs.coords - rhs).norm() < 1e-12);
    }
  }
}

TEST_CASE("scaling-distance identity") {
  kgcn::Rng rng(23);
  for (double k : {-1.5, -0.3, 0.4, 1.0}) {
    for (int i = 0; i < 30; ++i) {
      Point x = oracles::random_point(rng, 3, k, 0.5);
      const double r = rng.uniform(-1.4, 1.4);
      if (k > 0 && std::abs(r * man::atan_k(x.coords.norm(), k)) * std::sqrt(k) >= M_PI / 2 * 0.95)
        continue;
      Point sx = man::kappa_scale(r, x);
      const double lhs = man::distance(man::origin(3, k), sx);
      const double rhs = std::abs(r) * man::distance(man::origin(3, k), x);
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("Taylor remainder shrinks quadratically in kappa") {
  kgcn::Rng rng(29);
  int tested = 0;
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd x(3), y(3);
    for (int i = 0; i < 3; ++i) {
      x(i) = rng.uniform(-0.5, 0.5);
      y(i) = rng.uniform(-0.5, 0.5);
    }
    const double u = (x - y).norm();
    if (u < 0.05) continue;
    const double coef = x.dot(y) * u + u * u * u / 3.0;
    std::vector<double> lk, le;
    for (double k : {1e-3, -1e-3, 1e-4, -1e-4, 1e-5, -1e-5}) {
      const double d = man::distance(Point{x, k}, Point{y, k});
      const double err = std::abs(d - (2.0 * u - 2.0 * k * coef));
      REQUIRE(err > 0.0);
      lk.push_back(std::log(std::abs(k)));
      le.push_back(std::log(err));
    }
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
    CHECK(num / den == doctest::Approx(2.0).epsilon(0.1));
    ++tested;

    // C1 continuity at kappa = 0: central difference matches the coefficient
    const double h = 1e-6;
    const double deriv =
        (man::distance(Point{x, h}, Point{y, h}) - man::distance(Point{x, -h}, Point{y, -h})) /
        (2.0 * h);
    CHECK(std::abs(deriv - (-2.0 * coef)) / std::max(1.0, std::abs(2.0 * coef)) < 1e-4);
  }
  CHECK(tested >= 3);
}

}  // TEST_SUITE

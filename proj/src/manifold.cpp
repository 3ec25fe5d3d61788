#include "kgcn/manifold.hpp"

#include <cmath>

namespace kgcn::manifold {

namespace debug {
bool flip_kappa_add_sign = false;
}

namespace detail {

TrigEval tan_k_eval(double u, double kappa, bool saturate) {
  const double ku2 = std::abs(kappa) * u * u;
  if (ku2 < kTaylorEps) {
    const double u2 = u * u, u3 = u2 * u, u5 = u3 * u2;
    return {u + kappa * u3 / 3.0 + 2.0 * kappa * kappa * u5 / 15.0,
            1.0 + kappa * u2 + (2.0 / 3.0) * kappa * kappa * u2 * u2,
            u3 / 3.0 + (4.0 / 15.0) * kappa * u5};
  }
  if (kappa > 0.0) {
    const double s = std::sqrt(kappa);
    double a = s * u;
    const double cap = M_PI / 2.0 - (saturate ? kSatAngle : 1e-9);
    if (std::abs(a) >= cap) {
      if (!saturate) throw DomainError("tan_k: sqrt(kappa)*u outside (-pi/2, pi/2)");
      a = (a < 0.0) ? -cap : cap;
      const double t = std::tan(a) / s;
      return {t, 0.0, -t / (2.0 * kappa)};
    }
    const double tn = std::tan(a);
    const double t = tn / s;
    const double sec2 = 1.0 + tn * tn;
    return {t, sec2, (u * sec2 - t) / (2.0 * kappa)};
  }
  const double r = std::sqrt(-kappa);
  const double th = std::tanh(r * u);
  const double t = th / r;
  const double sech2 = 1.0 - th * th;
  return {t, sech2, (u * sech2 - t) / (2.0 * kappa)};
}

TrigEval atan_k_eval(double u, double kappa, bool saturate) {
  const double ku2 = std::abs(kappa) * u * u;
  if (ku2 < kTaylorEps) {
    const double u2 = u * u, u3 = u2 * u, u5 = u3 * u2;
    return {u - kappa * u3 / 3.0 + kappa * kappa * u5 / 5.0,
            1.0 - kappa * u2 + kappa * kappa * u2 * u2,
            -u3 / 3.0 + 0.4 * kappa * u5};
  }
  if (kappa > 0.0) {
    const double s = std::sqrt(kappa);
    const double v = std::atan(s * u) / s;
    const double du = 1.0 / (1.0 + kappa * u * u);
    return {v, du, (u * du - v) / (2.0 * kappa)};
  }
  const double r = std::sqrt(-kappa);
  double a = r * u;
  if (!saturate && std::abs(a) >= 1.0)
    throw DomainError("atan_k: sqrt(-kappa)*u outside (-1, 1)");
  if (saturate && std::abs(a) >= 1.0 - kSatTanh) {
    a = (a < 0.0) ? -(1.0 - kSatTanh) : (1.0 - kSatTanh);
    const double v = std::atanh(a) / r;
    return {v, 0.0, -v / (2.0 * kappa)};
  }
  const double v = std::atanh(a) / r;
  const double du = 1.0 / (1.0 + kappa * u * u);
  return {v, du, (u * du - v) / (2.0 * kappa)};
}

TrigEval asin_k_eval(double u, double kappa) {
  const double ku2 = std::abs(kappa) * u * u;
  if (ku2 < kTaylorEps) {
    const double u2 = u * u, u3 = u2 * u, u5 = u3 * u2;
    return {u + kappa * u3 / 6.0 + 3.0 * kappa * kappa * u5 / 40.0,
            1.0 + kappa * u2 / 2.0 + 3.0 * kappa * kappa * u2 * u2 / 8.0,
            u3 / 6.0 + 3.0 * kappa * u5 / 20.0};
  }
  if (kappa > 0.0) {
    const double s = std::sqrt(kappa);
    double a = s * u;
    const double cap = 1.0 - kAsinClamp;
    if (std::abs(a) >= cap) {
      a = (a < 0.0) ? -cap : cap;
      const double v = std::asin(a) / s;
      return {v, 0.0, -v / (2.0 * kappa)};
    }
    const double v = std::asin(a) / s;
    const double du = 1.0 / std::sqrt(1.0 - kappa * u * u);
    return {v, du, (u * du - v) / (2.0 * kappa)};
  }
  const double r = std::sqrt(-kappa);
  const double v = std::asinh(r * u) / r;
  const double du = 1.0 / std::sqrt(1.0 - kappa * u * u);
  return {v, du, (u * du - v) / (2.0 * kappa)};
}

TrigEval ratio_tan_k_eval(double u, double kappa, bool saturate) {
  const double ku2 = std::abs(kappa) * u * u;
  if (ku2 < kTaylorEps) {
    const double u2 = u * u, u4 = u2 * u2;
    return {1.0 + kappa * u2 / 3.0 + 2.0 * kappa * kappa * u4 / 15.0,
            2.0 * kappa * u / 3.0 + 8.0 * kappa * kappa * u2 * u / 15.0,
            u2 / 3.0 + 4.0 * kappa * u4 / 15.0};
  }
  const TrigEval t = tan_k_eval(u, kappa, saturate);
  return {t.value / u, (t.du * u - t.value) / (u * u), t.dk / u};
}

TrigEval ratio_atan_k_eval(double u, double kappa, bool saturate) {
  const double ku2 = std::abs(kappa) * u * u;
  if (ku2 < kTaylorEps) {
    const double u2 = u * u, u4 = u2 * u2;
    return {1.0 - kappa * u2 / 3.0 + kappa * kappa * u4 / 5.0,
            -2.0 * kappa * u / 3.0 + 4.0 * kappa * kappa * u2 * u / 5.0,
            -u2 / 3.0 + 2.0 * kappa * u4 / 5.0};
  }
  const TrigEval t = atan_k_eval(u, kappa, saturate);
  return {t.value / u, (t.du * u - t.value) / (u * u), t.dk / u};
}

double add_denominator(const Vec& x, const Vec& y, double kappa) {
  const double xy = x.dot(y);
  const double x2 = x.squaredNorm();
  const double y2 = y.squaredNorm();
  return 1.0 - 2.0 * kappa * xy + kappa * kappa * x2 * y2;
}

}  // namespace detail

double tan_k(double u, double kappa) { return detail::tan_k_eval(u, kappa, false).value; }
double atan_k(double u, double kappa) { return detail::atan_k_eval(u, kappa, false).value; }
double asin_k(double u, double kappa) { return detail::asin_k_eval(u, kappa).value; }

double conformal_factor(const Point& x) {
  return 2.0 / (1.0 + x.kappa * x.coords.squaredNorm());
}

bool in_domain(const Vec& x, double kappa) {
  if (kappa >= 0.0) return x.allFinite();
  return x.allFinite() && kappa * x.squaredNorm() > -1.0;
}

Point project_to_domain(Vec x, double kappa) {
  if (kappa < 0.0) {
    const double max_norm = (1.0 - kBoundaryEps) / std::sqrt(-kappa);
    const double n = x.norm();
    if (n > max_norm) x *= max_norm / n;
  }
  return Point{std::move(x), kappa};
}

Point kappa_add(const Point& x, const Point& y) {
  if (x.coords.size() != y.coords.size())
    throw ShapeError("kappa_add: dimension mismatch");
  if (x.kappa != y.kappa) throw ShapeError("kappa_add: curvature mismatch");
  const double k = x.kappa;
  const double xy = x.coords.dot(y.coords);
  const double x2 = x.coords.squaredNorm();
  const double y2 = y.coords.squaredNorm();
  const double den = 1.0 - 2.0 * k * xy + k * k * x2 * y2;
  if (std::abs(den) < kAntipodalEps)
    throw AntipodalError("kappa_add: degenerate pair (x = y/(kappa*|y|^2))");
  double sgn = debug::flip_kappa_add_sign ? 1.0 : -1.0;
  const Vec num =
      (1.0 + sgn * 2.0 * k * xy - k * y2) * x.coords + (1.0 + k * x2) * y.coords;
  return project_to_domain(num / den, k);
}

Point kappa_scale(double r, const Point& x) {
  const double k = x.kappa;
  const double n = x.coords.norm();
  if (n < kMinNorm) return x;
  const double t = atan_k(n, k);
  if (k > 0.0 && std::abs(r * t) * std::sqrt(k) >= M_PI / 2.0)
    throw DomainError("kappa_scale: scaled angle outside (-pi/2, pi/2)");
  return project_to_domain(tan_k(r * t, k) / n * x.coords, k);
}

Point exp_map(const Point& x, const TangentVector& v) {
  if (v.coords.size() != x.coords.size())
    throw ShapeError("exp_map: dimension mismatch");
  const double nv = v.coords.norm();
  if (nv < kMinNorm) return x;
  const double lam = conformal_factor(x);
  const double t = tan_k(lam * nv / 2.0, x.kappa);
  return kappa_add(x, Point{t / nv * v.coords, x.kappa});
}

TangentVector log_map(const Point& x, const Point& y) {
  const Point z = kappa_add(neg(x), y);
  const double nz = z.coords.norm();
  if (nz < kMinNorm) return TangentVector{Vec::Zero(x.coords.size()), x};
  const double lam = conformal_factor(x);
  const double t = atan_k(nz, x.kappa);
  return TangentVector{(2.0 / lam) * (t / nz) * z.coords, x};
}

double distance(const Point& x, const Point& y) {
  const Point z = kappa_add(neg(x), y);
  return 2.0 * atan_k(z.coords.norm(), x.kappa);
}

Point gyration(const Point& u, const Point& v, const Point& w) {
  const double k = u.kappa;
  const double uw = u.coords.dot(w.coords);
  const double vw = v.coords.dot(w.coords);
  const double uv = u.coords.dot(v.coords);
  const double u2 = u.coords.squaredNorm();
  const double v2 = v.coords.squaredNorm();
  const double A = -k * k * uw * v2 - k * vw + 2.0 * k * k * uv * vw;
  const double B = -k * k * vw * u2 + k * uw;
  const double D = 1.0 - 2.0 * k * uv + k * k * u2 * v2;
  if (std::abs(D) < kAntipodalEps)
    throw AntipodalError("gyration: degenerate (u,v) pair");
  return project_to_domain(w.coords + 2.0 * (A * u.coords + B * v.coords) / D, k);
}

AmbientPoint stereo_lift(const Point& x) {
  if (x.kappa == 0.0) throw DomainError("stereo_lift: undefined at kappa = 0");
  const double s = std::sqrt(std::abs(x.kappa));
  const double lam = conformal_factor(x);
  const int d = static_cast<int>(x.coords.size());
  Vec out(d + 1);
  out.head(d) = lam * x.coords;
  out(d) = (lam - 1.0) / s;
  return AmbientPoint{std::move(out), x.kappa};
}

Point stereo_project(const AmbientPoint& p) {
  if (p.kappa == 0.0) throw DomainError("stereo_project: undefined at kappa = 0");
  const double s = std::sqrt(std::abs(p.kappa));
  const int d = static_cast<int>(p.coords.size()) - 1;
  const double den = 1.0 + s * p.coords(d);
  if (std::abs(den) < 1e-12)
    throw DomainError("stereo_project: projection pole");
  return project_to_domain(p.coords.head(d) / den, p.kappa);
}

double ambient_defect(const AmbientPoint& p) {
  const int d = static_cast<int>(p.coords.size()) - 1;
  if (p.kappa > 0.0)
    return std::abs(p.coords.squaredNorm() - 1.0 / p.kappa);
  const double mink = p.coords.head(d).squaredNorm() - p.coords(d) * p.coords(d);
  return std::abs(mink - 1.0 / p.kappa);
}

Isometry random_isometry(Rng& rng, int d, double kappa) {
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;

  Vec dir(d);
  for (int i = 0; i < d; ++i) dir(i) = rng.normal();
  double n = dir.norm();
  if (n < kMinNorm) {
    dir.setZero();
    dir(0) = 1.0;
    n = 1.0;
  }
  dir /= n;
  const double geo_radius = rng.uniform(0.0, 0.5);
  Vec z = tan_k(geo_radius / 2.0, kappa) * dir;
  return Isometry{std::move(q), project_to_domain(std::move(z), kappa)};
}

Point apply(const Isometry& phi, const Point& x) {
  Point rx{phi.rotation * x.coords, x.kappa};
  return kappa_add(phi.translation, rx);
}

}  // namespace kgcn::manifold

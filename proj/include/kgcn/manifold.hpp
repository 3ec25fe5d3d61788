#pragma once

#include <Eigen/Dense>

#include "kgcn/common.hpp"

// The kappa-stereographic kernel: one model family covering the Poincare ball
// (kappa < 0), Euclidean space (kappa = 0) and the stereographic sphere
// projection (kappa > 0). All formulas are written in the "fused" trig
// convention tan_k(u) = tan(sqrt(k)*u)/sqrt(k) (tanh for k<0), which is odd in
// u and smooth in kappa across 0 via a 3-term series branch.
namespace kgcn::manifold {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Point {
  Vec coords;
  double kappa = 0.0;
};

struct TangentVector {
  Vec coords;
  Point base;
};

// Point on the ambient sphere (kappa>0) or upper hyperboloid (kappa<0),
// one dimension above the stereographic chart.
struct AmbientPoint {
  Vec coords;
  double kappa = 0.0;
};

struct Isometry {
  Mat rotation;      // orthogonal d x d
  Point translation; // z in  phi(x) = z (+) R x
};

namespace detail {

struct TrigEval {
  double value;
  double du;  // partial w.r.t. u
  double dk;  // partial w.r.t. kappa
};

// saturate=false: spec error semantics (throws DomainError at the domain edge).
// saturate=true: tape semantics (clamps at the edge with zero u-gradient),
// used by the autodiff primitives so training cannot step outside the chart.
TrigEval tan_k_eval(double u, double kappa, bool saturate);
TrigEval atan_k_eval(double u, double kappa, bool saturate);
TrigEval asin_k_eval(double u, double kappa);
TrigEval ratio_tan_k_eval(double u, double kappa, bool saturate);   // tan_k(u)/u, limit 1 at u=0
TrigEval ratio_atan_k_eval(double u, double kappa, bool saturate);  // atan_k(u)/u, limit 1 at u=0

double add_denominator(const Vec& x, const Vec& y, double kappa);

}  // namespace detail

namespace debug {
// Fault injection used by the CLI self-test to prove the invariant suites
// actually detect a broken kernel. Never set outside tests.
extern bool flip_kappa_add_sign;
}  // namespace debug

double tan_k(double u, double kappa);
double atan_k(double u, double kappa);
double asin_k(double u, double kappa);

double conformal_factor(const Point& x);

// Radial clamp to (1 - kBoundaryEps)/sqrt(-kappa) for kappa<0; identity otherwise.
Point project_to_domain(Vec x, double kappa);

bool in_domain(const Vec& x, double kappa);

Point kappa_add(const Point& x, const Point& y);
Point kappa_scale(double r, const Point& x);
Point exp_map(const Point& x, const TangentVector& v);
TangentVector log_map(const Point& x, const Point& y);
double distance(const Point& x, const Point& y);

// gyr[u,v]w, closed form w + 2(Au + Bv)/D
Point gyration(const Point& u, const Point& v, const Point& w);

AmbientPoint stereo_lift(const Point& x);
Point stereo_project(const AmbientPoint& p);

// Max |constraint violation| of the ambient invariant (unit sphere / hyperboloid).
double ambient_defect(const AmbientPoint& p);

Isometry random_isometry(Rng& rng, int d, double kappa);
Point apply(const Isometry& phi, const Point& x);

inline Point neg(const Point& x) { return Point{-x.coords, x.kappa}; }

inline Point origin(int d, double kappa) { return Point{Vec::Zero(d), kappa}; }

}  // namespace kgcn::manifold

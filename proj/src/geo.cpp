#include "kgcn/geo.hpp"

#include <cmath>
#include <limits>

namespace kgcn::geo {

using ad::add;
using ad::broadcast_to;
using ad::clamp;
using ad::concat_cols;
using ad::div;
using ad::matmul;
using ad::mul;
using ad::neg;
using ad::reshape;
using ad::row_sum;
using ad::signed_floor;
using ad::sub;
using ad::sum;
using ad::Tape;
using ad::Tensor;
using ad::transpose;

namespace {

double kappa_value(Var kappa) {
  if (kappa.val().size() != 1) throw ShapeError("geo: kappa must be scalar");
  return kappa.val()[0];
}

Var c_scalar(Var like, double v) { return like.tape->scalar(v); }

}  // namespace

Var row_norm(Var X) {
  Var sq = row_sum(mul(X, X));
  return ad::sqrt(clamp(sq, kMinNorm * kMinNorm, std::numeric_limits<double>::infinity()));
}

Var conformal_lambda(Var X, Var kappa) {
  Var sq = row_sum(mul(X, X));
  Var den = add(c_scalar(X, 1.0), mul(kappa, sq));
  den = clamp(den, kMinNorm, std::numeric_limits<double>::infinity());
  return div(c_scalar(X, 2.0), den);
}

Var project_domain(Var X, Var kappa) {
  if (kappa_value(kappa) >= 0.0) return X;
  Var rn = row_norm(X);
  Var cap = div(c_scalar(X, 1.0 - kBoundaryEps), ad::sqrt(neg(kappa)));
  Var f = clamp(div(cap, rn), 0.0, 1.0);
  return mul(X, f);
}

Var kappa_add(Var X, Var Y, Var kappa) {
  Var one = c_scalar(X, 1.0);
  Var two = c_scalar(X, 2.0);
  Var xy = row_sum(mul(X, Y));
  Var x2 = row_sum(mul(X, X));
  Var y2 = row_sum(mul(Y, Y));
  Var k2 = mul(kappa, kappa);
  Var two_k_xy = mul(two, mul(kappa, xy));
  Var a = sub(sub(one, two_k_xy), mul(kappa, y2));
  Var b = add(one, mul(kappa, x2));
  Var den = add(sub(one, two_k_xy), mul(k2, mul(x2, y2)));
  den = clamp(den, kAntipodalEps, std::numeric_limits<double>::infinity());
  Var out = div(add(mul(a, X), mul(b, Y)), den);
  return project_domain(out, kappa);
}

Var kappa_scale(Var r, Var X, Var kappa) {
  Var rn = row_norm(X);
  Var t = ad::atan_k(rn, kappa);
  Var w = ad::tan_k(mul(r, t), kappa);
  Var out = mul(X, div(w, rn));
  return project_domain(out, kappa);
}

Var log0(Var X, Var kappa) {
  return mul(X, ad::ratio_atan_k(row_norm(X), kappa));
}

Var exp0(Var V, Var kappa) {
  Var out = mul(V, ad::ratio_tan_k(row_norm(V), kappa));
  return project_domain(out, kappa);
}

Var exp_at(Var X, Var V, Var kappa) {
  Var lam = conformal_lambda(X, kappa);
  Var rn = row_norm(V);
  Var u = mul(mul(lam, c_scalar(X, 0.5)), rn);
  Var factor = mul(mul(lam, c_scalar(X, 0.5)), ad::ratio_tan_k(u, kappa));
  return kappa_add(X, mul(V, factor), kappa);
}

Var log_at(Var X, Var Y, Var kappa) {
  Var z = kappa_add(neg(X), Y, kappa);
  Var lam = conformal_lambda(X, kappa);
  Var factor = mul(div(c_scalar(X, 2.0), lam), ad::ratio_atan_k(row_norm(z), kappa));
  return mul(z, factor);
}

Var distance_rows(Var X, Var Y, Var kappa) {
  Var z = kappa_add(neg(X), Y, kappa);
  return mul(c_scalar(X, 2.0), ad::atan_k(row_norm(z), kappa));
}

Var gyration(Var U, Var V, Var W, Var kappa) {
  Var one = c_scalar(U, 1.0);
  Var two = c_scalar(U, 2.0);
  Var k2 = mul(kappa, kappa);
  Var uw = row_sum(mul(U, W));
  Var vw = row_sum(mul(V, W));
  Var uv = row_sum(mul(U, V));
  Var u2 = row_sum(mul(U, U));
  Var v2 = row_sum(mul(V, V));
  Var A = add(sub(neg(mul(k2, mul(uw, v2))), mul(kappa, vw)), mul(two, mul(k2, mul(uv, vw))));
  Var B = add(neg(mul(k2, mul(vw, u2))), mul(kappa, uw));
  Var D = add(sub(one, mul(two, mul(kappa, uv))), mul(k2, mul(u2, v2)));
  D = clamp(D, kAntipodalEps, std::numeric_limits<double>::infinity());
  Var out = add(W, div(mul(two, add(mul(A, U), mul(B, V))), D));
  return project_domain(out, kappa);
}

Var pairwise_distance_sq(Var X, Var kappa) {
  const int n = X.val().rows();
  Var one = c_scalar(X, 1.0);
  Var two = c_scalar(X, 2.0);
  Var G = matmul(X, transpose(X));                    // [n,n]
  Var s = row_sum(mul(X, X));                         // [n,1]
  Var sT = reshape(s, {1, n});
  Var num = clamp(sub(add(s, sT), mul(two, G)), 0.0,
                  std::numeric_limits<double>::infinity());
  Var den = add(add(one, mul(two, mul(kappa, G))),
                mul(mul(kappa, kappa), mul(s, sT)));
  den = clamp(den, kAntipodalEps, std::numeric_limits<double>::infinity());
  Var m = ad::sqrt(clamp(div(num, den), 1e-24, std::numeric_limits<double>::infinity()));
  Var d = mul(two, ad::atan_k(m, kappa));
  return mul(d, d);
}

Var gyromidpoint(Var A, Var X, Var kappa) {
  const int n = X.val().rows();
  Var lam = conformal_lambda(X, kappa);               // [n,1]
  Var lam_row = reshape(lam, {1, n});
  Var denom = matmul(A, sub(lam, c_scalar(X, 1.0)));  // [m,1]
  denom = signed_floor(denom, kCondEps);
  Var S = matmul(mul(A, lam_row), X);                 // [m,d]
  Var inner = project_domain(div(S, denom), kappa);
  return kappa_scale(c_scalar(X, 0.5), inner, kappa);
}

Var left_matmul(Var A, Var X, Var kappa) {
  Var m = gyromidpoint(A, X, kappa);
  Var r = row_sum(A);
  return kappa_scale(r, m, kappa);
}

Var right_matmul(Var X, Var W, Var kappa) {
  return exp0(matmul(log0(X, kappa), W), kappa);
}

Var tangential_agg(Var x, Var X, Var alpha, Var kappa) {
  const int n = X.val().rows();
  const int d = X.val().cols();
  Var xb = broadcast_to(x, {n, d});
  Var logs = log_at(xb, X, kappa);                    // [n,d]
  Var v = matmul(alpha, logs);                        // [1,d]
  return exp_at(x, v, kappa);
}

Nonlin nonlin_from_name(const std::string& name) {
  if (name == "identity" || name.empty()) return Nonlin::kIdentity;
  if (name == "relu") return Nonlin::kRelu;
  if (name == "tanh") return Nonlin::kTanh;
  throw ConfigError("unknown nonlinearity: " + name);
}

Var mobius_nonlin(Var X, Var kappa, Nonlin f, Var dropout_mask) {
  Var t = log0(X, kappa);
  switch (f) {
    case Nonlin::kIdentity: break;
    case Nonlin::kRelu: t = ad::relu(t); break;
    case Nonlin::kTanh: t = ad::tanh(t); break;
  }
  if (dropout_mask.valid()) t = mul(t, dropout_mask);
  return exp0(t, kappa);
}

Var stereo_lift(Var X, Var kappa) {
  const double kv = kappa_value(kappa);
  if (kv == 0.0) throw DomainError("stereo_lift: undefined at kappa = 0");
  Var lam = conformal_lambda(X, kappa);
  Var s = ad::sqrt(kv > 0.0 ? kappa : neg(kappa));
  Var head = mul(X, lam);
  Var last = div(sub(lam, c_scalar(X, 1.0)), s);
  return concat_cols({head, last});
}

Var logit_column(Var H, Var a, Var p, Var kappa) {
  const int n = H.val().rows();
  const int d = H.val().cols();
  Var one = c_scalar(H, 1.0);
  Var two = c_scalar(H, 2.0);
  Var pb = broadcast_to(neg(p), {n, d});
  Var z = kappa_add(pb, H, kappa);                    // [n,d]
  Var z2 = row_sum(mul(z, z));
  Var za = matmul(z, transpose(a));                   // [n,1]
  Var na = clamp(ad::norm2(a), kMinNorm, std::numeric_limits<double>::infinity());
  Var zden = clamp(add(one, mul(kappa, z2)), kMinNorm,
                   std::numeric_limits<double>::infinity());
  Var u = div(mul(two, za), mul(zden, na));
  Var lam_p = conformal_lambda(p, kappa);             // [1,1]
  return mul(mul(lam_p, na), ad::asin_k(u, kappa));
}

Var preprocess_features(Var X, Var kappa, double max_norm) {
  const double kv = kappa_value(kappa);
  if (kv == 0.0 || max_norm <= 0.0) return X;
  Var absk = ad::sqrt(mul(kappa, kappa));
  Var scale = div(c_scalar(X, 1.0), mul(c_scalar(X, 2.0 * max_norm), ad::sqrt(absk)));
  return mul(X, scale);
}

Var distortion_from_sq(Var dist_sq, const Tensor& inv_dg2, const Tensor& mask,
                       long long count) {
  if (count <= 0) throw ConfigError("distortion: no reachable pairs");
  Tape& t = *dist_sq.tape;
  Var inv = t.constant(inv_dg2);
  Var msk = t.constant(mask);
  Var term = mul(sub(mul(dist_sq, inv), c_scalar(dist_sq, 1.0)), msk);
  return div(sum(mul(term, term)), c_scalar(dist_sq, static_cast<double>(count)));
}

}  // namespace kgcn::geo

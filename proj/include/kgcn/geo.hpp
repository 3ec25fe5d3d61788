#pragma once

#include <string>

#include "kgcn/tape.hpp"

// Manifold operations expressed as tape compositions, row-wise over point
// matrices. Each function matches the plain kernel in kgcn::manifold /
// kgcn::agg (cross-checked by tests) but is differentiable w.r.t. all inputs
// including kappa, and saturates instead of throwing at chart boundaries.
namespace kgcn::geo {

using ad::Var;

// [n,1] conformal factors 2 / (1 + kappa |x_i|^2)
Var conformal_lambda(Var X, Var kappa);

// Radial clamp into the kappa<0 ball; identity for kappa >= 0 (no-op nodes).
Var project_domain(Var X, Var kappa);

// sqrt(row_sum(X*X)) with a zero-safe floor
Var row_norm(Var X);

Var kappa_add(Var X, Var Y, Var kappa);                 // [n,d] (+) [n,d]
Var kappa_scale(Var r, Var X, Var kappa);               // r scalar or [n,1]
Var exp0(Var V, Var kappa);
Var log0(Var X, Var kappa);
Var exp_at(Var X, Var V, Var kappa);
Var log_at(Var X, Var Y, Var kappa);
Var distance_rows(Var X, Var Y, Var kappa);             // [n,1]
Var gyration(Var U, Var V, Var W, Var kappa);           // [n,d]

// Squared pairwise distances [n,n] through the closed-form
// |(-x) (+) y|^2 = |x-y|^2 / (1 + 2k<x,y> + k^2 |x|^2 |y|^2).
Var pairwise_distance_sq(Var X, Var kappa);

// Rows of A are weight vectors; returns the gyromidpoint per row. [m,n]x[n,d]
Var gyromidpoint(Var A, Var X, Var kappa);
Var left_matmul(Var A, Var X, Var kappa);
Var right_matmul(Var X, Var W, Var kappa);
Var tangential_agg(Var x, Var X, Var alpha, Var kappa);  // x [1,d], alpha [1,n]

enum class Nonlin { kIdentity, kRelu, kTanh };
Nonlin nonlin_from_name(const std::string& name);

// exp0(sigma(log0(X))); optional inverted-dropout mask applied to the
// tangent-space activations.
Var mobius_nonlin(Var X, Var kappa, Nonlin f, Var dropout_mask = Var{});

// Ambient lift (kappa != 0 at record time): [n,d] -> [n,d+1]
Var stereo_lift(Var X, Var kappa);

// Signed hyperplane scores for one class: lambda_p |a| * asin_k(u) with
// u = 2<z,a> / ((1 + kappa |z|^2) |a|), z = (-p) (+) x.
Var logit_column(Var H, Var a, Var p, Var kappa);

// X mapped by X / (2 sqrt|kappa| max_norm); identity when kappa == 0.
Var preprocess_features(Var X, Var kappa, double max_norm);

// Mean over masked entries of ((d^2 * inv_dg2) - 1)^2 where d^2 comes from
// pairwise_distance_sq (optionally summed over product components by caller).
Var distortion_from_sq(Var dist_sq, const ad::Tensor& inv_dg2, const ad::Tensor& mask,
                       long long count);

}  // namespace kgcn::geo

#include "kgcn/tape.hpp"

#include <cmath>
#include <cstring>

#include "kgcn/manifold.hpp"

namespace kgcn::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw ShapeError("op: vars must live on one tape");
  return *a.tape;
}

void require_rank2(const Tensor& t, const char* who) {
  if (t.rank() != 2) throw ShapeError(std::string(who) + ": rank-2 tensor required");
}

}  // namespace

const Tensor& Var::val() const { return tape->value(id); }

bool GradSink::wants(int id) const { return tape_->requires_grad(id); }

void GradSink::add(int id, Tensor g) {
  if (!wants(id)) return;
  Tensor& slot = (*grads_)[static_cast<size_t>(id)];
  if (slot.empty()) {
    slot = std::move(g);
    return;
  }
  if (!slot.same_shape(g)) throw ShapeError("grad accumulate: shape mismatch");
  for (size_t i = 0; i < slot.data.size(); ++i) slot.data[i] += g.data[i];
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), nullptr, "leaf", requires_grad});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::emit(Tensor value, const std::vector<Var>& parents, BackFn back, const char* name) {
  bool req = false;
  for (const Var& p : parents) {
    if (p.tape != this) throw ShapeError("emit: parent on another tape");
    req = req || requires_grad(p.id);
  }
  nodes_.push_back(Node{std::move(value), req ? std::move(back) : BackFn{}, name, req});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

std::vector<Tensor> Tape::backward(Var loss) {
  if (loss.tape != this) throw ShapeError("backward: loss on another tape");
  if (value(loss).size() != 1) throw NotScalarError("backward: loss must be scalar");
  std::vector<Tensor> grads(nodes_.size());
  grads[static_cast<size_t>(loss.id)] = Tensor::full(value(loss).shape, 1.0);
  GradSink sink(*this, grads);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    Tensor& g = grads[static_cast<size_t>(id)];
    if (g.empty() || !n.back) continue;
    n.back(g, *this, sink);
    g = Tensor();  // intermediate grads are not part of the result
  }
  return grads;
}

Tensor grad_or_zero(const std::vector<Tensor>& grads, Var v) {
  const Tensor& slot = grads[static_cast<size_t>(v.id)];
  if (!slot.empty()) return slot;
  return Tensor::zeros(v.val().shape);
}

// ---------- binary elementwise ----------

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  Tensor v = broadcast_combine(a.val(), b.val(), [](double x, double y) { return x + y; });
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(v), {a, b},
                [ia, ib](const Tensor& g, Tape& tp, GradSink& s) {
                  if (s.wants(ia)) s.add(ia, reduce_to(g, tp.value(ia).shape));
                  if (s.wants(ib)) s.add(ib, reduce_to(g, tp.value(ib).shape));
                },
                "add");
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  Tensor v = broadcast_combine(a.val(), b.val(), [](double x, double y) { return x - y; });
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(v), {a, b},
                [ia, ib](const Tensor& g, Tape& tp, GradSink& s) {
                  if (s.wants(ia)) s.add(ia, reduce_to(g, tp.value(ia).shape));
                  if (s.wants(ib)) {
                    Tensor ng = g;
                    for (double& x : ng.data) x = -x;
                    s.add(ib, reduce_to(ng, tp.value(ib).shape));
                  }
                },
                "sub");
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  Tensor v = broadcast_combine(a.val(), b.val(), [](double x, double y) { return x * y; });
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(v), {a, b},
                [ia, ib](const Tensor& g, Tape& tp, GradSink& s) {
                  const Tensor& av = tp.value(ia);
                  const Tensor& bv = tp.value(ib);
                  if (s.wants(ia))
                    s.add(ia, reduce_to(broadcast_combine(g, bv, [](double gg, double y) { return gg * y; }),
                                        av.shape));
                  if (s.wants(ib))
                    s.add(ib, reduce_to(broadcast_combine(g, av, [](double gg, double x) { return gg * x; }),
                                        bv.shape));
                },
                "mul");
}

Var div(Var a, Var b) {
  Tape& t = same_tape(a, b);
  Tensor v = broadcast_combine(a.val(), b.val(), [](double x, double y) { return x / y; });
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(v), {a, b},
                [ia, ib](const Tensor& g, Tape& tp, GradSink& s) {
                  const Tensor& av = tp.value(ia);
                  const Tensor& bv = tp.value(ib);
                  if (s.wants(ia))
                    s.add(ia, reduce_to(broadcast_combine(g, bv, [](double gg, double y) { return gg / y; }),
                                        av.shape));
                  if (s.wants(ib))
                    s.add(ib, reduce_to(broadcast_combine3(g, av, bv,
                                                           [](double gg, double x, double y) {
                                                             return -gg * x / (y * y);
                                                           }),
                                        bv.shape));
                },
                "div");
}

Var neg(Var a) {
  Tape& t = *a.tape;
  Tensor v = a.val();
  for (double& x : v.data) x = -x;
  const int ia = a.id;
  return t.emit(std::move(v), {a},
                [ia](const Tensor& g, Tape&, GradSink& s) {
                  if (!s.wants(ia)) return;
                  Tensor ng = g;
                  for (double& x : ng.data) x = -x;
                  s.add(ia, std::move(ng));
                },
                "neg");
}

// ---------- linear algebra ----------

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  const int n = av.shape[0], k = av.shape[1], m = bv.shape[1];
  if (bv.shape[0] != k) throw ShapeError("matmul: inner dimensions differ");
  Tensor out = Tensor::zeros({n, m});
  MMap(out.data.data(), n, m).noalias() =
      CMap(av.data.data(), n, k) * CMap(bv.data.data(), k, m);
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), {a, b},
                [ia, ib, n, k, m](const Tensor& g, Tape& tp, GradSink& s) {
                  CMap gm(g.data.data(), n, m);
                  if (s.wants(ia)) {
                    Tensor ga = Tensor::zeros({n, k});
                    MMap(ga.data.data(), n, k).noalias() =
                        gm * CMap(tp.value(ib).data.data(), k, m).transpose();
                    s.add(ia, std::move(ga));
                  }
                  if (s.wants(ib)) {
                    Tensor gb = Tensor::zeros({k, m});
                    MMap(gb.data.data(), k, m).noalias() =
                        CMap(tp.value(ia).data.data(), n, k).transpose() * gm;
                    s.add(ib, std::move(gb));
                  }
                },
                "matmul");
}

Var transpose(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  require_rank2(av, "transpose");
  const int n = av.shape[0], m = av.shape[1];
  Tensor out = Tensor::zeros({m, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out.at(j, i) = av.at(i, j);
  const int ia = a.id;
  return t.emit(std::move(out), {a},
                [ia, n, m](const Tensor& g, Tape&, GradSink& s) {
                  if (!s.wants(ia)) return;
                  Tensor ga = Tensor::zeros({n, m});
                  for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m; ++j) ga.at(i, j) = g.at(j, i);
                  s.add(ia, std::move(ga));
                },
                "transpose");
}

Var reshape(Var a, std::vector<int> shape) {
  Tape& t = *a.tape;
  Tensor out(shape, a.val().data);
  if (out.size() != a.val().size()) throw ShapeError("reshape: size mismatch");
  const int ia = a.id;
  return t.emit(std::move(out), {a},
                [ia](const Tensor& g, Tape& tp, GradSink& s) {
                  if (!s.wants(ia)) return;
                  s.add(ia, Tensor(tp.value(ia).shape, g.data));
                },
                "reshape");
}

Var broadcast_to(Var a, std::vector<int> shape) {
  Tape& t = *a.tape;
  Tensor target = Tensor::zeros(shape);
  Tensor v = broadcast_combine(a.val(), target, [](double x, double) { return x; });
  const int ia = a.id;
  return t.emit(std::move(v), {a},
                [ia](const Tensor& g, Tape& tp, GradSink& s) {
                  if (s.wants(ia)) s.add(ia, reduce_to(g, tp.value(ia).shape));
                },
                "broadcast");
}

// ---------- reductions ----------

Var sum(Var a) {
  Tape& t = *a.tape;
  double acc = 0.0;
  for (double x : a.val().data) acc += x;
  const int ia = a.id;
  return t.emit(Tensor::scalar(acc), {a},
                [ia](const Tensor& g, Tape& tp, GradSink& s) {
                  if (s.wants(ia)) s.add(ia, Tensor::full(tp.value(ia).shape, g[0]));
                },
                "sum");
}

Var row_sum(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  require_rank2(av, "row_sum");
  const int n = av.shape[0], m = av.shape[1];
  Tensor out = Tensor::zeros({n, 1});
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += av.at(i, j);
    out.at(i, 0) = acc;
  }
  const int ia = a.id;
  return t.emit(std::move(out), {a},
                [ia, n, m](const Tensor& g, Tape&, GradSink& s) {
                  if (!s.wants(ia)) return;
                  Tensor ga = Tensor::zeros({n, m});
                  for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m; ++j) ga.at(i, j) = g.at(i, 0);
                  s.add(ia, std::move(ga));
                },
                "row_sum");
}

Var col_sum(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  require_rank2(av, "col_sum");
  const int n = av.shape[0], m = av.shape[1];
  Tensor out = Tensor::zeros({1, m});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out.at(0, j) += av.at(i, j);
  const int ia = a.id;
  return t.emit(std::move(out), {a},
                [ia, n, m](const Tensor& g, Tape&, GradSink& s) {
                  if (!s.wants(ia)) return;
                  Tensor ga = Tensor::zeros({n, m});
                  for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m; ++j) ga.at(i, j) = g.at(0, j);
                  s.add(ia, std::move(ga));
                },
                "col_sum");
}

Var norm2(Var a) {
  Tape& t = *a.tape;
  double acc = 0.0;
  for (double x : a.val().data) acc += x * x;
  const double n = std::sqrt(acc);
  const int ia = a.id;
  return t.emit(Tensor::scalar(n), {a},
                [ia, n](const Tensor& g, Tape& tp, GradSink& s) {
                  if (!s.wants(ia)) return;
                  const Tensor& av = tp.value(ia);
                  Tensor ga = av;
                  const double f = g[0] / std::max(n, kMinNorm);
                  for (double& x : ga.data) x *= f;
                  s.add(ia, std::move(ga));
                },
                "norm2");
}

// ---------- unary elementwise ----------

#define KGCN_UNARY(NAME, FWD, BWD)                                            \
  Var NAME(Var a) {                                                           \
    Tape& t = *a.tape;                                                        \
    Tensor v = a.val();                                                       \
    for (double& x : v.data) x = (FWD);                                       \
    const int ia = a.id;                                                      \
    return t.emit(std::move(v), {a},                                          \
                  [ia](const Tensor& g, Tape& tp, GradSink& s) {              \
                    if (!s.wants(ia)) return;                                 \
                    const Tensor& av = tp.value(ia);                          \
                    Tensor ga = g;                                            \
                    for (size_t i = 0; i < ga.data.size(); ++i) {             \
                      const double x = av.data[i];                            \
                      (void)x;                                                \
                      ga.data[i] *= (BWD);                                    \
                    }                                                         \
                    s.add(ia, std::move(ga));                                 \
                  },                                                          \
                  #NAME);                                                     \
  }

KGCN_UNARY(tanh, std::tanh(x), 1.0 - std::tanh(x) * std::tanh(x))
KGCN_UNARY(tan, std::tan(x), 1.0 + std::tan(x) * std::tan(x))
KGCN_UNARY(atan, std::atan(x), 1.0 / (1.0 + x * x))
KGCN_UNARY(artanh, std::atanh(x), 1.0 / (1.0 - x * x))
KGCN_UNARY(asin, std::asin(x), 1.0 / std::sqrt(1.0 - x * x))
KGCN_UNARY(asinh, std::asinh(x), 1.0 / std::sqrt(1.0 + x * x))
KGCN_UNARY(sqrt, std::sqrt(x), 0.5 / std::sqrt(x))
KGCN_UNARY(exp, std::exp(x), std::exp(x))
KGCN_UNARY(log, std::log(x), 1.0 / x)
KGCN_UNARY(relu, x > 0.0 ? x : 0.0, x > 0.0 ? 1.0 : 0.0)

#undef KGCN_UNARY

Var clamp(Var a, double lo, double hi) {
  Tape& t = *a.tape;
  Tensor v = a.val();
  for (double& x : v.data) x = std::min(std::max(x, lo), hi);
  const int ia = a.id;
  return t.emit(std::move(v), {a},
                [ia, lo, hi](const Tensor& g, Tape& tp, GradSink& s) {
                  if (!s.wants(ia)) return;
                  const Tensor& av = tp.value(ia);
                  Tensor ga = g;
                  for (size_t i = 0; i < ga.data.size(); ++i)
                    if (av.data[i] < lo || av.data[i] > hi) ga.data[i] = 0.0;
                  s.add(ia, std::move(ga));
                },
                "clamp");
}

Var signed_floor(Var a, double eps) {
  Tape& t = *a.tape;
  Tensor v = a.val();
  for (double& x : v.data)
    if (std::abs(x) < eps) x = (x < 0.0) ? -eps : eps;
  const int ia = a.id;
  return t.emit(std::move(v), {a},
                [ia, eps](const Tensor& g, Tape& tp, GradSink& s) {
                  if (!s.wants(ia)) return;
                  const Tensor& av = tp.value(ia);
                  Tensor ga = g;
                  for (size_t i = 0; i < ga.data.size(); ++i)
                    if (std::abs(av.data[i]) < eps) ga.data[i] = 0.0;
                  s.add(ia, std::move(ga));
                },
                "signed_floor");
}

// ---------- slicing ----------

Var slice_cols(Var a, int j0, int width) {
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  require_rank2(av, "slice_cols");
  const int n = av.shape[0], m = av.shape[1];
  if (j0 < 0 || width < 0 || j0 + width > m) throw ShapeError("slice_cols: out of range");
  Tensor out = Tensor::zeros({n, width});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < width; ++j) out.at(i, j) = av.at(i, j0 + j);
  const int ia = a.id;
  return t.emit(std::move(out), {a},
                [ia, j0, width, n, m](const Tensor& g, Tape&, GradSink& s) {
                  if (!s.wants(ia)) return;
                  Tensor ga = Tensor::zeros({n, m});
                  for (int i = 0; i < n; ++i)
                    for (int j = 0; j < width; ++j) ga.at(i, j0 + j) = g.at(i, j);
                  s.add(ia, std::move(ga));
                },
                "slice_cols");
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: empty");
  Tape& t = *parts[0].tape;
  const int n = parts[0].val().rows();
  int total = 0;
  for (const Var& p : parts) {
    require_rank2(p.val(), "concat_cols");
    if (p.val().shape[0] != n) throw ShapeError("concat_cols: row count mismatch");
    total += p.val().shape[1];
  }
  Tensor out = Tensor::zeros({n, total});
  std::vector<int> offs;
  int off = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.val();
    offs.push_back(off);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < pv.shape[1]; ++j) out.at(i, off + j) = pv.at(i, j);
    off += pv.shape[1];
  }
  std::vector<int> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  return t.emit(std::move(out), parts,
                [ids, offs, n](const Tensor& g, Tape& tp, GradSink& s) {
                  for (size_t k = 0; k < ids.size(); ++k) {
                    if (!s.wants(ids[k])) continue;
                    const Tensor& pv = tp.value(ids[k]);
                    Tensor gp = Tensor::zeros(pv.shape);
                    for (int i = 0; i < n; ++i)
                      for (int j = 0; j < pv.shape[1]; ++j)
                        gp.at(i, j) = g.at(i, offs[k] + j);
                    s.add(ids[k], std::move(gp));
                  }
                },
                "concat_cols");
}

// ---------- softmax layers ----------

Var softmax_rows(Var a) {
  Tape& t = *a.tape;
  const Tensor& av = a.val();
  require_rank2(av, "softmax_rows");
  const int n = av.shape[0], m = av.shape[1];
  Tensor out = Tensor::zeros({n, m});
  for (int i = 0; i < n; ++i) {
    double mx = av.at(i, 0);
    for (int j = 1; j < m; ++j) mx = std::max(mx, av.at(i, j));
    double z = 0.0;
    for (int j = 0; j < m; ++j) z += std::exp(av.at(i, j) - mx);
    for (int j = 0; j < m; ++j) out.at(i, j) = std::exp(av.at(i, j) - mx) / z;
  }
  const int ia = a.id;
  const int oid = static_cast<int>(t.num_nodes());  // id this node will get
  return t.emit(std::move(out), {a},
                [ia, oid, n, m](const Tensor& g, Tape& tp, GradSink& s) {
                  if (!s.wants(ia)) return;
                  const Tensor& sv = tp.value(oid);
                  Tensor ga = Tensor::zeros({n, m});
                  for (int i = 0; i < n; ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < m; ++j) dot += g.at(i, j) * sv.at(i, j);
                    for (int j = 0; j < m; ++j)
                      ga.at(i, j) = sv.at(i, j) * (g.at(i, j) - dot);
                  }
                  s.add(ia, std::move(ga));
                },
                "softmax_rows");
}

Var softmax_xent(Var logits, std::shared_ptr<const std::vector<int>> labels,
                 std::shared_ptr<const std::vector<unsigned char>> mask) {
  Tape& t = *logits.tape;
  const Tensor& lv = logits.val();
  require_rank2(lv, "softmax_xent");
  const int n = lv.shape[0], c = lv.shape[1];
  if (static_cast<int>(labels->size()) != n || static_cast<int>(mask->size()) != n)
    throw ShapeError("softmax_xent: labels/mask length mismatch");
  int count = 0;
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(*mask)[i]) continue;
    const int y = (*labels)[i];
    if (y < 0 || y >= c) throw IndexError("softmax_xent: label out of range");
    double mx = lv.at(i, 0);
    for (int j = 1; j < c; ++j) mx = std::max(mx, lv.at(i, j));
    double z = 0.0;
    for (int j = 0; j < c; ++j) z += std::exp(lv.at(i, j) - mx);
    loss += std::log(z) - (lv.at(i, y) - mx);
    ++count;
  }
  if (count == 0) throw ShapeError("softmax_xent: empty mask");
  loss /= count;
  const int ia = logits.id;
  return t.emit(Tensor::scalar(loss), {logits},
                [ia, labels, mask, n, c, count](const Tensor& g, Tape& tp, GradSink& s) {
                  if (!s.wants(ia)) return;
                  const Tensor& lv = tp.value(ia);
                  Tensor ga = Tensor::zeros({n, c});
                  const double scale = g[0] / count;
                  for (int i = 0; i < n; ++i) {
                    if (!(*mask)[i]) continue;
                    double mx = lv.at(i, 0);
                    for (int j = 1; j < c; ++j) mx = std::max(mx, lv.at(i, j));
                    double z = 0.0;
                    for (int j = 0; j < c; ++j) z += std::exp(lv.at(i, j) - mx);
                    for (int j = 0; j < c; ++j) {
                      const double p = std::exp(lv.at(i, j) - mx) / z;
                      ga.at(i, j) = scale * (p - ((*labels)[i] == j ? 1.0 : 0.0));
                    }
                  }
                  s.add(ia, std::move(ga));
                },
                "softmax_xent");
}

// ---------- fused curvature trigonometry ----------

namespace {

using EvalFn = manifold::detail::TrigEval (*)(double, double);

template <EvalFn Eval>
Var curv_fused(Var u, Var kappa, const char* name) {
  Tape& t = same_tape(u, kappa);
  if (kappa.val().size() != 1) throw ShapeError("curvature trig: kappa must be scalar");
  const double kv = kappa.val()[0];
  Tensor v = u.val();
  for (double& x : v.data) x = Eval(x, kv).value;
  const int iu = u.id, ik = kappa.id;
  return t.emit(std::move(v), {u, kappa},
                [iu, ik, kv](const Tensor& g, Tape& tp, GradSink& s) {
                  const Tensor& uv = tp.value(iu);
                  const bool wu = s.wants(iu), wk = s.wants(ik);
                  Tensor gu = wu ? g : Tensor();
                  double gk = 0.0;
                  for (size_t i = 0; i < g.data.size(); ++i) {
                    const auto e = Eval(uv.data[i], kv);
                    if (wu) gu.data[i] = g.data[i] * e.du;
                    if (wk) gk += g.data[i] * e.dk;
                  }
                  if (wu) s.add(iu, std::move(gu));
                  if (wk) s.add(ik, Tensor::scalar(gk));
                },
                name);
}

manifold::detail::TrigEval eval_tan_k(double u, double k) {
  return manifold::detail::tan_k_eval(u, k, true);
}
manifold::detail::TrigEval eval_atan_k(double u, double k) {
  return manifold::detail::atan_k_eval(u, k, true);
}
manifold::detail::TrigEval eval_asin_k(double u, double k) {
  return manifold::detail::asin_k_eval(u, k);
}
manifold::detail::TrigEval eval_ratio_tan_k(double u, double k) {
  return manifold::detail::ratio_tan_k_eval(u, k, true);
}
manifold::detail::TrigEval eval_ratio_atan_k(double u, double k) {
  return manifold::detail::ratio_atan_k_eval(u, k, true);
}

}  // namespace

Var tan_k(Var u, Var kappa) { return curv_fused<eval_tan_k>(u, kappa, "tan_k"); }
Var atan_k(Var u, Var kappa) { return curv_fused<eval_atan_k>(u, kappa, "atan_k"); }
Var asin_k(Var u, Var kappa) { return curv_fused<eval_asin_k>(u, kappa, "asin_k"); }
Var ratio_tan_k(Var u, Var kappa) {
  return curv_fused<eval_ratio_tan_k>(u, kappa, "ratio_tan_k");
}
Var ratio_atan_k(Var u, Var kappa) {
  return curv_fused<eval_ratio_atan_k>(u, kappa, "ratio_atan_k");
}

Tensor finite_diff(const std::function<double(const Tensor&)>& f, const Tensor& theta,
                   double h) {
  if (h <= 0.0) throw ConfigError("finite_diff: h must be positive");
  Tensor out = Tensor::zeros(theta.shape);
  Tensor probe = theta;
  for (size_t i = 0; i < theta.data.size(); ++i) {
    const double orig = probe.data[i];
    probe.data[i] = orig + h;
    const double fp = f(probe);
    probe.data[i] = orig - h;
    const double fm = f(probe);
    probe.data[i] = orig;
    out.data[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

}  // namespace kgcn::ad

#include "kgcn/model.hpp"

#include <cmath>
#include <limits>

namespace kgcn::model {

using ad::Tape;
using ad::Tensor;
using ad::Var;

CurvatureConstraint constraint_from_name(const std::string& name) {
  if (name == "free" || name.empty()) return CurvatureConstraint::kFree;
  if (name == "negative") return CurvatureConstraint::kNegative;
  if (name == "positive") return CurvatureConstraint::kPositive;
  throw ConfigError("unknown curvature constraint: " + name);
}

std::string constraint_name(CurvatureConstraint c) {
  switch (c) {
    case CurvatureConstraint::kFree: return "free";
    case CurvatureConstraint::kNegative: return "negative";
    case CurvatureConstraint::kPositive: return "positive";
  }
  return "free";
}

double kappa_from_raw(double raw, CurvatureConstraint c) {
  switch (c) {
    case CurvatureConstraint::kFree: return raw;
    case CurvatureConstraint::kNegative: return -std::log1p(std::exp(raw));
    case CurvatureConstraint::kPositive: return std::log1p(std::exp(raw));
  }
  return raw;
}

double raw_from_kappa(double kappa, CurvatureConstraint c) {
  switch (c) {
    case CurvatureConstraint::kFree: return kappa;
    case CurvatureConstraint::kNegative:
      if (kappa >= 0.0) throw ConfigError("negative-constrained component needs kappa < 0");
      return std::log(std::expm1(-kappa));
    case CurvatureConstraint::kPositive:
      if (kappa <= 0.0) throw ConfigError("positive-constrained component needs kappa > 0");
      return std::log(std::expm1(kappa));
  }
  return kappa;
}

Var kappa_var(Var raw, CurvatureConstraint c) {
  if (c == CurvatureConstraint::kFree) return raw;
  Tape& t = *raw.tape;
  Var capped = ad::clamp(raw, -30.0, 30.0);
  Var sp = ad::log(ad::add(t.scalar(1.0), ad::exp(capped)));
  return c == CurvatureConstraint::kNegative ? ad::neg(sp) : sp;
}

ParamStore::Entry& ParamStore::find(const std::string& name) {
  for (auto& e : entries)
    if (e.name == name) return e;
  throw ConfigError("parameter not found: " + name);
}

const ParamStore::Entry& ParamStore::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw ConfigError("parameter not found: " + name);
}

int ParamStore::index_of(const std::string& name) const {
  for (size_t i = 0; i < entries.size(); ++i)
    if (entries[i].name == name) return static_cast<int>(i);
  throw ConfigError("parameter not found: " + name);
}

namespace {

int total_dim(const ModelConfig& cfg) {
  int t = 0;
  for (const auto& c : cfg.components) t += c.dim;
  return t;
}

// Per-component width of a total layer width; must divide evenly.
int comp_width(int total_width, int comp_dim, int total) {
  const long long num = static_cast<long long>(total_width) * comp_dim;
  if (num % total != 0)
    throw ConfigError("layer width " + std::to_string(total_width) +
                      " does not split across components");
  return static_cast<int>(num / total);
}

Tensor glorot(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Tensor t = Tensor::zeros({rows, cols});
  for (double& v : t.data) v = rng.uniform(-limit, limit);
  return t;
}

}  // namespace

ParamStore init_params(const ModelConfig& cfg, int in_dim, int num_classes, Rng& rng) {
  if (cfg.components.empty()) throw ConfigError("model needs at least one component");
  if (cfg.hidden_dims.empty()) throw ConfigError("model needs at least one layer");
  const int total = total_dim(cfg);
  if (total != cfg.hidden_dims.back())
    throw ConfigError("sum of component dims must equal the final layer width");

  ParamStore ps;
  for (size_t c = 0; c < cfg.components.size(); ++c) {
    const auto& comp = cfg.components[c];
    if (comp.dim < 1) throw ConfigError("component dim must be >= 1");
    int prev = comp_width(in_dim, comp.dim, total);
    for (size_t l = 0; l < cfg.hidden_dims.size(); ++l) {
      const int next = comp_width(cfg.hidden_dims[l], comp.dim, total);
      ParamStore::Entry e;
      e.name = "W" + std::to_string(l) + "_c" + std::to_string(c);
      e.value = glorot(prev, next, rng);
      e.component = static_cast<int>(c);
      ps.entries.push_back(std::move(e));
      prev = next;
    }
    for (int k = 0; k < num_classes; ++k) {
      ParamStore::Entry a;
      a.name = "a_c" + std::to_string(c) + "_k" + std::to_string(k);
      a.value = glorot(1, comp.dim, rng);
      a.component = static_cast<int>(c);
      ps.entries.push_back(std::move(a));
      ParamStore::Entry p;
      p.name = "p_c" + std::to_string(c) + "_k" + std::to_string(k);
      p.value = Tensor::zeros({1, comp.dim});
      p.component = static_cast<int>(c);
      p.is_point = true;
      ps.entries.push_back(std::move(p));
    }
    ParamStore::Entry kap;
    kap.name = "kappa_c" + std::to_string(c);
    kap.value = Tensor::scalar(raw_from_kappa(comp.kappa_init, comp.constraint));
    kap.curvature = true;
    kap.trainable = comp.trainable;
    kap.component = static_cast<int>(c);
    ps.entries.push_back(std::move(kap));
  }
  return ps;
}

ModelData prepare_data(const graph::Graph& g, const ModelConfig& cfg, bool onehot_features) {
  ModelData md;
  md.n = g.n;
  Eigen::MatrixXd feats;
  if (onehot_features) {
    feats = Eigen::MatrixXd::Identity(g.n, g.n);
  } else {
    if (!g.features) throw ConfigError("graph has no features");
    feats = *g.features;
  }
  md.in_dim = static_cast<int>(feats.cols());
  const int total = total_dim(cfg);
  int off = 0;
  for (const auto& comp : cfg.components) {
    const int w = comp_width(md.in_dim, comp.dim, total);
    Eigen::MatrixXd slice = feats.middleCols(off, w);
    double mx = 0.0;
    for (int i = 0; i < slice.rows(); ++i) mx = std::max(mx, slice.row(i).norm());
    md.feature_slices.push_back(Tensor::from_eigen(slice));
    md.max_norms.push_back(mx);
    off += w;
  }
  md.adjacency = Tensor::from_eigen(
      graph::normalize_adjacency(g, graph::adjacency_mode_from_name(cfg.adjacency)));
  md.num_classes = g.num_classes;
  if (g.labels) md.labels = std::make_shared<const std::vector<int>>(*g.labels);
  return md;
}

Var kgcn_layer(Var H, Var W, Var A_hat, Var kappa, geo::Nonlin nonlin, Var dropout_mask) {
  Var z = geo::right_matmul(H, W, kappa);
  Var m = geo::left_matmul(A_hat, z, kappa);
  if (nonlin == geo::Nonlin::kIdentity && !dropout_mask.valid()) return m;
  return geo::mobius_nonlin(m, kappa, nonlin, dropout_mask);
}

Var kappa_logits(Var H, const std::vector<Var>& a, const std::vector<Var>& p, Var kappa) {
  if (a.size() != p.size() || a.empty()) throw ShapeError("kappa_logits: class count mismatch");
  std::vector<Var> cols;
  cols.reserve(a.size());
  for (size_t k = 0; k < a.size(); ++k)
    cols.push_back(geo::logit_column(H, a[k], p[k], kappa));
  return ad::concat_cols(cols);
}

namespace {

struct BuildCtx {
  Tape* tape;
  const ParamStore* ps;
  const ModelData* md;
  const ModelConfig* cfg;
  bool training;
  Rng* rng;
  std::vector<Var> leaves;

  Var leaf_of(const std::string& name) {
    const int idx = ps->index_of(name);
    return leaves[static_cast<size_t>(idx)];
  }
};

Tensor dropout_mask_tensor(int rows, int cols, double rate, Rng& rng) {
  Tensor m = Tensor::zeros({rows, cols});
  const double keep = 1.0 - rate;
  for (double& v : m.data) v = (rng.uniform() < keep) ? 1.0 / keep : 0.0;
  return m;
}

// Zero entries, then rescale each row back to its pre-mask sum.
Tensor dropped_adjacency(const Tensor& a, double rate, Rng& rng) {
  Tensor out = a;
  const int n = a.rows(), m = a.cols();
  const double keep = 1.0 - rate;
  for (int i = 0; i < n; ++i) {
    double before = 0.0, after = 0.0;
    for (int j = 0; j < m; ++j) {
      before += out.at(i, j);
      if (rng.uniform() >= keep) out.at(i, j) = 0.0;
      after += out.at(i, j);
    }
    if (after == 0.0) {
      for (int j = 0; j < m; ++j) out.at(i, j) = a.at(i, j);
      continue;
    }
    const double f = before / after;
    for (int j = 0; j < m; ++j) out.at(i, j) *= f;
  }
  return out;
}

void check_rows_in_ball(const Tensor& h, double kappa, const char* where) {
  if (kappa >= 0.0) return;
  for (int i = 0; i < h.rows(); ++i) {
    double sq = 0.0;
    for (int j = 0; j < h.cols(); ++j) sq += h.at(i, j) * h.at(i, j);
    if (!(kappa * sq > -1.0) || !std::isfinite(sq))
      throw Error(std::string(where) + ": row left the kappa<0 domain");
  }
}

// Shared by the embedding and nodeclass builders: the stack of kgcn layers.
std::vector<Var> hidden_stack(BuildCtx& ctx, std::vector<Var>& kappas_out) {
  Tape& t = *ctx.tape;
  const ModelConfig& cfg = *ctx.cfg;

  Var a_hat;
  if (ctx.training && cfg.dropout_adjacency > 0.0)
    a_hat = t.constant(dropped_adjacency(ctx.md->adjacency, cfg.dropout_adjacency, *ctx.rng));
  else
    a_hat = t.constant(ctx.md->adjacency);

  const geo::Nonlin nonlin = geo::nonlin_from_name(cfg.nonlinearity);
  std::vector<Var> hs;
  for (size_t c = 0; c < cfg.components.size(); ++c) {
    const auto& comp = cfg.components[c];
    Var raw = ctx.leaf_of("kappa_c" + std::to_string(c));
    Var kap = kappa_var(raw, comp.constraint);
    kappas_out.push_back(kap);

    Var h = t.constant(ctx.md->feature_slices[c]);
    if (cfg.preprocess)
      h = geo::preprocess_features(h, kap, ctx.md->max_norms[c]);
    for (size_t l = 0; l < cfg.hidden_dims.size(); ++l) {
      Var w = ctx.leaf_of("W" + std::to_string(l) + "_c" + std::to_string(c));
      Var mask;
      const bool want_mask = ctx.training && cfg.dropout_features > 0.0;
      if (want_mask)
        mask = t.constant(dropout_mask_tensor(ctx.md->n, w.val().shape[1],
                                              cfg.dropout_features, *ctx.rng));
      h = kgcn_layer(h, w, a_hat, kap, nonlin, mask);
      check_rows_in_ball(h.val(), kap.val()[0], "kgcn_layer");
    }
    hs.push_back(h);
  }
  return hs;
}

BuildCtx make_ctx(Tape& tape, const ParamStore& ps, const ModelData& md,
                  const ModelConfig& cfg, bool training, Rng* rng) {
  BuildCtx ctx{&tape, &ps, &md, &cfg, training, rng, {}};
  ctx.leaves.reserve(ps.entries.size());
  for (const auto& e : ps.entries)
    ctx.leaves.push_back(tape.leaf(e.value, /*requires_grad=*/true));
  return ctx;
}

}  // namespace

EpochVars build_embeddings(Tape& tape, const ParamStore& ps, const ModelData& md,
                           const ModelConfig& cfg, bool training, Rng* dropout_rng) {
  BuildCtx ctx = make_ctx(tape, ps, md, cfg, training, dropout_rng);
  EpochVars out;
  out.embeddings = hidden_stack(ctx, out.kappas);
  out.leaves = std::move(ctx.leaves);
  return out;
}

EpochVars build_nodeclass(Tape& tape, const ParamStore& ps, const ModelData& md,
                          const ModelConfig& cfg, bool training, Rng* dropout_rng,
                          std::shared_ptr<const std::vector<unsigned char>> train_mask,
                          double l2_first_layer) {
  if (md.num_classes < 2) throw ConfigError("node classification needs >= 2 classes");
  BuildCtx ctx = make_ctx(tape, ps, md, cfg, training, dropout_rng);
  EpochVars out;
  std::vector<Var> hs = hidden_stack(ctx, out.kappas);

  Var logits;
  for (size_t c = 0; c < cfg.components.size(); ++c) {
    std::vector<Var> a, p;
    for (int k = 0; k < md.num_classes; ++k) {
      a.push_back(ctx.leaf_of("a_c" + std::to_string(c) + "_k" + std::to_string(k)));
      p.push_back(ctx.leaf_of("p_c" + std::to_string(c) + "_k" + std::to_string(k)));
    }
    Var lc = kappa_logits(hs[c], a, p, out.kappas[c]);
    logits = logits.valid() ? ad::add(logits, lc) : lc;
  }

  Var a_hat_clean = tape.constant(md.adjacency);
  out.final_logits = ad::matmul(a_hat_clean, logits);
  out.probs = ad::softmax_rows(out.final_logits);

  if (!md.labels) throw ConfigError("node classification needs labels");
  Var loss = ad::softmax_xent(out.final_logits, md.labels, std::move(train_mask));
  if (l2_first_layer > 0.0) {
    Var reg;
    for (size_t c = 0; c < cfg.components.size(); ++c) {
      Var w0 = ctx.leaf_of("W0_c" + std::to_string(c));
      Var term = ad::sum(ad::mul(w0, w0));
      reg = reg.valid() ? ad::add(reg, term) : term;
    }
    loss = ad::add(loss, ad::mul(tape.scalar(l2_first_layer), reg));
  }
  out.loss = loss;
  out.embeddings = std::move(hs);
  out.leaves = std::move(ctx.leaves);
  return out;
}

// ---- plain ops ----

agg::PointMatrix preprocess_features(const Eigen::MatrixXd& x, double kappa) {
  double mx = 0.0;
  for (int i = 0; i < x.rows(); ++i) mx = std::max(mx, x.row(i).norm());
  if (kappa == 0.0 || mx == 0.0) return agg::PointMatrix{x, kappa};
  const double s = 1.0 / (2.0 * std::sqrt(std::abs(kappa)) * mx);
  return agg::PointMatrix{x * s, kappa};
}

agg::PointMatrix mobius_nonlin(const agg::PointMatrix& x, geo::Nonlin f) {
  agg::PointMatrix out = x;
  for (int i = 0; i < x.n(); ++i) {
    const double n = x.rows.row(i).norm();
    const double lf = (n < kMinNorm) ? 1.0 : manifold::atan_k(n, x.kappa) / n;
    Eigen::VectorXd t = lf * x.rows.row(i).transpose();
    for (int j = 0; j < t.size(); ++j) {
      if (f == geo::Nonlin::kRelu) t(j) = std::max(t(j), 0.0);
      else if (f == geo::Nonlin::kTanh) t(j) = std::tanh(t(j));
    }
    const double tn = t.norm();
    const double ef = (tn < kMinNorm) ? 1.0 : manifold::tan_k(tn, x.kappa) / tn;
    manifold::Point p = manifold::project_to_domain(ef * t, x.kappa);
    out.rows.row(i) = p.coords.transpose();
  }
  return out;
}

std::vector<agg::PointMatrix> product_split(const Eigen::MatrixXd& x,
                                            const std::vector<ManifoldComponent>& comps,
                                            const std::vector<double>& kappas) {
  int total = 0;
  for (const auto& c : comps) total += c.dim;
  if (total != x.cols()) throw ShapeError("product_split: widths do not sum to matrix width");
  if (kappas.size() != comps.size()) throw ShapeError("product_split: kappa count mismatch");
  std::vector<agg::PointMatrix> out;
  int off = 0;
  for (size_t c = 0; c < comps.size(); ++c) {
    out.push_back(agg::make_points(x.middleCols(off, comps[c].dim), kappas[c]));
    off += comps[c].dim;
  }
  return out;
}

double product_distance(const std::vector<agg::PointMatrix>& xs, int i, int j) {
  double acc = 0.0;
  for (const auto& pm : xs) {
    const double d = manifold::distance(pm.point(i), pm.point(j));
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace kgcn::model

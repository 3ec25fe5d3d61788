#include "kgcn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace kgcn::train {

using ad::Tape;
using ad::Tensor;
using ad::Var;

void adam_step(AdamState& st, Tensor& param, const Tensor& grad, const AdamConfig& cfg) {
  if (!param.same_shape(grad)) throw ShapeError("adam_step: grad/param shape mismatch");
  if (st.m.empty()) {
    st.m = Tensor::zeros(param.shape);
    st.v = Tensor::zeros(param.shape);
  }
  ++st.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  for (size_t i = 0; i < param.data.size(); ++i) {
    const double g = grad.data[i];
    st.m.data[i] = cfg.beta1 * st.m.data[i] + (1.0 - cfg.beta1) * g;
    st.v.data[i] = cfg.beta2 * st.v.data[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = st.m.data[i] / c1;
    const double vhat = st.v.data[i] / c2;
    param.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

void sgd_step(Tensor& param, const Tensor& grad, double lr) {
  if (!param.same_shape(grad)) throw ShapeError("sgd_step: grad/param shape mismatch");
  for (size_t i = 0; i < param.data.size(); ++i) param.data[i] -= lr * grad.data[i];
}

double distortion_loss(const std::vector<agg::PointMatrix>& comps, const Eigen::MatrixXi& dg) {
  if (comps.empty()) throw ConfigError("distortion_loss: no components");
  const int n = comps[0].n();
  double acc = 0.0;
  long long count = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || dg(i, j) == graph::kUnreachable) continue;
      double dsq = 0.0;
      for (const auto& pm : comps) {
        const double d = manifold::distance(pm.point(i), pm.point(j));
        dsq += d * d;
      }
      const double r = dsq / (static_cast<double>(dg(i, j)) * dg(i, j));
      acc += (r - 1.0) * (r - 1.0);
      ++count;
    }
  if (count == 0) throw ConfigError("distortion_loss: no reachable pairs");
  return acc / static_cast<double>(count);
}

DistortionTables distortion_tables(const Eigen::MatrixXi& dg) {
  const int n = static_cast<int>(dg.rows());
  DistortionTables t;
  t.inv_dg2 = Tensor::zeros({n, n});
  t.mask = Tensor::zeros({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || dg(i, j) == graph::kUnreachable) continue;
      const double d = static_cast<double>(dg(i, j));
      t.inv_dg2.at(i, j) = 1.0 / (d * d);
      t.mask.at(i, j) = 1.0;
      ++t.count;
    }
  return t;
}

Optimizer::Optimizer(const model::ModelConfig& mc, double lr_euclidean, double lr_curvature)
    : mc_(mc), lr_e_(lr_euclidean), lr_k_(lr_curvature) {}

void Optimizer::step(model::ParamStore& ps, const std::vector<Tensor>& grads,
                     const std::vector<Var>& leaves) {
  if (states_.size() != ps.entries.size()) states_.resize(ps.entries.size());
  AdamConfig acfg;
  acfg.lr = lr_e_;
  for (size_t i = 0; i < ps.entries.size(); ++i) {
    auto& e = ps.entries[i];
    if (!e.trainable) continue;
    Tensor g = ad::grad_or_zero(grads, leaves[i]);
    if (e.curvature)
      sgd_step(e.value, g, lr_k_);
    else
      adam_step(states_[i], e.value, g, acfg);
  }
  // point parameters must stay on the manifold of their (updated) component
  const std::vector<double> kappas = current_kappas(ps, mc_);
  for (auto& e : ps.entries) {
    if (!e.is_point || e.component < 0) continue;
    const double k = kappas[static_cast<size_t>(e.component)];
    if (k >= 0.0) continue;
    Eigen::VectorXd row = e.value.to_eigen().row(0).transpose();
    manifold::Point p = manifold::project_to_domain(row, k);
    for (int j = 0; j < p.coords.size(); ++j) e.value.at(0, j) = p.coords(j);
  }
}

std::vector<double> current_kappas(const model::ParamStore& ps, const model::ModelConfig& mc) {
  std::vector<double> out;
  for (size_t c = 0; c < mc.components.size(); ++c) {
    const auto& e = ps.find("kappa_c" + std::to_string(c));
    out.push_back(model::kappa_from_raw(e.value[0], mc.components[c].constraint));
  }
  return out;
}

double accuracy(const Tensor& logits, const std::vector<int>& labels,
                const std::vector<int>& idx) {
  if (idx.empty()) return 0.0;
  int hit = 0;
  const int c = logits.cols();
  for (int i : idx) {
    int best = 0;
    for (int j = 1; j < c; ++j)
      if (logits.at(i, j) > logits.at(i, best)) best = j;
    if (best == labels[static_cast<size_t>(i)]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(idx.size());
}

namespace {

std::vector<double> kappa_values_of(const std::vector<Var>& kappas) {
  std::vector<double> out;
  out.reserve(kappas.size());
  for (const Var& k : kappas) out.push_back(k.val()[0]);
  return out;
}

}  // namespace

RunMetrics train_distortion(const graph::Graph& g, const TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  model::ModelData md = model::prepare_data(g, cfg.model, cfg.onehot_features);
  model::ParamStore ps = model::init_params(cfg.model, md.in_dim, 0, rng);
  const Eigen::MatrixXi dg = graph::bfs_all_pairs(g);
  const DistortionTables tables = distortion_tables(dg);
  Optimizer opt(cfg.model, cfg.lr_euclidean, cfg.lr_curvature);

  RunMetrics rm;
  rm.task = "distortion";
  rm.seed = cfg.seed;
  rm.best_metric = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    model::EpochVars ev =
        model::build_embeddings(tape, ps, md, cfg.model, /*training=*/true, &rng);
    Var dsq;
    for (size_t c = 0; c < ev.embeddings.size(); ++c) {
      Var d2 = geo::pairwise_distance_sq(ev.embeddings[c], ev.kappas[c]);
      dsq = dsq.valid() ? ad::add(dsq, d2) : d2;
    }
    Var loss = geo::distortion_from_sq(dsq, tables.inv_dg2, tables.mask, tables.count);
    const double lv = loss.val()[0];
    if (!std::isfinite(lv)) throw Error("train_distortion: non-finite loss");
    if (lv < rm.best_metric) {
      rm.best_metric = lv;
      rm.best_epoch = epoch;
    }
    if (epoch % cfg.log_every == 0 || epoch == cfg.epochs - 1)
      rm.epoch_log.push_back({epoch, lv, rm.best_metric, kappa_values_of(ev.kappas)});

    std::vector<Tensor> grads = tape.backward(loss);
    opt.step(ps, grads, ev.leaves);
    ++rm.epochs_run;
  }
  rm.kappas_final = current_kappas(ps, cfg.model);
  rm.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rm;
}

RunMetrics train_nodeclass(const graph::Graph& g, const TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  model::ModelData md = model::prepare_data(g, cfg.model, /*onehot_features=*/false);
  graph::Split split = graph::make_split(g, cfg.n_known, cfg.per_label_train,
                                         cfg.early_stop_size, rng);
  model::ParamStore ps = model::init_params(cfg.model, md.in_dim, md.num_classes, rng);
  Optimizer opt(cfg.model, cfg.lr_euclidean, cfg.lr_curvature);

  auto train_mask = std::make_shared<std::vector<unsigned char>>(g.n, 0);
  for (int i : split.train) (*train_mask)[static_cast<size_t>(i)] = 1;
  auto early_mask = std::make_shared<std::vector<unsigned char>>(g.n, 0);
  for (int i : split.early_stop) (*early_mask)[static_cast<size_t>(i)] = 1;

  RunMetrics rm;
  rm.task = "nodeclass";
  rm.seed = cfg.seed;

  double best_early_ce = std::numeric_limits<double>::infinity();
  double best_early_acc = -1.0;
  int last_ce_improvement = 0;
  std::vector<Tensor> snapshot;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    {
      Tape tape;
      model::EpochVars ev = model::build_nodeclass(tape, ps, md, cfg.model, /*training=*/true,
                                                   &rng, train_mask, cfg.l2_first_layer);
      const double lv = ev.loss.val()[0];
      if (!std::isfinite(lv)) throw Error("train_nodeclass: non-finite loss");
      std::vector<Tensor> grads = tape.backward(ev.loss);
      opt.step(ps, grads, ev.leaves);
      rm.epoch_log.push_back({epoch, lv, 0.0, kappa_values_of(ev.kappas)});
    }
    {
      Tape tape;
      model::EpochVars ev = model::build_nodeclass(tape, ps, md, cfg.model, /*training=*/false,
                                                   nullptr, train_mask, 0.0);
      Var early_ce = ad::softmax_xent(ev.final_logits, md.labels, early_mask);
      const double ce = early_ce.val()[0];
      const double acc = accuracy(ev.final_logits.val(), *md.labels, split.early_stop);
      rm.epoch_log.back().metric = acc;
      if (ce < best_early_ce) {
        best_early_ce = ce;
        last_ce_improvement = epoch;
      }
      if (acc > best_early_acc) {
        best_early_acc = acc;
        rm.best_epoch = epoch;
        snapshot.clear();
        for (const auto& e : ps.entries) snapshot.push_back(e.value);
      }
    }
    ++rm.epochs_run;
    if (epoch - last_ce_improvement >= cfg.patience) break;
  }

  if (!snapshot.empty())
    for (size_t i = 0; i < ps.entries.size(); ++i) ps.entries[i].value = snapshot[i];

  Tape tape;
  model::EpochVars ev = model::build_nodeclass(tape, ps, md, cfg.model, /*training=*/false,
                                               nullptr, train_mask, 0.0);
  rm.test_accuracy = accuracy(ev.final_logits.val(), *md.labels, split.test);
  rm.early_stop_accuracy = best_early_acc;
  rm.best_metric = rm.test_accuracy;
  rm.kappas_final = current_kappas(ps, cfg.model);
  rm.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rm;
}

std::vector<SweepRow> kappa_sweep(const graph::Graph& g, const TrainConfig& base,
                                  const std::vector<double>& kappas) {
  if (kappas.empty()) throw ConfigError("kappa_sweep: empty grid");
  std::vector<SweepRow> rows;
  for (size_t i = 0; i < kappas.size(); ++i) {
    TrainConfig cfg = base;
    cfg.seed = Rng::derive(base.seed, i);
    for (auto& comp : cfg.model.components) {
      comp.kappa_init = kappas[i];
      comp.constraint = model::CurvatureConstraint::kFree;
      comp.trainable = false;
    }
    RunMetrics rm = train_distortion(g, cfg);
    rows.push_back({kappas[i], rm.best_metric});
  }
  return rows;
}

std::pair<double, double> bootstrap_ci(const std::vector<double>& values, int resamples,
                                       Rng& rng) {
  if (values.empty()) throw ConfigError("bootstrap_ci: no values");
  std::vector<double> means(static_cast<size_t>(resamples));
  const int n = static_cast<int>(values.size());
  for (int r = 0; r < resamples; ++r) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += values[static_cast<size_t>(rng.uniform_int(0, n - 1))];
    means[static_cast<size_t>(r)] = acc / n;
  }
  std::sort(means.begin(), means.end());
  const auto pick = [&](double q) {
    const int idx = std::clamp(static_cast<int>(q * (resamples - 1)), 0, resamples - 1);
    return means[static_cast<size_t>(idx)];
  };
  return {pick(0.025), pick(0.975)};
}

}  // namespace kgcn::train

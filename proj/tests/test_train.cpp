#include <doctest.h>

#include <cmath>

#include "kgcn/train.hpp"
#include "oracles.hpp"

namespace man = kgcn::manifold;
namespace agg = kgcn::agg;
namespace gr = kgcn::graph;
namespace model = kgcn::model;
namespace train = kgcn::train;
using kgcn::ad::Tape;
using kgcn::ad::Tensor;
using kgcn::ad::Var;
namespace ad = kgcn::ad;

namespace {

train::TrainConfig distortion_config(double kappa, model::CurvatureConstraint cons,
                                     bool trainable, int epochs, uint64_t seed) {
  train::TrainConfig tc;
  tc.model.hidden_dims = {8, 4};
  tc.model.components.push_back({4, kappa, cons, trainable});
  tc.model.nonlinearity = "identity";
  tc.epochs = epochs;
  tc.seed = seed;
  tc.lr_euclidean = 0.01;
  tc.lr_curvature = 1e-4;
  return tc;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("adam_step") {
  // zero gradient on a fresh state leaves the parameter unchanged
  train::AdamState st;
  Tensor p = Tensor::scalar(1.5);
  train::adam_step(st, p, Tensor::scalar(0.0), {});
  CHECK(p[0] == 1.5);

  // hand arithmetic: t=1, lr=0.1, g=2 -> step ~ 0.1
  train::AdamState st2;
  Tensor q = Tensor::scalar(1.0);
  train::AdamConfig cfg;
  cfg.lr = 0.1;
  train::adam_step(st2, q, Tensor::scalar(2.0), cfg);
  CHECK(std::abs((1.0 - q[0]) - 0.1) < 1e-8);

  // parameters update independently
  train::AdamState st3;
  Tensor two = Tensor({2}, {1.0, 1.0});
  train::adam_step(st3, two, Tensor({2}, {2.0, 0.0}), cfg);
  CHECK(two[0] < 1.0);
  CHECK(two[1] == 1.0);

  CHECK_THROWS_AS(train::adam_step(st3, two, Tensor::scalar(1.0), cfg), kgcn::ShapeError);
}

TEST_CASE("distortion_loss") {
  // embedded distances identical to graph distances -> zero loss
  gr::Graph path = gr::make_graph(2, {{0, 1}});
  Eigen::MatrixXi dg = gr::bfs_all_pairs(path);
  Eigen::MatrixXd rows(2, 1);
  rows << 0.0, 0.5;  // kappa = 0 distance: 2*0.5 = 1 = d_G
  std::vector<agg::PointMatrix> comps{agg::PointMatrix{rows, 0.0}};
  CHECK(train::distortion_loss(comps, dg) == doctest::Approx(0.0).epsilon(1e-15));

  // embedded distance 2 against d_G = 1 -> ((4-1)^2) = 9
  Eigen::MatrixXd far(2, 1);
  far << 0.0, 1.0;
  std::vector<agg::PointMatrix> comps2{agg::PointMatrix{far, 0.0}};
  CHECK(train::distortion_loss(comps2, dg) == doctest::Approx(9.0).epsilon(1e-12));

  // any rescaling away from the exact embedding increases the loss
  Eigen::MatrixXd scaled = 1.3 * rows;
  std::vector<agg::PointMatrix> comps3{agg::PointMatrix{scaled, 0.0}};
  CHECK(train::distortion_loss(comps3, dg) > 0.0);

  // tape route and plain route agree
  gr::Graph tree = gr::gen_balanced_tree(2, 2);
  Eigen::MatrixXi dgt = gr::bfs_all_pairs(tree);
  kgcn::Rng rng(7);
  Eigen::MatrixXd emb(tree.n, 3);
  for (int i = 0; i < tree.n; ++i)
    emb.row(i) = oracles::random_point(rng, 3, -1.0, 0.6).coords.transpose();
  std::vector<agg::PointMatrix> comps4{agg::PointMatrix{emb, -1.0}};
  const double plain = train::distortion_loss(comps4, dgt);
  train::DistortionTables tables = train::distortion_tables(dgt);
  Tape t;
  Var X = t.leaf(Tensor::from_eigen(emb));
  Var k = t.leaf(Tensor::scalar(-1.0));
  Var loss = kgcn::geo::distortion_from_sq(kgcn::geo::pairwise_distance_sq(X, k),
                                           tables.inv_dg2, tables.mask, tables.count);
  CHECK(loss.val()[0] == doctest::Approx(plain).epsilon(1e-9));
}

TEST_CASE("optimizer routes learning rates to the right groups") {
  model::ModelConfig mc;
  mc.hidden_dims = {1};
  mc.components.push_back({1, -1.0, model::CurvatureConstraint::kFree, true});
  kgcn::Rng rng(1);
  model::ParamStore ps = model::init_params(mc, 1, 0, rng);
  const double w0 = ps.find("W0_c0").value[0];
  const double k0 = ps.find("kappa_c0").value[0];

  Tape t;
  std::vector<Var> leaves;
  for (auto& e : ps.entries) leaves.push_back(t.leaf(e.value));
  Var loss = ad::add(ad::sum(leaves[0]), ad::sum(leaves[1]));
  auto grads = t.backward(loss);  // all gradients are exactly 1

  train::Optimizer opt(mc, /*lr_euclidean=*/0.05, /*lr_curvature=*/0.001);
  opt.step(ps, grads, leaves);

  // curvature moved by exactly lr_curvature * grad; weight by ~lr_euclidean
  CHECK(ps.find("kappa_c0").value[0] == doctest::Approx(k0 - 0.001).epsilon(1e-12));
  CHECK(std::abs((w0 - ps.find("W0_c0").value[0]) - 0.05) < 1e-6);
}

TEST_CASE("distortion training is deterministic and improves") {
  gr::Graph tree = gr::gen_balanced_tree(3, 2);
  train::TrainConfig tc = distortion_config(-1.0, model::CurvatureConstraint::kNegative,
                                            true, 150, 42);
  train::RunMetrics a = train::train_distortion(tree, tc);
  train::RunMetrics b = train::train_distortion(tree, tc);
  CHECK(a.best_metric == b.best_metric);
  CHECK(a.kappas_final == b.kappas_final);
  CHECK(a.epoch_log.front().loss > a.best_metric);
  // best-so-far curve is non-increasing by construction
  double prev = 1e100;
  for (const auto& row : a.epoch_log) {
    CHECK(row.metric <= prev + 1e-15);
    prev = row.metric;
  }
}

TEST_CASE("curvature stays negative on the tree distortion task") {
  gr::Graph tree = gr::gen_balanced_tree(3, 2);
  train::TrainConfig tc =
      distortion_config(-1.0, model::CurvatureConstraint::kFree, true, 200, 11);
  tc.lr_curvature = 1e-3;  // give the curvature room to move in a short run
  train::RunMetrics rm = train::train_distortion(tree, tc);
  REQUIRE(rm.kappas_final.size() == 1);
  CHECK(rm.kappas_final[0] < 0.0);
}

TEST_CASE("kappa_sweep") {
  gr::Graph tree = gr::gen_balanced_tree(3, 2);
  train::TrainConfig base = distortion_config(-1.0, model::CurvatureConstraint::kFree,
                                              false, 120, 31);
  const std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};
  auto rows = train::kappa_sweep(tree, base, grid);
  REQUIRE(rows.size() == 5);
  for (size_t i = 0; i < grid.size(); ++i) CHECK(rows[i].kappa == grid[i]);

  // the kappa = 0 row IS the Euclidean run
  train::TrainConfig euclid = base;
  euclid.seed = kgcn::Rng::derive(base.seed, 2);
  for (auto& c : euclid.model.components) {
    c.kappa_init = 0.0;
    c.trainable = false;
  }
  train::RunMetrics em = train::train_distortion(tree, euclid);
  CHECK(std::abs(rows[2].min_distortion - em.best_metric) < 1e-6);

  // hyperbolic grid points fit the tree better than spherical ones
  const double neg = (rows[0].min_distortion + rows[1].min_distortion) / 2.0;
  const double pos = (rows[3].min_distortion + rows[4].min_distortion) / 2.0;
  CHECK(neg < pos);
}

TEST_CASE("node classification on a separable SBM") {
  kgcn::Rng grng(91);
  gr::Graph g = gr::gen_sbm(80, 0.25, 0.01, 0.2, grng);
  train::TrainConfig tc;
  tc.model.hidden_dims = {4};
  tc.model.components.push_back({4, -1.0, model::CurvatureConstraint::kNegative, true});
  tc.model.nonlinearity = "relu";
  tc.model.dropout_features = 0.2;
  tc.model.dropout_adjacency = 0.2;
  tc.epochs = 120;
  tc.patience = 120;
  tc.seed = 3;
  tc.lr_curvature = 0.01;
  tc.n_known = 40;
  tc.per_label_train = 8;
  tc.early_stop_size = 10;

  train::RunMetrics rm = train::train_nodeclass(g, tc);
  CHECK(rm.test_accuracy >= 0.85);
  CHECK(rm.kappas_final[0] < 0.0);  // negative-constrained by construction

  train::RunMetrics rm2 = train::train_nodeclass(g, tc);
  CHECK(rm.test_accuracy == rm2.test_accuracy);
  CHECK(rm.epochs_run == rm2.epochs_run);
}

TEST_CASE("bootstrap confidence interval") {
  kgcn::Rng rng(17);
  std::vector<double> vals{0.8, 0.82, 0.79, 0.81, 0.8};
  auto [lo, hi] = train::bootstrap_ci(vals, 1000, rng);
  CHECK(lo <= hi);
  CHECK(lo >= 0.79 - 1e-12);
  CHECK(hi <= 0.82 + 1e-12);
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= vals.size();
  CHECK(lo <= mean);
  CHECK(hi >= mean);
}

}  // TEST_SUITE

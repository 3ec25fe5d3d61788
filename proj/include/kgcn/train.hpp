#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kgcn/model.hpp"

namespace kgcn::train {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ad::Tensor m, v;
  long long step = 0;
};

void adam_step(AdamState& st, ad::Tensor& param, const ad::Tensor& grad,
               const AdamConfig& cfg);
void sgd_step(ad::Tensor& param, const ad::Tensor& grad, double lr);

// Average over reachable ordered pairs i != j of ((d(xi,xj)/d_G(i,j))^2 - 1)^2.
double distortion_loss(const std::vector<agg::PointMatrix>& comps,
                       const Eigen::MatrixXi& dg);

struct DistortionTables {
  ad::Tensor inv_dg2;  // 1/d_G^2, zero on diagonal and unreachable pairs
  ad::Tensor mask;     // 1 where the pair counts
  long long count = 0;
};
DistortionTables distortion_tables(const Eigen::MatrixXi& dg);

struct EpochRow {
  int epoch = 0;
  double loss = 0.0;
  double metric = 0.0;
  std::vector<double> kappas;
};

struct RunMetrics {
  std::string task;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_metric = 0.0;  // min distortion, or test accuracy
  double test_accuracy = 0.0;
  double early_stop_accuracy = 0.0;
  std::vector<double> kappas_final;
  std::vector<EpochRow> epoch_log;
  double wall_clock_s = 0.0;
  uint64_t seed = 0;
};

struct TrainConfig {
  model::ModelConfig model;
  int epochs = 2000;
  int patience = 200;
  double lr_euclidean = 0.01;
  double lr_curvature = 1e-4;
  double l2_first_layer = 5e-4;
  uint64_t seed = 1;
  bool onehot_features = true;  // distortion tasks use 1-hot node features
  int n_known = 0;              // nodeclass split parameters
  int per_label_train = 20;
  int early_stop_size = 0;
  int log_every = 1;
};

// Routes Euclidean parameters through Adam and curvature parameters through
// plain gradient descent; re-projects point parameters into the domain.
class Optimizer {
 public:
  Optimizer(const model::ModelConfig& mc, double lr_euclidean, double lr_curvature);
  void step(model::ParamStore& ps, const std::vector<ad::Tensor>& grads,
            const std::vector<ad::Var>& leaves);

 private:
  model::ModelConfig mc_;
  double lr_e_, lr_k_;
  std::vector<AdamState> states_;
};

std::vector<double> current_kappas(const model::ParamStore& ps,
                                   const model::ModelConfig& mc);

double accuracy(const ad::Tensor& logits, const std::vector<int>& labels,
                const std::vector<int>& idx);

RunMetrics train_distortion(const graph::Graph& g, const TrainConfig& cfg);
RunMetrics train_nodeclass(const graph::Graph& g, const TrainConfig& cfg);

struct SweepRow {
  double kappa = 0.0;
  double min_distortion = 0.0;
};

// One fixed-curvature distortion run per grid value; run i uses the RNG
// stream derived from (cfg.seed, i).
std::vector<SweepRow> kappa_sweep(const graph::Graph& g, const TrainConfig& base,
                                  const std::vector<double>& kappas);

// Percentile bootstrap (2.5%, 97.5%) of the mean.
std::pair<double, double> bootstrap_ci(const std::vector<double>& values, int resamples,
                                       Rng& rng);

}  // namespace kgcn::train

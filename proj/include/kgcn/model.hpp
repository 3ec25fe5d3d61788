#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kgcn/agg.hpp"
#include "kgcn/geo.hpp"
#include "kgcn/graph.hpp"

namespace kgcn::model {

enum class CurvatureConstraint { kFree, kNegative, kPositive };
CurvatureConstraint constraint_from_name(const std::string& name);
std::string constraint_name(CurvatureConstraint c);

struct ManifoldComponent {
  int dim = 0;                 // embedding width of this component
  double kappa_init = -1.0;
  CurvatureConstraint constraint = CurvatureConstraint::kFree;
  bool trainable = true;
};

struct ModelConfig {
  std::vector<int> hidden_dims;  // total layer widths; last = embedding width
  std::vector<ManifoldComponent> components;
  std::string nonlinearity = "identity";
  std::string adjacency = "symmetric";
  double dropout_features = 0.0;
  double dropout_adjacency = 0.0;
  bool preprocess = true;  // kappa-dependent input scaling X / (2 sqrt|k| |X|_max)
};

// Persistent parameters; each epoch they are leafed onto a fresh tape.
struct ParamStore {
  struct Entry {
    std::string name;
    ad::Tensor value;
    bool curvature = false;  // curvature group (plain gradient descent)
    bool trainable = true;
    bool is_point = false;   // re-projected into the domain after updates
    int component = -1;
  };
  std::vector<Entry> entries;

  Entry& find(const std::string& name);
  const Entry& find(const std::string& name) const;
  int index_of(const std::string& name) const;
};

// num_classes == 0 builds a pure embedding model (no logits parameters).
ParamStore init_params(const ModelConfig& cfg, int in_dim, int num_classes, Rng& rng);

// Data prepared once per run: per-component feature slices, their max row
// norms, and the normalized adjacency.
struct ModelData {
  std::vector<ad::Tensor> feature_slices;
  std::vector<double> max_norms;
  ad::Tensor adjacency;
  int n = 0;
  int in_dim = 0;
  int num_classes = 0;
  std::shared_ptr<const std::vector<int>> labels;
};

ModelData prepare_data(const graph::Graph& g, const ModelConfig& cfg,
                       bool onehot_features);

struct EpochVars {
  ad::Var loss;                       // xent (+ L2) for nodeclass; unset for embeddings
  ad::Var final_logits;               // [n, C] before softmax (nodeclass)
  ad::Var probs;                      // softmax rows (nodeclass)
  std::vector<ad::Var> embeddings;    // per component [n, d_c]
  std::vector<ad::Var> kappas;        // per component scalar
  std::vector<ad::Var> leaves;        // aligned with ParamStore entries
};

// One kappa-GCN layer: sigma^{(x)k}( A (x]) (H (x) W) ).
ad::Var kgcn_layer(ad::Var H, ad::Var W, ad::Var A_hat, ad::Var kappa,
                   geo::Nonlin nonlin, ad::Var dropout_mask = ad::Var{});

// logits[:, k] = lambda_{p_k} |a_k| asin_k(...) summed over components by the caller.
ad::Var kappa_logits(ad::Var H, const std::vector<ad::Var>& a, const std::vector<ad::Var>& p,
                     ad::Var kappa);

// Builds the embedding forward pass (all hidden layers; no logits).
EpochVars build_embeddings(ad::Tape& tape, const ParamStore& ps, const ModelData& md,
                           const ModelConfig& cfg, bool training, Rng* dropout_rng);

// Full node-classification pass; loss is masked cross-entropy plus L2 on the
// first-layer weights.
EpochVars build_nodeclass(ad::Tape& tape, const ParamStore& ps, const ModelData& md,
                          const ModelConfig& cfg, bool training, Rng* dropout_rng,
                          std::shared_ptr<const std::vector<unsigned char>> train_mask,
                          double l2_first_layer);

// ---- plain (non-tape) ops ----

// X / (2 sqrt|kappa| max_norm); identity at kappa = 0 or all-zero X.
agg::PointMatrix preprocess_features(const Eigen::MatrixXd& x, double kappa);

agg::PointMatrix mobius_nonlin(const agg::PointMatrix& x, geo::Nonlin f);

std::vector<agg::PointMatrix> product_split(const Eigen::MatrixXd& x,
                                            const std::vector<ManifoldComponent>& comps,
                                            const std::vector<double>& kappas);

double product_distance(const std::vector<agg::PointMatrix>& xs, int i, int j);

// kappa from a raw (stored) curvature parameter under the given constraint.
double kappa_from_raw(double raw, CurvatureConstraint c);
double raw_from_kappa(double kappa, CurvatureConstraint c);
ad::Var kappa_var(ad::Var raw, CurvatureConstraint c);

}  // namespace kgcn::model

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "kgcn/common.hpp"

namespace kgcn::graph {

inline constexpr int kUnreachable = -1;

struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // deduplicated, u < v, no self-loops
  std::vector<std::vector<int>> adj;
  std::optional<Eigen::MatrixXd> features;
  std::optional<std::vector<int>> labels;
  int num_classes = 0;
};

struct Split {
  std::vector<int> train;
  std::vector<int> early_stop;
  std::vector<int> validation;
  std::vector<int> test;
};

// Builds adjacency lists from an edge list; drops self-loops, collapses
// duplicates, validates endpoints against n.
Graph make_graph(int n, std::vector<std::pair<int, int>> edges);

enum class AdjacencyMode { kSymmetric, kLeft, kRight };
AdjacencyMode adjacency_mode_from_name(const std::string& name);

// A_tilde = A + I with degree normalization:
// symmetric D^-1/2 A D^-1/2, left D^-1 A (row-stochastic), right A D^-1.
Eigen::MatrixXd normalize_adjacency(const Graph& g, AdjacencyMode mode);

// All-pairs shortest path lengths by BFS; kUnreachable marks disconnected pairs.
Eigen::MatrixXi bfs_all_pairs(const Graph& g);

// Parallelogram-law deviation for one sampled quadruple (m; b, c; a).
double parallelogram_psi(double d_am, double d_bc, double d_ab, double d_ac);

struct CurvatureEstimate {
  double kappa_hat = 0.0;
  std::vector<double> psi;  // per node; NaN where no valid sample existed
};

CurvatureEstimate estimate_curvature(const Graph& g, int n_iter, Rng& rng);

Graph gen_balanced_tree(int depth, int branching);
Graph gen_cycle(int n);

enum class GeometricKind { kTorus, kSphere };
Graph gen_geometric_graph(GeometricKind kind, int n, double radius, Rng& rng);

// Two-block stochastic block model with noisy community-indicator features.
Graph gen_sbm(int n, double p_in, double p_out, double feature_noise, Rng& rng);

Graph load_graph(const std::string& edges_path,
                 const std::optional<std::string>& features_path = std::nullopt,
                 const std::optional<std::string>& labels_path = std::nullopt);

void save_edges(const Graph& g, const std::string& path);
void save_features(const Graph& g, const std::string& path);
void save_labels(const Graph& g, const std::string& path);

// per_label_train > 0: known nodes split into per-label training set, an
// early-stop set of early_stop_size and validation = remaining known nodes.
// per_label_train == 0: validation and early-stop sets both of
// early_stop_size, training = all remaining known nodes.
Split make_split(const Graph& g, int n_known, int per_label_train, int early_stop_size,
                 Rng& rng);

}  // namespace kgcn::graph

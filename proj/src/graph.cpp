#include "kgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace kgcn::graph {

Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 0) throw ConfigError("make_graph: negative node count");
  std::set<std::pair<int, int>> dedup;
  for (auto [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw IndexError("edge endpoint out of range [0, n)");
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    dedup.insert({u, v});
  }
  Graph g;
  g.n = n;
  g.edges.assign(dedup.begin(), dedup.end());
  g.adj.assign(static_cast<size_t>(n), {});
  for (auto [u, v] : g.edges) {
    g.adj[static_cast<size_t>(u)].push_back(v);
    g.adj[static_cast<size_t>(v)].push_back(u);
  }
  return g;
}

AdjacencyMode adjacency_mode_from_name(const std::string& name) {
  if (name == "symmetric" || name.empty()) return AdjacencyMode::kSymmetric;
  if (name == "left") return AdjacencyMode::kLeft;
  if (name == "right") return AdjacencyMode::kRight;
  throw ConfigError("unknown adjacency mode: " + name);
}

Eigen::MatrixXd normalize_adjacency(const Graph& g, AdjacencyMode mode) {
  if (g.n < 1) throw ConfigError("normalize_adjacency: empty graph");
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(g.n, g.n);  // self-connections
  for (auto [u, v] : g.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  Eigen::VectorXd deg = a.rowwise().sum();
  switch (mode) {
    case AdjacencyMode::kSymmetric: {
      Eigen::VectorXd dinv = deg.array().rsqrt();
      return dinv.asDiagonal() * a * dinv.asDiagonal();
    }
    case AdjacencyMode::kLeft:
      return deg.cwiseInverse().asDiagonal() * a;
    case AdjacencyMode::kRight:
      return a * deg.cwiseInverse().asDiagonal();
  }
  throw ConfigError("normalize_adjacency: bad mode");
}

Eigen::MatrixXi bfs_all_pairs(const Graph& g) {
  Eigen::MatrixXi dist = Eigen::MatrixXi::Constant(g.n, g.n, kUnreachable);
  std::vector<int> queue;
  queue.reserve(static_cast<size_t>(g.n));
  for (int src = 0; src < g.n; ++src) {
    queue.clear();
    queue.push_back(src);
    dist(src, src) = 0;
    for (size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      const int du = dist(src, u);
      for (int v : g.adj[static_cast<size_t>(u)]) {
        if (dist(src, v) != kUnreachable) continue;
        dist(src, v) = du + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

// Zero in exactly-Euclidean configurations by the parallelogram law
// (m the graph midpoint of b and c, a the far reference node); positive in
// spherical ones, negative in hyperbolic ones.
double parallelogram_psi(double d_am, double d_bc, double d_ab, double d_ac) {
  return d_am / 2.0 + d_bc * d_bc / (8.0 * d_am) -
         (d_ab * d_ab + d_ac * d_ac) / (4.0 * d_am);
}

CurvatureEstimate estimate_curvature(const Graph& g, int n_iter, Rng& rng) {
  if (g.n < 2) throw InsufficientGraphError("estimate_curvature: need at least 2 nodes");
  const Eigen::MatrixXi dist = bfs_all_pairs(g);
  CurvatureEstimate est;
  est.psi.assign(static_cast<size_t>(g.n), std::numeric_limits<double>::quiet_NaN());
  // kappa_hat averages nodes with two distinct neighbours; the b = c
  // fallback at degree-1 nodes carries no parallelogram information and only
  // backs up graphs that have no such node at all.
  double total = 0.0, total_any = 0.0;
  int contributing = 0, contributing_any = 0;
  for (int m = 0; m < g.n; ++m) {
    const auto& nbrs = g.adj[static_cast<size_t>(m)];
    if (nbrs.empty()) continue;
    double acc = 0.0;
    int samples = 0;
    const int deg = static_cast<int>(nbrs.size());
    for (int it = 0; it < n_iter; ++it) {
      // two distinct neighbours where the degree allows; the midpoint
      // construction degenerates for b = c
      const int ib = rng.uniform_int(0, deg - 1);
      int ic = ib;
      if (deg > 1) {
        ic = rng.uniform_int(0, deg - 2);
        if (ic >= ib) ++ic;
      }
      const int b = nbrs[static_cast<size_t>(ib)];
      const int c = nbrs[static_cast<size_t>(ic)];
      int a = rng.uniform_int(0, g.n - 2);
      if (a >= m) ++a;  // uniform over V \ {m}
      const int d_am = dist(a, m);
      const int d_bc = dist(b, c);
      const int d_ab = dist(a, b);
      const int d_ac = dist(a, c);
      if (d_am == kUnreachable || d_bc == kUnreachable || d_ab == kUnreachable ||
          d_ac == kUnreachable || d_am == 0)
        continue;
      acc += parallelogram_psi(d_am, d_bc, d_ab, d_ac);
      ++samples;
    }
    if (samples == 0) continue;
    est.psi[static_cast<size_t>(m)] = acc / samples;
    total_any += est.psi[static_cast<size_t>(m)];
    ++contributing_any;
    if (deg > 1) {
      total += est.psi[static_cast<size_t>(m)];
      ++contributing;
    }
  }
  if (contributing_any == 0)
    throw InsufficientGraphError("estimate_curvature: no valid (m;b,c;a) sample");
  est.kappa_hat = contributing > 0 ? total / contributing : total_any / contributing_any;
  return est;
}

Graph gen_balanced_tree(int depth, int branching) {
  if (depth < 0 || branching < 1) throw ConfigError("gen_balanced_tree: bad parameters");
  std::vector<std::pair<int, int>> edges;
  int next = 1;
  std::vector<int> frontier{0};
  for (int level = 0; level < depth; ++level) {
    std::vector<int> next_frontier;
    for (int parent : frontier) {
      for (int b = 0; b < branching; ++b) {
        edges.emplace_back(parent, next);
        next_frontier.push_back(next);
        ++next;
      }
    }
    frontier = std::move(next_frontier);
  }
  return make_graph(next, std::move(edges));
}

Graph gen_cycle(int n) {
  if (n < 3) throw ConfigError("gen_cycle: need n >= 3");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return make_graph(n, std::move(edges));
}

Graph gen_geometric_graph(GeometricKind kind, int n, double radius, Rng& rng) {
  if (n < 1 || radius <= 0.0) throw ConfigError("gen_geometric_graph: bad parameters");
  std::vector<std::pair<int, int>> edges;
  if (kind == GeometricKind::kTorus) {
    std::vector<std::pair<double, double>> pts(static_cast<size_t>(n));
    for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double dx = std::abs(pts[i].first - pts[j].first);
        double dy = std::abs(pts[i].second - pts[j].second);
        dx = std::min(dx, 1.0 - dx);
        dy = std::min(dy, 1.0 - dy);
        if (std::sqrt(dx * dx + dy * dy) < radius) edges.emplace_back(i, j);
      }
  } else {
    std::vector<Eigen::Vector3d> pts(static_cast<size_t>(n));
    for (auto& p : pts) {
      do {
        p = {rng.normal(), rng.normal(), rng.normal()};
      } while (p.norm() < 1e-12);
      p.normalize();
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double c = std::clamp(pts[i].dot(pts[j]), -1.0, 1.0);
        if (std::acos(c) < radius) edges.emplace_back(i, j);
      }
  }
  return make_graph(n, std::move(edges));
}

Graph gen_sbm(int n, double p_in, double p_out, double feature_noise, Rng& rng) {
  if (n < 2) throw ConfigError("gen_sbm: need n >= 2");
  const int half = n / 2;
  std::vector<std::pair<int, int>> edges;
  auto block = [&](int u) { return u < half ? 0 : 1; };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double p = (block(i) == block(j)) ? p_in : p_out;
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  Graph g = make_graph(n, std::move(edges));
  Eigen::MatrixXd feats = Eigen::MatrixXd::Zero(n, 4);
  std::vector<int> labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = block(i);
    labels[static_cast<size_t>(i)] = c;
    feats(i, c) = 1.0;
    for (int j = 0; j < 4; ++j) feats(i, j) += feature_noise * rng.normal();
  }
  g.features = std::move(feats);
  g.labels = std::move(labels);
  g.num_classes = 2;
  return g;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

int parse_int(const std::string& tok, const std::string& path, int line_no) {
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": expected integer, got '" + tok + "'",
                     line_no);
  }
  if (pos != tok.size())
    throw ParseError(path + ":" + std::to_string(line_no) + ": trailing characters in '" + tok + "'",
                     line_no);
  return v;
}

double parse_double(const std::string& tok, const std::string& path, int line_no) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": expected number, got '" + tok + "'",
                     line_no);
  }
  if (pos != tok.size())
    throw ParseError(path + ":" + std::to_string(line_no) + ": trailing characters in '" + tok + "'",
                     line_no);
  return v;
}

}  // namespace

Graph load_graph(const std::string& edges_path, const std::optional<std::string>& features_path,
                 const std::optional<std::string>& labels_path) {
  std::vector<std::pair<int, int>> raw_edges;
  int max_idx = -1, min_idx = std::numeric_limits<int>::max();
  {
    const auto lines = read_lines(edges_path);
    for (size_t i = 0; i < lines.size(); ++i) {
      const int line_no = static_cast<int>(i) + 1;
      if (lines[i].empty()) continue;
      const size_t tab = lines[i].find('\t');
      if (tab == std::string::npos)
        throw ParseError(edges_path + ":" + std::to_string(line_no) + ": expected 'u<TAB>v'",
                         line_no);
      const int u = parse_int(lines[i].substr(0, tab), edges_path, line_no);
      const int v = parse_int(lines[i].substr(tab + 1), edges_path, line_no);
      if (u < 0 || v < 0)
        throw IndexError(edges_path + ":" + std::to_string(line_no) + ": negative node index");
      raw_edges.emplace_back(u, v);
      max_idx = std::max({max_idx, u, v});
      min_idx = std::min({min_idx, u, v});
    }
  }

  std::optional<Eigen::MatrixXd> features;
  if (features_path) {
    const auto lines = read_lines(*features_path);
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const int line_no = static_cast<int>(i) + 1;
      std::vector<double> row;
      std::stringstream ss(lines[i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) row.push_back(parse_double(tok, *features_path, line_no));
      if (!rows.empty() && row.size() != rows.front().size())
        throw ParseError(*features_path + ":" + std::to_string(line_no) + ": ragged row", line_no);
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(*features_path + ": no feature rows");
    Eigen::MatrixXd f(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < rows[i].size(); ++j) f(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    features = std::move(f);
  }

  std::optional<std::vector<int>> labels;
  if (labels_path) {
    const auto lines = read_lines(*labels_path);
    std::vector<int> lab;
    for (size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      lab.push_back(parse_int(lines[i], *labels_path, static_cast<int>(i) + 1));
    }
    if (lab.empty()) throw ParseError(*labels_path + ": no labels");
    labels = std::move(lab);
  }

  int n = max_idx + 1;
  if (features) n = std::max<int>(n, static_cast<int>(features->rows()));
  if (labels) n = std::max<int>(n, static_cast<int>(labels->size()));
  if (n <= 0) throw ParseError(edges_path + ": empty graph");

  // known n from features/labels: detect likely-1-indexed files first (their
  // max endpoint equals n, a specific off-by-one worth its own message), then
  // reject any other out-of-range endpoint rather than silently shifting
  const int known_n = features ? static_cast<int>(features->rows())
                               : (labels ? static_cast<int>(labels->size()) : -1);
  if (known_n > 0 && min_idx == 1 && max_idx == known_n)
    throw ParseError(edges_path + ": file looks 1-indexed (min index 1, max index n); re-index to 0");
  if (features && max_idx >= features->rows())
    throw IndexError(edges_path + ": edge endpoint " + std::to_string(max_idx) +
                     " out of range for " + std::to_string(features->rows()) + " feature rows");
  if (labels && max_idx >= static_cast<int>(labels->size()))
    throw IndexError(edges_path + ": edge endpoint " + std::to_string(max_idx) +
                     " out of range for " + std::to_string(labels->size()) + " labels");

  Graph g = make_graph(n, std::move(raw_edges));
  if (features) g.features = std::move(features);
  if (labels) {
    g.labels = std::move(labels);
    int mx = 0;
    for (int v : *g.labels) {
      if (v < 0) throw ParseError("negative label");
      mx = std::max(mx, v);
    }
    g.num_classes = mx + 1;
  }
  return g;
}

void save_edges(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  char buf[64];
  for (auto [u, v] : g.edges) {
    std::snprintf(buf, sizeof(buf), "%d\t%d\n", u, v);
    out << buf;
  }
}

void save_features(const Graph& g, const std::string& path) {
  if (!g.features) throw ConfigError("save_features: graph has no features");
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  char buf[64];
  for (int i = 0; i < g.features->rows(); ++i) {
    for (int j = 0; j < g.features->cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", (*g.features)(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
}

void save_labels(const Graph& g, const std::string& path) {
  if (!g.labels) throw ConfigError("save_labels: graph has no labels");
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  for (int v : *g.labels) out << v << "\n";
}

Split make_split(const Graph& g, int n_known, int per_label_train, int early_stop_size,
                 Rng& rng) {
  if (!g.labels) throw InfeasibleSplitError("make_split: labels required");
  if (n_known <= 0 || n_known > g.n)
    throw InfeasibleSplitError("make_split: n_known outside [1, n]");

  std::vector<int> perm(static_cast<size_t>(g.n));
  for (int i = 0; i < g.n; ++i) perm[static_cast<size_t>(i)] = i;
  for (int i = g.n - 1; i > 0; --i)
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(rng.uniform_int(0, i))]);

  std::vector<int> known(perm.begin(), perm.begin() + n_known);
  Split split;
  split.test.assign(perm.begin() + n_known, perm.end());
  std::sort(split.test.begin(), split.test.end());

  if (per_label_train > 0) {
    std::vector<int> counts(static_cast<size_t>(g.num_classes), 0);
    std::vector<int> rest;
    for (int v : known) {
      const int y = (*g.labels)[static_cast<size_t>(v)];
      if (counts[static_cast<size_t>(y)] < per_label_train) {
        split.train.push_back(v);
        ++counts[static_cast<size_t>(y)];
      } else {
        rest.push_back(v);
      }
    }
    for (int c = 0; c < g.num_classes; ++c)
      if (counts[static_cast<size_t>(c)] < per_label_train)
        throw InfeasibleSplitError("make_split: class " + std::to_string(c) +
                                   " has fewer than per_label_train known nodes");
    if (static_cast<int>(rest.size()) < early_stop_size)
      throw InfeasibleSplitError("make_split: not enough known nodes for the early-stop set");
    split.early_stop.assign(rest.begin(), rest.begin() + early_stop_size);
    split.validation.assign(rest.begin() + early_stop_size, rest.end());
  } else {
    if (static_cast<int>(known.size()) < 2 * early_stop_size + 1)
      throw InfeasibleSplitError("make_split: not enough known nodes");
    split.validation.assign(known.begin(), known.begin() + early_stop_size);
    split.early_stop.assign(known.begin() + early_stop_size, known.begin() + 2 * early_stop_size);
    split.train.assign(known.begin() + 2 * early_stop_size, known.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.early_stop.begin(), split.early_stop.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

}  // namespace kgcn::graph

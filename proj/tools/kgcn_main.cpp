// kgcn command-line front end: synthetic graph generation, distortion and
// node-classification training, curvature estimation, curvature sweeps and a
// numeric self-test.
//
// Exit codes: 0 success, 1 configuration/data error, 2 internal numeric error.
// Metric files are deterministic for a fixed (argv, seed); wall-clock timing
// goes to a separate timing.json so metric files stay byte-comparable.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "kgcn/graph.hpp"
#include "kgcn/manifold.hpp"
#include "kgcn/selftest.hpp"
#include "kgcn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw kgcn::ConfigError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kgcn::ConfigError("config file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw kgcn::ConfigError("config parse failure in " + path + ": " + e.what());
  }
  return j;
}

// dotted.path=value overrides, parsed as JSON scalars when possible
void apply_overrides(json& cfg, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw kgcn::ConfigError("override must look like key.path=value: " + s);
    const std::string path = s.substr(0, eq);
    const std::string raw = s.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (...) {
      value = raw;  // plain string
    }
    json* node = &cfg;
    size_t start = 0;
    while (true) {
      const size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
}

kgcn::model::ManifoldComponent parse_component(const json& j) {
  kgcn::model::ManifoldComponent c;
  c.dim = j.at("dim").get<int>();
  c.kappa_init = j.value("kappa", -1.0);
  c.constraint = kgcn::model::constraint_from_name(j.value("constraint", "free"));
  c.trainable = j.value("trainable", true);
  return c;
}

kgcn::train::TrainConfig parse_train_config(const json& cfg) {
  kgcn::train::TrainConfig tc;
  const json& m = cfg.at("model");
  tc.model.hidden_dims = m.at("hidden_dims").get<std::vector<int>>();
  for (const json& jc : m.at("components")) tc.model.components.push_back(parse_component(jc));
  tc.model.nonlinearity = m.value("nonlinearity", "identity");
  tc.model.adjacency = m.value("adjacency", "symmetric");
  tc.model.dropout_features = m.value("dropout_features", 0.0);
  tc.model.dropout_adjacency = m.value("dropout_adjacency", 0.0);
  tc.model.preprocess = m.value("preprocess", true);
  const json& t = cfg.at("train");
  tc.epochs = t.value("epochs", 2000);
  tc.patience = t.value("patience", 200);
  tc.lr_euclidean = t.value("lr_euclidean", 0.01);
  tc.lr_curvature = t.value("lr_curvature", 1e-4);
  tc.l2_first_layer = t.value("l2_first_layer", 5e-4);
  tc.seed = t.value("seed", 1ULL);
  tc.log_every = t.value("log_every", 1);
  if (cfg.contains("split")) {
    const json& s = cfg.at("split");
    tc.n_known = s.value("n_known", 0);
    tc.per_label_train = s.value("per_label_train", 20);
    tc.early_stop_size = s.value("early_stop_size", 0);
  }
  return tc;
}

kgcn::graph::Graph build_graph_from_config(const json& g, uint64_t seed) {
  const std::string kind = g.at("kind").get<std::string>();
  kgcn::Rng rng(kgcn::Rng::derive(seed, 0x61));
  if (kind == "tree")
    return kgcn::graph::gen_balanced_tree(g.value("depth", 5), g.value("branching", 4));
  if (kind == "cycle") return kgcn::graph::gen_cycle(g.value("n", 20));
  if (kind == "torus")
    return kgcn::graph::gen_geometric_graph(kgcn::graph::GeometricKind::kTorus,
                                            g.value("n", 1000), g.value("radius", 0.05), rng);
  if (kind == "sphere")
    return kgcn::graph::gen_geometric_graph(kgcn::graph::GeometricKind::kSphere,
                                            g.value("n", 1000), g.value("radius", 0.2), rng);
  if (kind == "sbm")
    return kgcn::graph::gen_sbm(g.value("n", 200), g.value("p_in", 0.1),
                                g.value("p_out", 0.005), g.value("feature_noise", 0.3), rng);
  if (kind == "file")
    return kgcn::graph::load_graph(
        g.at("edges").get<std::string>(),
        g.contains("features") ? std::optional<std::string>(g.at("features").get<std::string>())
                               : std::nullopt,
        g.contains("labels") ? std::optional<std::string>(g.at("labels").get<std::string>())
                             : std::nullopt);
  throw kgcn::ConfigError("unknown graph kind: " + kind);
}

std::string epochs_csv(const kgcn::train::RunMetrics& rm) {
  std::string out = "epoch,loss,metric";
  const size_t nk = rm.epoch_log.empty() ? 0 : rm.epoch_log.front().kappas.size();
  for (size_t i = 0; i < nk; ++i) out += ",kappa_" + std::to_string(i);
  out += "\n";
  for (const auto& row : rm.epoch_log) {
    out += std::to_string(row.epoch) + "," + fmt_double(row.loss) + "," + fmt_double(row.metric);
    for (double k : row.kappas) out += "," + fmt_double(k);
    out += "\n";
  }
  return out;
}

json metrics_json(const json& cfg, const kgcn::train::RunMetrics& rm) {
  json m;
  m["config"] = cfg;
  m["seed"] = rm.seed;
  m["kappas"] = rm.kappas_final;
  m["metrics"] = {{"task", rm.task},
                  {"epochs_run", rm.epochs_run},
                  {"best_epoch", rm.best_epoch},
                  {"best_metric", rm.best_metric}};
  if (rm.task == "nodeclass") {
    m["metrics"]["test_accuracy"] = rm.test_accuracy;
    m["metrics"]["early_stop_accuracy"] = rm.early_stop_accuracy;
  }
  return m;
}

void write_run_outputs(const fs::path& out_dir, const json& cfg,
                       const kgcn::train::RunMetrics& rm) {
  write_atomic(out_dir / "metrics.json", metrics_json(cfg, rm).dump(2) + "\n");
  write_atomic(out_dir / "epochs.csv", epochs_csv(rm));
  json timing = {{"runtime_s", rm.wall_clock_s}};
  write_atomic(out_dir / "timing.json", timing.dump(2) + "\n");
}

int run_selftest(uint64_t seed, const std::string& json_out, const std::string& fault) {
  if (fault == "kappa-add-sign")
    kgcn::manifold::debug::flip_kappa_add_sign = true;
  else if (!fault.empty())
    throw kgcn::ConfigError("unknown fault: " + fault);
  kgcn::selftest::Report rep = kgcn::selftest::run_all(seed);
  std::printf("%-24s %8s %8s %10s\n", "suite", "pass", "fail", "seconds");
  for (const auto& s : rep.suites)
    std::printf("%-24s %8d %8d %10.3f\n", s.name.c_str(), s.passed, s.failed, s.seconds);
  int total_fail = 0;
  for (const auto& s : rep.suites) total_fail += s.failed;
  std::printf("%s (%d failures)\n", rep.all_passed() ? "ALL PASS" : "FAILED", total_fail);
  if (!json_out.empty()) {
    json j;
    j["seed"] = seed;
    j["all_passed"] = rep.all_passed();
    j["suites"] = json::array();
    for (const auto& s : rep.suites)
      j["suites"].push_back({{"name", s.name}, {"pass", s.passed}, {"fail", s.failed}});
    write_atomic(json_out, j.dump(2) + "\n");
    json timing = json::array();
    for (const auto& s : rep.suites) timing.push_back({{"name", s.name}, {"seconds", s.seconds}});
    write_atomic(json_out + ".timing.json", timing.dump(2) + "\n");
  }
  return rep.all_passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constant-curvature GCN toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic graph");
  std::string synth_kind = "tree", synth_out = ".";
  int synth_depth = 5, synth_branching = 4, synth_n = 1000;
  double synth_radius = 0.05, synth_p_in = 0.1, synth_p_out = 0.005, synth_noise = 0.3;
  uint64_t synth_seed = 1;
  synth->add_option("--kind", synth_kind, "tree|cycle|torus|sphere|sbm");
  synth->add_option("--depth", synth_depth);
  synth->add_option("--branching", synth_branching);
  synth->add_option("--n", synth_n);
  synth->add_option("--radius", synth_radius);
  synth->add_option("--p-in", synth_p_in);
  synth->add_option("--p-out", synth_p_out);
  synth->add_option("--feature-noise", synth_noise);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", synth_out, "output directory");

  // distortion / nodeclass / sweep
  auto* distortion = app.add_subcommand("distortion", "train a distortion-minimizing embedding");
  auto* nodeclass = app.add_subcommand("nodeclass", "train a node classifier");
  auto* sweep = app.add_subcommand("sweep", "fixed-curvature distortion sweep");
  std::string cfg_path, out_dir = ".";
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed_flag;
  for (auto* cmd : {distortion, nodeclass, sweep}) {
    cmd->add_option("--config", cfg_path, "JSON config")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--set", overrides, "override config keys, dotted.path=value");
    cmd->add_option("--seed", seed_flag, "override train.seed");
  }

  // curvature
  auto* curvature = app.add_subcommand("curvature", "estimate graph curvature");
  std::string curv_edges, curv_out;
  int curv_iters = 1000;
  uint64_t curv_seed = 1;
  curvature->add_option("--edges", curv_edges, "edge list (tsv)")->required();
  curvature->add_option("--iters", curv_iters);
  curvature->add_option("--seed", curv_seed);
  curvature->add_option("--out", curv_out, "output directory (optional)");

  // selftest
  auto* selftest_cmd = app.add_subcommand("selftest", "run the numeric invariant suites");
  uint64_t st_seed = 1;
  std::string st_json, st_fault;
  selftest_cmd->add_option("--seed", st_seed);
  selftest_cmd->add_option("--json", st_json, "write the report as JSON");
  selftest_cmd->add_option("--inject-fault", st_fault, "debug fault (kappa-add-sign)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) {
      kgcn::Rng rng(synth_seed);
      kgcn::graph::Graph g;
      if (synth_kind == "tree")
        g = kgcn::graph::gen_balanced_tree(synth_depth, synth_branching);
      else if (synth_kind == "cycle")
        g = kgcn::graph::gen_cycle(synth_n);
      else if (synth_kind == "torus")
        g = kgcn::graph::gen_geometric_graph(kgcn::graph::GeometricKind::kTorus, synth_n,
                                             synth_radius, rng);
      else if (synth_kind == "sphere")
        g = kgcn::graph::gen_geometric_graph(kgcn::graph::GeometricKind::kSphere, synth_n,
                                             synth_radius, rng);
      else if (synth_kind == "sbm")
        g = kgcn::graph::gen_sbm(synth_n, synth_p_in, synth_p_out, synth_noise, rng);
      else
        throw kgcn::ConfigError("unknown kind: " + synth_kind);
      fs::create_directories(synth_out);
      kgcn::graph::save_edges(g, (fs::path(synth_out) / "edges.tsv").string());
      if (g.features) kgcn::graph::save_features(g, (fs::path(synth_out) / "features.csv").string());
      if (g.labels) kgcn::graph::save_labels(g, (fs::path(synth_out) / "labels.csv").string());
      std::printf("wrote %s: %d nodes, %zu edges\n", synth_out.c_str(), g.n, g.edges.size());
      return 0;
    }

    if (*distortion || *nodeclass || *sweep) {
      json cfg = load_json(cfg_path);
      apply_overrides(cfg, overrides);
      kgcn::train::TrainConfig tc = parse_train_config(cfg);
      if (seed_flag) tc.seed = *seed_flag;
      kgcn::graph::Graph g = build_graph_from_config(cfg.at("graph"), tc.seed);
      if (*distortion) {
        kgcn::train::RunMetrics rm = kgcn::train::train_distortion(g, tc);
        write_run_outputs(out_dir, cfg, rm);
        std::printf("min distortion %.6g at epoch %d (%.1fs)\n", rm.best_metric, rm.best_epoch,
                    rm.wall_clock_s);
      } else if (*nodeclass) {
        kgcn::train::RunMetrics rm = kgcn::train::train_nodeclass(g, tc);
        write_run_outputs(out_dir, cfg, rm);
        std::printf("test accuracy %.4f (early-stop %.4f, %d epochs, %.1fs)\n", rm.test_accuracy,
                    rm.early_stop_accuracy, rm.epochs_run, rm.wall_clock_s);
      } else {
        std::vector<double> grid;
        const json& sw = cfg.at("sweep");
        if (sw.contains("kappa_values")) {
          grid = sw.at("kappa_values").get<std::vector<double>>();
        } else {
          const double lo = sw.at("min").get<double>();
          const double hi = sw.at("max").get<double>();
          const int count = sw.at("count").get<int>();
          if (count < 1) throw kgcn::ConfigError("sweep.count must be >= 1");
          for (int i = 0; i < count; ++i)
            grid.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1.0));
        }
        const auto t0 = std::chrono::steady_clock::now();
        auto rows = kgcn::train::kappa_sweep(g, tc, grid);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string csv = "kappa,min_distortion\n";
        json jrows = json::array();
        for (const auto& r : rows) {
          csv += fmt_double(r.kappa) + "," + fmt_double(r.min_distortion) + "\n";
          jrows.push_back({{"kappa", r.kappa}, {"min_distortion", r.min_distortion}});
        }
        json m = {{"config", cfg}, {"seed", tc.seed}, {"rows", jrows}};
        write_atomic(fs::path(out_dir) / "sweep.csv", csv);
        write_atomic(fs::path(out_dir) / "metrics.json", m.dump(2) + "\n");
        write_atomic(fs::path(out_dir) / "timing.json",
                     json{{"runtime_s", secs}}.dump(2) + "\n");
        std::printf("swept %zu curvature values (%.1fs)\n", rows.size(), secs);
      }
      return 0;
    }

    if (*curvature) {
      kgcn::graph::Graph g = kgcn::graph::load_graph(curv_edges);
      kgcn::Rng rng(curv_seed);
      auto est = kgcn::graph::estimate_curvature(g, curv_iters, rng);
      int finite = 0;
      for (double p : est.psi)
        if (std::isfinite(p)) ++finite;
      json j = {{"kappa_hat", est.kappa_hat},
                {"nodes", g.n},
                {"nodes_with_samples", finite},
                {"iters", curv_iters},
                {"seed", curv_seed},
                {"psi", est.psi}};
      const std::string dumped = j.dump(2) + "\n";
      if (!curv_out.empty())
        write_atomic(fs::path(curv_out) / "curvature.json", dumped);
      std::fputs(dumped.c_str(), stdout);
      return 0;
    }

    if (*selftest_cmd) return run_selftest(st_seed, st_json, st_fault);
  } catch (const kgcn::ConfigError& e) {
    std::fprintf(stderr, "E_CONFIG: %s\n", e.what());
    return 1;
  } catch (const kgcn::ParseError& e) {
    std::fprintf(stderr, "E_DATA: %s\n", e.what());
    return 1;
  } catch (const kgcn::IndexError& e) {
    std::fprintf(stderr, "E_DATA: %s\n", e.what());
    return 1;
  } catch (const kgcn::InfeasibleSplitError& e) {
    std::fprintf(stderr, "E_CONFIG: %s\n", e.what());
    return 1;
  } catch (const kgcn::Error& e) {
    std::fprintf(stderr, "E_NUMERIC: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "E_NUMERIC: %s\n", e.what());
    return 2;
  }
  return 0;
}

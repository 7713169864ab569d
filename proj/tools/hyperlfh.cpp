// hyperlfh command-line interface: synth | graph validate | train | eval |
// linkpred | sweep | gradcheck. Exit codes: 0 success, 1 configuration or
// validation error, 2 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperlfh/config.hpp"
#include "hyperlfh/gradcheck.hpp"
#include "hyperlfh/graph.hpp"
#include "hyperlfh/linkpred.hpp"
#include "hyperlfh/metrics.hpp"
#include "hyperlfh/model.hpp"
#include "hyperlfh/oracle.hpp"
#include "hyperlfh/splits.hpp"
#include "hyperlfh/sweep.hpp"
#include "hyperlfh/synth.hpp"
#include "hyperlfh/trainer.hpp"

namespace fs = std::filesystem;
using namespace hyperlfh;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int precision = 0;  // 0 = from config
};

std::string schema_footer() {
  std::string s = "Config keys (key = value file, '#' comments; --set overrides):\n";
  for (const auto& k : config_schema()) {
    s += "  ";
    s += k.name;
    s += " = ";
    s += k.def[0] ? k.def : "(unset)";
    s += "\n      ";
    s += k.doc;
    s += "\n";
  }
  return s;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--set", args.overrides, "override config key=value (repeatable)");
  cmd->add_option("--seed", args.seed, "run seed (overrides train.seed and synth.seed)")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--precision", args.precision, "floating point width: 32 or 64")
      ->check(CLI::IsMember({32, 64}));
  cmd->footer(schema_footer());
}

RunConfig build_config(const CommonArgs& args) {
  RunConfig cfg = RunConfig::defaults();
  if (!args.config_path.empty()) cfg.load_file(args.config_path);
  for (const auto& pair : args.overrides) cfg.set_pair(pair);
  if (args.seed_given) {
    cfg.set("train.seed", std::to_string(args.seed));
    cfg.set("synth.seed", std::to_string(args.seed));
  }
  if (args.precision != 0) cfg.set("precision", std::to_string(args.precision));
  cfg.validate();
  return cfg;
}

void require_out(const CommonArgs& args) {
  if (args.out_dir.empty()) throw ConfigError("--out <dir> is required for this command");
  fs::create_directories(args.out_dir);
}

HetPairGraph load_data(const RunConfig& cfg) {
  const std::string dir = cfg.get("data.dir");
  if (dir.empty()) throw ConfigError("config key data.dir must point to a graph directory");
  HetPairGraph g = load_graph_dir(dir);
  validate_graph(g);
  return g;
}

TrainSettings train_settings(const RunConfig& cfg) {
  TrainSettings ts;
  ts.lr = cfg.get_f64("train.lr");
  ts.max_epochs = cfg.get_int("train.max_epochs");
  ts.patience = cfg.get_int("train.patience");
  ts.seed = cfg.get_u64("train.seed");
  return ts;
}

// ---- command bodies (templated on scalar width) ----

template <typename T>
int run_train(const RunConfig& cfg, const std::string& out_dir) {
  HetPairGraph g = load_data(cfg);
  const TrainSettings ts = train_settings(cfg);
  NodeSplit split =
      split_nodes(g, cfg.get_f64("train.train_ratio"), cfg.get_f64("train.val_ratio"), ts.seed);

  LfhModel<T> model(g, cfg.model_config(), ts.seed);
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult<T> res = train_model(model, split, ts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_metrics_csv(res.history, out_dir + "/metrics.csv");
  save_checkpoint(res.best_params, out_dir + "/model.ckpt");

  model.load_params(res.best_params);
  const double test_f1 = eval_f1(model, split.test);
  std::printf("epochs=%d best_epoch=%d val_f1=%.6f test_f1=%.6f (%.1fs)\n", res.epochs_run,
              res.best_epoch, res.best_val_f1, test_f1, secs);

  std::ofstream js(out_dir + "/run.json");
  js << "{\n"
     << "  \"epochs\": " << res.epochs_run << ",\n"
     << "  \"best_epoch\": " << res.best_epoch << ",\n"
     << "  \"val_f1\": " << res.best_val_f1 << ",\n"
     << "  \"test_f1\": " << test_f1 << ",\n"
     << "  \"seconds\": " << secs << "\n}\n";
  return 0;
}

template <typename T>
int run_eval(const RunConfig& cfg, const std::string& out_dir) {
  HetPairGraph g = load_data(cfg);
  const TrainSettings ts = train_settings(cfg);
  NodeSplit split =
      split_nodes(g, cfg.get_f64("train.train_ratio"), cfg.get_f64("train.val_ratio"), ts.seed);
  std::string ckpt = cfg.get("data.checkpoint");
  if (ckpt.empty()) {
    if (out_dir.empty()) throw ConfigError("eval needs data.checkpoint or --out to locate model.ckpt");
    ckpt = out_dir + "/model.ckpt";
  }
  LfhModel<T> model(g, cfg.model_config(), ts.seed);
  model.load_params(load_checkpoint<T>(ckpt));
  const double f_train = eval_f1(model, split.train);
  const double f_val = eval_f1(model, split.val);
  const double f_test = eval_f1(model, split.test);
  std::printf("train_f1=%.6f val_f1=%.6f test_f1=%.6f\n", f_train, f_val, f_test);
  if (!out_dir.empty()) {
    std::ofstream js(out_dir + "/eval.json");
    js << "{ \"train_f1\": " << f_train << ", \"val_f1\": " << f_val
       << ", \"test_f1\": " << f_test << " }\n";
  }
  return 0;
}

template <typename T>
int run_linkpred(const RunConfig& cfg, const std::string& out_dir) {
  HetPairGraph g = load_data(cfg);
  const TrainSettings ts = train_settings(cfg);
  LinkSplit split;
  auto res = link_predict<T>(g, cfg.model_config(), ts, cfg.get_f64("linkpred.hide_fraction"),
                             cfg.get("linkpred.objective") == "recon",
                             cfg.get_int("linkpred.classifier_steps"),
                             cfg.get_f64("linkpred.holdin"), &split);
  if (split.shortfall)
    std::fprintf(stderr, "warning: only %zu of %d requested edges could be hidden\n",
                 split.positive_pairs.size(), split.requested_hidden);
  std::printf("link_f1=%.6f accuracy=%.6f positives=%zu\n", res.f1, res.accuracy,
              split.positive_pairs.size());
  if (!out_dir.empty()) {
    std::ofstream js(out_dir + "/linkpred.json");
    js << "{ \"f1\": " << res.f1 << ", \"accuracy\": " << res.accuracy
       << ", \"positives\": " << split.positive_pairs.size() << " }\n";
  }
  return 0;
}

template <typename T>
int run_sweep_cmd(const RunConfig& cfg, const std::string& out_dir) {
  HetPairGraph g = load_data(cfg);
  auto rows = run_sweep<T>(g, cfg.model_config(), train_settings(cfg),
                           cfg.get_f64("train.train_ratio"), cfg.get_f64("train.val_ratio"),
                           cfg.get("sweep.param"), cfg.get_f64_list("sweep.values"));
  write_sweep_csv(rows, out_dir + "/sweep.csv");
  for (const auto& r : rows) std::printf("%s=%g f1=%.6f\n", r.param.c_str(), r.value, r.f1);
  return 0;
}

// Fixed 6-node fixture: the whole united loss differentiated end to end.
// Always runs in 64-bit; dropout is disabled so the loss is smooth.
int run_gradcheck(const RunConfig& cfg) {
  SynthConfig sc;
  sc.num_classes = 2;
  sc.nodes_per_class = 2;
  sc.node_types = 2;
  sc.aux_per_class = 1;
  sc.p_intra = 0.9;
  sc.p_inter = 0.4;
  sc.feature_dim = 4;
  sc.seed = cfg.get_u64("synth.seed");
  HetPairGraph g = generate_synth(sc);

  ModelConfig mc = cfg.model_config();
  mc.dim = 8;
  mc.heads = 2;
  mc.dropout = 0.0;
  LfhModel<double> model(g, mc, cfg.get_u64("train.seed"));
  const auto subset = g.labeled_nodes();
  const double alpha = mc.alpha;

  auto eval_loss = [&](Tape<double>& tape) {
    Rng dr(1);
    auto fwd = model.forward(tape, /*training=*/true, dr);
    auto lab = model.label_loss(tape, fwd, subset);
    return model.united_loss(tape, lab, fwd.recon_loss, alpha);
  };
  Tape<double> tape;
  auto loss = eval_loss(tape);
  tape.backward(loss);
  auto grads = model.collect_grads(tape);
  auto rep = finite_diff_check(model.params(), grads, [&]() {
    Tape<double> t2;
    return t2.val(eval_loss(t2)).scalar();
  });
  std::printf("gradcheck: max_rel_error=%.3e worst=%s[%zu] analytic=%.6e numeric=%.6e\n",
              rep.max_rel_error, rep.worst_param.c_str(), rep.worst_entry, rep.analytic,
              rep.numeric);
  if (rep.max_rel_error > 1e-4) {
    std::fprintf(stderr, "gradcheck FAILED: %.3e > 1e-4\n", rep.max_rel_error);
    return 2;
  }
  return 0;
}

template <typename Fn32, typename Fn64>
int dispatch_precision(const RunConfig& cfg, Fn32 f32, Fn64 f64) {
  return cfg.get_int("precision") == 32 ? f32() : f64();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LFH: dynamic heterogeneous hypergraph learning"};
  app.require_subcommand(1);

  CommonArgs synth_args, train_args, eval_args, link_args, sweep_args, grad_args, graph_args;
  std::string validate_dir;

  auto* synth_cmd = app.add_subcommand("synth", "generate a planted synthetic graph");
  add_common(synth_cmd, synth_args);
  auto* train_cmd = app.add_subcommand("train", "train node classification");
  add_common(train_cmd, train_args);
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd, eval_args);
  auto* link_cmd = app.add_subcommand("linkpred", "link prediction pipeline");
  add_common(link_cmd, link_args);
  auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter sweep");
  add_common(sweep_cmd, sweep_args);
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(grad_cmd, grad_args);
  auto* graph_cmd = app.add_subcommand("graph", "graph file utilities");
  auto* graph_validate = graph_cmd->add_subcommand("validate", "validate a graph directory");
  graph_validate->add_option("dir", validate_dir, "graph directory")->required();
  graph_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) {
      RunConfig cfg = build_config(synth_args);
      require_out(synth_args);
      HetPairGraph g = generate_synth(cfg.synth_config());
      save_graph(g, synth_args.out_dir);
      std::printf("synth: %d nodes, %zu edges, %d node types, %d edge types, %d classes\n",
                  g.num_nodes, g.edges.size(), g.num_node_types, g.num_edge_types,
                  g.num_classes);
      return 0;
    }
    if (*graph_validate) {
      HetPairGraph g = load_graph_dir(validate_dir);
      validate_graph(g);
      std::printf("valid: %d nodes, %zu edges, %d node types, %d edge types, %d classes\n",
                  g.num_nodes, g.edges.size(), g.num_node_types, g.num_edge_types,
                  g.num_classes);
      return 0;
    }
    if (*train_cmd) {
      RunConfig cfg = build_config(train_args);
      require_out(train_args);
      return dispatch_precision(
          cfg, [&] { return run_train<float>(cfg, train_args.out_dir); },
          [&] { return run_train<double>(cfg, train_args.out_dir); });
    }
    if (*eval_cmd) {
      RunConfig cfg = build_config(eval_args);
      if (!eval_args.out_dir.empty()) fs::create_directories(eval_args.out_dir);
      return dispatch_precision(
          cfg, [&] { return run_eval<float>(cfg, eval_args.out_dir); },
          [&] { return run_eval<double>(cfg, eval_args.out_dir); });
    }
    if (*link_cmd) {
      RunConfig cfg = build_config(link_args);
      if (!link_args.out_dir.empty()) fs::create_directories(link_args.out_dir);
      return dispatch_precision(
          cfg, [&] { return run_linkpred<float>(cfg, link_args.out_dir); },
          [&] { return run_linkpred<double>(cfg, link_args.out_dir); });
    }
    if (*sweep_cmd) {
      RunConfig cfg = build_config(sweep_args);
      require_out(sweep_args);
      return dispatch_precision(
          cfg, [&] { return run_sweep_cmd<float>(cfg, sweep_args.out_dir); },
          [&] { return run_sweep_cmd<double>(cfg, sweep_args.out_dir); });
    }
    if (*grad_cmd) {
      RunConfig cfg = build_config(grad_args);
      return run_gradcheck(cfg);
    }
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

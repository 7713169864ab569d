#pragma once

#include <string>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/metrics.hpp"
#include "hyperlfh/model.hpp"
#include "hyperlfh/splits.hpp"
#include "hyperlfh/trainer.hpp"

namespace hyperlfh {

struct SweepPoint {
  std::string param;
  double value;
};

/// One seeded train/eval run per sweep value; the reported score is the
/// test-subset macro-F1 of the best-validation checkpoint.
template <typename T>
std::vector<SweepRow> run_sweep(const HetPairGraph& g, const ModelConfig& base_mcfg,
                                const TrainSettings& base_ts, double train_ratio,
                                double val_ratio, const std::string& param,
                                const std::vector<double>& values) {
  const std::vector<std::string> known = {"lambda", "gamma",  "alpha",
                                          "dim",    "heads", "train_ratio"};
  bool ok = false;
  for (const auto& k : known) ok = ok || k == param;
  if (!ok) throw ConfigError("sweep.param must be one of lambda|gamma|alpha|dim|heads|train_ratio");
  if (values.empty()) throw ConfigError("sweep.values is empty");

  std::vector<SweepRow> rows;
  for (double v : values) {
    ModelConfig mcfg = base_mcfg;
    double tr = train_ratio, vr = val_ratio;
    if (param == "lambda") mcfg.lambda = v;
    else if (param == "gamma") mcfg.gamma = v;
    else if (param == "alpha") mcfg.alpha = v;
    else if (param == "dim") mcfg.dim = static_cast<int>(v);
    else if (param == "heads") mcfg.heads = static_cast<int>(v);
    else tr = v;

    NodeSplit split = split_nodes(g, tr, vr, base_ts.seed);
    LfhModel<T> model(g, mcfg, base_ts.seed);
    TrainResult<T> res = train_model(model, split, base_ts);
    model.load_params(res.best_params);
    const double f1 = eval_f1(model, split.test);
    rows.push_back({param, v, f1, base_ts.seed});
  }
  return rows;
}

}  // namespace hyperlfh

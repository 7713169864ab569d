#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperlfh/adam.hpp"
#include "hyperlfh/errors.hpp"
#include "hyperlfh/metrics.hpp"
#include "hyperlfh/model.hpp"
#include "hyperlfh/splits.hpp"

namespace hyperlfh {

struct TrainSettings {
  double lr = 2e-3;
  int max_epochs = 100;
  int patience = 30;
  std::uint64_t seed = 1;
};

template <typename T>
struct TrainResult {
  ParamStore<T> best_params;
  std::vector<EpochRow> history;
  double best_val_f1 = 0.0;
  int best_epoch = -1;
  int epochs_run = 0;
};

namespace traindetail {
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace traindetail

template <typename T>
std::vector<int> subset_labels(const HetPairGraph& g, const std::vector<int>& subset) {
  std::vector<int> out(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) out[i] = g.labels[subset[i]];
  return out;
}

/// Macro-F1 of the trained model on a node subset (eval mode).
template <typename T>
double eval_f1(LfhModel<T>& model, const std::vector<int>& subset) {
  if (subset.empty()) throw std::logic_error("eval_f1: empty subset");
  Tape<T> tape;
  Rng no_drop(0);
  auto fwd = model.forward(tape, /*training=*/false, no_drop);
  const Mat<T> logits_sub =
      tape.val(tape.select_columns(fwd.logits, subset));
  auto pred = LfhModel<T>::predict(logits_sub);
  return macro_f1(pred, subset_labels<T>(*model.context().graph, subset),
                  model.num_classes());
}

/// Full training loop: per epoch, one united-loss forward/backward/Adam step
/// on the train subset, then an eval-mode pass scoring validation macro-F1.
/// Keeps the best-validation checkpoint and stops after `patience` epochs
/// without improvement. Bit-reproducible for a fixed seed in 64-bit mode.
template <typename T>
TrainResult<T> train_model(LfhModel<T>& model, const NodeSplit& split,
                           const TrainSettings& ts) {
  const HetPairGraph& g = *model.context().graph;
  const double alpha = model.config().alpha;
  const bool supervised = model.num_classes() >= 2 && alpha < 1.0 && !split.train.empty();
  const bool track_f1 = model.num_classes() >= 2 && !split.val.empty();

  AdamState<T> opt(model.params());
  TrainResult<T> result;
  result.best_params = model.params();
  int since_best = 0;

  for (int epoch = 1; epoch <= ts.max_epochs; ++epoch) {
    Tape<T> tape;
    Rng drop_rng(traindetail::mix(ts.seed, static_cast<std::uint64_t>(epoch)));
    auto fwd = model.forward(tape, /*training=*/true, drop_rng);

    typename Tape<T>::Var loss;
    if (supervised) {
      auto label = model.label_loss(tape, fwd, split.train);
      loss = model.united_loss(tape, label, fwd.recon_loss, alpha);
    } else if (model.num_classes() >= 2 && !split.train.empty()) {
      // alpha == 1: the label head receives no gradient but the united form
      // is kept so the loss value stays comparable.
      auto label = model.label_loss(tape, fwd, split.train);
      loss = model.united_loss(tape, label, fwd.recon_loss, 1.0);
    } else {
      loss = fwd.recon_loss;
    }

    const double train_loss = static_cast<double>(tape.val(loss).scalar());
    if (!std::isfinite(train_loss)) {
      const char* culprit = tape.first_nonfinite();
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                           "; first non-finite tensor: " +
                           (culprit ? culprit : "loss"));
    }
    tape.backward(loss);
    auto grads = model.collect_grads(tape);
    opt.step(model.params(), grads, static_cast<T>(ts.lr));

    // Evaluation pass (dropout off).
    double val_loss = train_loss, val_f1 = 0.0;
    if (track_f1) {
      Tape<T> etape;
      Rng no_drop(0);
      auto efwd = model.forward(etape, /*training=*/false, no_drop);
      auto vlabel = model.label_loss(etape, efwd, split.val);
      auto vloss = model.united_loss(etape, vlabel, efwd.recon_loss, alpha);
      val_loss = static_cast<double>(etape.val(vloss).scalar());
      const Mat<T> vlogits = etape.val(etape.select_columns(efwd.logits, split.val));
      val_f1 = macro_f1(LfhModel<T>::predict(vlogits), subset_labels<T>(g, split.val),
                        model.num_classes());
    }
    result.history.push_back({epoch, train_loss, val_loss, val_f1});
    result.epochs_run = epoch;

    const bool improved =
        track_f1 ? val_f1 > result.best_val_f1 : result.best_epoch < 0;
    if (improved || result.best_epoch < 0) {
      result.best_val_f1 = val_f1;
      result.best_epoch = epoch;
      result.best_params = model.params();
      since_best = 0;
    } else {
      ++since_best;
    }
    if (track_f1 && since_best >= ts.patience) break;
  }
  if (!track_f1) result.best_params = model.params();
  return result;
}

}  // namespace hyperlfh

#pragma once

#include <cstdint>
#include <vector>

#include "hyperlfh/adam.hpp"
#include "hyperlfh/errors.hpp"
#include "hyperlfh/metrics.hpp"
#include "hyperlfh/model.hpp"
#include "hyperlfh/splits.hpp"
#include "hyperlfh/trainer.hpp"

namespace hyperlfh {

struct LinkPredResult {
  double f1 = 0.0;
  double accuracy = 0.0;
  int train_pairs = 0;
  int test_pairs = 0;
};

/// Hadamard edge feature: elementwise product of the two node columns.
template <typename T>
Mat<T> hadamard_edge_feature(const Mat<T>& Z, int a, int b) {
  Mat<T> f(Z.rows(), 1);
  for (std::size_t r = 0; r < Z.rows(); ++r) f(r, 0) = Z(r, a) * Z(r, b);
  return f;
}

/// Logistic classifier over Hadamard edge features: fit on a held-in share
/// of positive and negative pairs (balanced split per class), score the
/// rest. Reports positive-class F1 and accuracy.
template <typename T>
LinkPredResult link_classify(const Mat<T>& Z, const LinkSplit& split, std::uint64_t seed,
                             int steps = 200, double holdin = 0.8, double lr = 0.05) {
  if (split.positive_pairs.empty())
    throw DataError("link_classify: no positive pairs (nothing was hidden)");
  Rng rng(seed);

  auto build = [&](const std::vector<std::pair<int, int>>& pairs, int label,
                   std::vector<std::pair<Mat<T>, int>>& out) {
    for (const auto& [a, b] : pairs) out.push_back({hadamard_edge_feature(Z, a, b), label});
  };
  std::vector<std::pair<Mat<T>, int>> pos, neg;
  build(split.positive_pairs, 1, pos);
  build(split.negative_pairs, 0, neg);
  rng.shuffle(pos);
  rng.shuffle(neg);

  const std::size_t pos_in = static_cast<std::size_t>(holdin * pos.size());
  const std::size_t neg_in = static_cast<std::size_t>(holdin * neg.size());
  if (pos_in == 0 || neg_in == 0 || pos_in == pos.size() || neg_in == neg.size())
    throw DataError("link_classify: hold-in split leaves a side empty");

  const std::size_t d = Z.rows();
  auto pack = [&](std::size_t n_pos, std::size_t n_neg, std::size_t off_pos,
                  std::size_t off_neg, Mat<T>& F, std::vector<int>& y) {
    F = Mat<T>(d, n_pos + n_neg);
    y.resize(n_pos + n_neg);
    std::size_t col = 0;
    for (std::size_t i = 0; i < n_pos; ++i, ++col) {
      for (std::size_t r = 0; r < d; ++r) F(r, col) = pos[off_pos + i].first(r, 0);
      y[col] = 1;
    }
    for (std::size_t i = 0; i < n_neg; ++i, ++col) {
      for (std::size_t r = 0; r < d; ++r) F(r, col) = neg[off_neg + i].first(r, 0);
      y[col] = 0;
    }
  };
  Mat<T> f_train, f_test;
  std::vector<int> y_train, y_test;
  pack(pos_in, neg_in, 0, 0, f_train, y_train);
  pack(pos.size() - pos_in, neg.size() - neg_in, pos_in, neg_in, f_test, y_test);

  bool has0 = false, has1 = false;
  for (int y : y_train) (y ? has1 : has0) = true;
  if (!has0 || !has1)
    throw DataError("link_classify: classifier input is single-class");

  // Two-logit linear softmax classifier, trained by Adam.
  ParamStore<T> params;
  Rng init_rng(rng.next_u64());
  params.add("w", xavier_init<T>(2, d, init_rng));
  params.add("b", Mat<T>(2, 1));
  AdamState<T> opt(params);
  for (int s = 0; s < steps; ++s) {
    Tape<T> tape;
    auto w = tape.leaf(params.at("w"));
    auto b = tape.leaf(params.at("b"));
    auto F = tape.leaf(f_train);
    auto loss = tape.cross_entropy(tape.add_col_bias(tape.matmul(w, F), b), y_train);
    tape.backward(loss);
    std::vector<Mat<T>> grads{tape.grad(w), tape.grad(b)};
    opt.step(params, grads, static_cast<T>(lr));
  }

  Mat<T> logits = matmul_value(params.at("w"), f_test);
  std::vector<int> pred(y_test.size());
  for (std::size_t j = 0; j < y_test.size(); ++j) {
    const T s0 = logits(0, j) + params.at("b")(0, 0);
    const T s1 = logits(1, j) + params.at("b")(1, 0);
    pred[j] = s1 > s0 ? 1 : 0;
  }
  LinkPredResult res;
  res.f1 = binary_f1(pred, y_test);
  res.accuracy = accuracy(pred, y_test);
  res.train_pairs = static_cast<int>(y_train.size());
  res.test_pairs = static_cast<int>(y_test.size());
  return res;
}

/// End-to-end link prediction: hide edges, train the model on the residual
/// graph (united loss when labels exist and the objective is united,
/// otherwise pure reconstruction), embed, classify hidden vs negative pairs.
template <typename T>
LinkPredResult link_predict(const HetPairGraph& g, const ModelConfig& mcfg_in,
                            const TrainSettings& ts, double hide_fraction,
                            bool recon_only, int classifier_steps, double holdin,
                            LinkSplit* out_split = nullptr,
                            TrainResult<T>* out_train = nullptr) {
  LinkSplit split = hide_edges(g, hide_fraction, ts.seed);
  HetPairGraph residual = residual_graph(g, split);

  ModelConfig mcfg = mcfg_in;
  if (recon_only || !g.has_labels()) mcfg.alpha = 1.0;

  // The node split only matters for the supervised objective's early stopping.
  NodeSplit node_split;
  if (residual.has_labels() && mcfg.alpha < 1.0)
    node_split = split_nodes(residual, 0.2, 0.1, ts.seed);

  LfhModel<T> model(residual, mcfg, ts.seed);
  TrainResult<T> tr = train_model(model, node_split, ts);
  model.load_params(tr.best_params);

  Tape<T> tape;
  Rng no_drop(0);
  auto fwd = model.forward(tape, /*training=*/false, no_drop);
  const Mat<T>& Z = tape.val(fwd.node_repr);

  auto res = link_classify(Z, split, ts.seed + 1, classifier_steps, holdin);
  if (out_split) *out_split = std::move(split);
  if (out_train) *out_train = std::move(tr);
  return res;
}

}  // namespace hyperlfh

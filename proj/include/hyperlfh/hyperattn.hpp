#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/graph.hpp"
#include "hyperlfh/hypergen.hpp"
#include "hyperlfh/tape.hpp"

namespace hyperlfh {

/// Tape handles for the attention parameters of one model.
template <typename T>
struct AttnVars {
  using Var = typename Tape<T>::Var;
  std::vector<std::vector<Var>> q_proj;  // [node_type][head], d/K x d
  std::vector<std::vector<Var>> k_proj;  // [hyperedge_type][head], d/K x d
  std::vector<Var> theta_att;            // [hyperedge_type], d/K x d/K
  std::vector<Var> mu;                   // [hyperedge_type], 1x1 scaling factor
  Var mlp_w1, mlp_b1, mlp_w2, mlp_b2;    // shallow MLP after head concat
};

template <typename T>
struct HyperattnOut {
  using Var = typename Tape<T>::Var;
  Var edge_embed;   // d x M hyperedge embeddings
  Var att_scores;   // K x M raw per-head attention values
  Var weights;      // K x M softmax weights (rows sum to 1 per master group)
  Var node_repr;    // d x N updated node representations
};

/// Hyperedge embedding update: E(e) = X H(:,e) / delta(e).
template <typename T>
typename Tape<T>::Var hyperedge_embed(Tape<T>& tape, typename Tape<T>::Var X,
                                      typename Tape<T>::Var H) {
  auto delta = tape.column_sums(H);
  return tape.scale_columns(tape.matmul(X, H), tape.reciprocal(delta));
}

struct HyperattnOptions {
  int heads = 4;
  double dropout = 0.0;     // applied to head concat and MLP hidden
  bool training = false;
};

/// One attention block: per-head type-specific projections, bilinear scores
/// scaled by mu/sqrt(d), per-master softmax across incident hyperedges,
/// attentive aggregation, head concat, then the shallow MLP.
template <typename T>
HyperattnOut<T> hyperattn_forward(Tape<T>& tape, typename Tape<T>::Var X,
                                  typename Tape<T>::Var H, const HyperedgeIndex& index,
                                  const std::vector<std::vector<int>>& nodes_by_type,
                                  const AttnVars<T>& params, const HyperattnOptions& opt,
                                  Rng& dropout_rng) {
  using Var = typename Tape<T>::Var;
  const int N = index.num_nodes;
  const std::size_t M = index.num_edges();
  const std::size_t d = tape.val(X).rows();
  const int K = opt.heads;
  if (K <= 0 || d % static_cast<std::size_t>(K) != 0)
    throw ConfigError("hyperattn: head count " + std::to_string(K) +
                      " must divide embedding size " + std::to_string(d));
  for (int v = 0; v < N; ++v)
    if (index.columns_of_node[v].empty())
      throw std::logic_error("hyperattn: node " + std::to_string(v) +
                             " masters no hyperedge");

  HyperattnOut<T> out;
  out.edge_embed = hyperedge_embed(tape, X, H);

  std::vector<std::vector<int>> cols_by_etype(index.num_edge_types);
  for (std::size_t j = 0; j < M; ++j) cols_by_etype[index.etype_of[j]].push_back(j);

  const T inv_sqrt_d = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));

  std::vector<Var> att_rows(K), k_all(K);
  for (int h = 0; h < K; ++h) {
    // Q^h for every node, assembled from the per-node-type projections.
    Var q_all = -1;
    for (std::size_t tau = 0; tau < nodes_by_type.size(); ++tau) {
      if (nodes_by_type[tau].empty()) continue;
      Var q = tape.matmul(params.q_proj[tau][h], tape.select_columns(X, nodes_by_type[tau]));
      Var sc = tape.scatter_columns(q, nodes_by_type[tau], N);
      q_all = (q_all < 0) ? sc : tape.add(q_all, sc);
    }

    Var att_row = -1, kh_all = -1;
    for (int t = 0; t < index.num_edge_types; ++t) {
      const auto& cols = cols_by_etype[t];
      if (cols.empty()) continue;
      Var kh = tape.matmul(params.k_proj[t][h], tape.select_columns(out.edge_embed, cols));
      Var th = tape.matmul(params.theta_att[t], kh);
      std::vector<int> masters(cols.size());
      for (std::size_t j = 0; j < cols.size(); ++j) masters[j] = index.master_of[cols[j]];
      Var q_sel = tape.select_columns(q_all, masters);
      Var raw = tape.scale(tape.scale_by(tape.columnwise_dot(q_sel, th), params.mu[t]),
                           inv_sqrt_d);
      Var raw_sc = tape.scatter_columns(raw, cols, M);
      Var kh_sc = tape.scatter_columns(kh, cols, M);
      att_row = (att_row < 0) ? raw_sc : tape.add(att_row, raw_sc);
      kh_all = (kh_all < 0) ? kh_sc : tape.add(kh_all, kh_sc);
    }
    att_rows[h] = att_row;
    k_all[h] = kh_all;
  }

  out.att_scores = tape.concat_rows(att_rows);

  std::vector<std::vector<int>> groups;
  for (int v = 0; v < N; ++v)
    if (!index.columns_of_node[v].empty()) groups.push_back(index.columns_of_node[v]);
  out.weights = tape.softmax_per_group(out.att_scores, groups);

  std::vector<Var> z(K);
  for (int h = 0; h < K; ++h) {
    Var weighted = tape.scale_columns(k_all[h], tape.select_row(out.weights, h));
    z[h] = tape.sum_columns_by_group(weighted, index.master_of, N);
  }
  Var concat = tape.concat_rows(z);
  concat = tape.dropout(concat, opt.dropout, opt.training, dropout_rng);

  Var hidden = tape.relu(tape.add_col_bias(tape.matmul(params.mlp_w1, concat), params.mlp_b1));
  hidden = tape.dropout(hidden, opt.dropout, opt.training, dropout_rng);
  out.node_repr = tape.add_col_bias(tape.matmul(params.mlp_w2, hidden), params.mlp_b2);
  return out;
}

}  // namespace hyperlfh

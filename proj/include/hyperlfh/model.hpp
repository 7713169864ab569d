#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperlfh/adam.hpp"
#include "hyperlfh/errors.hpp"
#include "hyperlfh/fusion.hpp"
#include "hyperlfh/graph.hpp"
#include "hyperlfh/hyperattn.hpp"
#include "hyperlfh/hypergen.hpp"
#include "hyperlfh/init.hpp"
#include "hyperlfh/params.hpp"
#include "hyperlfh/tape.hpp"

namespace hyperlfh {

struct ModelConfig {
  int dim = 256;
  int heads = 4;
  int rounds = 1;
  FusionMode fusion_mode = FusionMode::Relational;
  double lambda = 0.2;
  double gamma = 0.2;
  double l1_weight = 1.0;
  double threshold = 1e-6;
  int candidate_cap = 0;
  double alpha = 0.1;
  double dropout = 0.3;
};

/// Everything derived from the graph structure alone, shared across epochs.
template <typename T>
struct GraphContext {
  const HetPairGraph* graph = nullptr;
  std::vector<std::vector<int>> nodes_by_type;
  std::vector<CandidateSlaveSet> sets;
  HyperedgeIndex index;
  std::vector<Mat<T>> agg_ops;  // per edge type, fusion mean operators
  Mat<T> raw_features;

  static GraphContext build(const HetPairGraph& g, const ModelConfig& cfg,
                            std::uint64_t seed) {
    GraphContext ctx;
    ctx.graph = &g;
    ctx.nodes_by_type.resize(g.num_node_types);
    for (int i = 0; i < g.num_nodes; ++i) ctx.nodes_by_type[g.node_type[i]].push_back(i);
    ctx.sets = enumerate_candidate_sets(g, cfg.candidate_cap, seed);
    ctx.index = make_hyperedge_index(ctx.sets, g.num_nodes, g.num_node_types);
    for (int r = 0; r < g.num_edge_types; ++r)
      ctx.agg_ops.push_back(relation_mean_operator<T>(g, r));
    ctx.raw_features = Mat<T>(g.raw_features.rows(), g.raw_features.cols());
    for (std::size_t k = 0; k < ctx.raw_features.size(); ++k)
      ctx.raw_features.at(k) = static_cast<T>(g.raw_features.data()[k]);
    return ctx;
  }
};

template <typename T>
struct ForwardOut {
  using Var = typename Tape<T>::Var;
  Var embedding;   // d x N fused initial embedding (Eq. 3 output)
  Var incidence;   // N x M
  Var recon_loss;  // 1x1
  Var node_repr;   // d x N final representations
  Var logits;      // C x N (only when the model has a label head, else -1)
};

/// The LFH model: fused initial embeddings, learned hyperedge construction,
/// type-specific multi-head attention, and the united training objective.
template <typename T>
class LfhModel {
 public:
  using Var = typename Tape<T>::Var;

  LfhModel(const HetPairGraph& graph, const ModelConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), ctx_(GraphContext<T>::build(graph, cfg, seed)) {
    const std::size_t d = static_cast<std::size_t>(cfg.dim);
    const std::size_t D = graph.raw_features.rows();
    const int K = cfg.heads;
    if (K <= 0 || cfg.dim % K != 0)
      throw ConfigError("model: heads " + std::to_string(K) + " must divide dim " +
                        std::to_string(cfg.dim));
    const std::size_t dk = d / K;
    num_classes_ = graph.num_classes;

    Rng rng(seed);
    init_fusion_params(params_, d, D, graph.num_edge_types, rng);
    for (int t = 0; t < graph.num_node_types; ++t)
      params_.add("hypergen.theta." + std::to_string(t), xavier_init<T>(d, d, rng));
    for (const auto& set : ctx_.sets)
      params_.add("hypergen.p." + std::to_string(set.master) + "." +
                      std::to_string(set.set_type),
                  positive_coeff_init<T>(set.members.size(), rng));
    for (int tau = 0; tau < graph.num_node_types; ++tau)
      for (int h = 0; h < K; ++h)
        params_.add(q_name(tau, h), xavier_init<T>(dk, d, rng));
    for (int t = 0; t < graph.num_node_types; ++t) {
      for (int h = 0; h < K; ++h) params_.add(k_name(t, h), xavier_init<T>(dk, d, rng));
      params_.add("attn.theta." + std::to_string(t), xavier_init<T>(dk, dk, rng));
      params_.add("attn.mu." + std::to_string(t), Mat<T>(1, 1, {T(1)}));
    }
    params_.add("attn.mlp.w1", xavier_init<T>(d, d, rng));
    params_.add("attn.mlp.b1", Mat<T>(d, 1));
    params_.add("attn.mlp.w2", xavier_init<T>(d, d, rng));
    params_.add("attn.mlp.b2", Mat<T>(d, 1));
    if (num_classes_ >= 2) {
      params_.add("head.w1", xavier_init<T>(d, d, rng));
      params_.add("head.b1", Mat<T>(d, 1));
      params_.add("head.w2", xavier_init<T>(num_classes_, d, rng));
      params_.add("head.b2", Mat<T>(num_classes_, 1));
    }
  }

  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  const GraphContext<T>& context() const { return ctx_; }
  const ModelConfig& config() const { return cfg_; }
  int num_classes() const { return num_classes_; }

  /// Replace parameter values (shapes must match), e.g. from a checkpoint.
  void load_params(const ParamStore<T>& other) {
    for (std::size_t i = 0; i < params_.count(); ++i) {
      const std::string& name = params_.names()[i];
      const Mat<T>& src = other.at(name);
      if (!params_.value(i).same_shape(src))
        throw DataError("checkpoint shape mismatch for " + name + ": " +
                        src.shape_str() + " vs " + params_.value(i).shape_str());
      params_.value(i) = src;
    }
  }

  /// Build the full computation graph. The tape and returned vars stay valid
  /// until the next clear(); dropout draws come from dropout_rng.
  ForwardOut<T> forward(Tape<T>& tape, bool training, Rng& dropout_rng) {
    const HetPairGraph& g = *ctx_.graph;
    leaf_vars_.assign(params_.count(), -1);
    for (std::size_t i = 0; i < params_.count(); ++i)
      leaf_vars_[i] = tape.leaf(params_.value(i), "param");

    ForwardOut<T> out;
    Var raw = tape.leaf(ctx_.raw_features, "raw_features");
    std::vector<Var> agg(g.num_edge_types);
    std::vector<Var> w_rel(g.num_edge_types);
    for (int r = 0; r < g.num_edge_types; ++r) {
      agg[r] = tape.leaf(ctx_.agg_ops[r], "agg_op");
      w_rel[r] = var(fusion_rel_name(r));
    }
    out.embedding =
        pairwise_fuse(tape, raw, w_rel, var(fusion_self_name()), agg, cfg_.fusion_mode);

    std::vector<Var> p_vars(ctx_.sets.size());
    for (std::size_t s = 0; s < ctx_.sets.size(); ++s)
      p_vars[s] = var("hypergen.p." + std::to_string(ctx_.sets[s].master) + "." +
                      std::to_string(ctx_.sets[s].set_type));
    std::vector<Var> theta_vars(g.num_node_types);
    for (int t = 0; t < g.num_node_types; ++t)
      theta_vars[t] = var("hypergen.theta." + std::to_string(t));
    ReconWeights rw{cfg_.lambda, cfg_.gamma, cfg_.l1_weight, cfg_.threshold};
    auto gen = build_hypergen(tape, out.embedding, g, ctx_.sets, p_vars, theta_vars, rw);
    out.incidence = gen.incidence;
    out.recon_loss = gen.recon_loss;

    AttnVars<T> av;
    const int K = cfg_.heads;
    av.q_proj.resize(g.num_node_types);
    av.k_proj.resize(g.num_node_types);
    for (int tau = 0; tau < g.num_node_types; ++tau)
      for (int h = 0; h < K; ++h) av.q_proj[tau].push_back(var(q_name(tau, h)));
    for (int t = 0; t < g.num_node_types; ++t) {
      for (int h = 0; h < K; ++h) av.k_proj[t].push_back(var(k_name(t, h)));
      av.theta_att.push_back(var("attn.theta." + std::to_string(t)));
      av.mu.push_back(var("attn.mu." + std::to_string(t)));
    }
    av.mlp_w1 = var("attn.mlp.w1");
    av.mlp_b1 = var("attn.mlp.b1");
    av.mlp_w2 = var("attn.mlp.w2");
    av.mlp_b2 = var("attn.mlp.b2");

    HyperattnOptions opt{K, cfg_.dropout, training};
    Var x_cur = out.embedding;
    for (int round = 0; round < cfg_.rounds; ++round) {
      auto attn = hyperattn_forward(tape, x_cur, out.incidence, ctx_.index,
                                    ctx_.nodes_by_type, av, opt, dropout_rng);
      x_cur = attn.node_repr;
    }
    out.node_repr = x_cur;

    out.logits = -1;
    if (num_classes_ >= 2) {
      Var hidden = tape.relu(
          tape.add_col_bias(tape.matmul(var("head.w1"), out.node_repr), var("head.b1")));
      hidden = tape.dropout(hidden, cfg_.dropout, training, dropout_rng);
      out.logits = tape.add_col_bias(tape.matmul(var("head.w2"), hidden), var("head.b2"));
    }
    return out;
  }

  /// Cross-entropy of the label head over a node subset (Eq. 16).
  Var label_loss(Tape<T>& tape, const ForwardOut<T>& fwd, const std::vector<int>& subset) {
    if (fwd.logits < 0) throw std::logic_error("label_loss: model has no label head");
    if (subset.empty()) throw std::logic_error("label_loss: empty node subset");
    std::vector<int> labels(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) {
      labels[i] = ctx_.graph->labels[subset[i]];
      if (labels[i] < 0)
        throw std::logic_error("label_loss: node " + std::to_string(subset[i]) +
                               " is unlabeled");
    }
    return tape.cross_entropy(tape.select_columns(fwd.logits, subset), labels);
  }

  /// L_u = (1 - alpha) L_label + alpha L_recon (Eq. 17).
  Var united_loss(Tape<T>& tape, Var label, Var recon, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
      throw ConfigError("alpha must be in [0,1], got " + std::to_string(alpha));
    return tape.add(tape.scale(label, static_cast<T>(1.0 - alpha)),
                    tape.scale(recon, static_cast<T>(alpha)));
  }

  /// Gradients aligned with params().value(i) after tape.backward().
  std::vector<Mat<T>> collect_grads(Tape<T>& tape) {
    std::vector<Mat<T>> grads;
    grads.reserve(params_.count());
    for (std::size_t i = 0; i < params_.count(); ++i) grads.push_back(tape.grad(leaf_vars_[i]));
    return grads;
  }

  Var param_var(const std::string& name) const { return var(name); }

  /// Argmax class prediction per column of the logits.
  static std::vector<int> predict(const Mat<T>& logits) {
    std::vector<int> pred(logits.cols());
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < logits.rows(); ++i)
        if (logits(i, j) > logits(best, j)) best = i;
      pred[j] = static_cast<int>(best);
    }
    return pred;
  }

 private:
  static std::string q_name(int tau, int h) {
    return "attn.q." + std::to_string(tau) + "." + std::to_string(h);
  }
  static std::string k_name(int t, int h) {
    return "attn.k." + std::to_string(t) + "." + std::to_string(h);
  }

  Var var(const std::string& name) const { return leaf_vars_[params_.index_of(name)]; }

  ModelConfig cfg_;
  GraphContext<T> ctx_;
  ParamStore<T> params_;
  std::vector<Var> leaf_vars_;
  int num_classes_ = 0;
};

}  // namespace hyperlfh

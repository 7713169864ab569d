#pragma once

#include <string>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/graph.hpp"
#include "hyperlfh/init.hpp"
#include "hyperlfh/params.hpp"
#include "hyperlfh/tape.hpp"

namespace hyperlfh {

enum class FusionMode { Relational, Linear };

inline FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "relational") return FusionMode::Relational;
  if (s == "linear") return FusionMode::Linear;
  throw ConfigError("fusion.mode must be 'relational' or 'linear', got '" + s + "'");
}

/// Per-relation mean-aggregation operator: column i of the result holds
/// 1/|N_r(i)| at the rows of i's in-neighbors under relation r, so
/// raw_features * agg averages neighbor features per target node.
template <typename T>
Mat<T> relation_mean_operator(const HetPairGraph& g, int etype) {
  Mat<T> agg(g.num_nodes, g.num_nodes);
  std::vector<int> indeg(g.num_nodes, 0);
  for (const Edge& e : g.edges)
    if (e.etype == etype) ++indeg[e.dst];
  for (const Edge& e : g.edges)
    if (e.etype == etype) agg(e.src, e.dst) += T(1) / static_cast<T>(indeg[e.dst]);
  return agg;
}

/// Names of the fusion parameters registered in a ParamStore.
inline std::string fusion_self_name() { return "fusion.w_self"; }
inline std::string fusion_rel_name(int etype) {
  return "fusion.w_rel." + std::to_string(etype);
}

template <typename T>
void init_fusion_params(ParamStore<T>& params, std::size_t dim, std::size_t feat_dim,
                        int num_edge_types, Rng& rng) {
  params.add(fusion_self_name(), xavier_init<T>(dim, feat_dim, rng));
  for (int r = 0; r < num_edge_types; ++r)
    params.add(fusion_rel_name(r), xavier_init<T>(dim, feat_dim, rng));
}

/// Initial node embedding from the pairwise graph:
///   relational: x_i = relu(W_self x._i + sum_r W_r mean_{j in N_r(i)} x._j)
///   linear:     x_i = relu(W_self x._i)
/// Returns the d x N embedding node on the tape. The per-relation
/// aggregation operators must come from relation_mean_operator on the same
/// graph (precomputed once, they are edge-structure constants).
template <typename T>
typename Tape<T>::Var pairwise_fuse(Tape<T>& tape, typename Tape<T>::Var raw_features,
                                    const std::vector<typename Tape<T>::Var>& w_rel,
                                    typename Tape<T>::Var w_self,
                                    const std::vector<typename Tape<T>::Var>& agg_ops,
                                    FusionMode mode) {
  auto out = tape.matmul(w_self, raw_features);
  if (mode == FusionMode::Relational) {
    for (std::size_t r = 0; r < w_rel.size(); ++r) {
      auto neigh = tape.matmul(raw_features, agg_ops[r]);
      out = tape.add(out, tape.matmul(w_rel[r], neigh));
    }
  }
  return tape.relu(out);
}

}  // namespace hyperlfh

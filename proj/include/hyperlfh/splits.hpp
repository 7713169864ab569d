#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/graph.hpp"
#include "hyperlfh/rng.hpp"

namespace hyperlfh {

struct NodeSplit {
  std::vector<int> train, val, test;
};

struct LinkSplit {
  std::vector<Edge> residual_edges;                 // directed edges kept
  std::vector<std::pair<int, int>> positive_pairs;  // hidden undirected pairs
  std::vector<std::pair<int, int>> negative_pairs;  // sampled non-edges
  int requested_hidden = 0;                         // target count
  bool shortfall = false;                           // true if fewer were hideable
};

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }
  bool connected(int a, int b) { return find(a) == find(b); }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

/// Stratified-by-class random node split. Deterministic for a fixed seed and
/// independent of edge-file ordering. Every train node keeps at least one
/// incident edge; violators are swapped with eligible same-class nodes.
inline NodeSplit split_nodes(const HetPairGraph& g, double train_ratio, double val_ratio,
                             std::uint64_t seed) {
  if (train_ratio <= 0 || val_ratio <= 0 || train_ratio + val_ratio > 1.0)
    throw ConfigError("split_nodes: ratios must be positive with sum <= 1");
  if (!g.has_labels()) throw DataError("split_nodes: graph has no labels");

  std::vector<int> labeled = g.labeled_nodes();
  const auto deg = g.undirected_degree();

  std::map<int, std::vector<int>> by_class;
  for (int v : labeled) by_class[g.labels[v]].push_back(v);

  const std::size_t total = labeled.size();
  const std::size_t want_train = static_cast<std::size_t>(train_ratio * total + 0.5);
  const std::size_t want_val = static_cast<std::size_t>(val_ratio * total + 0.5);

  // Per-class quotas by largest remainder, so per-class counts stay within
  // one node of the global ratios.
  struct Quota {
    int cls;
    std::size_t n_train, n_val;
    double frac_train, frac_val;
  };
  std::vector<Quota> quotas;
  std::size_t assigned_train = 0, assigned_val = 0;
  for (const auto& [cls, members] : by_class) {
    double et = train_ratio * members.size(), ev = val_ratio * members.size();
    Quota q{cls, static_cast<std::size_t>(et), static_cast<std::size_t>(ev),
            et - static_cast<std::size_t>(et), ev - static_cast<std::size_t>(ev)};
    assigned_train += q.n_train;
    assigned_val += q.n_val;
    quotas.push_back(q);
  }
  auto distribute = [&](std::size_t want, std::size_t assigned, bool is_train) {
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double fa = is_train ? quotas[a].frac_train : quotas[a].frac_val;
      double fb = is_train ? quotas[b].frac_train : quotas[b].frac_val;
      if (fa != fb) return fa > fb;
      return quotas[a].cls < quotas[b].cls;
    });
    for (std::size_t k = 0; assigned < want; ++k) {
      auto& q = quotas[order[k % order.size()]];
      ++(is_train ? q.n_train : q.n_val);
      ++assigned;
    }
  };
  distribute(want_train, assigned_train, true);
  distribute(want_val, assigned_val, false);

  Rng rng(seed);
  NodeSplit split;
  for (auto& q : quotas) {
    auto members = by_class[q.cls];  // sorted by node id already
    if (q.n_train == 0)
      throw DataError("split_nodes: class " + std::to_string(q.cls) + " has only " +
                      std::to_string(members.size()) +
                      " labeled nodes and received zero train slots");
    if (members.size() < q.n_train + q.n_val)
      throw DataError("split_nodes: class " + std::to_string(q.cls) + " has only " +
                      std::to_string(members.size()) + " labeled nodes for " +
                      std::to_string(q.n_train + q.n_val) + " train+val slots");
    rng.shuffle(members);
    // Swap zero-degree picks out of train; test absorbs them.
    for (std::size_t i = 0; i < q.n_train; ++i) {
      if (deg[members[i]] > 0) continue;
      for (std::size_t j = members.size(); j-- > q.n_train;) {
        if (deg[members[j]] > 0) {
          std::swap(members[i], members[j]);
          break;
        }
      }
      if (deg[members[i]] == 0)
        throw DataError("split_nodes: class " + std::to_string(q.cls) +
                        " lacks enough nodes with incident edges for the train split");
    }
    split.train.insert(split.train.end(), members.begin(), members.begin() + q.n_train);
    split.val.insert(split.val.end(), members.begin() + q.n_train,
                     members.begin() + q.n_train + q.n_val);
    split.test.insert(split.test.end(), members.begin() + q.n_train + q.n_val, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

namespace linkdetail {

struct UndirectedUnit {
  int a, b;  // a < b
  std::vector<std::size_t> edge_indices;
};

/// Collapse stored directed edges into undirected units keyed by endpoint
/// pair; both directions and duplicates of a pair share one unit.
inline std::vector<UndirectedUnit> collapse_undirected(const HetPairGraph& g) {
  std::map<std::pair<int, int>, std::vector<std::size_t>> units;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    int a = std::min(g.edges[i].src, g.edges[i].dst);
    int b = std::max(g.edges[i].src, g.edges[i].dst);
    units[{a, b}].push_back(i);
  }
  std::vector<UndirectedUnit> out;
  out.reserve(units.size());
  for (auto& [key, idx] : units) out.push_back({key.first, key.second, std::move(idx)});
  return out;
}

}  // namespace linkdetail

/// Hide a fraction of undirected edge units for link prediction. A random
/// spanning forest is kept intact so every originally connected component
/// stays connected; negatives are an equal count of distinct non-adjacent
/// node pairs.
inline LinkSplit hide_edges(const HetPairGraph& g, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw ConfigError("hide_edges: fraction must be in (0,1), got " + std::to_string(fraction));

  auto units = linkdetail::collapse_undirected(g);
  Rng rng(seed);

  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  UnionFind forest(g.num_nodes);
  std::vector<char> protected_unit(units.size(), 0);
  for (std::size_t u : order)
    if (forest.unite(units[u].a, units[u].b)) protected_unit[u] = 1;

  std::vector<std::size_t> removable;
  for (std::size_t u : order)
    if (!protected_unit[u]) removable.push_back(u);

  LinkSplit split;
  split.requested_hidden = static_cast<int>(fraction * units.size());
  const std::size_t hide_n = std::min<std::size_t>(split.requested_hidden, removable.size());
  split.shortfall = hide_n < static_cast<std::size_t>(split.requested_hidden);

  std::vector<char> hidden(units.size(), 0);
  for (std::size_t k = 0; k < hide_n; ++k) {
    hidden[removable[k]] = 1;
    split.positive_pairs.push_back({units[removable[k]].a, units[removable[k]].b});
  }
  for (std::size_t u = 0; u < units.size(); ++u)
    if (!hidden[u])
      for (std::size_t ei : units[u].edge_indices) split.residual_edges.push_back(g.edges[ei]);

  // Negative sampling: distinct unordered pairs that are not original edges.
  std::set<std::pair<int, int>> adjacent;
  for (const auto& u : units) adjacent.insert({u.a, u.b});
  std::set<std::pair<int, int>> negatives;
  const std::size_t max_pairs =
      static_cast<std::size_t>(g.num_nodes) * (g.num_nodes - 1) / 2;
  if (max_pairs < adjacent.size() + split.positive_pairs.size())
    throw DataError("hide_edges: graph too dense to sample negatives");
  while (negatives.size() < split.positive_pairs.size()) {
    int a = static_cast<int>(rng.uniform_index(g.num_nodes));
    int b = static_cast<int>(rng.uniform_index(g.num_nodes));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (adjacent.count({a, b}) || negatives.count({a, b})) continue;
    negatives.insert({a, b});
    split.negative_pairs.push_back({a, b});
  }
  return split;
}

/// Residual copy of g containing only the split's surviving edges.
inline HetPairGraph residual_graph(const HetPairGraph& g, const LinkSplit& split) {
  HetPairGraph r = g;
  r.edges = split.residual_edges;
  return r;
}

/// True if every pair of nodes connected in `reference` (treated as
/// undirected) is still connected in `candidate`.
inline bool preserves_connectivity(const HetPairGraph& reference,
                                   const std::vector<Edge>& candidate_edges) {
  UnionFind ref(reference.num_nodes), cand(reference.num_nodes);
  for (const Edge& e : reference.edges) ref.unite(e.src, e.dst);
  for (const Edge& e : candidate_edges) cand.unite(e.src, e.dst);
  // Components of cand must refine to the same partition on ref's components.
  std::map<int, int> rep;  // ref root -> cand root
  for (int v = 0; v < reference.num_nodes; ++v) {
    int r = ref.find(v);
    auto it = rep.find(r);
    if (it == rep.end())
      rep[r] = cand.find(v);
    else if (it->second != cand.find(v))
      return false;
  }
  return true;
}

}  // namespace hyperlfh

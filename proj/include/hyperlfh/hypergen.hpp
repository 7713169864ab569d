#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/graph.hpp"
#include "hyperlfh/matrix.hpp"
#include "hyperlfh/rng.hpp"
#include "hyperlfh/tape.hpp"

namespace hyperlfh {

/// Candidate slave set: all nodes of one type, master excluded. One set per
/// (master, type) pair with a nonempty exclusion set; each set spawns one
/// hyperedge whose type is the candidate type.
struct CandidateSlaveSet {
  int master;
  int set_type;
  std::vector<int> members;  // ascending node ids
};

/// Column metadata of the incidence matrix; column j belongs to sets[j].
struct HyperedgeIndex {
  int num_nodes = 0;
  int num_edge_types = 0;
  std::vector<int> master_of;                    // per column
  std::vector<int> etype_of;                     // per column
  std::vector<std::vector<int>> columns_of_node; // mastered columns per node

  std::size_t num_edges() const { return master_of.size(); }
};

/// Deterministic enumeration ordered by master id then candidate type.
/// candidate_cap > 0 subsamples overly large candidate sets (seeded).
inline std::vector<CandidateSlaveSet> enumerate_candidate_sets(const HetPairGraph& g,
                                                               int candidate_cap = 0,
                                                               std::uint64_t seed = 0) {
  std::vector<std::vector<int>> by_type(g.num_node_types);
  for (int i = 0; i < g.num_nodes; ++i) by_type[g.node_type[i]].push_back(i);

  Rng rng(seed);
  std::vector<CandidateSlaveSet> sets;
  for (int m = 0; m < g.num_nodes; ++m) {
    for (int t = 0; t < g.num_node_types; ++t) {
      std::vector<int> members;
      members.reserve(by_type[t].size());
      for (int v : by_type[t])
        if (v != m) members.push_back(v);
      if (members.empty()) continue;
      if (candidate_cap > 0 && members.size() > static_cast<std::size_t>(candidate_cap)) {
        rng.shuffle(members);
        members.resize(candidate_cap);
        std::sort(members.begin(), members.end());
      }
      sets.push_back({m, t, std::move(members)});
    }
  }
  return sets;
}

inline HyperedgeIndex make_hyperedge_index(const std::vector<CandidateSlaveSet>& sets,
                                           int num_nodes, int num_node_types) {
  HyperedgeIndex idx;
  idx.num_nodes = num_nodes;
  idx.num_edge_types = num_node_types;
  idx.columns_of_node.resize(num_nodes);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    idx.master_of.push_back(sets[j].master);
    idx.etype_of.push_back(sets[j].set_type);
    idx.columns_of_node[sets[j].master].push_back(static_cast<int>(j));
  }
  return idx;
}

// ---- value-level operations (unit-testable surface) ----

/// Reconstructed master embedding: X(members) * relu(p).
template <typename T>
Mat<T> reconstruct_master(const Mat<T>& X, const CandidateSlaveSet& set, const Mat<T>& raw_p) {
  if (raw_p.size() != set.members.size())
    throw std::logic_error("reconstruct_master: " + std::to_string(raw_p.size()) +
                           " coefficients for " + std::to_string(set.members.size()) +
                           " members");
  Mat<T> xhat(X.rows(), 1);
  for (std::size_t k = 0; k < set.members.size(); ++k) {
    const T c = std::max(raw_p.at(k), T(0));
    if (c == T(0)) continue;
    for (std::size_t i = 0; i < X.rows(); ++i) xhat(i, 0) += c * X(i, set.members[k]);
  }
  return xhat;
}

/// || xhat - theta * x_master ||_2.
template <typename T>
T reconstruction_error(const Mat<T>& xhat, const Mat<T>& x_master, const Mat<T>& theta) {
  Mat<T> proj = matmul_value(theta, x_master);
  T s = T(0);
  for (std::size_t i = 0; i < xhat.rows(); ++i) {
    const T d = xhat(i, 0) - proj(i, 0);
    s += d * d;
  }
  return std::sqrt(s);
}

/// L_recon evaluated directly: sum over sets of
/// lambda*c + ||relu p||_1 + gamma*||relu p||_2.
template <typename T>
T reconstruction_loss_value(const std::vector<CandidateSlaveSet>& sets,
                            const std::vector<Mat<T>>& raw_coeffs, const Mat<T>& X,
                            const std::vector<Mat<T>>& thetas, T lambda, T gamma) {
  if (lambda < T(0) || gamma < T(0))
    throw ConfigError("reconstruction_loss: lambda and gamma must be nonnegative");
  T total = T(0);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    const auto& set = sets[j];
    Mat<T> xm(X.rows(), 1);
    for (std::size_t i = 0; i < X.rows(); ++i) xm(i, 0) = X(i, set.master);
    const T c = reconstruction_error(reconstruct_master(X, set, raw_coeffs[j]), xm,
                                     thetas[set.set_type]);
    T l1 = T(0), sq = T(0);
    for (std::size_t k = 0; k < raw_coeffs[j].size(); ++k) {
      const T v = std::max(raw_coeffs[j].at(k), T(0));
      l1 += v;
      sq += v * v;
    }
    total += lambda * c + l1 + gamma * std::sqrt(sq);
  }
  return total;
}

/// Incidence matrix per the membership rule: master entry 1, member entries
/// are relu(p) clipped into (threshold, 1], exact 0 at or below threshold.
template <typename T>
Mat<T> build_incidence(const std::vector<CandidateSlaveSet>& sets,
                       const std::vector<Mat<T>>& raw_coeffs, int num_nodes,
                       T threshold = T(1e-6)) {
  if (raw_coeffs.size() != sets.size())
    throw std::logic_error("build_incidence: coefficients missing for some sets");
  Mat<T> H(num_nodes, sets.size());
  for (std::size_t j = 0; j < sets.size(); ++j) {
    const auto& set = sets[j];
    const Mat<T>& p = raw_coeffs[j];
    if (p.size() != set.members.size())
      throw std::logic_error("build_incidence: coefficient length mismatch on column " +
                             std::to_string(j));
    for (std::size_t k = 0; k < set.members.size(); ++k) {
      const T c = std::max(p.at(k), T(0));
      H(set.members[k], j) = (c > threshold) ? std::min(c, T(1)) : T(0);
    }
    H(set.master, j) = T(1);
  }
  return H;
}

/// d(v_i) = sum_e w(e) H(i,e)  (Eq. over a positive diagonal weight).
template <typename T>
std::vector<T> node_degrees(const Mat<T>& H, const std::vector<T>& edge_weights) {
  if (edge_weights.size() != H.cols())
    throw std::invalid_argument("node_degrees: " + std::to_string(edge_weights.size()) +
                                " weights for " + H.shape_str());
  std::vector<T> d(H.rows(), T(0));
  for (std::size_t i = 0; i < H.rows(); ++i)
    for (std::size_t j = 0; j < H.cols(); ++j) d[i] += edge_weights[j] * H(i, j);
  return d;
}

template <typename T>
std::vector<T> node_degrees(const Mat<T>& H) {
  return node_degrees(H, std::vector<T>(H.cols(), T(1)));
}

/// delta(e_j) = sum_i H(i,j); always >= 1 because of the master entry.
template <typename T>
std::vector<T> edge_degrees(const Mat<T>& H) {
  std::vector<T> d(H.cols(), T(0));
  for (std::size_t i = 0; i < H.rows(); ++i)
    for (std::size_t j = 0; j < H.cols(); ++j) d[j] += H(i, j);
  return d;
}

// ---- tape-level build (training path) ----

template <typename T>
struct HypergenBuild {
  typename Tape<T>::Var incidence;   // N x M
  typename Tape<T>::Var recon_loss;  // 1x1
};

struct ReconWeights {
  double lambda = 0.2;
  double gamma = 0.2;
  double l1_weight = 1.0;  // fixed 1 in the canonical loss; 0 for ablations
  double threshold = 1e-6;
};

/// Differentiable reconstruction loss and incidence assembly over all
/// candidate sets, batched per candidate type:
///   L = sum_sets lambda*||Xhat - theta X_m||_2 + ||relu p||_1 + gamma*||relu p||_2
/// Gradients reach X, every theta_t and every raw p (through relu and the
/// incidence clip).
template <typename T>
HypergenBuild<T> build_hypergen(Tape<T>& tape, typename Tape<T>::Var X,
                                const HetPairGraph& g,
                                const std::vector<CandidateSlaveSet>& sets,
                                const std::vector<typename Tape<T>::Var>& raw_p_vars,
                                const std::vector<typename Tape<T>::Var>& theta_vars,
                                const ReconWeights& w) {
  using Var = typename Tape<T>::Var;
  if (raw_p_vars.size() != sets.size())
    throw std::logic_error("build_hypergen: raw p vars do not match sets");

  const int N = g.num_nodes;
  std::vector<Var> relu_p(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) relu_p[s] = tape.relu(raw_p_vars[s]);

  std::vector<std::vector<int>> by_type(g.num_node_types);
  for (std::size_t s = 0; s < sets.size(); ++s) by_type[sets[s].set_type].push_back(s);

  Var loss = tape.leaf(Mat<T>(1, 1), "recon_zero");
  for (int t = 0; t < g.num_node_types; ++t) {
    if (by_type[t].empty()) continue;
    const std::vector<int> cand = g.nodes_of_type(t);
    std::vector<int> pos_of_node(N, -1);
    for (std::size_t r = 0; r < cand.size(); ++r) pos_of_node[cand[r]] = static_cast<int>(r);

    std::vector<Var> cols;
    std::vector<std::vector<int>> positions;
    std::vector<int> masters;
    for (int s : by_type[t]) {
      cols.push_back(relu_p[s]);
      std::vector<int> pos(sets[s].members.size());
      for (std::size_t k = 0; k < pos.size(); ++k) pos[k] = pos_of_node[sets[s].members[k]];
      positions.push_back(std::move(pos));
      masters.push_back(sets[s].master);
    }

    Var P = tape.assemble_columns(cols, positions, cand.size());
    Var Xc = tape.select_columns(X, cand);
    Var Xhat = tape.matmul(Xc, P);
    Var target = tape.select_columns(tape.matmul(theta_vars[t], X), masters);
    Var c = tape.columnwise_l2_norm(tape.sub(Xhat, target));

    Var term = tape.scale(tape.sum_all(c), static_cast<T>(w.lambda));
    if (w.l1_weight != 0.0)
      term = tape.add(term, tape.scale(tape.sum_all(P), static_cast<T>(w.l1_weight)));
    if (w.gamma != 0.0)
      term = tape.add(
          term, tape.scale(tape.sum_all(tape.columnwise_l2_norm(P)), static_cast<T>(w.gamma)));
    loss = tape.add(loss, term);
  }

  // Incidence columns in set order: clipped memberships plus the master 1.
  std::vector<Var> clipped(sets.size());
  std::vector<std::vector<int>> member_rows(sets.size());
  std::vector<std::pair<int, T>> fixed(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    clipped[s] = tape.clip_threshold(relu_p[s], static_cast<T>(w.threshold));
    member_rows[s] = sets[s].members;
    fixed[s] = {sets[s].master, T(1)};
  }
  Var H = tape.assemble_columns(clipped, member_rows, N, fixed);
  return {H, loss};
}

}  // namespace hyperlfh

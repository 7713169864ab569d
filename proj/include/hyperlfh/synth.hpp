#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/graph.hpp"
#include "hyperlfh/rng.hpp"

namespace hyperlfh {

/// Planted heterogeneous graph: one labeled primary node type plus
/// auxiliary types, all carrying class-mean features with Gaussian noise;
/// primary-auxiliary edges appear with the intra-class probability inside a
/// class and the inter-class probability across classes.
struct SynthConfig {
  int num_classes = 3;
  int nodes_per_class = 100;
  int node_types = 3;      // 1 primary + (node_types - 1) auxiliary
  int aux_per_class = 30;  // per auxiliary type, per class
  double p_intra = 0.05;
  double p_inter = 0.005;
  int feature_dim = 32;
  double noise = 0.5;
  std::uint64_t seed = 1;
};

inline void validate_synth_config(const SynthConfig& c) {
  if (c.num_classes < 2) throw ConfigError("synth: num_classes must be >= 2");
  if (c.nodes_per_class < 1) throw ConfigError("synth: nodes_per_class must be >= 1");
  if (c.node_types < 1) throw ConfigError("synth: node_types must be >= 1");
  if (c.aux_per_class < 1 && c.node_types > 1)
    throw ConfigError("synth: aux_per_class must be >= 1");
  if (c.p_intra < 0 || c.p_intra > 1 || c.p_inter < 0 || c.p_inter > 1)
    throw ConfigError("synth: edge probabilities must be in [0,1]");
  if (c.p_intra <= c.p_inter)
    throw ConfigError("synth: p_intra must exceed p_inter for planted structure");
  if (c.feature_dim < 1) throw ConfigError("synth: feature_dim must be >= 1");
  if (c.noise < 0) throw ConfigError("synth: noise must be nonnegative");
}

/// Expected number of stored (directed) edges under the config; pairs are
/// drawn once and stored in both directions.
inline double expected_edge_count(const SynthConfig& c) {
  const double primary = static_cast<double>(c.num_classes) * c.nodes_per_class;
  if (c.node_types == 1) {
    const double n_intra =
        c.num_classes * (c.nodes_per_class * (c.nodes_per_class - 1) / 2.0);
    const double n_total = primary * (primary - 1) / 2.0;
    return 2.0 * (n_intra * c.p_intra + (n_total - n_intra) * c.p_inter);
  }
  const double aux_per_type = static_cast<double>(c.num_classes) * c.aux_per_class;
  const double intra_pairs = primary * c.aux_per_class;            // per aux type
  const double inter_pairs = primary * aux_per_type - intra_pairs;  // per aux type
  return 2.0 * (c.node_types - 1) *
         (intra_pairs * c.p_intra + inter_pairs * c.p_inter);
}

inline HetPairGraph generate_synth(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  Rng rng(cfg.seed);

  HetPairGraph g;
  const int primary = cfg.num_classes * cfg.nodes_per_class;
  const int aux_types = cfg.node_types - 1;
  const int aux_per_type = cfg.num_classes * cfg.aux_per_class;
  g.num_nodes = primary + aux_types * aux_per_type;
  g.num_node_types = cfg.node_types;
  g.num_classes = cfg.num_classes;
  g.node_type.assign(g.num_nodes, 0);
  g.labels.assign(g.num_nodes, -1);

  // Latent class of every node; only primary nodes carry it as a label.
  std::vector<int> latent(g.num_nodes, -1);
  for (int i = 0; i < primary; ++i) {
    latent[i] = i / cfg.nodes_per_class;
    g.labels[i] = latent[i];
  }
  int next = primary;
  for (int k = 0; k < aux_types; ++k)
    for (int c = 0; c < cfg.num_classes; ++c)
      for (int j = 0; j < cfg.aux_per_class; ++j) {
        g.node_type[next] = 1 + k;
        latent[next] = c;
        ++next;
      }

  // Unit-norm class means, one per (node type, class).
  const int D = cfg.feature_dim;
  std::vector<std::vector<double>> means(
      static_cast<std::size_t>(cfg.node_types) * cfg.num_classes);
  for (auto& m : means) {
    m.resize(D);
    double norm = 0.0;
    for (double& v : m) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : m) v /= norm > 0 ? norm : 1.0;
  }
  g.raw_features = Mat<double>(D, g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) {
    const auto& m = means[static_cast<std::size_t>(g.node_type[i]) * cfg.num_classes +
                          latent[i]];
    for (int f = 0; f < D; ++f) g.raw_features(f, i) = m[f] + cfg.noise * rng.normal();
  }

  // Edges: primary <-> auxiliary, one Bernoulli draw per pair, stored in
  // both directions with direction-specific edge types.
  if (cfg.node_types == 1) {
    g.num_edge_types = 1;
    for (int i = 0; i < primary; ++i)
      for (int j = i + 1; j < primary; ++j) {
        const double p = latent[i] == latent[j] ? cfg.p_intra : cfg.p_inter;
        if (rng.uniform() < p) {
          g.edges.push_back({i, j, 0});
          g.edges.push_back({j, i, 0});
        }
      }
    return g;
  }
  g.num_edge_types = 2 * aux_types;
  for (int k = 0; k < aux_types; ++k) {
    const int base = primary + k * aux_per_type;
    for (int i = 0; i < primary; ++i)
      for (int j = base; j < base + aux_per_type; ++j) {
        const double p = latent[i] == latent[j] ? cfg.p_intra : cfg.p_inter;
        if (rng.uniform() < p) {
          g.edges.push_back({i, j, 2 * k});
          g.edges.push_back({j, i, 2 * k + 1});
        }
      }
  }
  return g;
}

}  // namespace hyperlfh

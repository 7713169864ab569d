#include <catch2/catch_amalgamated.hpp>

#include "hyperlfh/fusion.hpp"
#include "hyperlfh/synth.hpp"
#include "test_util.hpp"

using namespace hyperlfh;
using testutil::random_mat;
using Var = Tape<double>::Var;

namespace {

// 3-node path 0-1-2 (both directions stored), one relation.
HetPairGraph path3() {
  HetPairGraph g;
  g.num_nodes = 3;
  g.num_node_types = 1;
  g.num_edge_types = 1;
  g.node_type = {0, 0, 0};
  g.labels = {-1, -1, -1};
  g.edges = {{0, 1, 0}, {1, 0, 0}, {1, 2, 0}, {2, 1, 0}};
  g.raw_features = Mat<double>{{1, 2, 4}, {0, 1, -1}};
  return g;
}

Var fuse(Tape<double>& t, const HetPairGraph& g, Var raw, Var w_self,
         const std::vector<Var>& w_rel, FusionMode mode) {
  std::vector<Var> agg;
  for (int r = 0; r < g.num_edge_types; ++r)
    agg.push_back(t.leaf(relation_mean_operator<double>(g, r)));
  return pairwise_fuse(t, raw, w_rel, w_self, agg, mode);
}

}  // namespace

TEST_CASE("pairwise fusion") {
  HetPairGraph g = path3();

  SECTION("linear mode with identity weights is relu of the raw features") {
    Tape<double> t;
    auto raw = t.leaf(g.raw_features);
    auto w_self = t.leaf(Mat<double>::identity(2));
    auto out = fuse(t, g, raw, w_self, {t.leaf(Mat<double>(2, 2))}, FusionMode::Linear);
    for (std::size_t k = 0; k < g.raw_features.size(); ++k)
      CHECK(t.val(out).at(k) == std::max(0.0, g.raw_features.at(k)));
  }

  SECTION("isolated node matches the linear-mode output") {
    HetPairGraph iso = g;
    iso.num_nodes = 4;
    iso.node_type.push_back(0);
    iso.labels.push_back(-1);
    iso.raw_features = Mat<double>{{1, 2, 4, -3}, {0, 1, -1, 2}};
    Rng rng(4);
    Mat<double> ws = random_mat(2, 2, rng), wr = random_mat(2, 2, rng);
    Tape<double> t;
    auto raw = t.leaf(iso.raw_features);
    auto rel = fuse(t, iso, raw, t.leaf(ws), {t.leaf(wr)}, FusionMode::Relational);
    auto lin = fuse(t, iso, raw, t.leaf(ws), {t.leaf(wr)}, FusionMode::Linear);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(t.val(rel)(i, 3) == t.val(lin)(i, 3));
  }

  SECTION("hand-set weights match a direct evaluation of the update rule") {
    Rng rng(9);
    Mat<double> ws = random_mat(2, 2, rng), wr = random_mat(2, 2, rng);
    Tape<double> t;
    auto out =
        fuse(t, g, t.leaf(g.raw_features), t.leaf(ws), {t.leaf(wr)}, FusionMode::Relational);
    // brute force: x_i = relu(Ws raw_i + Wr mean_{j in N(i)} raw_j)
    for (int i = 0; i < 3; ++i) {
      std::vector<int> nbr;
      for (const Edge& e : g.edges)
        if (e.dst == i) nbr.push_back(e.src);
      for (int r = 0; r < 2; ++r) {
        double v = 0;
        for (int c = 0; c < 2; ++c) v += ws(r, c) * g.raw_features(c, i);
        if (!nbr.empty()) {
          for (int c = 0; c < 2; ++c) {
            double mean = 0;
            for (int j : nbr) mean += g.raw_features(c, j);
            v += wr(r, c) * mean / nbr.size();
          }
        }
        CHECK_THAT(t.val(out)(r, i),
                   Catch::Matchers::WithinAbs(std::max(0.0, v), 1e-12));
      }
    }
  }

  SECTION("zero relation weights collapse relational to linear") {
    Rng rng(12);
    Mat<double> ws = random_mat(2, 2, rng);
    Tape<double> t;
    auto raw = t.leaf(g.raw_features);
    auto rel =
        fuse(t, g, raw, t.leaf(ws), {t.leaf(Mat<double>(2, 2))}, FusionMode::Relational);
    auto lin = fuse(t, g, raw, t.leaf(ws), {t.leaf(Mat<double>(2, 2))}, FusionMode::Linear);
    CHECK(Mat<double>::max_abs_diff(t.val(rel), t.val(lin)) == 0.0);
  }

  SECTION("output shape is d x N in both modes") {
    Rng rng(3);
    Tape<double> t;
    auto raw = t.leaf(g.raw_features);
    auto ws = t.leaf(random_mat(5, 2, rng));
    auto wr = t.leaf(random_mat(5, 2, rng));
    for (auto mode : {FusionMode::Relational, FusionMode::Linear}) {
      auto out = fuse(t, g, raw, ws, {wr}, mode);
      CHECK(t.val(out).rows() == 5);
      CHECK(t.val(out).cols() == 3);
    }
  }

  SECTION("node relabeling permutes the output columns") {
    // permutation: 0->2, 1->0, 2->1
    HetPairGraph perm;
    perm.num_nodes = 3;
    perm.num_node_types = 1;
    perm.num_edge_types = 1;
    perm.node_type = {0, 0, 0};
    perm.labels = {-1, -1, -1};
    const std::vector<int> p = {2, 0, 1};
    for (const Edge& e : g.edges) perm.edges.push_back({p[e.src], p[e.dst], e.etype});
    perm.raw_features = Mat<double>(2, 3);
    for (int i = 0; i < 3; ++i)
      for (int r = 0; r < 2; ++r) perm.raw_features(r, p[i]) = g.raw_features(r, i);

    Rng rng(21);
    Mat<double> ws = random_mat(2, 2, rng), wr = random_mat(2, 2, rng);
    Tape<double> t;
    auto out_orig =
        fuse(t, g, t.leaf(g.raw_features), t.leaf(ws), {t.leaf(wr)}, FusionMode::Relational);
    auto out_perm = fuse(t, perm, t.leaf(perm.raw_features), t.leaf(ws), {t.leaf(wr)},
                         FusionMode::Relational);
    for (int i = 0; i < 3; ++i)
      for (int r = 0; r < 2; ++r)
        CHECK_THAT(t.val(out_perm)(r, p[i]),
                   Catch::Matchers::WithinAbs(t.val(out_orig)(r, i), 1e-12));
  }

  SECTION("unknown mode string is a configuration error") {
    CHECK_THROWS_AS(parse_fusion_mode("magic"), ConfigError);
  }
}

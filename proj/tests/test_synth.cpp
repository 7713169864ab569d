#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "hyperlfh/graph.hpp"
#include "hyperlfh/oracle.hpp"
#include "hyperlfh/synth.hpp"

using namespace hyperlfh;

TEST_CASE("synthetic generator") {
  SECTION("default shape: 3 node types, 4 edge types, labels on primary only") {
    SynthConfig cfg;
    cfg.nodes_per_class = 10;
    cfg.aux_per_class = 4;
    cfg.p_intra = 0.4;
    cfg.p_inter = 0.05;
    cfg.seed = 1;
    auto g = generate_synth(cfg);
    CHECK(g.num_node_types == 3);
    CHECK(g.num_edge_types == 4);
    CHECK(g.num_classes == 3);
    for (int i = 0; i < g.num_nodes; ++i) {
      if (g.node_type[i] == 0)
        CHECK(g.labels[i] == i / cfg.nodes_per_class);
      else
        CHECK(g.labels[i] == -1);
    }
    validate_graph(g);
  }
  SECTION("identical seeds give identical graphs") {
    SynthConfig cfg;
    cfg.nodes_per_class = 8;
    cfg.aux_per_class = 3;
    cfg.seed = 99;
    auto a = generate_synth(cfg);
    auto b = generate_synth(cfg);
    CHECK(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      CHECK(a.edges[i].src == b.edges[i].src);
      CHECK(a.edges[i].dst == b.edges[i].dst);
    }
    CHECK(Mat<double>::max_abs_diff(a.raw_features, b.raw_features) == 0.0);
    auto c = generate_synth(SynthConfig{3, 8, 3, 3, 0.05, 0.005, 32, 0.5, 100});
    CHECK(c.edges.size() != a.edges.size());
  }
  SECTION("zero noise separates classes exactly") {
    SynthConfig cfg;
    cfg.nodes_per_class = 5;
    cfg.aux_per_class = 2;
    cfg.noise = 0.0;
    cfg.seed = 7;
    auto g = generate_synth(cfg);
    // all primary nodes of one class share the identical feature column
    for (int c = 0; c < cfg.num_classes; ++c) {
      const int first = c * cfg.nodes_per_class;
      for (int i = first; i < first + cfg.nodes_per_class; ++i)
        for (std::size_t r = 0; r < g.raw_features.rows(); ++r)
          CHECK(g.raw_features(r, i) == g.raw_features(r, first));
    }
    // and distinct classes differ
    bool differs = false;
    for (std::size_t r = 0; r < g.raw_features.rows(); ++r)
      differs = differs || g.raw_features(r, 0) != g.raw_features(r, cfg.nodes_per_class);
    CHECK(differs);
  }
  SECTION("edge count concentrates near its expectation") {
    SynthConfig cfg;  // defaults: 300 primary, 90+90 aux
    cfg.seed = 4;
    auto g = generate_synth(cfg);
    const double expect = expected_edge_count(cfg);
    CHECK(std::abs(static_cast<double>(g.edges.size()) - expect) <= 0.10 * expect);
  }
  SECTION("generated graphs validate across seeds") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      SynthConfig cfg;
      cfg.nodes_per_class = 6;
      cfg.aux_per_class = 2;
      cfg.p_intra = 0.5;
      cfg.p_inter = 0.1;
      cfg.seed = seed;
      auto g = generate_synth(cfg);
      validate_graph(g);
      // stored edges come in direction pairs
      CHECK(g.edges.size() % 2 == 0);
    }
  }
  SECTION("invalid configurations are rejected") {
    SynthConfig bad;
    bad.p_intra = 0.005;
    bad.p_inter = 0.05;  // inverted
    CHECK_THROWS_AS(generate_synth(bad), ConfigError);
    SynthConfig bad2;
    bad2.num_classes = 1;
    CHECK_THROWS_AS(generate_synth(bad2), ConfigError);
  }
}

TEST_CASE("oracle_nnls") {
  SECTION("master equal to one candidate gives a one-hot solution") {
    Mat<double> cand{{1, 0}, {0, 1}, {0, 0}};
    Mat<double> target = Mat<double>::column({0, 1, 0});
    auto res = oracle::oracle_nnls(cand, target);
    CHECK_THAT(res.coeffs[0], Catch::Matchers::WithinAbs(0.0, 1e-3));
    CHECK_THAT(res.coeffs[1], Catch::Matchers::WithinAbs(1.0, 1e-3));
    CHECK_THAT(res.error, Catch::Matchers::WithinAbs(0.0, 1e-3));
  }
  SECTION("mean of two orthonormal candidates gives half-half") {
    Mat<double> cand{{1, 0}, {0, 1}};
    Mat<double> target = Mat<double>::column({0.5, 0.5});
    auto res = oracle::oracle_nnls(cand, target);
    CHECK_THAT(res.coeffs[0], Catch::Matchers::WithinAbs(0.5, 1e-3));
    CHECK_THAT(res.coeffs[1], Catch::Matchers::WithinAbs(0.5, 1e-3));
  }
  SECTION("negative-direction targets clamp to zero") {
    Mat<double> cand{{1}, {0}};
    Mat<double> target = Mat<double>::column({-2, 0});
    auto res = oracle::oracle_nnls(cand, target);
    CHECK_THAT(res.coeffs[0], Catch::Matchers::WithinAbs(0.0, 1e-3));
    CHECK_THAT(res.error, Catch::Matchers::WithinAbs(2.0, 1e-3));
  }
  SECTION("more than three candidates are refused") {
    Mat<double> cand(2, 4);
    CHECK_THROWS_AS(oracle::oracle_nnls(cand, Mat<double>(2, 1)), std::logic_error);
  }
}

TEST_CASE("oracle_forward refuses large instances") {
  Mat<double> X(2, 9);
  Mat<double> H(9, 1);
  HyperedgeIndex idx;
  idx.num_nodes = 9;
  idx.num_edge_types = 1;
  idx.master_of = {0};
  idx.etype_of = {0};
  idx.columns_of_node.resize(9);
  idx.columns_of_node[0] = {0};
  oracle::OracleAttnParams p;
  CHECK_THROWS_AS(oracle::oracle_forward(X, H, std::vector<int>(9, 0), idx, p),
                  std::logic_error);
}

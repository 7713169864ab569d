#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hyperlfh/adam.hpp"
#include "hyperlfh/init.hpp"
#include "hyperlfh/tape.hpp"
#include "test_util.hpp"

using namespace hyperlfh;
using testutil::fd_max_err;
using testutil::random_mat;
using Var = Tape<double>::Var;

TEST_CASE("matmul values") {
  Tape<double> t;
  auto a = t.leaf(Mat<double>{{1, 2}, {3, 4}});

  SECTION("identity") {
    auto c = t.matmul(t.leaf(Mat<double>::identity(2)), a);
    CHECK(Mat<double>::max_abs_diff(t.val(c), t.val(a)) == 0.0);
  }
  SECTION("zero annihilation") {
    auto c = t.matmul(t.leaf(Mat<double>(2, 2)), a);
    for (std::size_t k = 0; k < 4; ++k) CHECK(t.val(c).at(k) == 0.0);
  }
  SECTION("hand product") {
    auto b = t.leaf(Mat<double>{{5, 6}, {7, 8}});
    auto c = t.matmul(a, b);
    CHECK(t.val(c)(0, 0) == 19.0);
    CHECK(t.val(c)(0, 1) == 22.0);
    CHECK(t.val(c)(1, 0) == 43.0);
    CHECK(t.val(c)(1, 1) == 50.0);
  }
  SECTION("shape mismatch names both shapes") {
    auto b = t.leaf(Mat<double>(3, 2));
    CHECK_THROWS_WITH(t.matmul(a, b),
                      Catch::Matchers::ContainsSubstring("2x2") &&
                          Catch::Matchers::ContainsSubstring("3x2"));
  }
}

TEST_CASE("softmax_per_group values") {
  Tape<double> t;
  SECTION("constant row in one group") {
    auto a = t.leaf(Mat<double>{{0.7, 0.7, 0.7}});
    auto s = t.softmax_per_group(a, {{0, 1, 2}});
    for (int j = 0; j < 3; ++j) CHECK_THAT(t.val(s)(0, j), Catch::Matchers::WithinAbs(1.0 / 3, 1e-15));
  }
  SECTION("singleton group") {
    auto a = t.leaf(Mat<double>{{4.2}});
    auto s = t.softmax_per_group(a, {{0}});
    CHECK(t.val(s)(0, 0) == 1.0);
  }
  SECTION("hand exponentials: [0, ln 2] -> [1/3, 2/3]") {
    auto a = t.leaf(Mat<double>{{0.0, std::log(2.0)}});
    auto s = t.softmax_per_group(a, {{0, 1}});
    CHECK_THAT(t.val(s)(0, 0), Catch::Matchers::WithinAbs(1.0 / 3, 1e-12));
    CHECK_THAT(t.val(s)(0, 1), Catch::Matchers::WithinAbs(2.0 / 3, 1e-12));
  }
  SECTION("empty group is a contract violation") {
    auto a = t.leaf(Mat<double>{{1.0}});
    CHECK_THROWS_AS(t.softmax_per_group(a, {{0}, {}}), std::logic_error);
  }
  SECTION("column in no group is a contract violation") {
    auto a = t.leaf(Mat<double>{{1.0, 2.0}});
    CHECK_THROWS_AS(t.softmax_per_group(a, {{0}}), std::logic_error);
  }
  SECTION("rows sum to 1 within 1e-9 per group, entries in (0,1]") {
    Rng rng(123);
    for (int rep = 0; rep < 20; ++rep) {
      Tape<double> t2;
      auto a = t2.leaf(random_mat(3, 7, rng, -30.0, 30.0));
      std::vector<std::vector<int>> groups = {{0, 3}, {1, 2, 4}, {5, 6}};
      auto s = t2.softmax_per_group(a, groups);
      for (std::size_t i = 0; i < 3; ++i)
        for (const auto& g : groups) {
          double sum = 0;
          for (int j : g) {
            const double v = t2.val(s)(i, j);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            sum += v;
          }
          CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
        }
    }
  }
}

TEST_CASE("l1 and l2 norms") {
  Tape<double> t;
  SECTION("zero vector") {
    auto v = t.leaf(Mat<double>(3, 1));
    CHECK(t.val(t.l1_norm(v)).scalar() == 0.0);
    CHECK(t.val(t.l2_norm(v)).scalar() == 0.0);
  }
  SECTION("hand computation [3,-4]") {
    auto v = t.leaf(Mat<double>::column({3, -4}));
    CHECK(t.val(t.l1_norm(v)).scalar() == 7.0);
    CHECK(t.val(t.l2_norm(v)).scalar() == 5.0);
  }
  SECTION("single element") {
    auto v = t.leaf(Mat<double>::column({1}));
    CHECK(t.val(t.l1_norm(v)).scalar() == 1.0);
    CHECK(t.val(t.l2_norm(v)).scalar() == 1.0);
  }
  SECTION("l1 subgradient at 0 is 0") {
    auto v = t.leaf(Mat<double>::column({0.0, 2.0, -1.0}));
    auto loss = t.l1_norm(v);
    t.backward(loss);
    CHECK(t.grad(v)(0, 0) == 0.0);
    CHECK(t.grad(v)(1, 0) == 1.0);
    CHECK(t.grad(v)(2, 0) == -1.0);
  }
}

TEST_CASE("relu, dropout, cross entropy") {
  SECTION("relu definition") {
    Tape<double> t;
    auto v = t.relu(t.leaf(Mat<double>::row({-1, 2})));
    CHECK(t.val(v)(0, 0) == 0.0);
    CHECK(t.val(v)(0, 1) == 2.0);
  }
  SECTION("dropout rate 0 is identity") {
    Tape<double> t;
    auto a = t.leaf(Mat<double>::row({1, 2, 3}));
    auto d = t.dropout(a, 0.0, true, std::uint64_t{9});
    CHECK(d == a);
  }
  SECTION("dropout in eval mode is identity") {
    Tape<double> t;
    auto a = t.leaf(Mat<double>::row({1, 2, 3}));
    CHECK(t.dropout(a, 0.5, false, std::uint64_t{9}) == a);
  }
  SECTION("dropout rate >= 1 is a configuration error") {
    Tape<double> t;
    auto a = t.leaf(Mat<double>::row({1}));
    CHECK_THROWS_AS(t.dropout(a, 1.0, true, std::uint64_t{9}), ConfigError);
  }
  SECTION("dropout zeroes or scales by 1/(1-rate), deterministic per seed") {
    Tape<double> t;
    auto a = t.leaf(Mat<double>::full(1, 400, 1.0));
    auto d1 = t.dropout(a, 0.25, true, std::uint64_t{42});
    auto d2 = t.dropout(a, 0.25, true, std::uint64_t{42});
    int dropped = 0;
    for (std::size_t k = 0; k < 400; ++k) {
      const double v = t.val(d1).at(k);
      CHECK((v == 0.0 || v == 1.0 / 0.75));
      CHECK(t.val(d2).at(k) == v);
      if (v == 0.0) ++dropped;
    }
    CHECK(dropped > 50);
    CHECK(dropped < 150);
  }
  SECTION("cross entropy of uniform logits over 3 classes is ln 3") {
    Tape<double> t;
    auto logits = t.leaf(Mat<double>::full(3, 4, 0.25));
    auto ce = t.cross_entropy(logits, {0, 1, 2, 0});
    CHECK_THAT(t.val(ce).scalar(), Catch::Matchers::WithinAbs(std::log(3.0), 1e-12));
  }
  SECTION("cross entropy hand value, two classes") {
    // logits column (1, -1), label 0: loss = ln(1 + e^-2)
    Tape<double> t;
    auto logits = t.leaf(Mat<double>{{1}, {-1}});
    auto ce = t.cross_entropy(logits, {0});
    CHECK_THAT(t.val(ce).scalar(),
               Catch::Matchers::WithinAbs(std::log(1.0 + std::exp(-2.0)), 1e-12));
  }
  SECTION("cross entropy vanishes with growing margin") {
    double prev = 1e9;
    for (double margin : {2.0, 8.0, 32.0}) {
      Tape<double> t;
      auto logits = t.leaf(Mat<double>{{margin}, {0.0}});
      const double loss = t.val(t.cross_entropy(logits, {0})).scalar();
      CHECK(loss < prev);
      prev = loss;
    }
    CHECK(prev < 1e-10);
  }
  SECTION("cross entropy is finite for huge logits") {
    Tape<double> t;
    auto logits = t.leaf(Mat<double>{{1e30}, {-1e30}});
    CHECK(std::isfinite(t.val(t.cross_entropy(logits, {1})).scalar()));
  }
}

TEST_CASE("backward basics") {
  SECTION("loss = sum(A) gives all-ones gradient") {
    Tape<double> t;
    Rng rng(1);
    auto a = t.leaf(random_mat(2, 3, rng));
    t.backward(t.sum_all(a));
    for (std::size_t k = 0; k < 6; ++k) CHECK(t.grad(a).at(k) == 1.0);
  }
  SECTION("loss = l2(v)^2 gives 2v") {
    Tape<double> t;
    auto v = t.leaf(Mat<double>::column({1, 2}));
    auto n = t.l2_norm(v);
    t.backward(t.hadamard(n, n));
    CHECK_THAT(t.grad(v)(0, 0), Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(t.grad(v)(1, 0), Catch::Matchers::WithinAbs(4.0, 1e-12));
  }
  SECTION("unreached parameter keeps zero gradient") {
    Tape<double> t;
    auto used = t.leaf(Mat<double>::row({1, 2}));
    auto unused = t.leaf(Mat<double>::row({5, 5}));
    t.backward(t.sum_all(used));
    CHECK(t.grad(unused)(0, 0) == 0.0);
    CHECK(t.grad(unused)(0, 1) == 0.0);
  }
  SECTION("shared node accumulates both path gradients") {
    // loss = sum(3x) + sum(5x) -> dx = 8 everywhere
    Tape<double> t;
    auto x = t.leaf(Mat<double>::row({1, 1}));
    auto loss = t.add(t.sum_all(t.scale(x, 3.0)), t.sum_all(t.scale(x, 5.0)));
    t.backward(loss);
    CHECK(t.grad(x)(0, 0) == 8.0);
    CHECK(t.grad(x)(0, 1) == 8.0);
  }
  SECTION("non-scalar loss is a contract violation") {
    Tape<double> t;
    auto a = t.leaf(Mat<double>(2, 2));
    CHECK_THROWS_AS(t.backward(a), std::logic_error);
  }
}

TEST_CASE("finite differences: every op under 1e-6") {
  Rng rng(2024);
  auto check = [&](const char* name,
                   const std::function<Var(Tape<double>&, const std::vector<Var>&)>& build,
                   std::vector<Mat<double>> inputs) {
    ParamStore<double> store;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      store.add(std::string(name) + "." + std::to_string(i), std::move(inputs[i]));
    const double err = fd_max_err(store, build);
    INFO(name);
    CHECK(err < 1e-6);
  };

  check("matmul",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.matmul(v[0], v[1]));
        },
        {random_mat(3, 4, rng), random_mat(4, 2, rng)});
  check("add_sub_hadamard",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.hadamard(t.add(v[0], v[1]), t.sub(v[0], v[1])));
        },
        {random_mat(3, 3, rng), random_mat(3, 3, rng)});
  check("relu_offset",
        [](Tape<double>& t, const std::vector<Var>& v) { return t.sum_all(t.relu(v[0])); },
        {random_mat(4, 4, rng, 0.05, 1.0)});  // away from the kink
  check("scale_by",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.scale_by(v[0], v[1]));
        },
        {random_mat(3, 3, rng), random_mat(1, 1, rng)});
  check("select_scatter",
        [](Tape<double>& t, const std::vector<Var>& v) {
          auto sel = t.select_columns(v[0], {2, 0, 2});
          return t.sum_all(t.hadamard(t.scatter_columns(sel, {1, 3, 1}, 5),
                                      t.scatter_columns(sel, {1, 3, 1}, 5)));
        },
        {random_mat(3, 4, rng)});
  check("concat_select_row",
        [](Tape<double>& t, const std::vector<Var>& v) {
          auto c = t.concat_rows({v[0], v[1]});
          return t.sum_all(t.hadamard(t.select_row(c, 2), t.select_row(c, 0)));
        },
        {random_mat(2, 3, rng), random_mat(1, 3, rng)});
  check("column_sums_recip",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.reciprocal(t.column_sums(v[0])));
        },
        {random_mat(3, 3, rng, 1.0, 2.0)});
  check("columnwise_l2",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.columnwise_l2_norm(v[0]));
        },
        {random_mat(4, 3, rng, 0.2, 1.0)});
  check("columnwise_dot_scale_columns",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.scale_columns(v[0], t.columnwise_dot(v[0], v[1])));
        },
        {random_mat(3, 4, rng), random_mat(3, 4, rng)});
  check("add_col_bias",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.hadamard(t.add_col_bias(v[0], v[1]),
                                      t.add_col_bias(v[0], v[1])));
        },
        {random_mat(3, 4, rng), random_mat(3, 1, rng)});
  check("softmax_groups",
        [](Tape<double>& t, const std::vector<Var>& v) {
          auto s = t.softmax_per_group(v[0], {{0, 2}, {1, 3}});
          return t.sum_all(t.hadamard(s, v[1]));
        },
        {random_mat(2, 4, rng), random_mat(2, 4, rng)});
  check("sum_columns_by_group",
        [](Tape<double>& t, const std::vector<Var>& v) {
          auto s = t.sum_columns_by_group(v[0], {0, 1, 0, 2}, 3);
          return t.sum_all(t.hadamard(s, s));
        },
        {random_mat(3, 4, rng)});
  check("norms",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.add(t.l1_norm(v[0]), t.l2_norm(v[0]));
        },
        {random_mat(4, 1, rng, 0.2, 1.0)});
  check("cross_entropy",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.cross_entropy(v[0], {0, 2, 1});
        },
        {random_mat(3, 3, rng)});
  check("clip_threshold",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.hadamard(t.clip_threshold(v[0], 1e-6),
                                      t.clip_threshold(v[0], 1e-6)));
        },
        {random_mat(4, 1, rng, 0.1, 0.9)});
  check("assemble_columns",
        [](Tape<double>& t, const std::vector<Var>& v) {
          auto m = t.assemble_columns({v[0], v[1]}, {{0, 2}, {1, 3}}, 4,
                                      {{3, 1.0}, {0, 1.0}});
          return t.sum_all(t.hadamard(m, m));
        },
        {random_mat(2, 1, rng), random_mat(2, 1, rng)});
  check("dropout_fixed_mask",
        [](Tape<double>& t, const std::vector<Var>& v) {
          return t.sum_all(t.dropout(v[0], 0.3, true, std::uint64_t{77}));
        },
        {random_mat(4, 4, rng)});
}

TEST_CASE("composed chain stays under 1e-4") {
  Rng rng(7);
  ParamStore<double> store;
  store.add("w1", random_mat(4, 4, rng, -0.5, 0.5));
  store.add("w2", random_mat(4, 4, rng, -0.5, 0.5));
  store.add("x", random_mat(4, 3, rng, 0.1, 1.0));
  const double err = fd_max_err(store, [](Tape<double>& t, const std::vector<Var>& v) {
    auto h = t.relu(t.matmul(v[0], v[2]));
    auto s = t.softmax_per_group(t.matmul(v[1], h), {{0, 1, 2}});
    return t.add(t.sum_all(t.columnwise_l2_norm(s)), t.l2_norm(t.column_sums(h)));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("quadratic loss checks exactly, constant loss gives zero error") {
  Rng rng(31);
  ParamStore<double> store;
  store.add("v", random_mat(5, 1, rng));
  const double err_quad = fd_max_err(store, [](Tape<double>& t, const std::vector<Var>& v) {
    return t.sum_all(t.hadamard(v[0], v[0]));
  });
  CHECK(err_quad < 1e-7);

  ParamStore<double> store2;
  store2.add("v", random_mat(3, 1, rng));
  Tape<double> t;
  auto leaf = t.leaf(store2.value(0));
  auto c = t.leaf(Mat<double>(1, 1));
  t.backward(t.add(c, t.scale(t.sum_all(leaf), 0.0)));
  auto rep = finite_diff_check(store2, {t.grad(leaf)}, [&]() { return 0.0; });
  CHECK(rep.max_rel_error == 0.0);
}

TEST_CASE("xavier init and adam") {
  SECTION("same seed, same matrix") {
    auto a = xavier_init<double>(5, 7, std::uint64_t{99});
    auto b = xavier_init<double>(5, 7, std::uint64_t{99});
    CHECK(Mat<double>::max_abs_diff(a, b) == 0.0);
  }
  SECTION("bounds are +-sqrt(6/(rows+cols))") {
    const double bound = std::sqrt(6.0 / 12.0);
    auto a = xavier_init<double>(5, 7, std::uint64_t{3});
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a.at(k) <= bound);
      CHECK(a.at(k) >= -bound);
    }
  }
  SECTION("adam with zero gradient moves less than lr") {
    ParamStore<double> store;
    Rng rng(5);
    store.add("p", random_mat(3, 3, rng));
    const Mat<double> before = store.at("p");
    AdamState<double> opt(store);
    opt.step(store, {Mat<double>(3, 3)}, 2e-3);
    CHECK(Mat<double>::max_abs_diff(before, store.at("p")) < 2e-3);
  }
  SECTION("adam rejects nonpositive lr") {
    ParamStore<double> store;
    store.add("p", Mat<double>(1, 1));
    AdamState<double> opt(store);
    CHECK_THROWS_AS(opt.step(store, {Mat<double>(1, 1)}, 0.0), std::invalid_argument);
  }
  SECTION("adam descends a quadratic") {
    ParamStore<double> store;
    store.add("p", Mat<double>{{4.0}});
    AdamState<double> opt(store);
    for (int i = 0; i < 2000; ++i) {
      Mat<double> grad{{2.0 * store.at("p")(0, 0)}};
      opt.step(store, {grad}, 1e-2);
    }
    CHECK(std::abs(store.at("p")(0, 0)) < 1e-3);
  }
}

TEST_CASE("forward outputs stay finite on finite inputs") {
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    Tape<double> t;
    auto a = t.leaf(random_mat(4, 4, rng, -50, 50));
    auto b = t.leaf(random_mat(4, 4, rng, -50, 50));
    auto s = t.softmax_per_group(t.matmul(a, b), {{0, 1, 2, 3}});
    auto d = t.dropout(t.relu(s), 0.4, true, rng);
    CHECK(t.val(d).all_finite());
  }
}

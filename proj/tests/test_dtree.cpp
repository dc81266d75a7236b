#include <doctest.h>

#include "imvc/dtree.hpp"
#include "oracles.hpp"

using namespace imvc;
using namespace imvc::dtree;

TEST_CASE("gini examples") {
  const std::vector<Label> pure{0, 0, 0}, half{0, 0, 1, 1}, third{0, 0, 1};
  CHECK(gini(pure) == 0.0);
  CHECK(gini(half) == 0.5);
  CHECK(std::abs(gini(third) - 4.0 / 9.0) < 1e-12);
  CHECK_THROWS_AS(gini(std::vector<Label>{}), ConfigError);
}

TEST_CASE("gini stays within [0, 1 - 1/K]") {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + t % 5;
    std::vector<Label> ls(1 + oracle::rand_index(rng, 30));
    for (auto& l : ls) l = oracle::rand_index(rng, k);
    const double g = gini(ls);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0 - 1.0 / k + 1e-12);
    const bool is_pure = std::all_of(ls.begin(), ls.end(), [&](Label l) { return l == ls[0]; });
    CHECK((g == 0.0) == is_pure);
  }
}

TEST_CASE("split_gini examples") {
  const Matrix x{{1}, {2}, {3}, {4}};
  const std::vector<Label> y{0, 0, 1, 1};
  CHECK(split_gini(x, y, 0, 2.5) == 0.0);
  CHECK(split_gini(x, y, 0, 100.0) == gini(y));
  CHECK(split_gini(x, y, 0, 1.5) == doctest::Approx(0.75 * (1.0 - (1.0 / 9 + 4.0 / 9))));
}

TEST_CASE("best_split examples") {
  {
    const Matrix x{{0}, {0}, {1}, {1}};
    const auto s = best_split(x, std::vector<Label>{0, 0, 1, 1}, 2);
    REQUIRE(s);
    CHECK(s->feature == 0);
    CHECK(s->threshold == 0.5);
    CHECK(s->score == 0.0);
  }
  {
    const Matrix x{{2, 2}, {2, 2}, {2, 2}};
    CHECK_FALSE(best_split(x, std::vector<Label>{0, 1, 0}, 2));
  }
  {
    // Feature 1 separates; feature 0 is noise.
    const Matrix x{{0.3, 0}, {0.9, 0}, {0.1, 1}, {0.5, 1}};
    const auto s = best_split(x, std::vector<Label>{0, 0, 1, 1}, 2);
    REQUIRE(s);
    CHECK(s->feature == 1);
    CHECK(s->threshold == 0.5);
  }
}

TEST_CASE("best_split agrees with exhaustive enumeration and the serial scan") {
  Rng rng(2024);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + oracle::rand_index(rng, 40), d = 1 + oracle::rand_index(rng, 6);
    const std::size_t k = 2 + oracle::rand_index(rng, 3);
    Matrix x(n, d);
    // Coarse grid so duplicate values and exact score ties are common.
    for (double& v : x.values()) v = static_cast<double>(oracle::rand_index(rng, 6));
    std::vector<Label> y(n);
    for (auto& l : y) l = oracle::rand_index(rng, k);

    const auto got = best_split(x, y, k);
    const auto want = oracle::brute_best_split(x, y, k);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) continue;
    CHECK(got->feature == want->feature);
    CHECK(got->threshold == want->threshold);
    CHECK(got->score == doctest::Approx(static_cast<double>(want->score.num) / want->score.den));

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto ser = serial::best_split(x, y, all, k);
    CHECK(ser->feature == got->feature);
    CHECK(ser->threshold == got->threshold);
  }
}

TEST_CASE("build_tree examples") {
  {
    const Matrix x{{0}, {1}, {2}};
    const auto t = build_tree(x, std::vector<Label>{1, 1, 1}, 2, {10, 1});
    CHECK(t.size() == 1);
    CHECK(t.node(0).leaf);
    CHECK(t.node(0).label == 1);
  }
  {
    const Matrix x{{0, 0}, {1, 0}, {2, 1}, {3, 1}, {4, 2}, {5, 2}};
    const auto t = build_tree(x, std::vector<Label>{0, 0, 1, 1, 2, 2}, 3, {1, 1});
    CHECK(t.size() == 3);
    CHECK(t.depth() == 1);
  }
  {
    const Matrix x{{0}, {1}, {2}, {3}};
    const auto t = build_tree(x, std::vector<Label>{0, 0, 1, 1}, 2, {10, 1});
    REQUIRE(t.size() == 3);
    CHECK(t.node(0).feature == 0);
    CHECK(t.node(0).threshold == 1.5);
    CHECK(t.node(t.node(0).left).label == 0);
    CHECK(t.node(t.node(0).right).label == 1);
  }
  CHECK_THROWS_AS(build_tree(Matrix(0, 1), std::vector<Label>{}, 2), ConfigError);
}

TEST_CASE("build_tree: leaf ties go to the smallest label; min_num stops splitting") {
  const Matrix x{{0}, {1}};
  const auto t = build_tree(x, std::vector<Label>{1, 0}, 2, {10, 3});
  CHECK(t.size() == 1);
  CHECK(t.node(0).label == 0);
}

TEST_CASE("unbounded tree fits distinct points exactly and respects max depth") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + oracle::rand_index(rng, 60), k = 2 + oracle::rand_index(rng, 3);
    const Matrix x = oracle::random_matrix(rng, n, 3);
    std::vector<Label> y(n);
    for (auto& l : y) l = oracle::rand_index(rng, k);
    const auto full = build_tree(x, y, k, {1000, 1});
    CHECK(misclassification(full, x, y) == 0);

    const std::size_t cap = 1 + trial % 4;
    const auto shallow = build_tree(x, y, k, {cap, 5});
    CHECK(shallow.depth() <= cap);
    for (const auto& node : shallow.nodes())
      if (!node.leaf) CHECK(node.count >= 5);
  }
}

TEST_CASE("predict routing") {
  const auto leaf = DecisionTree({TreeNode{.leaf = true, .label = 2}}, 0, 3, 2);
  const double any[] = {5.0, -1.0};
  CHECK(predict(leaf, any) == 2);

  std::vector<TreeNode> nodes{
      {.id = 0, .leaf = false, .feature = 1, .threshold = 0.5, .left = 1, .right = 2},
      {.id = 1, .leaf = true, .label = 0, .depth = 1},
      {.id = 2, .leaf = true, .label = 1, .depth = 1}};
  const DecisionTree t(nodes, 0, 2, 2);
  const double boundary[] = {0.0, 0.5}, above[] = {0.0, 0.6};
  CHECK(predict(t, boundary) == 0);
  CHECK(predict(t, above) == 1);
  const double wrong[] = {1.0};
  CHECK_THROWS_AS(predict(t, wrong), DimensionError);
}

TEST_CASE("tree validation rejects malformed arenas") {
  std::vector<TreeNode> missing{{.id = 0, .leaf = false, .feature = 0, .left = 1, .right = 5},
                                {.id = 1, .leaf = true, .depth = 1}};
  CHECK_THROWS(DecisionTree(missing, 0, 2, 1));
  CHECK_THROWS(DecisionTree({TreeNode{.leaf = true, .label = 4}}, 0, 2, 1));
}

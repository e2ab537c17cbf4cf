#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "metatree/simgen.hpp"
#include "metatree/tree.hpp"

using namespace metatree;

namespace {

TreeGenSpec basic_spec(PatternMode mode, int depth = 3, int count = 10) {
  TreeGenSpec spec;
  spec.order = 2;
  spec.depth = DepthSpec::fixed(depth);
  spec.pattern_mode = mode;
  spec.attr_ranges = {{2.0, 5.0}, {1.0, 9.0}, {2.0, 5.0}};
  spec.count = count;
  return spec;
}

std::set<std::int64_t> branch_set(const Tree& t) {
  std::set<std::int64_t> s;
  for (const auto& [idx, attrs] : t.branches) s.insert(idx);
  return s;
}

int max_level(const Tree& t, const SupportTreeSpec& support) {
  int deepest = 0;
  for (const auto& [idx, attrs] : t.branches) deepest = std::max(deepest, support.level(idx));
  return deepest;
}

}  // namespace

TEST_CASE("pattern mode names round trip") {
  CHECK(pattern_mode_from_string("same") == PatternMode::same);
  CHECK(pattern_mode_from_string("different") == PatternMode::different);
  CHECK(pattern_mode_from_string("random") == PatternMode::random);
  CHECK(pattern_mode_name(PatternMode::different) == "different");
  CHECK_THROWS_AS(pattern_mode_from_string("shuffled"), std::invalid_argument);
}

TEST_CASE("generation spec validation rejects out-of-contract recipes") {
  CHECK_NOTHROW(validate_gen_spec(basic_spec(PatternMode::same)));

  auto bad = basic_spec(PatternMode::same);
  bad.order = 4;
  CHECK_THROWS_AS(validate_gen_spec(bad), std::invalid_argument);

  bad = basic_spec(PatternMode::same);
  bad.depth = DepthSpec::fixed(0);
  CHECK_THROWS_AS(validate_gen_spec(bad), std::invalid_argument);

  bad = basic_spec(PatternMode::same);
  bad.attr_ranges = {{0.0, 5.0}};  // lower bound must be positive
  CHECK_THROWS_AS(validate_gen_spec(bad), std::invalid_argument);

  bad = basic_spec(PatternMode::same);
  bad.attr_ranges = {{5.0, 2.0}};  // inverted
  CHECK_THROWS_AS(validate_gen_spec(bad), std::invalid_argument);

  bad = basic_spec(PatternMode::same);
  bad.attr_ranges.clear();
  CHECK_THROWS_AS(validate_gen_spec(bad), std::invalid_argument);

  bad = basic_spec(PatternMode::same);
  bad.count = 0;
  CHECK_THROWS_AS(validate_gen_spec(bad), std::invalid_argument);

  bad = basic_spec(PatternMode::same);
  bad.depth = DepthSpec::binomial(4, 1.5);
  CHECK_THROWS_AS(validate_gen_spec(bad), std::invalid_argument);
}

TEST_CASE("the shared frame covers the deepest realizable tree") {
  auto a = basic_spec(PatternMode::same, 2);
  auto b = basic_spec(PatternMode::same, 4);
  b.order = 3;
  const SupportTreeSpec support = support_for(a, b);
  CHECK(support.order == 3);
  CHECK(support.depth == 4);
  CHECK(support.trunk);

  b.depth = DepthSpec::binomial(5, 0.5);  // can realize up to 5
  CHECK(support_for(a, b).depth == 5);
}

TEST_CASE("generated datasets carry ids, labels, counts and valid trees") {
  const auto a = basic_spec(PatternMode::random, 3, 4);
  const auto b = basic_spec(PatternMode::random, 2, 3);
  const auto trees = generate_dataset(a, b, 7);
  REQUIRE(trees.size() == 7);
  CHECK(trees[0].id == "a1");
  CHECK(trees[3].id == "a4");
  CHECK(trees[4].id == "b1");
  CHECK(trees[6].id == "b3");
  for (int i = 0; i < 4; ++i) CHECK(trees[static_cast<std::size_t>(i)].label == "A");
  for (int i = 4; i < 7; ++i) CHECK(trees[static_cast<std::size_t>(i)].label == "B");

  const SupportTreeSpec support = support_for(a, b);
  for (const auto& t : trees) {
    CHECK_NOTHROW(validate_tree(t, support));
    CHECK(t.q() == 3);
  }
  // clean trees reach their configured depth exactly
  for (int i = 0; i < 4; ++i) CHECK(max_level(trees[static_cast<std::size_t>(i)], support) == 3);
  for (int i = 4; i < 7; ++i) CHECK(max_level(trees[static_cast<std::size_t>(i)], support) == 2);
}

TEST_CASE("generated attributes live inside the configured ranges") {
  auto a = basic_spec(PatternMode::random, 3, 6);
  a.attr_ranges = {{2.0, 5.0}, {100.0, 101.0}};
  auto b = basic_spec(PatternMode::random, 3, 6);
  b.attr_ranges = {{0.5, 0.6}, {7.0, 9.0}};
  const auto trees = generate_dataset(a, b, 99);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto& ranges = i < 6 ? a.attr_ranges : b.attr_ranges;
    for (const auto& [idx, attrs] : trees[i].branches) {
      REQUIRE(attrs.size() == 2);
      for (std::size_t j = 0; j < attrs.size(); ++j) {
        CHECK(attrs[j] >= ranges[j].first);
        CHECK(attrs[j] <= ranges[j].second);
      }
    }
  }
}

TEST_CASE("same-pattern sets share a single branch set") {
  const auto a = basic_spec(PatternMode::same, 3, 8);
  const auto b = basic_spec(PatternMode::same, 3, 8);
  const auto trees = generate_dataset(a, b, 13);

  std::set<std::set<std::int64_t>> distinct_a, distinct_b;
  for (std::size_t i = 0; i < 8; ++i) distinct_a.insert(branch_set(trees[i]));
  for (std::size_t i = 8; i < 16; ++i) distinct_b.insert(branch_set(trees[i]));
  CHECK(distinct_a.size() == 1);
  CHECK(distinct_b.size() == 1);

  // attributes still vary within the shared pattern
  CHECK_FALSE(trees[0].branches == trees[1].branches);
}

TEST_CASE("same-pattern sets of unequal depth share truncations of one pattern") {
  auto a = basic_spec(PatternMode::same, 3, 5);
  auto b = basic_spec(PatternMode::same, 2, 5);
  const auto trees = generate_dataset(a, b, 4242);
  const SupportTreeSpec support = support_for(a, b);

  const auto deep = branch_set(trees[0]);
  const auto shallow = branch_set(trees[5]);
  // the shallow set is exactly the deep pattern cut at its depth
  std::set<std::int64_t> expected;
  for (std::int64_t idx : deep)
    if (support.level(idx) <= 2) expected.insert(idx);
  CHECK(shallow == expected);
}

TEST_CASE("different-pattern sets use two non-identical branch sets") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 50ULL}) {
    const auto a = basic_spec(PatternMode::different, 3, 6);
    const auto b = basic_spec(PatternMode::different, 3, 6);
    const auto trees = generate_dataset(a, b, seed);
    std::set<std::set<std::int64_t>> sets;
    for (const auto& t : trees) sets.insert(branch_set(t));
    CHECK(sets.size() == 2);
    CHECK(branch_set(trees[0]) != branch_set(trees[6]));
  }
}

TEST_CASE("random-pattern depth-1 binary trees cover exactly the three child subsets") {
  auto a = basic_spec(PatternMode::random, 1, 60);
  auto b = basic_spec(PatternMode::random, 1, 60);
  const auto trees = generate_dataset(a, b, 5);
  std::set<std::set<std::int64_t>> seen;
  for (const auto& t : trees) seen.insert(branch_set(t));
  // trunk 1 plus a nonempty subset of its children {2,3}
  const std::set<std::set<std::int64_t>> expected = {{1, 2}, {1, 3}, {1, 2, 3}};
  CHECK(seen == expected);
}

TEST_CASE("dataset generation is deterministic in the seed and modes must match") {
  const auto a = basic_spec(PatternMode::random, 3, 5);
  const auto b = basic_spec(PatternMode::random, 2, 5);
  CHECK(generate_dataset(a, b, 321) == generate_dataset(a, b, 321));

  const auto t1 = generate_dataset(a, b, 1);
  const auto t2 = generate_dataset(a, b, 2);
  CHECK_FALSE(t1 == t2);

  auto mismatched = basic_spec(PatternMode::same, 3, 5);
  CHECK_THROWS_AS(generate_dataset(a, mismatched, 0), std::invalid_argument);

  auto ragged = basic_spec(PatternMode::random, 3, 5);
  ragged.attr_ranges = {{2.0, 5.0}};  // attribute count differs between the sets
  CHECK_THROWS_AS(generate_dataset(a, ragged, 0), std::invalid_argument);
}

TEST_CASE("binomial depths stay within [1, trials] and vary across trees") {
  auto a = basic_spec(PatternMode::random, 3, 60);
  a.depth = DepthSpec::binomial(4, 0.5);
  auto b = basic_spec(PatternMode::random, 2, 1);
  const auto trees = generate_dataset(a, b, 2026);
  const SupportTreeSpec support = support_for(a, b);
  std::set<int> depths;
  for (std::size_t i = 0; i < 60; ++i) {
    const int lvl = max_level(trees[i], support);
    CHECK(lvl >= 1);
    CHECK(lvl <= 4);
    depths.insert(lvl);
  }
  CHECK(depths.size() > 1);  // 60 draws of binomial(4, .5) realize several depths
}

TEST_CASE("noise spec validation rejects out-of-contract recipes") {
  NoiseSpec ok;  // all-zero noise is a valid no-op
  CHECK_NOTHROW(validate_noise_spec(ok));
  ok.attr_edges = 15;
  ok.attr_sd_frac = 0.30;
  ok.topo_candidates = 5;
  ok.topo_prob = 0.5;
  CHECK_NOTHROW(validate_noise_spec(ok));

  NoiseSpec bad = ok;
  bad.attr_edges = -1;
  CHECK_THROWS_AS(validate_noise_spec(bad), std::invalid_argument);
  bad = ok;
  bad.attr_sd_frac = -0.1;
  CHECK_THROWS_AS(validate_noise_spec(bad), std::invalid_argument);
  bad = ok;
  bad.topo_prob = 1.5;
  CHECK_THROWS_AS(validate_noise_spec(bad), std::invalid_argument);
  bad = ok;
  bad.topo_attr_range = {3.0, 2.0};
  CHECK_THROWS_AS(validate_noise_spec(bad), std::invalid_argument);
}

TEST_CASE("attribute noise perturbs the chosen branches and keeps positivity") {
  const auto a = basic_spec(PatternMode::random, 3, 1);
  const auto b = basic_spec(PatternMode::random, 3, 1);
  const auto trees = generate_dataset(a, b, 10);
  const Tree& clean = trees[0];

  NoiseSpec noise;
  noise.attr_edges = 15;  // more than any depth-3 binary tree has: every branch is hit
  noise.attr_sd_frac = 0.30;
  const Tree noisy = add_attribute_noise(clean, noise, 77);

  CHECK(branch_set(noisy) == branch_set(clean));  // topology untouched
  int changed = 0;
  for (const auto& [idx, attrs] : noisy.branches) {
    const auto& before = clean.branches.at(idx);
    REQUIRE(attrs.size() == before.size());
    for (std::size_t j = 0; j < attrs.size(); ++j) {
      CHECK(attrs[j] > 0.0);
      if (attrs[j] != before[j]) ++changed;
    }
  }
  CHECK(changed == static_cast<int>(clean.branches.size()) * 3);

  // zero-edge or zero-fraction noise is the identity
  NoiseSpec off;
  CHECK(add_attribute_noise(clean, off, 77) == clean);
  off.attr_edges = 15;
  off.attr_sd_frac = 0.0;
  CHECK(add_attribute_noise(clean, off, 77) == clean);
}

TEST_CASE("attribute noise picks exactly the requested number of branches") {
  const auto a = basic_spec(PatternMode::random, 3, 1);
  const auto trees = generate_dataset(a, a, 20);
  const Tree& clean = trees[0];
  REQUIRE(clean.branches.size() >= 4);

  NoiseSpec noise;
  noise.attr_edges = 2;
  noise.attr_sd_frac = 0.5;
  const Tree noisy = add_attribute_noise(clean, noise, 3);
  int touched = 0;
  for (const auto& [idx, attrs] : noisy.branches)
    if (attrs != clean.branches.at(idx)) ++touched;
  CHECK(touched == 2);
}

TEST_CASE("attribute noise keeps strictly positive values over many draws") {
  const auto a = basic_spec(PatternMode::random, 3, 30);
  auto narrow = a;
  narrow.attr_ranges = {{0.01, 0.011}, {1.0, 9.0}, {2.0, 5.0}};  // tiny values stress the floor
  const auto trees = generate_dataset(narrow, narrow, 4);
  NoiseSpec noise;
  noise.attr_edges = 15;
  noise.attr_sd_frac = 0.9;  // violent noise: clamping must kick in sometimes
  const SupportTreeSpec support = support_for(narrow, narrow);
  for (std::uint64_t s = 0; s < 40; ++s) {
    for (const auto& t : trees) {
      const Tree noisy = add_attribute_noise(t, noise, s);
      CHECK_NOTHROW(validate_tree(noisy, support));
    }
  }
}

TEST_CASE("topology noise grafts only free branches and stays connected") {
  const auto a = basic_spec(PatternMode::random, 2, 1);  // depth 2: room to grow below
  const auto trees = generate_dataset(a, a, 31);
  const SupportTreeSpec support = build_support_spec(2, 3, true);  // deeper frame than the trees

  NoiseSpec noise;
  noise.topo_candidates = 5;
  noise.topo_prob = 1.0;  // every round adds (while free slots remain)
  noise.topo_attr_range = {2.0, 5.0};

  const Tree& clean = trees[0];
  const Tree noisy = add_topology_noise(clean, noise, support, 8);
  CHECK_NOTHROW(validate_tree(noisy, support));
  CHECK(noisy.branches.size() == clean.branches.size() + 5);
  for (const auto& [idx, attrs] : noisy.branches) {
    if (clean.branches.count(idx)) {
      CHECK(attrs == clean.branches.at(idx));  // existing branches untouched
    } else {
      for (double v : attrs) {
        CHECK(v >= 2.0);
        CHECK(v <= 5.0);
      }
    }
  }

  // zero candidates or zero probability: identity
  NoiseSpec off;
  CHECK(add_topology_noise(clean, off, support, 8) == clean);
  off.topo_candidates = 5;
  off.topo_prob = 0.0;
  CHECK(add_topology_noise(clean, off, support, 8) == clean);
}

TEST_CASE("topology noise on a full tree is a no-op") {
  // depth-1 binary frame, fully populated tree: no free slot anywhere
  const SupportTreeSpec support = build_support_spec(2, 1, true);
  Tree full;
  full.id = "full";
  full.branches = {{1, {1.0}}, {2, {1.0}}, {3, {1.0}}};
  NoiseSpec noise;
  noise.topo_candidates = 10;
  noise.topo_prob = 1.0;
  CHECK(add_topology_noise(full, noise, support, 5) == full);
}

TEST_CASE("noise operators are deterministic in the seed") {
  const auto a = basic_spec(PatternMode::random, 3, 1);
  const auto trees = generate_dataset(a, a, 64);
  const SupportTreeSpec support = support_for(a, a);
  NoiseSpec noise;
  noise.attr_edges = 15;
  noise.topo_candidates = 5;
  CHECK(add_attribute_noise(trees[0], noise, 9) == add_attribute_noise(trees[0], noise, 9));
  CHECK(add_topology_noise(trees[0], noise, support, 9) ==
        add_topology_noise(trees[0], noise, support, 9));
}

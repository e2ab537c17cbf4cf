#include "metatree/simgen.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include "metatree/seeding.hpp"

namespace metatree {
namespace {

// A topology is the sorted set of present support indices.
using Topology = std::vector<std::int64_t>;

// Walks the frame top-down: every realized node above the target depth
// draws a uniformly random nonempty subset of its `order` child slots.
Topology sample_topology(const SupportTreeSpec& support, int order, int depth,
                         std::mt19937_64& gen) {
  Topology present{1};
  std::vector<std::int64_t> frontier{1};
  std::uniform_int_distribution<int> mask_dist(1, (1 << order) - 1);
  for (int level = 0; level < depth; ++level) {
    std::vector<std::int64_t> next;
    for (std::int64_t branch : frontier) {
      const int mask = mask_dist(gen);
      for (int slot = 0; slot < order; ++slot)
        if (mask & (1 << slot)) next.push_back(support.child_index(branch, slot + 1));
    }
    present.insert(present.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::sort(present.begin(), present.end());
  return present;
}

Topology truncate_topology(const Topology& topology, const SupportTreeSpec& support, int depth) {
  Topology out;
  for (std::int64_t branch : topology)
    if (support.level(branch) <= depth) out.push_back(branch);
  return out;
}

int sample_depth(const DepthSpec& spec, int depth_cap, std::mt19937_64& gen) {
  if (spec.kind == DepthSpec::Kind::fixed) return spec.value;
  std::binomial_distribution<int> draw(spec.value, spec.prob);
  return std::clamp(draw(gen), 1, depth_cap);
}

Tree realize_tree(const Topology& topology, const TreeGenSpec& spec, std::string id,
                  std::string label, std::mt19937_64& gen) {
  Tree tree;
  tree.id = std::move(id);
  tree.label = std::move(label);
  for (std::int64_t branch : topology) {
    std::vector<double> attrs;
    attrs.reserve(spec.attr_ranges.size());
    for (const auto& [lo, hi] : spec.attr_ranges)
      attrs.push_back(std::uniform_real_distribution<double>(lo, hi)(gen));
    tree.branches.emplace(branch, std::move(attrs));
  }
  return tree;
}

}  // namespace

std::string pattern_mode_name(PatternMode mode) {
  switch (mode) {
    case PatternMode::same: return "same";
    case PatternMode::different: return "different";
    case PatternMode::random: return "random";
  }
  throw std::invalid_argument("unknown pattern mode");
}

PatternMode pattern_mode_from_string(std::string_view name) {
  if (name == "same") return PatternMode::same;
  if (name == "different") return PatternMode::different;
  if (name == "random") return PatternMode::random;
  throw std::invalid_argument("unknown pattern mode '" + std::string(name) +
                              "' (expected same, different or random)");
}

void validate_gen_spec(const TreeGenSpec& spec) {
  if (spec.order != 2 && spec.order != 3)
    throw std::invalid_argument("tree order must be 2 or 3");
  if (spec.depth.value < 1) throw std::invalid_argument("depth (or its trial count) must be >= 1");
  if (spec.depth.kind == DepthSpec::Kind::binomial &&
      !(spec.depth.prob >= 0.0 && spec.depth.prob <= 1.0))
    throw std::invalid_argument("binomial depth probability must be in [0,1]");
  if (spec.attr_ranges.empty()) throw std::invalid_argument("at least one attribute range needed");
  for (const auto& [lo, hi] : spec.attr_ranges)
    if (!(lo > 0.0) || !(lo < hi))
      throw std::invalid_argument("attribute ranges must satisfy 0 < a < b");
  if (spec.count < 1) throw std::invalid_argument("tree count must be >= 1");
}

void validate_noise_spec(const NoiseSpec& spec) {
  if (spec.attr_edges < 0) throw std::invalid_argument("attr_edges must be >= 0");
  if (!(spec.attr_sd_frac >= 0.0 && spec.attr_sd_frac <= 1.0))
    throw std::invalid_argument("attr_sd_frac must be in [0,1]");
  if (spec.topo_candidates < 0) throw std::invalid_argument("topo_candidates must be >= 0");
  if (!(spec.topo_prob >= 0.0 && spec.topo_prob <= 1.0))
    throw std::invalid_argument("topo_prob must be in [0,1]");
  if (!(spec.topo_attr_range.first > 0.0) ||
      !(spec.topo_attr_range.first < spec.topo_attr_range.second))
    throw std::invalid_argument("topo_attr_range must satisfy 0 < a < b");
}

SupportTreeSpec support_for(const TreeGenSpec& set_a, const TreeGenSpec& set_b) {
  validate_gen_spec(set_a);
  validate_gen_spec(set_b);
  return build_support_spec(std::max(set_a.order, set_b.order),
                            std::max(set_a.depth.max_depth(), set_b.depth.max_depth()),
                            /*trunk=*/true);
}

std::vector<Tree> generate_dataset(const TreeGenSpec& set_a, const TreeGenSpec& set_b,
                                   std::uint64_t seed) {
  if (set_a.pattern_mode != set_b.pattern_mode)
    throw std::invalid_argument("both sets must use the same pattern mode");
  if (set_a.attr_ranges.size() != set_b.attr_ranges.size())
    throw std::invalid_argument("both sets must declare the same attribute count");
  const SupportTreeSpec support = support_for(set_a, set_b);
  const PatternMode mode = set_a.pattern_mode;

  std::mt19937_64 gen(seed);
  Topology master_a, master_b;
  if (mode == PatternMode::same) {
    // One whole-tree topology for everyone; shallower trees truncate it.
    master_a = sample_topology(support, std::max(set_a.order, set_b.order), support.depth, gen);
    master_b = master_a;
  } else if (mode == PatternMode::different) {
    master_a = sample_topology(support, set_a.order, set_a.depth.max_depth(), gen);
    for (int attempt = 0;; ++attempt) {
      master_b = sample_topology(support, set_b.order, set_b.depth.max_depth(), gen);
      if (master_b != master_a) break;
      if (attempt >= 1000)
        throw std::runtime_error("could not sample two distinct topologies in 1000 attempts");
    }
  }

  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(set_a.count + set_b.count));
  auto emit_set = [&](const TreeGenSpec& spec, const Topology& master, const char* prefix,
                      const char* label) {
    for (int i = 0; i < spec.count; ++i) {
      const int depth = sample_depth(spec.depth, support.depth, gen);
      Topology topology = mode == PatternMode::random
                              ? sample_topology(support, spec.order, depth, gen)
                              : truncate_topology(master, support, depth);
      trees.push_back(realize_tree(topology, spec, prefix + std::to_string(i + 1), label, gen));
    }
  };
  emit_set(set_a, master_a, "a", "A");
  emit_set(set_b, master_b, "b", "B");
  return trees;
}

Tree add_attribute_noise(const Tree& tree, const NoiseSpec& spec, std::uint64_t seed) {
  validate_noise_spec(spec);
  Tree out = tree;
  if (spec.attr_edges == 0 || spec.attr_sd_frac == 0.0) return out;

  std::mt19937_64 gen(seed);
  std::vector<std::int64_t> indices;
  indices.reserve(out.branches.size());
  for (const auto& [idx, attrs] : out.branches) indices.push_back(idx);
  const std::size_t picks = std::min<std::size_t>(static_cast<std::size_t>(spec.attr_edges),
                                                  indices.size());
  for (std::size_t i = 0; i < picks; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, indices.size() - 1);
    std::swap(indices[i], indices[pick(gen)]);
  }
  std::vector<std::int64_t> chosen(indices.begin(), indices.begin() + static_cast<long>(picks));
  std::sort(chosen.begin(), chosen.end());

  for (std::int64_t idx : chosen) {
    for (double& value : out.branches.at(idx)) {
      std::normal_distribution<double> noise(0.0, spec.attr_sd_frac * value);
      double perturbed = value * 0.01;  // clamp target if every resample violates positivity
      for (int attempt = 0; attempt < 100; ++attempt) {
        const double candidate = value + noise(gen);
        if (candidate > 0.0) {
          perturbed = candidate;
          break;
        }
      }
      value = perturbed;
    }
  }
  return out;
}

Tree add_topology_noise(const Tree& tree, const NoiseSpec& spec, const SupportTreeSpec& support,
                        std::uint64_t seed) {
  validate_noise_spec(spec);
  Tree out = tree;
  if (spec.topo_candidates == 0 || spec.topo_prob == 0.0) return out;
  const int q = out.q();

  std::mt19937_64 gen(seed);
  std::bernoulli_distribution toss(spec.topo_prob);
  std::uniform_real_distribution<double> attr(spec.topo_attr_range.first,
                                              spec.topo_attr_range.second);
  for (int round = 0; round < spec.topo_candidates; ++round) {
    if (!toss(gen)) continue;
    // Free slots: absent branches that would attach to the tree (or are
    // roots of a trunkless frame).
    std::vector<std::int64_t> slots;
    for (std::int64_t b = 1; b <= support.p; ++b) {
      if (out.branches.count(b)) continue;
      const auto parent = support.parent_index(b);
      if (!parent || out.branches.count(*parent)) slots.push_back(b);
    }
    if (slots.empty()) continue;  // saturated tree: the round is skipped
    std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
    const std::int64_t idx = slots[pick(gen)];
    std::vector<double> attrs(static_cast<std::size_t>(q));
    for (double& a : attrs) a = attr(gen);
    out.branches.emplace(idx, std::move(attrs));
  }
  return out;
}

}  // namespace metatree

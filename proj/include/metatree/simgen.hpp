#ifndef METATREE_SIMGEN_HPP
#define METATREE_SIMGEN_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metatree/tree.hpp"

namespace metatree {

/// Tree depth: fixed, or per-tree binomial(trials, prob) clamped to >= 1.
struct DepthSpec {
  enum class Kind { fixed, binomial };
  Kind kind = Kind::fixed;
  int value = 3;      ///< the fixed depth, or the binomial trial count
  double prob = 0.5;  ///< binomial success probability (unused when fixed)

  static DepthSpec fixed(int depth) { return {Kind::fixed, depth, 0.0}; }
  static DepthSpec binomial(int trials, double prob) { return {Kind::binomial, trials, prob}; }
  int max_depth() const { return value; }  ///< deepest depth the spec can realize
};

/// How branching patterns relate across the trees of a dataset:
/// same  — one topology is sampled once and shared by every tree
///         (shallower trees use its truncation to their own depth);
/// different — one topology per set, forced to be non-identical;
/// random — every tree samples its own topology.
enum class PatternMode { same, different, random };
std::string pattern_mode_name(PatternMode mode);
PatternMode pattern_mode_from_string(std::string_view name);

/// Recipe for one labeled set of trees.
struct TreeGenSpec {
  int order = 2;  ///< 2 or 3
  DepthSpec depth;
  PatternMode pattern_mode = PatternMode::same;
  std::vector<std::pair<double, double>> attr_ranges;  ///< per-attribute uniform [a,b], 0 < a < b
  int count = 10;
};

void validate_gen_spec(const TreeGenSpec& spec);

/// Perturbation recipe: attribute noise on a fixed number of branches
/// plus candidate topology-noise rounds.
struct NoiseSpec {
  int attr_edges = 0;          ///< branches receiving attribute noise (all, if fewer exist)
  double attr_sd_frac = 0.30;  ///< noise SD as a fraction of the attribute value
  int topo_candidates = 0;     ///< rounds that may each add one branch
  double topo_prob = 0.5;      ///< per-round probability of actually adding
  std::pair<double, double> topo_attr_range = {2.0, 5.0};  ///< attributes of added branches
};

void validate_noise_spec(const NoiseSpec& spec);

/// Smallest shared frame covering every tree either recipe can produce:
/// order = max of the two, depth = max realizable depth, trunked.
SupportTreeSpec support_for(const TreeGenSpec& set_a, const TreeGenSpec& set_b);

/// Generates count_a + count_b labeled trees (ids a1.., b1..; labels "A",
/// "B"). Topologies follow the shared pattern mode; node branching is
/// uniform over the nonempty child subsets of the set's order (3 patterns
/// for 2-ary nodes, 7 for 3-ary), so clean trees always reach their full
/// depth. Attributes are i.i.d. uniform from each set's ranges.
/// Deterministic in (specs, seed).
std::vector<Tree> generate_dataset(const TreeGenSpec& set_a, const TreeGenSpec& set_b,
                                   std::uint64_t seed);

/// Adds zero-mean Gaussian noise (SD = attr_sd_frac * value) to every
/// attribute of min(attr_edges, #branches) branches chosen uniformly
/// without replacement. Results stay strictly positive: violating draws
/// are resampled up to 100 times, then the value is clamped to 1% of the
/// original.
Tree add_attribute_noise(const Tree& tree, const NoiseSpec& spec, std::uint64_t seed);

/// Runs topo_candidates rounds; each round, with probability topo_prob,
/// grafts one uniformly-chosen free branch (absent, parent present) with
/// attributes uniform over topo_attr_range. Trees with no free slot pass
/// through unchanged; connectivity is preserved by construction.
Tree add_topology_noise(const Tree& tree, const NoiseSpec& spec, const SupportTreeSpec& support,
                        std::uint64_t seed);

}  // namespace metatree

#endif

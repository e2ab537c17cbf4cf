#ifndef METATREE_TREE_HPP
#define METATREE_TREE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace metatree {

/// The shared m-ary indexing frame over a tree population. Branches are
/// numbered 1..p level by level, left to right; with a trunk the root
/// branch has index 1 and the indexing covers `depth` further levels
/// below it.
struct SupportTreeSpec {
  int order = 2;      ///< m, maximum children per node (>= 2)
  int depth = 1;      ///< levels of branches below the trunk (>= 1)
  bool trunk = true;  ///< whether a root trunk branch exists
  std::int64_t p = 0; ///< total branch count (derived)

  /// Index of the j-th child (1 <= j <= order) of branch i.
  /// Throws std::out_of_range if i is invalid or the child would lie
  /// below the deepest level.
  std::int64_t child_index(std::int64_t i, int j) const;

  /// Parent branch of i, or nullopt for root branches (the trunk, or
  /// every level-1 branch of a trunkless spec).
  std::optional<std::int64_t> parent_index(std::int64_t i) const;

  bool is_root_branch(std::int64_t i) const;

  /// Level of branch i: the trunk is level 0; trunkless specs start at
  /// level 1.
  int level(std::int64_t i) const;

  bool operator==(const SupportTreeSpec&) const = default;
};

/// Builds the indexing frame, deriving p from the closed-form count.
/// Rejects order < 2, depth < 1, and frames too large to index.
SupportTreeSpec build_support_spec(int order, int depth, bool trunk);

/// One attributed tree: a sparse set of (support index, attribute row)
/// pairs. Attribute rows are strictly positive; a zero attribute is only
/// representable as an absent branch.
struct Tree {
  std::string id;
  std::string label;  ///< ground-truth set name; empty = unlabeled
  std::map<std::int64_t, std::vector<double>> branches;

  /// Attribute count, 0 for an empty tree.
  int q() const { return branches.empty() ? 0 : static_cast<int>(branches.begin()->second.size()); }

  bool operator==(const Tree&) const = default;
};

/// Checks the Tree invariants against a spec: at least one branch, all
/// indices in 1..p, a consistent attribute count, strictly positive
/// attributes, and connectivity (every non-root branch's parent is
/// present). Throws std::invalid_argument on violation.
void validate_tree(const Tree& tree, const SupportTreeSpec& spec);

/// Dense p-by-q Topology-Attribute matrix of a tree: row i holds branch
/// i's attributes, or zeros if the branch is absent.
Eigen::MatrixXd to_ta_matrix(const Tree& tree, const SupportTreeSpec& spec);

/// True when every row of a T-A style matrix is entirely > threshold or
/// entirely zero.
bool positive_uniformity_ok(const Eigen::MatrixXd& ta, double threshold = 0.0);

/// Column-major stacking of a p-by-q matrix into a pq-vector.
Eigen::VectorXd vectorize(const Eigen::MatrixXd& ta);

/// Inverse of vectorize. Does not enforce positive uniformity: raw
/// factorization columns may violate it before the structure map is
/// applied. Throws std::invalid_argument on a length mismatch.
Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, Eigen::Index p, Eigen::Index q);

}  // namespace metatree

#endif

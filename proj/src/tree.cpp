#include "metatree/tree.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace metatree {
namespace {

// Total branch count: geometric sums in the order m. With a trunk the
// population is 1 + m + ... + m^depth; without, m + ... + m^depth.
std::int64_t branch_count(int order, int depth, bool trunk) {
  const std::int64_t limit = std::numeric_limits<std::int64_t>::max();
  std::int64_t total = trunk ? 1 : 0;
  std::int64_t level = trunk ? 1 : 0;  // size of the current level
  for (int d = 1; d <= depth; ++d) {
    if (level == 0) level = 1;
    if (level > limit / order) throw std::invalid_argument("support tree too large to index");
    level *= order;
    if (total > limit - level) throw std::invalid_argument("support tree too large to index");
    total += level;
  }
  return total;
}

}  // namespace

SupportTreeSpec build_support_spec(int order, int depth, bool trunk) {
  if (order < 2) throw std::invalid_argument("support tree order must be >= 2");
  if (depth < 1) throw std::invalid_argument("support tree depth must be >= 1");
  SupportTreeSpec spec;
  spec.order = order;
  spec.depth = depth;
  spec.trunk = trunk;
  spec.p = branch_count(order, depth, trunk);
  return spec;
}

std::int64_t SupportTreeSpec::child_index(std::int64_t i, int j) const {
  if (i < 1 || i > p) throw std::out_of_range("branch index out of range");
  if (j < 1 || j > order) throw std::out_of_range("child slot out of range");
  const std::int64_t c = trunk ? order * (i - 1) + j + 1 : order * i + j;
  if (c > p) throw std::out_of_range("child below deepest level");
  return c;
}

std::optional<std::int64_t> SupportTreeSpec::parent_index(std::int64_t i) const {
  if (i < 1 || i > p) throw std::out_of_range("branch index out of range");
  if (is_root_branch(i)) return std::nullopt;
  return trunk ? (i - 2) / order + 1 : (i - 1) / order;
}

bool SupportTreeSpec::is_root_branch(std::int64_t i) const {
  if (i < 1 || i > p) throw std::out_of_range("branch index out of range");
  return trunk ? i == 1 : i <= order;
}

int SupportTreeSpec::level(std::int64_t i) const {
  if (i < 1 || i > p) throw std::out_of_range("branch index out of range");
  // Walk the closed-form level boundaries; depth is small by construction.
  std::int64_t first = 1;
  std::int64_t size = trunk ? 1 : order;
  int lvl = trunk ? 0 : 1;
  while (i >= first + size) {
    first += size;
    size *= order;
    ++lvl;
  }
  return lvl;
}

void validate_tree(const Tree& tree, const SupportTreeSpec& spec) {
  if (tree.branches.empty()) throw std::invalid_argument("tree '" + tree.id + "' has no branches");
  const int q = tree.q();
  if (q < 1) throw std::invalid_argument("tree '" + tree.id + "' has an empty attribute row");
  for (const auto& [idx, attrs] : tree.branches) {
    if (idx < 1 || idx > spec.p)
      throw std::invalid_argument("tree '" + tree.id + "': branch index " + std::to_string(idx) +
                                  " outside 1.." + std::to_string(spec.p));
    if (static_cast<int>(attrs.size()) != q)
      throw std::invalid_argument("tree '" + tree.id + "': branch " + std::to_string(idx) +
                                  " has " + std::to_string(attrs.size()) + " attributes, expected " +
                                  std::to_string(q));
    for (double a : attrs) {
      if (!(a > 0.0) || !std::isfinite(a))
        throw std::invalid_argument("tree '" + tree.id + "': branch " + std::to_string(idx) +
                                    " has a non-positive or non-finite attribute");
    }
    if (auto parent = spec.parent_index(idx); parent && !tree.branches.count(*parent))
      throw std::invalid_argument("tree '" + tree.id + "': branch " + std::to_string(idx) +
                                  " is disconnected (parent " + std::to_string(*parent) +
                                  " absent)");
  }
}

Eigen::MatrixXd to_ta_matrix(const Tree& tree, const SupportTreeSpec& spec) {
  const int q = tree.q();
  Eigen::MatrixXd ta = Eigen::MatrixXd::Zero(spec.p, q);
  for (const auto& [idx, attrs] : tree.branches)
    for (int j = 0; j < q; ++j) ta(idx - 1, j) = attrs[j];
  return ta;
}

bool positive_uniformity_ok(const Eigen::MatrixXd& ta, double threshold) {
  for (Eigen::Index i = 0; i < ta.rows(); ++i) {
    bool any_pos = false, all_pos = true;
    for (Eigen::Index j = 0; j < ta.cols(); ++j) {
      if (ta(i, j) > threshold)
        any_pos = true;
      else
        all_pos = false;
      if (ta(i, j) != 0.0 && !(ta(i, j) > threshold)) return false;  // nonzero but not positive
    }
    if (any_pos && !all_pos) return false;
  }
  return true;
}

Eigen::VectorXd vectorize(const Eigen::MatrixXd& ta) {
  return Eigen::Map<const Eigen::VectorXd>(ta.data(), ta.size());
}

Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, Eigen::Index p, Eigen::Index q) {
  if (v.size() != p * q) throw std::invalid_argument("vector length does not match p*q");
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), p, q);
}

}  // namespace metatree

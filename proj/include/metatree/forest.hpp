#ifndef METATREE_FOREST_HPP
#define METATREE_FOREST_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metatree/tree.hpp"

namespace metatree {

/// Vectorized tree population: column l is vectorize(to_ta_matrix(tree_l)).
struct ForestMatrix {
  SupportTreeSpec spec;
  int q = 0;
  Eigen::MatrixXd data;           ///< pq x n, nonnegative
  std::vector<std::string> ids;   ///< n tree ids, input order
  std::vector<std::string> labels;///< empty, or n ground-truth labels ("" = unlabeled)

  Eigen::Index n() const { return data.cols(); }
};

/// Stacks validated trees column by column. All trees must share the
/// spec's frame and a single attribute count.
ForestMatrix assemble_forest(const std::vector<Tree>& trees, const SupportTreeSpec& spec);

/// Scales each attribute so its maximum over the whole forest is 1.
/// All-zero attributes are left untouched. Preserves positive uniformity.
void normalize_attributes_max(ForestMatrix& forest);

/// A forest as stored on disk: the indexing frame, attribute names, and
/// the trees themselves.
struct ForestFile {
  SupportTreeSpec spec;
  std::vector<std::string> attr_names;
  std::vector<Tree> trees;
};

/// Text forest format:
///   FOREST v1
///   order=<m> depth=<d> trunk=<0|1> attrs=<name1,...,nameq>
///   TREE id=<id> label=<label|->
///   <support-index> <attr1> ... <attrq>
///   ...
///   END
/// read(write(x)) reproduces trees, ids, labels, and attribute values
/// exactly (shortest roundtrip-safe decimals). Parse errors report the
/// offending line.
void write_forest(const ForestFile& forest, const std::filesystem::path& path);
ForestFile read_forest(const std::filesystem::path& path);

/// Plain CSV with a generated c1..cn header row; values roundtrip-safe.
void write_matrix_csv(const Eigen::MatrixXd& matrix, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Two-column id,label CSV.
void write_labels_csv(const std::vector<std::string>& ids, const std::vector<std::string>& labels,
                      const std::filesystem::path& path);
void write_labels_csv(const std::vector<std::string>& ids, const std::vector<int>& labels,
                      const std::filesystem::path& path);
std::pair<std::vector<std::string>, std::vector<std::string>> read_labels_csv(
    const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Strict full-token decimal/scientific parse.
double parse_double(std::string_view text);

}  // namespace metatree

#endif

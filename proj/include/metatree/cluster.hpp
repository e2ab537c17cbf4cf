#ifndef METATREE_CLUSTER_HPP
#define METATREE_CLUSTER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metatree/metaspace.hpp"

namespace metatree {

enum class Metric { l1, l2_path, euclid };
std::string metric_name(Metric metric);
Metric metric_from_string(std::string_view name);

enum class ClusterMethod { ncut, kmeans };
std::string method_name(ClusterMethod method);
ClusterMethod method_from_string(std::string_view name);

/// Distance between signature vectors under the chosen metric. Equal
/// vectors are at distance 0 under every metric (including the all-zero
/// pair the path construction itself rejects).
double signature_distance(Metric metric, const Eigen::VectorXd& h1, const Eigen::VectorXd& h2);

/// Columns of a matrix as individual vectors (H -> signature vectors).
std::vector<Eigen::VectorXd> matrix_columns(const Eigen::MatrixXd& m);

/// Gaussian affinity graph over a point set: w_ij = exp(-d_ij^2 / (2 sigma^2)).
struct AffinityGraph {
  Eigen::MatrixXd weights;    ///< n x n, symmetric, unit diagonal, entries in [0,1]
  double sigma = 1.0;         ///< bandwidth actually used
  bool sigma_fallback = false;///< true when the median policy degenerated (all points equal)
  Metric metric = Metric::l1;
};

/// Bandwidth defaults to the median off-diagonal pairwise distance; a
/// fixed positive value can be supplied instead. When every pairwise
/// distance is zero the median is unusable, so sigma falls back to 1 and
/// the fallback flag is set.
AffinityGraph build_affinity(const std::vector<Eigen::VectorXd>& points, Metric metric,
                             std::optional<double> fixed_sigma = std::nullopt);

struct ClusterResult {
  std::vector<int> assignments;  ///< cluster ids 0..k_c-1, first point always in cluster 0
  ClusterMethod method = ClusterMethod::kmeans;
  Metric metric = Metric::l1;
  double inertia_or_ncut_value = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> inertia_trace;  ///< K-means only: end-of-round inertia of the winning restart
};

/// k-way normalized-cut value sum_c cut(A_c, rest) / assoc(A_c, V) of an
/// assignment on a weight matrix. Every cluster must be nonempty.
double ncut_value(const Eigen::MatrixXd& weights, const std::vector<int>& assignments, int k_c);

/// Spectral partition minimizing the normalized cut. Eigenvectors come
/// from the symmetric form D^{-1/2}(D - W)D^{-1/2}. For k_c = 2 the
/// second eigenvector is swept over its sorted values and the
/// lowest-Ncut threshold wins (ties go to the lowest threshold), which
/// makes the bipartition deterministic given the graph. For k_c > 2 the
/// spectral embedding is clustered by seeded K-means (5 restarts).
ClusterResult ncut_cluster(const AffinityGraph& graph, int k_c, std::uint64_t seed);

/// Lloyd iteration with metric-based assignment (ties to the lowest
/// centroid index) and mean centroids; clusters left empty by an
/// assignment round are re-seeded from the point farthest from its own
/// centroid. Runs to a fixed point or 100 rounds, keeps the restart with
/// the smallest inertia sum d(h_i, centroid_i)^2.
ClusterResult kmeans_frechet(const std::vector<Eigen::VectorXd>& points, int k_c, Metric metric,
                             int restarts, std::uint64_t seed);

/// Best agreement fraction over all one-to-one matchings of predicted
/// cluster ids onto truth labels (assignment problem on the contingency
/// counts), so the score ignores label permutations.
double accuracy(const std::vector<int>& pred, const std::vector<std::string>& truth);
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

}  // namespace metatree

#endif

#include "metatree/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "metatree/seeding.hpp"

namespace metatree {
namespace {

void check_points(const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) throw std::invalid_argument("point set must be nonempty");
  for (const auto& pt : points)
    if (pt.size() != points.front().size())
      throw std::invalid_argument("signature dimensions differ");
}

// Relabels so cluster ids appear in first-occurrence order (point 0 is
// always in cluster 0); output files and tests then do not depend on
// internal centroid or eigenvector orientation.
void canonicalize(std::vector<int>& assignments, int k_c) {
  std::vector<int> remap(static_cast<std::size_t>(k_c), -1);
  int next = 0;
  for (int& a : assignments) {
    if (remap[static_cast<std::size_t>(a)] < 0) remap[static_cast<std::size_t>(a)] = next++;
    a = remap[static_cast<std::size_t>(a)];
  }
}

// Minimum-cost perfect matching on a square cost matrix (Hungarian
// algorithm with potentials, O(m^3)); returns the matched cost.
double min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(m) + 1, 0.0), v(u), minv(u);
  std::vector<int> match(static_cast<std::size_t>(m) + 1, 0), way(match);
  for (int i = 1; i <= m; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= m; ++j) total += cost(match[static_cast<std::size_t>(j)] - 1, j - 1);
  return total;
}

double accuracy_on_indices(const std::vector<int>& pred, const std::vector<int>& truth,
                           int pred_count, int truth_count) {
  const int m = std::max(pred_count, truth_count);
  Eigen::MatrixXd agree = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < pred.size(); ++i) agree(pred[i], truth[i]) += 1.0;
  // Maximize total agreement == minimize its negation.
  const double best = -min_cost_assignment(-agree);
  return best / static_cast<double>(pred.size());
}

}  // namespace

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::l1: return "l1";
    case Metric::l2_path: return "l2path";
    case Metric::euclid: return "euclid";
  }
  throw std::invalid_argument("unknown metric");
}

Metric metric_from_string(std::string_view name) {
  if (name == "l1") return Metric::l1;
  if (name == "l2path") return Metric::l2_path;
  if (name == "euclid") return Metric::euclid;
  throw std::invalid_argument("unknown metric '" + std::string(name) +
                              "' (expected l1, l2path or euclid)");
}

std::string method_name(ClusterMethod method) {
  switch (method) {
    case ClusterMethod::ncut: return "ncut";
    case ClusterMethod::kmeans: return "kmeans";
  }
  throw std::invalid_argument("unknown cluster method");
}

ClusterMethod method_from_string(std::string_view name) {
  if (name == "ncut") return ClusterMethod::ncut;
  if (name == "kmeans") return ClusterMethod::kmeans;
  throw std::invalid_argument("unknown cluster method '" + std::string(name) +
                              "' (expected ncut or kmeans)");
}

double signature_distance(Metric metric, const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  switch (metric) {
    case Metric::l1: return dist_l1(h1, h2);
    case Metric::euclid: return dist_euclid(h1, h2);
    case Metric::l2_path:
      if (h1 == h2) return 0.0;  // covers the all-zero pair the path rejects
      return dist_l2_path(h1, h2);
  }
  throw std::invalid_argument("unknown metric");
}

std::vector<Eigen::VectorXd> matrix_columns(const Eigen::MatrixXd& m) {
  std::vector<Eigen::VectorXd> cols;
  cols.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) cols.push_back(m.col(j));
  return cols;
}

AffinityGraph build_affinity(const std::vector<Eigen::VectorXd>& points, Metric metric,
                             std::optional<double> fixed_sigma) {
  check_points(points);
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 2) throw std::invalid_argument("affinity graph needs at least two points");

  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> offdiag;
  offdiag.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = signature_distance(metric, points[static_cast<std::size_t>(i)],
                                          points[static_cast<std::size_t>(j)]);
      dist(i, j) = dist(j, i) = d;
      offdiag.push_back(d);
    }

  AffinityGraph graph;
  graph.metric = metric;
  if (fixed_sigma) {
    if (!(*fixed_sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    graph.sigma = *fixed_sigma;
  } else {
    std::sort(offdiag.begin(), offdiag.end());
    const std::size_t mid = offdiag.size() / 2;
    const double median =
        offdiag.size() % 2 ? offdiag[mid] : 0.5 * (offdiag[mid - 1] + offdiag[mid]);
    if (median > 0.0) {
      graph.sigma = median;
    } else {
      graph.sigma = 1.0;  // all points coincide; any bandwidth gives the same unit graph
      graph.sigma_fallback = true;
    }
  }
  graph.weights =
      (-dist.array().square() / (2.0 * graph.sigma * graph.sigma)).exp().matrix();
  graph.weights.diagonal().setOnes();
  return graph;
}

double ncut_value(const Eigen::MatrixXd& weights, const std::vector<int>& assignments, int k_c) {
  const auto n = weights.rows();
  if (static_cast<Eigen::Index>(assignments.size()) != n)
    throw std::invalid_argument("assignment length does not match the graph");
  const Eigen::VectorXd degree = weights.rowwise().sum();
  std::vector<double> assoc(static_cast<std::size_t>(k_c), 0.0);
  std::vector<double> within(static_cast<std::size_t>(k_c), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = assignments[static_cast<std::size_t>(i)];
    if (c < 0 || c >= k_c) throw std::invalid_argument("cluster id out of range");
    assoc[static_cast<std::size_t>(c)] += degree(i);
    for (Eigen::Index j = 0; j < n; ++j)
      if (assignments[static_cast<std::size_t>(j)] == c)
        within[static_cast<std::size_t>(c)] += weights(i, j);
  }
  double value = 0.0;
  for (int c = 0; c < k_c; ++c) {
    if (!(assoc[static_cast<std::size_t>(c)] > 0.0))
      throw std::invalid_argument("cluster " + std::to_string(c) + " is empty or degree-free");
    value += (assoc[static_cast<std::size_t>(c)] - within[static_cast<std::size_t>(c)]) /
             assoc[static_cast<std::size_t>(c)];
  }
  return value;
}

ClusterResult ncut_cluster(const AffinityGraph& graph, int k_c, std::uint64_t seed) {
  const Eigen::MatrixXd& W = graph.weights;
  const auto n = W.rows();
  if (W.cols() != n || n < 2) throw std::invalid_argument("affinity matrix must be square, n >= 2");
  if (k_c < 2 || k_c > n) throw std::invalid_argument("cluster count must be in 2..n");

  const Eigen::VectorXd degree = W.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(degree(i) > 0.0))
      throw std::invalid_argument("node " + std::to_string(i) + " has zero degree");

  const Eigen::VectorXd dihalf = degree.array().rsqrt();
  Eigen::MatrixXd lsym = Eigen::MatrixXd::Identity(n, n) -
                         dihalf.asDiagonal() * W * dihalf.asDiagonal();
  lsym = 0.5 * (lsym + lsym.transpose()).eval();  // scrub asymmetric roundoff
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lsym);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");

  ClusterResult result;
  result.method = ClusterMethod::ncut;
  result.metric = graph.metric;
  result.seed = seed;

  if (k_c == 2) {
    // Generalized eigenvector x = D^{-1/2} y for the second-smallest pair.
    const Eigen::VectorXd x = dihalf.asDiagonal() * eig.eigenvectors().col(1);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });

    // Threshold sweep: after m points the left side is {x <= x(order[m-1])}.
    // A split inside a run of equal values is not a threshold, so it is
    // skipped — unless the vector is constant, in which case every prefix
    // is admitted to keep the operation total.
    std::vector<bool> admissible(static_cast<std::size_t>(n), false);
    bool any = false;
    for (Eigen::Index m = 1; m < n; ++m) {
      const bool ok = x(order[static_cast<std::size_t>(m - 1)]) != x(order[static_cast<std::size_t>(m)]);
      admissible[static_cast<std::size_t>(m)] = ok;
      any = any || ok;
    }
    if (!any) std::fill(admissible.begin() + 1, admissible.end(), true);

    const double total_assoc = degree.sum();
    std::vector<double> link_to_left(static_cast<std::size_t>(n), 0.0);
    double cut = 0.0, assoc_left = 0.0;
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_m = 1;
    for (Eigen::Index m = 1; m < n; ++m) {
      const Eigen::Index v = order[static_cast<std::size_t>(m - 1)];
      // Move v from the right side to the left side.
      cut += degree(v) - W(v, v) - 2.0 * link_to_left[static_cast<std::size_t>(v)];
      assoc_left += degree(v);
      for (Eigen::Index j = 0; j < n; ++j) link_to_left[static_cast<std::size_t>(j)] += W(j, v);
      if (!admissible[static_cast<std::size_t>(m)]) continue;
      const double assoc_right = total_assoc - assoc_left;
      const double value = cut / assoc_left + cut / assoc_right;
      if (value < best) {
        best = value;
        best_m = m;
      }
    }

    result.assignments.assign(static_cast<std::size_t>(n), 1);
    for (Eigen::Index m = 0; m < best_m; ++m)
      result.assignments[static_cast<std::size_t>(order[static_cast<std::size_t>(m)])] = 0;
    result.inertia_or_ncut_value = best;
  } else {
    Eigen::MatrixXd embedding(n, k_c);
    for (int j = 0; j < k_c; ++j)
      embedding.col(j) = dihalf.asDiagonal() * eig.eigenvectors().col(j);
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) rows.push_back(embedding.row(i).transpose());
    ClusterResult inner = kmeans_frechet(rows, k_c, Metric::euclid, 5, seed);
    result.assignments = std::move(inner.assignments);
    result.inertia_or_ncut_value = ncut_value(W, result.assignments, k_c);
  }
  canonicalize(result.assignments, k_c);
  return result;
}

ClusterResult kmeans_frechet(const std::vector<Eigen::VectorXd>& points, int k_c, Metric metric,
                             int restarts, std::uint64_t seed) {
  check_points(points);
  const int n = static_cast<int>(points.size());
  if (k_c < 1 || k_c > n) throw std::invalid_argument("cluster count must be in 1..n");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");

  auto dist_to = [&](int i, const Eigen::VectorXd& centroid) {
    return signature_distance(metric, points[static_cast<std::size_t>(i)], centroid);
  };

  ClusterResult best;
  best.method = ClusterMethod::kmeans;
  best.metric = metric;
  best.seed = seed;
  double best_inertia = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 gen(derive_seed(seed, static_cast<std::uint64_t>(r)));
    // k_c distinct starting points via partial Fisher-Yates.
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<Eigen::VectorXd> centroids;
    centroids.reserve(static_cast<std::size_t>(k_c));
    for (int c = 0; c < k_c; ++c) {
      std::uniform_int_distribution<int> pick(c, n - 1);
      std::swap(idx[static_cast<std::size_t>(c)], idx[static_cast<std::size_t>(pick(gen))]);
      centroids.push_back(points[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])]);
    }

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    std::vector<double> trace;
    auto current_inertia = [&] {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d =
            dist_to(i, centroids[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])]);
        total += d * d;
      }
      return total;
    };
    for (int round = 0; round < 100; ++round) {
      std::vector<int> next(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double dmin = dist_to(i, centroids[0]);
        for (int c = 1; c < k_c; ++c) {
          const double d = dist_to(i, centroids[static_cast<std::size_t>(c)]);
          if (d < dmin) {  // ties keep the lowest centroid index
            dmin = d;
            arg = c;
          }
        }
        next[static_cast<std::size_t>(i)] = arg;
      }

      // Re-seed clusters the assignment left empty: the point farthest
      // from its own centroid moves over (donor clusters must keep >= 2
      // members so the fix never cascades).
      std::vector<int> size(static_cast<std::size_t>(k_c), 0);
      for (int a : next) ++size[static_cast<std::size_t>(a)];
      for (int c = 0; c < k_c; ++c) {
        if (size[static_cast<std::size_t>(c)] > 0) continue;
        int move = -1;
        double dmax = -1.0;
        for (int i = 0; i < n; ++i) {
          const int cur = next[static_cast<std::size_t>(i)];
          if (size[static_cast<std::size_t>(cur)] < 2) continue;
          const double d = dist_to(i, centroids[static_cast<std::size_t>(cur)]);
          if (d > dmax) {
            dmax = d;
            move = i;
          }
        }
        if (move < 0) break;  // fewer distinct points than clusters; leave empty
        --size[static_cast<std::size_t>(next[static_cast<std::size_t>(move)])];
        next[static_cast<std::size_t>(move)] = c;
        size[static_cast<std::size_t>(c)] = 1;
      }

      const bool settled = next == assign;
      assign = std::move(next);
      if (settled) break;

      for (int c = 0; c < k_c; ++c) {
        std::vector<Eigen::VectorXd> members;
        for (int i = 0; i < n; ++i)
          if (assign[static_cast<std::size_t>(i)] == c)
            members.push_back(points[static_cast<std::size_t>(i)]);
        if (!members.empty()) centroids[static_cast<std::size_t>(c)] = frechet_mean(members);
      }
      trace.push_back(current_inertia());
    }

    const double inertia = current_inertia();
    trace.push_back(inertia);
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best.assignments = std::move(assign);
      best.inertia_or_ncut_value = inertia;
      best.inertia_trace = std::move(trace);
    }
  }
  canonicalize(best.assignments, k_c);
  return best;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("prediction/truth length mismatch");
  if (pred.empty()) throw std::invalid_argument("nothing to score");
  std::vector<int> pred_ids(pred.size()), truth_ids(truth.size());
  std::vector<int> pred_seen, truth_seen;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto at = std::find(pred_seen.begin(), pred_seen.end(), pred[i]);
    if (at == pred_seen.end()) {
      pred_seen.push_back(pred[i]);
      at = std::prev(pred_seen.end());
    }
    pred_ids[i] = static_cast<int>(at - pred_seen.begin());
    auto bt = std::find(truth_seen.begin(), truth_seen.end(), truth[i]);
    if (bt == truth_seen.end()) {
      truth_seen.push_back(truth[i]);
      bt = std::prev(truth_seen.end());
    }
    truth_ids[i] = static_cast<int>(bt - truth_seen.begin());
  }
  return accuracy_on_indices(pred_ids, truth_ids, static_cast<int>(pred_seen.size()),
                             static_cast<int>(truth_seen.size()));
}

double accuracy(const std::vector<int>& pred, const std::vector<std::string>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("prediction/truth length mismatch");
  std::vector<int> truth_ids(truth.size());
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto at = std::find(seen.begin(), seen.end(), truth[i]);
    if (at == seen.end()) {
      seen.push_back(truth[i]);
      at = std::prev(seen.end());
    }
    truth_ids[i] = static_cast<int>(at - seen.begin());
  }
  return accuracy(pred, truth_ids);
}

}  // namespace metatree

#ifndef METATREE_METASPACE_HPP
#define METATREE_METASPACE_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace metatree {

/// Signature vectors are nonnegative k-vectors (columns of H); the
/// functions below are the geometry of that cone.

/// Sum of absolute coordinate differences.
double dist_l1(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2);

/// Straight-line (L2) distance, the baseline the path distance is
/// compared against.
double dist_euclid(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2);

/// Piecewise-linear transition path h1 -> c1 -> c -> c2 -> h2 through a
/// shared consensus ray: c1, c, c2 all lie on the ray from the origin
/// through u = componentwise min(h1,h2) (or h1+h2 when that min is zero).
struct ConePath {
  std::array<Eigen::VectorXd, 5> waypoints;  ///< h1, c1, c, c2, h2
  std::array<double, 4> leg_lengths_l2;
  std::array<double, 4> leg_lengths_l1;
};

/// Builds the path: c1 and c2 are the orthogonal projections of h1 and h2
/// onto the consensus ray (clamped to the nonnegative ray), c their
/// midpoint. Inputs must be nonnegative, same dimension, not both zero.
ConePath cone_path(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2);

/// Path distance: the two bent halves h1->c1->c and c->c2->h2 are each
/// unfolded flat (the projection legs are orthogonal to the ray), giving
/// sqrt(d(h1,c1)^2 + d(c1,c)^2) + sqrt(d(c,c2)^2 + d(c2,h2)^2).
/// Always >= dist_euclid(h1,h2).
double dist_l2_path(const ConePath& path);
double dist_l2_path(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2);

/// Unfolded-path worst-case ratio between the L1 and L2 readings of a
/// two-leg-per-half path: (a1+b1+a2+b2) / (sqrt(a1^2+b1^2) + sqrt(a2^2+b2^2)).
/// Bounded by sqrt(2), attained exactly when a1=b1 and a2=b2.
double cone_ratio(double a1, double b1, double a2, double b2);

/// Mean under the weighted-midpoint recursion m <- ((i-1)m + h_i)/i.
/// In this linear cone it equals the coordinatewise arithmetic mean, so
/// it is independent of incorporation order and stays nonnegative.
Eigen::VectorXd frechet_mean(const std::vector<Eigen::VectorXd>& points);

}  // namespace metatree

#endif

#include "metatree/metaspace.hpp"

#include <cmath>
#include <stdexcept>

namespace metatree {
namespace {

void check_pair(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  if (h1.size() != h2.size()) throw std::invalid_argument("signature dimensions differ");
  if (h1.size() == 0) throw std::invalid_argument("signature vectors must be nonempty");
}

}  // namespace

double dist_l1(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  check_pair(h1, h2);
  return (h1 - h2).lpNorm<1>();
}

double dist_euclid(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  check_pair(h1, h2);
  return (h1 - h2).norm();
}

ConePath cone_path(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  check_pair(h1, h2);
  if ((h1.array() < 0.0).any() || (h2.array() < 0.0).any())
    throw std::invalid_argument("signature vectors must be nonnegative");

  Eigen::VectorXd u = h1.cwiseMin(h2);
  if (!(u.squaredNorm() > 0.0)) u = h1 + h2;  // disjoint supports: bend through the sum ray
  const double uu = u.squaredNorm();
  if (!(uu > 0.0)) throw std::invalid_argument("cone path undefined for two zero vectors");

  const Eigen::VectorXd c1 = std::max(h1.dot(u) / uu, 0.0) * u;
  const Eigen::VectorXd c2 = std::max(h2.dot(u) / uu, 0.0) * u;
  const Eigen::VectorXd c = 0.5 * (c1 + c2);

  ConePath path;
  path.waypoints = {h1, c1, c, c2, h2};
  for (int leg = 0; leg < 4; ++leg) {
    const Eigen::VectorXd d = path.waypoints[leg + 1] - path.waypoints[leg];
    path.leg_lengths_l2[static_cast<std::size_t>(leg)] = d.norm();
    path.leg_lengths_l1[static_cast<std::size_t>(leg)] = d.lpNorm<1>();
  }
  return path;
}

double dist_l2_path(const ConePath& path) {
  const auto& l = path.leg_lengths_l2;
  return std::hypot(l[0], l[1]) + std::hypot(l[2], l[3]);
}

double dist_l2_path(const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  return dist_l2_path(cone_path(h1, h2));
}

double cone_ratio(double a1, double b1, double a2, double b2) {
  if (a1 < 0.0 || b1 < 0.0 || a2 < 0.0 || b2 < 0.0)
    throw std::invalid_argument("leg lengths must be nonnegative");
  const double denom = std::hypot(a1, b1) + std::hypot(a2, b2);
  if (!(denom > 0.0)) throw std::invalid_argument("cone ratio undefined for all-zero legs");
  return (a1 + b1 + a2 + b2) / denom;
}

Eigen::VectorXd frechet_mean(const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) throw std::invalid_argument("mean of an empty set is undefined");
  Eigen::VectorXd mean = points.front();
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].size() != mean.size())
      throw std::invalid_argument("signature dimensions differ");
    // Weighted midpoint: the running mean absorbs one point at a time.
    mean = (static_cast<double>(i) * mean + points[i]) / static_cast<double>(i + 1);
  }
  return mean;
}

}  // namespace metatree

#ifndef METATREE_SCNMF_HPP
#define METATREE_SCNMF_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "metatree/forest.hpp"

namespace metatree {

struct FactorizationConfig {
  int rank = 8;                ///< k, number of meta-trees
  int max_iters = 500;         ///< sweep cap per restart
  double rel_tol = 1e-6;       ///< relative objective change considered "no progress"
  double lambda = 1e-3;        ///< structure-correction magnitude; must exceed pos_threshold
  double epsilon = 1e-12;      ///< denominator guard in the multiplicative updates
  double pos_threshold = 1e-9; ///< entries above this count as positive in the structure map
  int restarts = 5;
  std::uint64_t seed = 0;
};

/// Result of a factorization F ~ W_constrained * H. Columns of
/// W_constrained are meta-trees (each a valid vectorized T-A matrix up to
/// the positivity threshold); columns of H are per-tree signature vectors.
struct MetaBasis {
  Eigen::MatrixXd W_constrained;       ///< pq x k, every column a structure-map fixed point
  Eigen::MatrixXd H;                   ///< k x n, nonnegative
  std::vector<double> objective_trace; ///< squared-residual objective, init + one per sweep
  bool converged = false;              ///< stopped on the tolerance rule, not the iteration cap
};

/// Structure map on one vectorized p-by-q column: rows with both positive
/// (> pos_threshold) and zero-like entries get their zero-like entries
/// raised to lambda; rows with no positive entry are zeroed; all-positive
/// rows pass through. Idempotent whenever lambda > pos_threshold.
Eigen::VectorXd tau_column(const Eigen::VectorXd& column, Eigen::Index p, Eigen::Index q,
                           double lambda, double pos_threshold);

/// tau_column applied to every column of a pq-by-k matrix.
Eigen::MatrixXd apply_tau(const Eigen::MatrixXd& W, Eigen::Index p, Eigen::Index q, double lambda,
                          double pos_threshold);

/// One multiplicative basis step: W * (F Ht) / (Wc (H Ht) + eps),
/// elementwise at matching positions. Preserves nonnegativity.
Eigen::MatrixXd w_multiplicative_step(const Eigen::MatrixXd& F, const Eigen::MatrixXd& W,
                                      const Eigen::MatrixXd& Wc, const Eigen::MatrixXd& H,
                                      double epsilon);

/// One multiplicative coefficient step: H * (Wc' F) / ((Wc' Wc) H + eps).
/// With Wc held fixed this never increases the objective (up to the eps
/// guard's numerical slack).
Eigen::MatrixXd h_multiplicative_step(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Wc,
                                      const Eigen::MatrixXd& H, double epsilon);

/// Squared Frobenius norm of F - Wc * H.
double objective(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Wc, const Eigen::MatrixXd& H);

/// Single factorization run from explicit starting factors (the structure
/// map is applied to W0 on entry so the iterate invariant holds).
/// Ignores cfg.restarts and cfg.seed.
MetaBasis scnmf_run(const Eigen::MatrixXd& F, Eigen::Index p, Eigen::Index q,
                    const FactorizationConfig& cfg, const Eigen::MatrixXd& W0,
                    const Eigen::MatrixXd& H0);

/// Full factorization: cfg.restarts runs from seeded uniform-(0,1]
/// starting factors scaled by sqrt(mean(F)/k), best final objective wins.
/// Deterministic for a fixed seed and config.
MetaBasis scnmf_factorize(const Eigen::MatrixXd& F, Eigen::Index p, Eigen::Index q,
                          const FactorizationConfig& cfg);
MetaBasis scnmf_factorize(const ForestMatrix& forest, const FactorizationConfig& cfg);

}  // namespace metatree

#endif

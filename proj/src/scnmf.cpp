#include "metatree/scnmf.hpp"

#include <limits>
#include <random>
#include <stdexcept>

#include "metatree/seeding.hpp"

namespace metatree {
namespace {

void validate_config(const FactorizationConfig& cfg) {
  if (cfg.rank < 1) throw std::invalid_argument("rank must be >= 1");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(cfg.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(cfg.pos_threshold >= 0.0)) throw std::invalid_argument("pos_threshold must be >= 0");
  if (!(cfg.lambda > cfg.pos_threshold))
    throw std::invalid_argument("lambda must exceed pos_threshold (the correction must itself "
                                "count as positive)");
  if (cfg.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
}

void validate_data(const Eigen::MatrixXd& F, Eigen::Index p, Eigen::Index q) {
  if (p < 1 || q < 1 || F.rows() != p * q) throw std::invalid_argument("F must be pq x n");
  if (F.cols() < 1) throw std::invalid_argument("F must have at least one column");
  if ((F.array() < 0.0).any()) throw std::invalid_argument("F must be nonnegative");
  if (!(F.maxCoeff() > 0.0)) throw std::invalid_argument("F must not be all zero");
}

}  // namespace

Eigen::VectorXd tau_column(const Eigen::VectorXd& column, Eigen::Index p, Eigen::Index q,
                           double lambda, double pos_threshold) {
  if (column.size() != p * q) throw std::invalid_argument("column length does not match p*q");
  if ((column.array() < 0.0).any())
    throw std::invalid_argument("structure map requires nonnegative entries");
  Eigen::VectorXd out = column;
  // Entry (i,j) of the unvectorized p x q matrix sits at j*p + i.
  for (Eigen::Index i = 0; i < p; ++i) {
    bool any_pos = false, any_zero = false;
    for (Eigen::Index j = 0; j < q; ++j)
      (column(j * p + i) > pos_threshold ? any_pos : any_zero) = true;
    if (any_pos && any_zero) {
      for (Eigen::Index j = 0; j < q; ++j)
        if (!(out(j * p + i) > pos_threshold)) out(j * p + i) = lambda;
    } else if (!any_pos) {
      for (Eigen::Index j = 0; j < q; ++j) out(j * p + i) = 0.0;
    }
  }
  return out;
}

Eigen::MatrixXd apply_tau(const Eigen::MatrixXd& W, Eigen::Index p, Eigen::Index q, double lambda,
                          double pos_threshold) {
  Eigen::MatrixXd out(W.rows(), W.cols());
  for (Eigen::Index c = 0; c < W.cols(); ++c)
    out.col(c) = tau_column(W.col(c), p, q, lambda, pos_threshold);
  return out;
}

Eigen::MatrixXd w_multiplicative_step(const Eigen::MatrixXd& F, const Eigen::MatrixXd& W,
                                      const Eigen::MatrixXd& Wc, const Eigen::MatrixXd& H,
                                      double epsilon) {
  const Eigen::MatrixXd numer = F * H.transpose();
  const Eigen::MatrixXd denom = Wc * (H * H.transpose());
  return (W.array() * numer.array() / (denom.array() + epsilon)).matrix();
}

Eigen::MatrixXd h_multiplicative_step(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Wc,
                                      const Eigen::MatrixXd& H, double epsilon) {
  const Eigen::MatrixXd numer = Wc.transpose() * F;
  const Eigen::MatrixXd denom = (Wc.transpose() * Wc) * H;
  return (H.array() * numer.array() / (denom.array() + epsilon)).matrix();
}

double objective(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Wc, const Eigen::MatrixXd& H) {
  if (Wc.rows() != F.rows() || Wc.cols() != H.rows() || H.cols() != F.cols())
    throw std::invalid_argument("factor shapes do not conform with F");
  return (F - Wc * H).squaredNorm();
}

MetaBasis scnmf_run(const Eigen::MatrixXd& F, Eigen::Index p, Eigen::Index q,
                    const FactorizationConfig& cfg, const Eigen::MatrixXd& W0,
                    const Eigen::MatrixXd& H0) {
  validate_config(cfg);
  validate_data(F, p, q);
  if (W0.rows() != F.rows() || W0.cols() != cfg.rank || H0.rows() != cfg.rank ||
      H0.cols() != F.cols())
    throw std::invalid_argument("starting factor shapes do not match rank and F");

  MetaBasis basis;
  basis.W_constrained = apply_tau(W0, p, q, cfg.lambda, cfg.pos_threshold);
  basis.H = H0;
  basis.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);
  basis.objective_trace.push_back(objective(F, basis.W_constrained, basis.H));

  // Below this the residual is rounding noise of the data itself; relative
  // change is then meaningless (0/0 at an exact fit), so such sweeps count
  // as quiet too.
  const double noise_floor = std::numeric_limits<double>::epsilon() * F.squaredNorm();
  int quiet_sweeps = 0;  // consecutive sweeps with relative change below rel_tol
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    Eigen::MatrixXd W = w_multiplicative_step(F, basis.W_constrained, basis.W_constrained,
                                              basis.H, cfg.epsilon);
    basis.W_constrained = apply_tau(W, p, q, cfg.lambda, cfg.pos_threshold);
    basis.H = h_multiplicative_step(F, basis.W_constrained, basis.H, cfg.epsilon);

    const double prev = basis.objective_trace.back();
    const double cur = objective(F, basis.W_constrained, basis.H);
    basis.objective_trace.push_back(cur);
    const double rel = std::abs(prev - cur) / std::max(prev, std::numeric_limits<double>::min());
    quiet_sweeps = (rel < cfg.rel_tol || cur <= noise_floor) ? quiet_sweeps + 1 : 0;
    if (quiet_sweeps >= 10) {
      basis.converged = true;
      break;
    }
  }
  return basis;
}

MetaBasis scnmf_factorize(const Eigen::MatrixXd& F, Eigen::Index p, Eigen::Index q,
                          const FactorizationConfig& cfg) {
  validate_config(cfg);
  validate_data(F, p, q);

  const double scale = std::sqrt(F.mean() / cfg.rank);
  MetaBasis best;
  double best_objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 gen(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&] { return scale * (1.0 - unit(gen)); };  // uniform on (0,1], scaled

    Eigen::MatrixXd W0(F.rows(), cfg.rank), H0(cfg.rank, F.cols());
    for (Eigen::Index j = 0; j < W0.cols(); ++j)
      for (Eigen::Index i = 0; i < W0.rows(); ++i) W0(i, j) = draw();
    for (Eigen::Index j = 0; j < H0.cols(); ++j)
      for (Eigen::Index i = 0; i < H0.rows(); ++i) H0(i, j) = draw();

    MetaBasis run = scnmf_run(F, p, q, cfg, W0, H0);
    if (run.objective_trace.back() < best_objective) {
      best_objective = run.objective_trace.back();
      best = std::move(run);
    }
  }
  return best;
}

MetaBasis scnmf_factorize(const ForestMatrix& forest, const FactorizationConfig& cfg) {
  return scnmf_factorize(forest.data, forest.spec.p, forest.q, cfg);
}

}  // namespace metatree

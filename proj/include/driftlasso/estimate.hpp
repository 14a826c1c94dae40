#pragma once

#include "driftlasso/model.hpp"
#include "driftlasso/simulate.hpp"

#include <vector>

namespace driftlasso {

/// The discretized contrast R_T(theta) as an explicit quadratic
///
///   R_T(theta) = constant + linear^T theta + delta_n * theta^T gram theta,
///
/// where gram_{jk} = <phi_j, phi_k>_D, the empirical Fisher information.
/// All three pieces are averages over `count` increments, so systems built
/// on disjoint blocks of one path combine by count-weighted averaging.
struct GramSystem {
  Matrix gram;
  Vector linear;
  double constant = 0.0;
  double delta_n = 0.0;
  int count = 0;

  int params() const noexcept { return static_cast<int>(linear.size()); }
  double objective(const Vector& theta) const;
  /// linear + 2 delta_n gram theta
  Vector gradient(const Vector& theta) const;
};

GramSystem build_gram(const Trajectory& traj, const DriftBasis& basis);

/// Same, over increments first..last-1 (increment i is X_{t_{i+1}} - X_{t_i}).
GramSystem build_gram(const Trajectory& traj, const DriftBasis& basis, int first, int last);

/// Count-weighted average of systems built on disjoint increment blocks.
GramSystem combine_grams(const std::vector<const GramSystem*>& parts);

double soft_threshold(double z, double gamma);

struct LassoConfig {
  double tol = 1e-9;        ///< max coordinate change per sweep at convergence
  int max_sweeps = 10000;
  double snap = 1e-12;      ///< |theta_j| below this becomes exactly 0
  bool record_objective = false;
};

struct EstimationResult {
  Vector theta_hat;
  double lambda = 0.0;
  int sweeps_used = 0;
  double kkt_residual = 0.0;
  bool converged = false;
  std::vector<int> pinned;  ///< coordinates with a zero Gram diagonal, held at 0
  int rank = -1;            ///< numerical rank (MLE only)
  bool rank_deficient = false;
  std::vector<double> objective_trace;  ///< penalized objective after each sweep
};

/// R_T(theta) + lambda |theta|_1 under the quadratic representation.
double penalized_objective(const GramSystem& sys, const Vector& theta, double lambda);

/// Largest violation of the Lasso subgradient conditions at theta.
double kkt_residual(const GramSystem& sys, const Vector& theta, double lambda);

/// Cyclic coordinate descent (ascending index order) with exact scalar prox steps.
EstimationResult lasso_solve(const GramSystem& sys, double lambda, const LassoConfig& config = {},
                             const Vector* warm_start = nullptr);

/// Minimum-norm solution of 2 delta_n gram theta = -linear.
EstimationResult mle_solve(const GramSystem& sys);

/// Warm-started solutions along a strictly descending grid.
std::vector<EstimationResult> lasso_path(const GramSystem& sys, const std::vector<double>& lambdas,
                                         const LassoConfig& config = {});

/// Sign-pattern enumeration for p <= 3 (test oracle).
Vector brute_force_lasso(const GramSystem& sys, double lambda);

/// C_T = (1/n) sum_{i=1}^n X_{t_{i-1}} X_{t_{i-1}}^T.
Matrix empirical_covariance(const Trajectory& traj);

/// Row r of the OU problem: gram = C_T, linear_c = (2/n) sum X^c_{t_{i-1}} Delta X^r_i.
GramSystem ou_row_system(const Trajectory& traj, const Matrix& c_t, int row);

struct OUEstimate {
  Matrix a_hat;
  std::vector<EstimationResult> rows;
  bool converged() const;
};

/// Lasso for the interaction matrix, solved as d independent row problems.
OUEstimate lasso_ou(const Trajectory& traj, double lambda, const LassoConfig& config = {});

struct CvResult {
  double lambda_star = 0.0;
  std::vector<double> lambdas;     ///< grid in the caller's order
  Matrix fold_scores;              ///< grid.size() x folds held-out contrasts
  Vector mean_score;
  bool short_block_warning = false;
};

/// Blocked K-fold CV: contiguous time blocks, fit on the complement, score by
/// the unpenalized contrast of the held-out block. Ties go to the larger lambda.
CvResult cross_validate(const Trajectory& traj, const DriftBasis& basis,
                        const std::vector<double>& lambdas, int folds,
                        const LassoConfig& config = {});

/// Same, on per-block systems already built (block k covers fold k).
CvResult cross_validate_blocks(const std::vector<GramSystem>& blocks,
                               const std::vector<double>& lambdas, const LassoConfig& config = {});

/// Log-spaced descending grid from lambda_max down to ratio * lambda_max.
std::vector<double> log_grid(double lambda_max, double ratio, int size);

}  // namespace driftlasso

#pragma once

#include "driftlasso/estimate.hpp"
#include "driftlasso/model.hpp"
#include "driftlasso/simulate.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace driftlasso {

/// Model-dependent constants entering the tuning thresholds.
///
/// L and M are the Lipschitz and monotonicity constants of the drift at the
/// true parameter; R bounds the growth of the basis against the second
/// moments of the state; H_dn and K_dn come out of the concentration bound
/// for the martingale and design sets; C_b is the (non-derivable)
/// discretization constant; l is the restricted-eigenvalue bound and
/// 0 < k < sqrt(l) the norm-equivalence constant of the design set.
struct ModelConstants {
  double L = 1.0;
  double M = 1.0;
  double R = 1.0;
  double H_dn = 1.0;
  double K_dn = 1.0;
  double C_b = 1.0;
  double l = 1.0;
  double k = 0.5;
  double gamma = 1.0;

  /// Throws InvalidInput unless all constants are positive and k^2 < l.
  void validate() const;
};

/// 32 dn^2 e^{4 L dn} max_lip_sq / (1 - e^{-M dn})^2, with max_lip_sq the
/// largest squared Lipschitz norm of the coordinates of |phi_j|^2.
double h_delta(double L, double M, double delta_n, double max_lip_sq);

/// 16 dn^2 e^{4 L dn} |M_Lip|_op^2 / (1 - e^{-M dn})^2.
double k_delta(double L, double M, double delta_n, double lip_matrix_op_norm);

/// 2 C^2 (1 + m2), C the per-coordinate growth constant of the phi_j and m2
/// the largest per-coordinate second moment of the state.
double moment_constant(double growth, double max_second_moment);

/// Largest per-coordinate mean of X^2 along a path.
double max_second_moment(const Trajectory& traj);

/// Cosine-family constants at theta0: L = L_0 + sum_j |theta_j| L_j, the
/// one-sided monotonicity bound M = 3 s_anchor - sum_j |theta_j| L_j (may be
/// non-positive, in which case the caller must supply M), H_dn from
/// max_j L_j^2, K_dn from L_ij = sqrt(d) (L_i + L_j), R from growth 1.
struct CosineConstantParts {
  double L = 0.0;
  double M_lower = 0.0;
  double max_lip_sq = 0.0;
  double lip_matrix_op_norm = 0.0;
  double growth = 1.0;
};
CosineConstantParts cosine_constant_parts(const DriftBasis& basis, const Vector& theta0);

struct Dims {
  int d = 1;
  int p = 1;
  int n = 1;
  int s = 1;
};

/// Thresholds for the linear model (ou == false) or the OU model (ou == true).
struct TuningConstants {
  bool ou = false;
  double epsilon = 0.1;
  double lambda_11 = 0.0;
  double lambda_12 = 0.0;
  double lambda_1 = 0.0;
  double lambda_2 = 0.0;
  double T_1 = 0.0;
  double lambda_1_ou = 0.0;
  double lambda_2_ou = 0.0;
  double T_1_ou = 0.0;  ///< evaluated at confidence 3 epsilon / 4
  double log_alpha = 0.0;
  double beta = 0.0;

  /// max(lambda_1, lambda_2) or its OU counterpart.
  double lambda() const;
  /// T_1 or T_1_ou.
  double horizon() const;
};

// Building blocks; `log_term` is the bracketed logarithm of each formula.
double lambda_11(double d, double R, double delta_n, double n, double log_term);
double lambda_12(double d, double H_dn, double delta_n, double n, double log_term);
double lambda_2_linear(double C_b, double s, double d, double delta_n, double log_term);
/// ln(21^{2s} (p^{2s} ^ (e p / 2s)^{2s})) in log space.
double log_support_count(double p, double s);
double t1_linear(double d, double K_dn, double gamma, double l, double k, double epsilon,
                 double log_count);

TuningConstants tuning_constants_linear(const ModelConstants& mc, const Dims& dims,
                                        double delta_n, double epsilon);

double lambda_1_ou(double delta_n, double a_frak, double l_min, double k, double n, double log_term);
double lambda_2_ou(double C_b_ou, double d, double delta_n, double log_term);
/// ln(21^{2s} 2d (d^{4s} ^ (e d^2 / 2s))^{2s}).
double log_alpha_ou(double d, double s);
double beta_ou(double gamma);
double t1_ou(const OUModel& ou, double k, double epsilon, double log_alpha, double beta);

TuningConstants tuning_constants_ou(const OUModel& ou, int d, int n, int s, double delta_n,
                                    double epsilon, double gamma, double k, double C_b_ou);

/// m / (8 p0 l_max) * x^2 / (x + l_max).
double h0(double x, const OUModel& ou);

/// 2 exp(-n dn H_0(x)): tail bound for |v^T (C_T - C_inf) v| as dn -> 0.
double ou_tail_bound(double x, const OUModel& ou, int n, double delta_n);

/// exp(-r^2 n (1 - e^{-M dn})^2 / (64 d lip^2 dn e^{4 L dn})).
double linear_tail_bound(double r, int n, double delta_n, int d, double f_lip, double M, double L);

/// 4 lambda^2 s (2+gamma)^2 / (k^2 gamma dn^2).
double oracle_remainder(double lambda, int s, double gamma, double k, double delta_n);
/// Error bounds that follow from the oracle inequality at theta = theta0.
double l2_error_bound(double lambda, int s, double gamma, double k, double delta_n);
double l1_error_bound(double lambda, int s, double gamma, double k, double delta_n);

struct EventStatistics {
  double stat_T = 0.0;
  double stat_Tp = 0.0;
  double k_hat = 0.0;  ///< upper bound on the cone infimum
  bool holds_T = false;
  bool holds_Tp = false;
  bool holds_Tpp = false;
  bool exhaustive_supports = false;
  int directions_checked = 0;
};

/// |(1/n) sum Phi(X_{t_{i-1}})^T Delta W_i|_inf.
double martingale_statistic(const Trajectory& traj, const NoiseRecord& noise, const DriftBasis& basis);

/// |(1/n) sum Phi(X_{t_{i-1}})^T int (b(X_s) - b(X_{t_{i-1}})) ds|_inf with a
/// left-endpoint sum over the recorded fine states.
double approximation_statistic(const Trajectory& traj, const NoiseRecord& noise,
                               const DriftBasis& basis, const SparseParam& theta0);

struct ConeBound {
  double k_hat = 0.0;
  bool exhaustive_supports = false;
  int directions_checked = 0;
  double min_sampled_ratio = 0.0;  ///< min u^T G u / |u|^2 over the sampled directions
};

/// Upper bound on sqrt(inf_{u in C(s, 3+4/gamma)} u^T G u / |u|^2) from all
/// supports of size min(2s, p) (when at most `budget` of them) and `budget`
/// rejection-sampled cone directions.
ConeBound cone_eigen_bound(const Matrix& gram, int s, double gamma, int budget, std::uint64_t seed);

EventStatistics event_statistics(const Trajectory& traj, const NoiseRecord& noise,
                                 const DriftBasis& basis, const SparseParam& theta0, int s,
                                 double gamma, int budget, std::uint64_t seed, double lambda, double k);

struct AuditRow {
  double point = 0.0;  ///< r (linear) or x (OU)
  double empirical = 0.0;
  double bound = 0.0;
  double se = 0.0;
  int reps = 0;
};

struct LinearAuditModel {
  DriftBasis basis;
  SparseParam theta0;
  Vector x0;
  int n = 100;
  double delta_n = 0.1;
  int substeps = 1;
  int burn_in = 0;
  double L = 1.0;  ///< Lipschitz constant of the drift
  double M = 1.0;  ///< monotonicity constant of the drift
};

/// Empirical tail of (1/n) sum f(X_{t_i}) - mean over `reps` paths against
/// the concentration bound. The mean is the average over all replications.
std::vector<AuditRow> concentration_audit_linear(const LinearAuditModel& model,
                                                 const std::function<double(const Vector&)>& f,
                                                 double f_lip, const std::vector<double>& r_grid,
                                                 int reps, std::uint64_t seed, int jobs = 1);

/// Empirical sup over `directions` uniform unit vectors of
/// P(|v^T (C_T - C_inf) v| > x) against 2 exp(-n dn H_0(x)).
std::vector<AuditRow> concentration_audit_ou(const OUModel& ou, int n, double delta_n,
                                             const std::vector<double>& x_grid, int reps,
                                             std::uint64_t seed, int directions = 20, int jobs = 1);

struct OracleReplication {
  GramSystem gram;
  Vector theta0;
};

struct OracleAuditResult {
  double fraction = 0.0;
  double target = 0.0;  ///< 1 - 3 epsilon
  double rhs = 0.0;
  std::vector<double> lhs;
  std::vector<char> holds;
};

/// Fraction of replications with |b_hat - b_0|_D^2 <= oracle_remainder,
/// where the left side is (theta_hat - theta0)^T G (theta_hat - theta0).
OracleAuditResult oracle_audit(const std::function<OracleReplication(std::uint64_t)>& make,
                               double lambda, double k, double l, double gamma, int s,
                               double delta_n, double epsilon, int reps, std::uint64_t seed,
                               const LassoConfig& config = {}, int jobs = 1);

enum class RegimeKind { Linear, OU };
enum class Regime { DiscretizationDominated, MartingaleDominated, Boundary };

const char* to_string(Regime regime);

struct RegimeReport {
  double value = 0.0;  ///< s^2 d n dn^2 (linear) or d^2 n dn^2 (OU)
  Regime regime = Regime::Boundary;
};

/// Within a factor 10 of 1 counts as the boundary.
RegimeReport rate_regime(RegimeKind kind, int d, int n, double delta_n, int s);

}  // namespace driftlasso

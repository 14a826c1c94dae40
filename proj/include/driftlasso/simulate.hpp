#pragma once

#include "driftlasso/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace driftlasso {

/// Discretely observed path X_{t_0}, ..., X_{t_n} with t_i = i * delta_n.
struct Trajectory {
  Matrix states;  ///< (n+1) x d, one observation per row
  double delta_n = 0.0;
  std::uint64_t seed = 0;

  int steps() const noexcept { return static_cast<int>(states.rows()) - 1; }
  int dim() const noexcept { return static_cast<int>(states.cols()); }
  double horizon() const noexcept { return steps() * delta_n; }
};

/// Brownian increments and sub-sampled states captured by the Euler sampler.
struct NoiseRecord {
  int substeps = 1;
  Matrix coarse_dw;                 ///< n x d, Delta W_i over each observation interval
  std::vector<Matrix> fine_dw;      ///< n entries of m x d, empty unless recorded
  std::vector<Matrix> fine_states;  ///< n entries of (m+1) x d, empty unless recorded

  bool has_fine() const noexcept { return !fine_states.empty(); }
};

struct RecordFlags {
  bool noise = false;
  bool fine = false;
};

struct LinearSimulation {
  Trajectory trajectory;
  std::optional<NoiseRecord> noise;
};

/// States beyond this magnitude abort the Euler sampler.
inline constexpr double kBlowUpBound = 1e8;

/// Euler-Maruyama path of dX = -b_theta(X) dt + dW driven by given fine
/// increments `dw` (N x d) at step `dt`. Returns the N+1 fine states.
Matrix integrate_euler(const DriftBasis& basis, const SparseParam& theta, const Vector& x0,
                       double dt, const Matrix& dw);

/// Euler-Maruyama at fine step delta_n / substeps, observed every `substeps`
/// fine steps. `burn_in` coarse steps are simulated first and discarded.
LinearSimulation simulate_linear(const DriftBasis& basis, const SparseParam& theta0,
                                 const Vector& x0, int n, double delta_n, int substeps,
                                 std::uint64_t seed, RecordFlags record = {}, int burn_in = 0);

/// Smallest real part among the eigenvalues of `a`.
double min_real_eigenvalue(const Matrix& a);

/// Solves A X + X A^T = Q by the d^2 x d^2 Kronecker linear system.
Matrix solve_lyapunov_kronecker(const Matrix& a, const Matrix& q);

/// Solves A X + X A^T = Q by complex Schur reduction (Bartels-Stewart).
Matrix solve_lyapunov_schur(const Matrix& a, const Matrix& q);

/// Dimension up to which the Kronecker route is used.
inline constexpr int kKroneckerMaxDim = 16;

/// C_inf = int_0^inf exp(-sA) exp(-sA^T) ds, i.e. the solution of A C + C A^T = I.
Matrix stationary_covariance(const Matrix& a);

/// exp(m) by Pade scaling and squaring.
Matrix expm(const Matrix& m);

/// Covariance of the exact OU transition over dt: C_inf - e^{-A dt} C_inf e^{-A^T dt}.
Matrix transition_covariance(const Matrix& a, double dt);

/// Symmetric square root of a PSD matrix; eigenvalues below -tol throw.
Matrix symmetric_sqrt(const Matrix& s, double tol = 1e-10);

/// Exact-transition sampler X_{i+1} = e^{-A dt} X_i + eta_i, eta_i ~ N(0, Sigma_dt).
Trajectory simulate_ou_exact(const Matrix& a, int n, double delta_n, std::uint64_t seed,
                             bool stationary_init);

/// Spectral constants of a stable diagonalizable interaction matrix.
struct OUModel {
  Matrix a;
  Matrix c_inf;
  double m_frak = 0.0;  ///< min real part of the eigenvalues
  double p_frak = 0.0;  ///< |P|_op |P^{-1}|_op for unit-norm eigenvector columns
  double l_min = 0.0;   ///< smallest eigenvalue of C_inf
  double l_max = 0.0;   ///< largest eigenvalue of C_inf
  double a_frak = 0.0;  ///< largest diagonal entry of C_inf
};

/// Eigenvector-matrix condition above which A counts as non-diagonalizable.
inline constexpr double kMaxEigenvectorCondition = 1e12;

OUModel ou_spectral_constants(const Matrix& a);

}  // namespace driftlasso

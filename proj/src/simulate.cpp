#include "driftlasso/simulate.hpp"

#include "driftlasso/errors.hpp"
#include "driftlasso/rng.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <string>

namespace driftlasso {

namespace {

// Evaluates b_theta(x) without per-call allocation.
class DriftEvaluator {
 public:
  DriftEvaluator(const DriftBasis& basis, const Vector& theta)
      : basis_(basis), theta_(theta), design_(basis.dim(), basis.params()), anchor_(basis.dim()) {
    if (basis.family() == BasisFamily::OuLinear) a_ = unvec(theta, basis.dim());
  }

  void operator()(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) {
    if (basis_.family() == BasisFamily::OuLinear) {
      out.noalias() = a_ * x;
      return;
    }
    basis_.evaluate(x, design_, anchor_);
    out = anchor_;
    out.noalias() += design_ * theta_;
  }

 private:
  const DriftBasis& basis_;
  const Vector& theta_;
  Matrix design_;
  Vector anchor_;
  Matrix a_;
};

void check_state(const Eigen::Ref<const Vector>& x, std::size_t step) {
  const double mag = x.cwiseAbs().maxCoeff();
  if (!std::isfinite(mag) || mag > kBlowUpBound)
    throw SimulationDiverged(step, "simulation diverged at fine step " + std::to_string(step));
}

void fill_normals(Rng& rng, std::normal_distribution<double>& normal, Eigen::Ref<Vector> z) {
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
}

}  // namespace

Matrix integrate_euler(const DriftBasis& basis, const SparseParam& theta, const Vector& x0,
                       double dt, const Matrix& dw) {
  if (theta.size() != basis.params()) throw InvalidInput("theta length does not match basis");
  if (x0.size() != basis.dim() || dw.cols() != basis.dim())
    throw InvalidInput("state dimension does not match basis");
  if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
  DriftEvaluator drift(basis, theta.values());
  Matrix path(dw.rows() + 1, basis.dim());
  path.row(0) = x0.transpose();
  Vector x = x0, b(basis.dim());
  for (Eigen::Index k = 0; k < dw.rows(); ++k) {
    drift(x, b);
    x += -dt * b + dw.row(k).transpose();
    check_state(x, static_cast<std::size_t>(k + 1));
    path.row(k + 1) = x.transpose();
  }
  return path;
}

LinearSimulation simulate_linear(const DriftBasis& basis, const SparseParam& theta0,
                                 const Vector& x0, int n, double delta_n, int substeps,
                                 std::uint64_t seed, RecordFlags record, int burn_in) {
  if (substeps < 1) throw InvalidInput("substeps must be >= 1");
  if (!(delta_n > 0.0) || !std::isfinite(delta_n)) throw InvalidInput("delta_n must be positive");
  if (n < 1) throw InvalidInput("need at least one observation interval");
  if (burn_in < 0) throw InvalidInput("burn-in must be nonnegative");
  if (theta0.size() != basis.params()) throw InvalidInput("theta length does not match basis");
  if (x0.size() != basis.dim()) throw InvalidInput("x0 dimension does not match basis");

  const int d = basis.dim();
  const double dt = delta_n / substeps;
  const double sqrt_dt = std::sqrt(dt);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DriftEvaluator drift(basis, theta0.values());

  Vector x = x0, b(d), z(d);
  std::size_t fine_step = 0;
  auto advance = [&](Eigen::Ref<Vector> dw_out) {
    fill_normals(rng, normal, z);
    dw_out = sqrt_dt * z;
    drift(x, b);
    x += -dt * b + dw_out;
    check_state(x, ++fine_step);
  };

  Vector dw(d);
  for (int i = 0; i < burn_in; ++i)
    for (int k = 0; k < substeps; ++k) advance(dw);

  LinearSimulation out;
  out.trajectory.delta_n = delta_n;
  out.trajectory.seed = seed;
  out.trajectory.states.resize(n + 1, d);
  out.trajectory.states.row(0) = x.transpose();

  NoiseRecord noise;
  noise.substeps = substeps;
  if (record.noise || record.fine) noise.coarse_dw = Matrix::Zero(n, d);
  if (record.fine) {
    noise.fine_dw.reserve(static_cast<std::size_t>(n));
    noise.fine_states.reserve(static_cast<std::size_t>(n));
  }

  Matrix fine_dw(substeps, d), fine_states(substeps + 1, d);
  for (int i = 0; i < n; ++i) {
    fine_states.row(0) = x.transpose();
    for (int k = 0; k < substeps; ++k) {
      advance(dw);
      fine_dw.row(k) = dw.transpose();
      fine_states.row(k + 1) = x.transpose();
    }
    out.trajectory.states.row(i + 1) = x.transpose();
    if (record.noise || record.fine) noise.coarse_dw.row(i) = fine_dw.colwise().sum();
    if (record.fine) {
      noise.fine_dw.push_back(fine_dw);
      noise.fine_states.push_back(fine_states);
    }
  }
  if (record.noise || record.fine) out.noise = std::move(noise);
  return out;
}

double min_real_eigenvalue(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidInput("matrix must be square");
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw NumericDegeneracy("eigenvalue computation failed");
  return es.eigenvalues().real().minCoeff();
}

Matrix solve_lyapunov_kronecker(const Matrix& a, const Matrix& q) {
  const Eigen::Index d = a.rows();
  const Matrix eye = Matrix::Identity(d, d);
  const Matrix op = Eigen::kroneckerProduct(eye, a) + Eigen::kroneckerProduct(a, eye);
  const Vector rhs = Eigen::Map<const Vector>(q.data(), q.size());
  const Vector sol = op.partialPivLu().solve(rhs);
  return Eigen::Map<const Matrix>(sol.data(), d, d);
}

Matrix solve_lyapunov_schur(const Matrix& a, const Matrix& q) {
  using CMatrix = Eigen::MatrixXcd;
  using Complex = std::complex<double>;
  const Eigen::Index d = a.rows();
  Eigen::ComplexSchur<Matrix> schur(a);
  if (schur.info() != Eigen::Success) throw NumericDegeneracy("Schur decomposition failed");
  const CMatrix& t = schur.matrixT();
  const CMatrix& u = schur.matrixU();
  const CMatrix f = u.adjoint() * q.cast<Complex>() * u;
  // T Y + Y T^H = F with T upper triangular; solve bottom-right to top-left.
  CMatrix y = CMatrix::Zero(d, d);
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    for (Eigen::Index j = d - 1; j >= 0; --j) {
      Complex acc = f(i, j);
      for (Eigen::Index k = i + 1; k < d; ++k) acc -= t(i, k) * y(k, j);
      for (Eigen::Index k = j + 1; k < d; ++k) acc -= y(i, k) * std::conj(t(j, k));
      const Complex denom = t(i, i) + std::conj(t(j, j));
      if (std::abs(denom) == 0.0) throw UnstableMatrix("Lyapunov operator is singular");
      y(i, j) = acc / denom;
    }
  }
  return (u * y * u.adjoint()).real();
}

Matrix stationary_covariance(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidInput("matrix must be square");
  if (!a.allFinite()) throw InvalidInput("matrix has non-finite entries");
  const double abscissa = min_real_eigenvalue(a);
  if (!(abscissa > 0.0))
    throw UnstableMatrix("interaction matrix has an eigenvalue with real part " +
                         std::to_string(abscissa) + " <= 0");
  const Matrix eye = Matrix::Identity(a.rows(), a.cols());
  Matrix c = a.rows() <= kKroneckerMaxDim ? solve_lyapunov_kronecker(a, eye)
                                          : solve_lyapunov_schur(a, eye);
  return 0.5 * (c + c.transpose());
}

Matrix expm(const Matrix& m) { return m.exp(); }

Matrix transition_covariance(const Matrix& a, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt must be positive");
  const Matrix c = stationary_covariance(a);
  const Matrix f = expm(-dt * a);
  Matrix sigma = c - f * c * f.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw NumericDegeneracy("transition covariance is indefinite");
  return sigma;
}

Matrix symmetric_sqrt(const Matrix& s, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw NumericDegeneracy("eigen-decomposition failed");
  const Vector& ev = es.eigenvalues();
  if (ev.minCoeff() < -tol) throw NumericDegeneracy("matrix is not positive semidefinite");
  const Vector root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Trajectory simulate_ou_exact(const Matrix& a, int n, double delta_n, std::uint64_t seed,
                             bool stationary_init) {
  if (n < 1) throw InvalidInput("need at least one observation interval");
  if (!(delta_n > 0.0)) throw InvalidInput("delta_n must be positive");
  const Eigen::Index d = a.rows();
  const Matrix f = expm(-delta_n * a);
  const Matrix noise_root = symmetric_sqrt(transition_covariance(a, delta_n));

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(d), x = Vector::Zero(d);

  Trajectory out;
  out.delta_n = delta_n;
  out.seed = seed;
  out.states.resize(n + 1, d);
  if (stationary_init) {
    fill_normals(rng, normal, z);
    x = symmetric_sqrt(stationary_covariance(a)) * z;
  }
  out.states.row(0) = x.transpose();
  Vector next(d);
  for (int i = 0; i < n; ++i) {
    fill_normals(rng, normal, z);
    next.noalias() = f * x;
    next.noalias() += noise_root * z;
    x = next;
    out.states.row(i + 1) = x.transpose();
  }
  return out;
}

OUModel ou_spectral_constants(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidInput("matrix must be square");
  Eigen::EigenSolver<Matrix> es(a, true);
  if (es.info() != Eigen::Success) throw DiagonalizationFailed("eigen-decomposition failed");
  OUModel out;
  out.a = a;
  out.m_frak = es.eigenvalues().real().minCoeff();
  if (!(out.m_frak > 0.0)) throw UnstableMatrix("interaction matrix is not stable");

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > kMaxEigenvectorCondition)
    throw DiagonalizationFailed("interaction matrix is (numerically) defective");
  out.p_frak = sv(0) / smin;

  out.c_inf = stationary_covariance(a);
  Eigen::SelfAdjointEigenSolver<Matrix> cs(out.c_inf, Eigen::EigenvaluesOnly);
  out.l_min = cs.eigenvalues().minCoeff();
  out.l_max = cs.eigenvalues().maxCoeff();
  if (!(out.l_min > 0.0)) throw NumericDegeneracy("stationary covariance is singular");
  out.a_frak = out.c_inf.diagonal().maxCoeff();
  return out;
}

}  // namespace driftlasso

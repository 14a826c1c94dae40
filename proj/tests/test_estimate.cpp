#include "driftlasso/errors.hpp"
#include "driftlasso/estimate.hpp"
#include "driftlasso/simulate.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace driftlasso;

namespace {

double kkt_bound(const GramSystem& sys, const LassoConfig& config) {
  return 10.0 * config.tol * std::max(1.0, sys.linear.lpNorm<Eigen::Infinity>());
}

Trajectory protocol_instance(std::uint64_t seed, Vector* theta_out = nullptr) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(2.0, 3.0);
  Vector theta = Vector::Zero(30);
  std::vector<int> idx(30);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int k = 0; k < 9; ++k) theta(idx[static_cast<std::size_t>(k)]) = value(rng);
  if (theta_out) *theta_out = theta;
  const auto basis = DriftBasis::cosine(10, 30, 9.0);
  return simulate_linear(basis, SparseParam(theta), Vector::Zero(10), 700, 0.01, 10, seed, {}, 70)
      .trajectory;
}

DriftBasis zero_anchor_cosine(int d, int p) {
  std::vector<VectorField> fields;
  fields.emplace_back([d](const Vector&) { return Vector(Vector::Zero(d)); });
  std::vector<double> lip = {0.0};
  for (int j = 1; j <= p; ++j) {
    fields.emplace_back([j](const Vector& x) { return Vector(((j + 1.0) * x.array()).cos()); });
    lip.push_back(j + 1.0);
  }
  return DriftBasis::custom(d, fields, lip);
}

}  // namespace

TEST(BuildGram, ConstantField) {
  const Vector u = (Vector(2) << 1.5, -0.5).finished();
  std::vector<VectorField> fields = {[](const Vector&) { return Vector(Vector::Zero(2)); },
                                     [u](const Vector&) { return u; }};
  const auto basis = DriftBasis::custom(2, fields, {0.0, 0.0});
  const auto traj = simulate_linear(DriftBasis::zero(2, 1), SparseParam(Vector::Zero(1)),
                                    Vector::Zero(2), 60, 0.1, 1, 3)
                        .trajectory;
  const auto sys = build_gram(traj, basis);
  EXPECT_NEAR(sys.gram(0, 0), u.squaredNorm(), 1e-14);
  double expected = 0.0;
  for (int i = 1; i <= 60; ++i) expected += u.dot(traj.states.row(i) - traj.states.row(i - 1));
  EXPECT_NEAR(sys.linear(0), 2.0 * expected / 60, 1e-13);
}

TEST(BuildGram, ZeroTrajectoryCosine) {
  Trajectory traj;
  traj.states = Matrix::Zero(11, 3);
  traj.delta_n = 0.1;
  const auto sys = build_gram(traj, DriftBasis::cosine(3, 4, 1.0));
  EXPECT_LE((sys.gram - Matrix::Constant(4, 4, 3.0)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(sys.linear.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sys.constant, 0.0);
}

TEST(BuildGram, QuadraticMatchesDirectContrast) {
  const auto traj = protocol_instance(5);
  const auto basis = DriftBasis::cosine(10, 30, 9.0);
  const auto sys = build_gram(traj, basis);
  EXPECT_LE((sys.gram - sys.gram.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sys.gram);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    Vector theta(30);
    for (int j = 0; j < 30; ++j) theta(j) = normal(rng);
    const double direct = oracle::direct_contrast(traj, basis, theta);
    EXPECT_NEAR(sys.objective(theta), direct, 1e-10 * std::abs(direct));
  }
}

TEST(BuildGram, BlocksCombineToWhole) {
  const auto traj = protocol_instance(6);
  const auto basis = DriftBasis::cosine(10, 30, 9.0);
  const auto whole = build_gram(traj, basis);
  const auto a = build_gram(traj, basis, 0, 250);
  const auto b = build_gram(traj, basis, 250, 700);
  const auto merged = combine_grams({&a, &b});
  EXPECT_EQ(merged.count, 700);
  EXPECT_LE((merged.gram - whole.gram).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((merged.linear - whole.linear).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(merged.constant, whole.constant, 1e-10 * std::abs(whole.constant));
}

TEST(BuildGram, RejectsMismatch) {
  Trajectory traj;
  traj.states = Matrix::Zero(5, 2);
  traj.delta_n = 0.1;
  EXPECT_THROW(build_gram(traj, DriftBasis::cosine(3, 2, 1.0)), InvalidInput);
  traj.delta_n = 0.0;
  EXPECT_THROW(build_gram(traj, DriftBasis::cosine(2, 2, 1.0)), InvalidInput);
  traj.delta_n = 0.1;
  traj.states = Matrix::Zero(2, 2);
  EXPECT_THROW(build_gram(traj, DriftBasis::cosine(2, 2, 1.0)), InvalidInput);
}

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(5.0, 2.0), 3.0);
  EXPECT_EQ(soft_threshold(-1.0, 2.0), 0.0);
  EXPECT_EQ(soft_threshold(-3.5, 0.0), -3.5);
  EXPECT_EQ(soft_threshold(-3.5, 1.0), -2.5);
}

TEST(LassoSolve, LargeLambdaGivesExactZero) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto sys = oracle::random_system(6, rng);
    const auto res = lasso_solve(sys, sys.linear.lpNorm<Eigen::Infinity>());
    EXPECT_TRUE(res.converged);
    EXPECT_TRUE(res.theta_hat.isZero(0.0));
  }
}

TEST(LassoSolve, ZeroLambdaIsLeastSquares) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto sys = oracle::random_system(5, rng);
    const auto res = lasso_solve(sys, 0.0);
    const Vector ls = (2.0 * sys.delta_n * sys.gram).ldlt().solve(-sys.linear);
    EXPECT_LE((res.theta_hat - ls).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((res.theta_hat - mle_solve(sys).theta_hat).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LassoSolve, MatchesBruteForceAndCertifiesKkt) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const LassoConfig config;
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 1 + rep % 3;
    const auto sys = oracle::random_system(p, rng);
    const double lambda = frac(rng) * sys.linear.lpNorm<Eigen::Infinity>();
    const auto res = lasso_solve(sys, lambda, config);
    ASSERT_TRUE(res.converged);
    EXPECT_LE(res.kkt_residual, kkt_bound(sys, config));
    EXPECT_NEAR(res.kkt_residual, kkt_residual(sys, res.theta_hat, lambda), 1e-15);
    EXPECT_LE((res.theta_hat - brute_force_lasso(sys, lambda)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(LassoSolve, ObjectiveNonIncreasingAcrossSweeps) {
  std::mt19937_64 rng(5);
  LassoConfig config;
  config.record_objective = true;
  for (int rep = 0; rep < 20; ++rep) {
    const auto sys = oracle::random_system(15, rng);
    const auto res = lasso_solve(sys, 0.1 * sys.linear.lpNorm<Eigen::Infinity>(), config);
    ASSERT_FALSE(res.objective_trace.empty());
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
      EXPECT_LE(res.objective_trace[k], res.objective_trace[k - 1] + 1e-12);
  }
}

TEST(LassoSolve, PinsZeroDiagonal) {
  GramSystem sys;
  sys.gram = Matrix::Zero(2, 2);
  sys.gram(0, 0) = 1.0;
  sys.linear = (Vector(2) << -4.0, 3.0).finished();
  sys.delta_n = 1.0;
  sys.count = 10;
  const auto res = lasso_solve(sys, 0.5);
  EXPECT_EQ(res.pinned, std::vector<int>({1}));
  EXPECT_EQ(res.theta_hat(1), 0.0);
  EXPECT_NEAR(res.theta_hat(0), 1.75, 1e-12);
}

TEST(LassoSolve, NonConvergenceIsReportedNotThrown) {
  std::mt19937_64 rng(6);
  const auto sys = oracle::random_system(20, rng);
  LassoConfig config;
  config.max_sweeps = 1;
  const auto res = lasso_solve(sys, 1e-3, config);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.sweeps_used, 1);
}

TEST(LassoSolve, RejectsNaN) {
  std::mt19937_64 rng(7);
  auto sys = oracle::random_system(3, rng);
  sys.linear(1) = std::nan("");
  EXPECT_THROW(lasso_solve(sys, 0.1), InvalidInput);
  sys.linear(1) = 0.0;
  EXPECT_THROW(lasso_solve(sys, -1.0), InvalidInput);
}

TEST(MleSolve, Examples) {
  GramSystem sys;
  sys.gram = Matrix::Identity(3, 3);
  sys.linear = Vector::Zero(3);
  sys.linear(0) = -2.0;
  sys.delta_n = 1.0;
  sys.count = 1;
  const auto res = mle_solve(sys);
  EXPECT_LE((res.theta_hat - Vector::Unit(3, 0)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_FALSE(res.rank_deficient);
  EXPECT_EQ(res.rank, 3);
}

TEST(MleSolve, SingularConsistentSystem) {
  GramSystem sys;
  Matrix b(2, 3);
  b << 1.0, 2.0, 0.0, 0.0, 1.0, 1.0;
  sys.gram = b.transpose() * b;
  sys.linear = sys.gram * (Vector(3) << 1.0, -1.0, 2.0).finished();
  sys.delta_n = 0.5;
  sys.count = 1;
  const auto res = mle_solve(sys);
  EXPECT_TRUE(res.rank_deficient);
  EXPECT_EQ(res.rank, 2);
  EXPECT_LE((2.0 * sys.delta_n * sys.gram * res.theta_hat + sys.linear).norm(), 1e-8);
  // minimum norm: orthogonal to the null space of G
  Eigen::FullPivLU<Matrix> lu(sys.gram);
  EXPECT_LE(std::abs(lu.kernel().col(0).dot(res.theta_hat)), 1e-10);
}

TEST(MleSolve, AgreesWithLassoAtZeroOnSimulatedInstance) {
  Matrix a(3, 3);
  a << 1.0, 0.3, 0.0, -0.2, 1.5, 0.4, 0.0, 0.1, 0.8;
  const auto traj = simulate_ou_exact(a, 5000, 0.02, 8, true);
  const auto sys = build_gram(traj, DriftBasis::ou_linear(3));
  const auto mle = mle_solve(sys);
  EXPECT_FALSE(mle.rank_deficient);
  LassoConfig config;
  config.tol = 1e-13;
  const auto lasso = lasso_solve(sys, 0.0, config);
  ASSERT_TRUE(lasso.converged);
  EXPECT_LE((lasso.theta_hat - mle.theta_hat).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LassoPath, StartsAtZeroIsMonotoneAndMatchesColdSolves) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto sys = oracle::random_system(12, rng);
    const auto grid = log_grid(1.01 * sys.linear.lpNorm<Eigen::Infinity>(), 1e-3, 30);
    const auto path = lasso_path(sys, grid);
    ASSERT_EQ(path.size(), 30u);
    EXPECT_TRUE(path.front().theta_hat.isZero(0.0));
    for (std::size_t k = 1; k < path.size(); ++k)
      EXPECT_GE(path[k].theta_hat.lpNorm<1>(), path[k - 1].theta_hat.lpNorm<1>() - 1e-9);
    for (std::size_t k : {std::size_t{0}, std::size_t{15}, path.size() - 1}) {
      const auto cold = lasso_solve(sys, grid[k]);
      EXPECT_LE((cold.theta_hat - path[k].theta_hat).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(LassoPath, RejectsNonDescendingGrid) {
  std::mt19937_64 rng(9);
  const auto sys = oracle::random_system(3, rng);
  EXPECT_THROW(lasso_path(sys, {0.1, 0.2}), InvalidInput);
  EXPECT_THROW(lasso_path(sys, {0.2, 0.2}), InvalidInput);
}

TEST(BruteForce, ScalarClosedForm) {
  GramSystem sys;
  sys.gram = Matrix::Ones(1, 1);
  sys.linear = Vector::Constant(1, -4.0);
  sys.delta_n = 1.0;
  sys.count = 1;
  EXPECT_NEAR(brute_force_lasso(sys, 2.0)(0), 1.0, 1e-14);
  EXPECT_NEAR(brute_force_lasso(sys, 0.0)(0), 2.0, 1e-14);
}

TEST(BruteForce, MatchesGridSearch) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> frac(0.0, 0.8);
  for (int rep = 0; rep < 200; ++rep) {
    const int p = 2 + rep % 2;
    auto sys = oracle::random_system(p, rng, 1.0);
    const double lambda = frac(rng) * sys.linear.lpNorm<Eigen::Infinity>();
    const Vector exact = brute_force_lasso(sys, lambda);
    ASSERT_LE(exact.lpNorm<Eigen::Infinity>(), 5.0);
    EXPECT_LE((exact - oracle::grid_lasso(sys, lambda)).cwiseAbs().maxCoeff(), 2e-4) << rep;
  }
}

TEST(BruteForce, RejectsLargeP) {
  std::mt19937_64 rng(11);
  EXPECT_THROW(brute_force_lasso(oracle::random_system(4, rng), 0.1), InvalidInput);
}

TEST(EmpiricalCovariance, Examples) {
  Trajectory traj;
  traj.delta_n = 1.0;
  traj.states = Matrix::Zero(2, 2);
  traj.states.row(0) << 2.0, -1.0;
  traj.states.row(1) << 100.0, 100.0;
  const Matrix c = empirical_covariance(traj);
  EXPECT_TRUE(c.isApprox(traj.states.row(0).transpose() * traj.states.row(0), 0.0));
  traj.states = Matrix::Zero(6, 3);
  traj.states.col(0).setOnes();
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = 1.0;
  EXPECT_TRUE(empirical_covariance(traj).isApprox(expected, 0.0));
}

TEST(LassoOu, LargeLambdaGivesZero) {
  const auto traj = simulate_ou_exact(Matrix::Identity(3, 3), 500, 0.05, 1, true);
  const auto est = lasso_ou(traj, 1e6);
  EXPECT_TRUE(est.a_hat.isZero(0.0));
  EXPECT_TRUE(est.converged());
}

TEST(LassoOu, ScalarRegression) {
  const double dt = 0.01;
  const auto traj = simulate_ou_exact(Matrix::Constant(1, 1, 0.5), 200000, dt, 21, true);
  const double a_hat = lasso_ou(traj, 0.0).a_hat(0, 0);
  double sxx = 0.0, sxy = 0.0;
  for (int i = 1; i <= traj.steps(); ++i) {
    const double x = traj.states(i - 1, 0);
    sxx += x * x;
    sxy += x * (traj.states(i, 0) - x);
  }
  EXPECT_NEAR(a_hat, -sxy / (dt * sxx), 1e-10);
  const double se = std::sqrt(2.0 * 0.5 / traj.horizon());
  EXPECT_LE(std::abs(a_hat - 0.5), 3.0 * se);
}

TEST(LassoOu, EquivalentToOuLinearBasis) {
  std::mt19937_64 rng(12);
  LassoConfig config;
  config.tol = 1e-12;
  for (int rep = 0; rep < 5; ++rep) {
    const int d = 2 + rep;
    const Matrix a = oracle::random_stable(d, rng);
    const auto traj = simulate_ou_exact(a, 400, 0.05, 100 + rep, true);
    const auto sys = build_gram(traj, DriftBasis::ou_linear(d));
    const double lambda = 0.2 * sys.linear.lpNorm<Eigen::Infinity>();
    const auto est = lasso_ou(traj, lambda, config);
    const auto flat = lasso_solve(sys, lambda, config);
    EXPECT_LE((vec(est.a_hat) - flat.theta_hat).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(CrossValidate, SingleGridValue) {
  const auto traj = protocol_instance(13);
  const auto cv = cross_validate(traj, DriftBasis::cosine(10, 30, 9.0), {0.3}, 5);
  EXPECT_EQ(cv.lambda_star, 0.3);
  EXPECT_EQ(cv.fold_scores.rows(), 1);
  EXPECT_EQ(cv.fold_scores.cols(), 5);
}

TEST(CrossValidate, PureNoisePrefersSparsestModel) {
  const auto basis = zero_anchor_cosine(2, 6);
  int largest = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto traj = simulate_linear(DriftBasis::zero(2, 1), SparseParam(Vector::Zero(1)),
                                      Vector::Zero(2), 1000, 0.01, 1, 500 + rep)
                          .trajectory;
    const auto sys = build_gram(traj, basis);
    const auto grid = log_grid(sys.linear.lpNorm<Eigen::Infinity>(), 0.01, 10);
    const auto cv = cross_validate(traj, basis, grid, 5);
    largest += cv.lambda_star == grid.front();
  }
  EXPECT_GE(largest, 40);
}

TEST(CrossValidate, ShortBlocksWarn) {
  const auto traj = protocol_instance(14);
  const auto cv = cross_validate(traj, DriftBasis::cosine(10, 30, 9.0), {1.0, 0.5}, 5);
  EXPECT_FALSE(cv.short_block_warning);
  Trajectory small = traj;
  small.states = traj.states.topRows(101);
  EXPECT_TRUE(cross_validate(small, DriftBasis::cosine(10, 30, 9.0), {1.0, 0.5}, 5).short_block_warning);
}

TEST(CrossValidate, RejectsBadInput) {
  const auto traj = protocol_instance(15);
  const auto basis = DriftBasis::cosine(10, 30, 9.0);
  EXPECT_THROW(cross_validate(traj, basis, {0.1}, 1), InvalidInput);
  EXPECT_THROW(cross_validate(traj, basis, {}, 5), InvalidInput);
  EXPECT_THROW(cross_validate(traj, basis, {0.1, 0.0}, 5), InvalidInput);
}

TEST(CrossValidate, ProtocolInstanceBeatsMle) {
  std::vector<double> lasso_err, mle_err;
  const auto basis = DriftBasis::cosine(10, 30, 9.0);
  for (int rep = 0; rep < 20; ++rep) {
    Vector theta;
    const auto traj = protocol_instance(1000 + rep, &theta);
    const auto sys = build_gram(traj, basis);
    const auto grid = log_grid(sys.linear.lpNorm<Eigen::Infinity>(), 1e-3, 20);
    const auto cv = cross_validate(traj, basis, grid, 5);
    ASSERT_TRUE(std::isfinite(cv.lambda_star));
    lasso_err.push_back((lasso_solve(sys, cv.lambda_star).theta_hat - theta).norm());
    mle_err.push_back((mle_solve(sys).theta_hat - theta).norm());
  }
  std::sort(lasso_err.begin(), lasso_err.end());
  std::sort(mle_err.begin(), mle_err.end());
  EXPECT_LT(lasso_err[10] + lasso_err[9], mle_err[10] + mle_err[9]);
}

TEST(LogGrid, Shape) {
  const auto g = log_grid(10.0, 0.01, 3);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[0], 10.0);
  EXPECT_NEAR(g[1], 1.0, 1e-12);
  EXPECT_NEAR(g[2], 0.1, 1e-12);
}

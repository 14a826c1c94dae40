#include "driftlasso/theory.hpp"

#include "driftlasso/errors.hpp"
#include "driftlasso/parallel.hpp"
#include "driftlasso/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace driftlasso {

namespace {

constexpr double kE = std::numbers::e;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InvalidInput(std::string(name) + " must be finite and positive");
}

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must lie in (0, 1)");
}

double binomial_se(double q, int reps) { return std::sqrt(q * (1.0 - q) / reps); }

}  // namespace

void ModelConstants::validate() const {
  require_positive(L, "L");
  require_positive(M, "M");
  require_positive(R, "R");
  require_positive(H_dn, "H_dn");
  require_positive(K_dn, "K_dn");
  require_positive(C_b, "C_b");
  require_positive(l, "l");
  require_positive(k, "k");
  require_positive(gamma, "gamma");
  if (!(k * k < l)) throw InvalidInput("k^2 must be smaller than l");
}

double h_delta(double L, double M, double delta_n, double max_lip_sq) {
  const double denom = -std::expm1(-M * delta_n);
  return 32.0 * delta_n * delta_n * std::exp(4.0 * L * delta_n) * max_lip_sq / (denom * denom);
}

double k_delta(double L, double M, double delta_n, double lip_matrix_op_norm) {
  const double denom = -std::expm1(-M * delta_n);
  return 16.0 * delta_n * delta_n * std::exp(4.0 * L * delta_n) * lip_matrix_op_norm *
         lip_matrix_op_norm / (denom * denom);
}

double moment_constant(double growth, double max_second_moment) {
  return 2.0 * growth * growth * (1.0 + max_second_moment);
}

double max_second_moment(const Trajectory& traj) {
  const auto n = traj.states.rows();
  if (n == 0) throw InvalidInput("empty trajectory");
  return (traj.states.array().square().colwise().sum() / static_cast<double>(n)).maxCoeff();
}

CosineConstantParts cosine_constant_parts(const DriftBasis& basis, const Vector& theta0) {
  if (basis.family() != BasisFamily::Cosine) throw InvalidInput("cosine basis required");
  if (theta0.size() != basis.params()) throw InvalidInput("theta length does not match basis");
  const auto& lip = basis.lipschitz();
  const int p = basis.params();
  CosineConstantParts out;
  double spread = 0.0;
  for (int j = 1; j <= p; ++j) {
    const double lj = lip[static_cast<std::size_t>(j)];
    spread += std::abs(theta0(j - 1)) * lj;
    out.max_lip_sq = std::max(out.max_lip_sq, lj * lj);
  }
  out.L = lip[0] + spread;
  out.M_lower = lip[0] - spread;
  Matrix m(p, p);
  const double root_d = std::sqrt(static_cast<double>(basis.dim()));
  for (int i = 1; i <= p; ++i)
    for (int j = 1; j <= p; ++j)
      m(i - 1, j - 1) = root_d * (lip[static_cast<std::size_t>(i)] + lip[static_cast<std::size_t>(j)]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  out.lip_matrix_op_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  out.growth = 1.0;
  return out;
}

double TuningConstants::lambda() const {
  return ou ? std::max(lambda_1_ou, lambda_2_ou) : std::max(lambda_1, lambda_2);
}

double TuningConstants::horizon() const { return ou ? T_1_ou : T_1; }

double lambda_11(double d, double R, double delta_n, double n, double log_term) {
  return 23.0 * std::sqrt(d * R * delta_n / n * log_term);
}

double lambda_12(double d, double H_dn, double delta_n, double n, double log_term) {
  return 7.0 * std::pow(d * d * H_dn * delta_n / (n * n * n) * log_term * log_term * log_term, 0.25);
}

double lambda_2_linear(double C_b, double s, double d, double delta_n, double log_term) {
  return 8.0 * kE * std::sqrt(C_b) * s * d * std::pow(delta_n, 1.5) * std::sqrt(log_term);
}

double log_support_count(double p, double s) {
  const double two_s = 2.0 * s;
  return two_s * std::log(21.0) + two_s * std::min(std::log(p), std::log(kE * p / two_s));
}

double t1_linear(double d, double K_dn, double gamma, double l, double k, double epsilon,
                 double log_count) {
  const double gap = l - k * k;
  if (!(gap > 0.0)) throw InvalidInput("k^2 must be smaller than l");
  const double cone = 5.0 + 4.0 / gamma;
  return 324.0 * d * K_dn * std::pow(cone, 4) / (gap * gap) * (std::log(2.0 / epsilon) + log_count);
}

TuningConstants tuning_constants_linear(const ModelConstants& mc, const Dims& dims, double delta_n,
                                        double epsilon) {
  mc.validate();
  require_epsilon(epsilon);
  require_positive(delta_n, "delta_n");
  if (dims.d < 1 || dims.p < 1 || dims.n < 1 || dims.s < 1)
    throw InvalidInput("dimensions must be positive");
  const double d = dims.d, p = dims.p, n = dims.n, s = dims.s;
  TuningConstants tc;
  tc.epsilon = epsilon;
  const double log_mart = std::log(2.0 * p) + std::log(2.0 / epsilon);
  tc.lambda_11 = lambda_11(d, mc.R, delta_n, n, log_mart);
  tc.lambda_12 = lambda_12(d, mc.H_dn, delta_n, n, log_mart);
  tc.lambda_1 = std::max(tc.lambda_11, tc.lambda_12);
  tc.lambda_2 = lambda_2_linear(mc.C_b, s, d, delta_n, std::log(p) + std::log(1.0 / epsilon));
  tc.T_1 = t1_linear(d, mc.K_dn, mc.gamma, mc.l, mc.k, epsilon, log_support_count(p, s));
  return tc;
}

double lambda_1_ou(double delta_n, double a_frak, double l_min, double k, double n, double log_term) {
  return std::sqrt(32.0 * delta_n * (a_frak + l_min - k * k) * log_term / n);
}

double lambda_2_ou(double C_b_ou, double d, double delta_n, double log_term) {
  return 8.0 * kE * std::sqrt(C_b_ou) * d * std::pow(delta_n, 1.5) * std::sqrt(log_term);
}

double log_alpha_ou(double d, double s) {
  const double two_s = 2.0 * s;
  const double inner = std::min(4.0 * s * std::log(d), std::log(kE * d * d / two_s));
  return two_s * std::log(21.0) + std::log(2.0 * d) + two_s * inner;
}

double beta_ou(double gamma) {
  const double cone = 5.0 + 4.0 / gamma;
  return 9.0 * cone * cone;
}

double t1_ou(const OUModel& ou, double k, double epsilon, double log_alpha, double beta) {
  const double gap = ou.l_min - k * k;
  if (!(gap > 0.0)) throw InvalidInput("k^2 must be smaller than l_min");
  return 8.0 * ou.p_frak * ou.l_max * beta * (gap + beta * ou.l_max) / (ou.m_frak * gap * gap) *
         (log_alpha + std::log(1.0 / epsilon));
}

TuningConstants tuning_constants_ou(const OUModel& ou, int d, int n, int s, double delta_n,
                                    double epsilon, double gamma, double k, double C_b_ou) {
  require_epsilon(epsilon);
  require_positive(delta_n, "delta_n");
  require_positive(gamma, "gamma");
  require_positive(k, "k");
  require_positive(C_b_ou, "C_b_ou");
  if (d < 1 || n < 1 || s < 1) throw InvalidInput("dimensions must be positive");
  if (!(k * k < ou.l_min)) throw InvalidInput("k^2 must be smaller than l_min");
  TuningConstants tc;
  tc.ou = true;
  tc.epsilon = epsilon;
  const double dd = d;
  const double log_d2 = std::log(dd * dd);
  tc.lambda_1_ou = lambda_1_ou(delta_n, ou.a_frak, ou.l_min, k, n, log_d2 + std::log(2.0 / epsilon));
  tc.lambda_2_ou = lambda_2_ou(C_b_ou, dd, delta_n, log_d2 + std::log(1.0 / epsilon));
  tc.log_alpha = log_alpha_ou(dd, s);
  tc.beta = beta_ou(gamma);
  tc.T_1_ou = t1_ou(ou, k, 0.75 * epsilon, tc.log_alpha, tc.beta);
  return tc;
}

double h0(double x, const OUModel& ou) {
  return ou.m_frak / (8.0 * ou.p_frak * ou.l_max) * x * x / (x + ou.l_max);
}

double ou_tail_bound(double x, const OUModel& ou, int n, double delta_n) {
  return 2.0 * std::exp(-n * delta_n * h0(x, ou));
}

double linear_tail_bound(double r, int n, double delta_n, int d, double f_lip, double M, double L) {
  const double contraction = -std::expm1(-M * delta_n);
  return std::exp(-r * r * n * contraction * contraction /
                  (64.0 * d * f_lip * f_lip * delta_n * std::exp(4.0 * L * delta_n)));
}

double oracle_remainder(double lambda, int s, double gamma, double k, double delta_n) {
  return 4.0 * lambda * lambda * s * (2.0 + gamma) * (2.0 + gamma) / (k * k * gamma * delta_n * delta_n);
}

double l2_error_bound(double lambda, int s, double gamma, double k, double delta_n) {
  return std::sqrt(oracle_remainder(lambda, s, gamma, k, delta_n)) / k;
}

double l1_error_bound(double lambda, int s, double gamma, double k, double delta_n) {
  return 8.0 * lambda * s * (1.0 + gamma) * (2.0 + gamma) / (k * k * std::pow(gamma, 1.5) * delta_n);
}

double martingale_statistic(const Trajectory& traj, const NoiseRecord& noise, const DriftBasis& basis) {
  const int n = traj.steps();
  if (noise.coarse_dw.rows() != n || noise.coarse_dw.cols() != traj.dim())
    throw InstrumentationRequired("martingale statistic needs the recorded Brownian increments");
  Matrix design(basis.dim(), basis.params());
  Vector anchor(basis.dim());
  Vector acc = Vector::Zero(basis.params());
  for (int i = 0; i < n; ++i) {
    basis.evaluate(traj.states.row(i).transpose(), design, anchor);
    acc.noalias() += design.transpose() * noise.coarse_dw.row(i).transpose();
  }
  return (acc / static_cast<double>(n)).lpNorm<Eigen::Infinity>();
}

double approximation_statistic(const Trajectory& traj, const NoiseRecord& noise,
                               const DriftBasis& basis, const SparseParam& theta0) {
  const int n = traj.steps();
  if (!noise.has_fine() || static_cast<int>(noise.fine_states.size()) != n)
    throw InstrumentationRequired("approximation statistic needs the recorded fine path");
  const int m = noise.substeps;
  const double fine_dt = traj.delta_n / m;
  const int d = basis.dim();
  Matrix design(d, basis.params());
  Vector anchor(d), base(d), drift(d), integral(d);
  Vector acc = Vector::Zero(basis.params());
  auto eval = [&](const Vector& x, Vector& out) {
    basis.evaluate(x, design, anchor);
    out = anchor;
    out.noalias() += design * theta0.values();
  };
  for (int i = 0; i < n; ++i) {
    const Matrix& fine = noise.fine_states[static_cast<std::size_t>(i)];
    const Vector x_prev = traj.states.row(i).transpose();
    eval(x_prev, base);
    integral.setZero();
    for (int q = 1; q < m; ++q) {
      eval(fine.row(q).transpose(), drift);
      integral += drift - base;
    }
    integral *= fine_dt;
    basis.evaluate(x_prev, design, anchor);
    acc.noalias() += design.transpose() * integral;
  }
  return (acc / static_cast<double>(n)).lpNorm<Eigen::Infinity>();
}

ConeBound cone_eigen_bound(const Matrix& gram, int s, double gamma, int budget, std::uint64_t seed) {
  const auto p = static_cast<int>(gram.rows());
  if (s < 1) throw InvalidInput("cone bound needs s >= 1");
  if (budget < 1) throw InvalidInput("cone bound needs a positive budget");
  require_positive(gamma, "gamma");
  const double c = 3.0 + 4.0 / gamma;
  ConeBound out;
  double best = std::numeric_limits<double>::infinity();

  const int size = std::min(2 * s, p);
  double count = 1.0;
  for (int i = 0; i < size; ++i) count = count * (p - i) / (i + 1);
  if (count <= budget) {
    out.exhaustive_supports = true;
    std::vector<int> idx(static_cast<std::size_t>(size));
    std::iota(idx.begin(), idx.end(), 0);
    Matrix sub(size, size);
    while (true) {
      for (int a = 0; a < size; ++a)
        for (int b = 0; b < size; ++b) sub(a, b) = gram(idx[a], idx[b]);
      Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
      best = std::min(best, es.eigenvalues().minCoeff());
      int pos = size - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == p - size + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int q = pos + 1; q < size; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
  }

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> perm(static_cast<std::size_t>(p));
  const int head = std::min(s, p);
  double sampled = std::numeric_limits<double>::infinity();
  const long max_proposals = 50L * budget;
  for (long proposal = 0; proposal < max_proposals && out.directions_checked < budget; ++proposal) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < head; ++i) {
      std::uniform_int_distribution<int> pick(i, p - 1);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    Vector u = Vector::Zero(p);
    for (int i = 0; i < head; ++i) u(perm[static_cast<std::size_t>(i)]) = normal(rng);
    if (p > head) {
      Vector tail = Vector::Zero(p);
      for (int i = head; i < p; ++i) tail(perm[static_cast<std::size_t>(i)]) = normal(rng);
      const double target = unit(rng) * c * u.lpNorm<1>();
      const double mass = tail.lpNorm<1>();
      if (mass > 0.0) u += (target / mass) * tail;
    }
    if (!(u.lpNorm<1>() > 0.0) || !cone_membership(u, s, c)) continue;
    ++out.directions_checked;
    sampled = std::min(sampled, u.dot(gram * u) / u.squaredNorm());
  }
  out.min_sampled_ratio = sampled;
  best = std::min(best, sampled);
  out.k_hat = std::sqrt(std::max(0.0, best));
  return out;
}

EventStatistics event_statistics(const Trajectory& traj, const NoiseRecord& noise,
                                 const DriftBasis& basis, const SparseParam& theta0, int s,
                                 double gamma, int budget, std::uint64_t seed, double lambda, double k) {
  if (theta0.size() != basis.params()) throw InvalidInput("theta length does not match basis");
  EventStatistics ev;
  ev.stat_T = martingale_statistic(traj, noise, basis);
  ev.stat_Tp = approximation_statistic(traj, noise, basis, theta0);
  const GramSystem sys = build_gram(traj, basis);
  const ConeBound cone = cone_eigen_bound(sys.gram, std::max(1, s), gamma, budget, seed);
  ev.k_hat = cone.k_hat;
  ev.exhaustive_supports = cone.exhaustive_supports;
  ev.directions_checked = cone.directions_checked;
  ev.holds_T = ev.stat_T <= lambda / 4.0;
  ev.holds_Tp = ev.stat_Tp <= lambda / 4.0;
  ev.holds_Tpp = ev.k_hat >= k;
  return ev;
}

std::vector<AuditRow> concentration_audit_linear(const LinearAuditModel& model,
                                                 const std::function<double(const Vector&)>& f,
                                                 double f_lip, const std::vector<double>& r_grid,
                                                 int reps, std::uint64_t seed, int jobs) {
  if (reps < 1) throw InvalidInput("need at least one replication");
  require_positive(f_lip, "Lipschitz constant of f");
  std::vector<double> averages(static_cast<std::size_t>(reps));
  parallel_for(averages.size(), jobs, [&](std::size_t r) {
    const auto sim = simulate_linear(model.basis, model.theta0, model.x0, model.n, model.delta_n,
                                     model.substeps, replication_seed(seed, r), {}, model.burn_in);
    double acc = 0.0;
    for (int i = 1; i <= model.n; ++i) acc += f(sim.trajectory.states.row(i).transpose());
    averages[r] = acc / model.n;
  });
  const double mean = std::accumulate(averages.begin(), averages.end(), 0.0) / reps;
  std::vector<AuditRow> rows;
  for (double r : r_grid) {
    const auto hits = std::count_if(averages.begin(), averages.end(), [&](double a) { return a - mean > r; });
    AuditRow row;
    row.point = r;
    row.reps = reps;
    row.empirical = static_cast<double>(hits) / reps;
    row.se = binomial_se(row.empirical, reps);
    row.bound = linear_tail_bound(r, model.n, model.delta_n, model.basis.dim(), f_lip, model.M, model.L);
    rows.push_back(row);
  }
  return rows;
}

std::vector<AuditRow> concentration_audit_ou(const OUModel& ou, int n, double delta_n,
                                             const std::vector<double>& x_grid, int reps,
                                             std::uint64_t seed, int directions, int jobs) {
  if (reps < 1 || directions < 1) throw InvalidInput("need replications and directions");
  const auto d = ou.a.rows();
  Matrix v(d, directions);
  {
    Rng rng = make_rng(substream_seed(seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < directions; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) v(k, j) = normal(rng);
      v.col(j).normalize();
    }
  }
  Matrix dev(reps, directions);
  parallel_for(static_cast<std::size_t>(reps), jobs, [&](std::size_t r) {
    const Trajectory traj = simulate_ou_exact(ou.a, n, delta_n, replication_seed(seed, r), true);
    const Matrix gap = empirical_covariance(traj) - ou.c_inf;
    for (int j = 0; j < directions; ++j)
      dev(static_cast<Eigen::Index>(r), j) = std::abs(v.col(j).dot(gap * v.col(j)));
  });
  std::vector<AuditRow> rows;
  for (double x : x_grid) {
    AuditRow row;
    row.point = x;
    row.reps = reps;
    for (int j = 0; j < directions; ++j) {
      const double freq = static_cast<double>((dev.col(j).array() > x).count()) / reps;
      row.empirical = std::max(row.empirical, freq);
    }
    row.se = binomial_se(row.empirical, reps);
    row.bound = ou_tail_bound(x, ou, n, delta_n);
    rows.push_back(row);
  }
  return rows;
}

OracleAuditResult oracle_audit(const std::function<OracleReplication(std::uint64_t)>& make,
                               double lambda, double k, double l, double gamma, int s,
                               double delta_n, double epsilon, int reps, std::uint64_t seed,
                               const LassoConfig& config, int jobs) {
  require_positive(k, "k");
  require_positive(gamma, "gamma");
  if (!(k * k < l)) throw InvalidInput("k^2 must be smaller than l");
  if (reps < 1) throw InvalidInput("need at least one replication");
  OracleAuditResult out;
  out.rhs = oracle_remainder(lambda, std::max(1, s), gamma, k, delta_n);
  out.target = 1.0 - 3.0 * epsilon;
  out.lhs.resize(static_cast<std::size_t>(reps));
  out.holds.resize(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), jobs, [&](std::size_t r) {
    const OracleReplication rep = make(replication_seed(seed, r));
    const auto fit = lasso_solve(rep.gram, lambda, config);
    const Vector diff = fit.theta_hat - rep.theta0;
    out.lhs[r] = diff.dot(rep.gram.gram * diff);
    out.holds[r] = out.lhs[r] <= out.rhs;
  });
  out.fraction = static_cast<double>(std::count(out.holds.begin(), out.holds.end(), 1)) / reps;
  return out;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::DiscretizationDominated:
      return "discretization-dominated";
    case Regime::MartingaleDominated:
      return "martingale-dominated";
    case Regime::Boundary:
      return "boundary";
  }
  return "unknown";
}

RegimeReport rate_regime(RegimeKind kind, int d, int n, double delta_n, int s) {
  if (d < 1 || n < 1 || !(delta_n > 0.0) || s < 1) throw InvalidInput("rate_regime needs positive inputs");
  const double dd = d, nn = n, ss = s;
  RegimeReport rep;
  rep.value = kind == RegimeKind::Linear ? ss * ss * dd * nn * delta_n * delta_n
                                         : dd * dd * nn * delta_n * delta_n;
  if (rep.value > 10.0)
    rep.regime = Regime::DiscretizationDominated;
  else if (rep.value < 0.1)
    rep.regime = Regime::MartingaleDominated;
  else
    rep.regime = Regime::Boundary;
  return rep;
}

}  // namespace driftlasso

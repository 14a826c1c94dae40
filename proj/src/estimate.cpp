#include "driftlasso/estimate.hpp"

#include "driftlasso/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace driftlasso {

double GramSystem::objective(const Vector& theta) const {
  return constant + linear.dot(theta) + delta_n * theta.dot(gram * theta);
}

Vector GramSystem::gradient(const Vector& theta) const {
  return linear + 2.0 * delta_n * (gram * theta);
}

GramSystem build_gram(const Trajectory& traj, const DriftBasis& basis) {
  if (traj.steps() < 2) throw InvalidInput("contrast needs at least two increments");
  return build_gram(traj, basis, 0, traj.steps());
}

GramSystem build_gram(const Trajectory& traj, const DriftBasis& basis, int first, int last) {
  if (traj.dim() != basis.dim())
    throw InvalidInput("trajectory dimension " + std::to_string(traj.dim()) +
                       " does not match basis dimension " + std::to_string(basis.dim()));
  if (!(traj.delta_n > 0.0)) throw InvalidInput("trajectory has non-positive delta_n");
  if (traj.steps() < 1) throw InvalidInput("trajectory needs at least one increment");
  if (first < 0 || last > traj.steps() || first >= last) throw InvalidInput("bad increment range");
  if (!traj.states.allFinite()) throw InvalidInput("trajectory has non-finite states");

  const int d = basis.dim();
  const int p = basis.params();
  constexpr int kChunk = 64;

  Matrix gram = Matrix::Zero(p, p);
  Vector lin_dx = Vector::Zero(p), lin_anchor = Vector::Zero(p);
  double sq_dx = 0.0, anchor_dx = 0.0, sq_anchor = 0.0;

  Matrix stacked(static_cast<Eigen::Index>(kChunk) * d, p);
  Vector stacked_dx(static_cast<Eigen::Index>(kChunk) * d);
  Vector stacked_anchor(static_cast<Eigen::Index>(kChunk) * d);
  for (int start = first; start < last; start += kChunk) {
    const int rows = std::min(kChunk, last - start);
    for (int r = 0; r < rows; ++r) {
      const int i = start + r;
      const Vector x = traj.states.row(i).transpose();
      basis.evaluate(x, stacked.middleRows(static_cast<Eigen::Index>(r) * d, d),
                     stacked_anchor.segment(static_cast<Eigen::Index>(r) * d, d));
      stacked_dx.segment(static_cast<Eigen::Index>(r) * d, d) =
          (traj.states.row(i + 1) - traj.states.row(i)).transpose();
    }
    const Eigen::Index used = static_cast<Eigen::Index>(rows) * d;
    const auto block = stacked.topRows(used);
    const auto dx = stacked_dx.head(used);
    const auto an = stacked_anchor.head(used);
    gram.noalias() += block.transpose() * block;
    lin_dx.noalias() += block.transpose() * dx;
    lin_anchor.noalias() += block.transpose() * an;
    sq_dx += dx.squaredNorm();
    anchor_dx += an.dot(dx);
    sq_anchor += an.squaredNorm();
  }

  const double m = last - first;
  const double dn = traj.delta_n;
  GramSystem sys;
  sys.delta_n = dn;
  sys.count = last - first;
  sys.gram = gram / m;
  sys.gram = 0.5 * (sys.gram + sys.gram.transpose());
  sys.linear = (2.0 / m) * lin_dx + (2.0 * dn / m) * lin_anchor;
  sys.constant = sq_dx / (m * dn) + 2.0 * anchor_dx / m + dn * sq_anchor / m;
  return sys;
}

GramSystem combine_grams(const std::vector<const GramSystem*>& parts) {
  if (parts.empty()) throw InvalidInput("nothing to combine");
  GramSystem out;
  const GramSystem& head = *parts.front();
  out.delta_n = head.delta_n;
  out.gram = Matrix::Zero(head.gram.rows(), head.gram.cols());
  out.linear = Vector::Zero(head.linear.size());
  long total = 0;
  for (const GramSystem* g : parts) {
    if (g->params() != head.params()) throw InvalidInput("systems have different p");
    total += g->count;
  }
  for (const GramSystem* g : parts) {
    const double w = static_cast<double>(g->count) / static_cast<double>(total);
    out.gram += w * g->gram;
    out.linear += w * g->linear;
    out.constant += w * g->constant;
  }
  out.count = static_cast<int>(total);
  return out;
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double penalized_objective(const GramSystem& sys, const Vector& theta, double lambda) {
  return sys.objective(theta) + lambda * theta.lpNorm<1>();
}

double kkt_residual(const GramSystem& sys, const Vector& theta, double lambda) {
  const Vector g = sys.gradient(theta);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    double v = 0.0;
    if (theta(j) > 0.0)
      v = std::abs(g(j) + lambda);
    else if (theta(j) < 0.0)
      v = std::abs(g(j) - lambda);
    else
      v = std::max(0.0, std::abs(g(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

void validate(const GramSystem& sys) {
  const Eigen::Index p = sys.linear.size();
  if (p == 0 || sys.gram.rows() != p || sys.gram.cols() != p)
    throw InvalidInput("Gram system has inconsistent shapes");
  if (!sys.gram.allFinite() || !sys.linear.allFinite() || !std::isfinite(sys.constant))
    throw InvalidInput("Gram system contains NaN or infinite values");
  if (!(sys.delta_n > 0.0)) throw InvalidInput("Gram system has non-positive delta_n");
}

}  // namespace

EstimationResult lasso_solve(const GramSystem& sys, double lambda, const LassoConfig& config,
                             const Vector* warm_start) {
  validate(sys);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be finite and >= 0");
  if (!(config.tol > 0.0) || config.max_sweeps < 1) throw InvalidInput("invalid solver config");
  const Eigen::Index p = sys.linear.size();
  const double two_dn = 2.0 * sys.delta_n;

  EstimationResult res;
  res.lambda = lambda;
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(sys.gram(j, j) > 0.0)) res.pinned.push_back(static_cast<int>(j));

  Vector theta = Vector::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p) throw InvalidInput("warm start has wrong length");
    theta = *warm_start;
    for (int j : res.pinned) theta(j) = 0.0;
  }
  Vector grad = sys.gradient(theta);
  const double kkt_bound = 10.0 * config.tol * std::max(1.0, sys.linear.lpNorm<Eigen::Infinity>());

  std::vector<char> active(static_cast<std::size_t>(p), 1);
  for (int j : res.pinned) active[static_cast<std::size_t>(j)] = 0;

  for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!active[static_cast<std::size_t>(j)]) continue;
      const double curv = two_dn * sys.gram(j, j);
      const double partial = grad(j) - curv * theta(j);
      const double next = soft_threshold(-partial, lambda) / curv;
      const double step = next - theta(j);
      if (step != 0.0) {
        theta(j) = next;
        grad.noalias() += (two_dn * step) * sys.gram.col(j);
        max_change = std::max(max_change, std::abs(step));
      }
    }
    res.sweeps_used = sweep;
    if (config.record_objective) res.objective_trace.push_back(penalized_objective(sys, theta, lambda));
    if (max_change < config.tol) {
      for (Eigen::Index j = 0; j < p; ++j)
        if (std::abs(theta(j)) < config.snap) theta(j) = 0.0;
      grad = sys.gradient(theta);
      res.kkt_residual = kkt_residual(sys, theta, lambda);
      if (res.kkt_residual <= kkt_bound) {
        res.converged = true;
        break;
      }
    }
  }
  if (!res.converged) res.kkt_residual = kkt_residual(sys, theta, lambda);
  res.theta_hat = std::move(theta);
  return res;
}

EstimationResult mle_solve(const GramSystem& sys) {
  validate(sys);
  const Matrix hessian = 2.0 * sys.delta_n * sys.gram;
  Eigen::BDCSVD<Matrix> svd(hessian, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  EstimationResult res;
  res.theta_hat = svd.solve(Vector(-sys.linear));
  res.lambda = 0.0;
  res.rank = static_cast<int>(svd.rank());
  res.rank_deficient = res.rank < sys.params();
  res.kkt_residual = sys.gradient(res.theta_hat).lpNorm<Eigen::Infinity>();
  res.converged = true;
  return res;
}

std::vector<EstimationResult> lasso_path(const GramSystem& sys, const std::vector<double>& lambdas,
                                         const LassoConfig& config) {
  if (lambdas.empty()) throw InvalidInput("lambda grid is empty");
  for (std::size_t k = 1; k < lambdas.size(); ++k)
    if (!(lambdas[k] < lambdas[k - 1])) throw InvalidInput("lambda grid must be strictly descending");
  std::vector<EstimationResult> path;
  path.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const Vector* warm = path.empty() ? nullptr : &path.back().theta_hat;
    path.push_back(lasso_solve(sys, lambda, config, warm));
  }
  return path;
}

Vector brute_force_lasso(const GramSystem& sys, double lambda) {
  validate(sys);
  const int p = sys.params();
  if (p > 3) throw InvalidInput("brute-force Lasso supports p <= 3");
  if (!(lambda >= 0.0)) throw InvalidInput("lambda must be >= 0");
  const double two_dn = 2.0 * sys.delta_n;
  const double slack = 1e-10 * std::max(1.0, lambda);

  int patterns = 1;
  for (int j = 0; j < p; ++j) patterns *= 3;

  Vector best = Vector::Zero(p);
  double best_obj = std::numeric_limits<double>::infinity();
  for (int code = 0; code < patterns; ++code) {
    std::vector<int> sign(static_cast<std::size_t>(p));
    std::vector<int> support;
    for (int j = 0, c = code; j < p; ++j, c /= 3) {
      sign[static_cast<std::size_t>(j)] = c % 3 - 1;
      if (sign[static_cast<std::size_t>(j)] != 0) support.push_back(j);
    }
    Vector theta = Vector::Zero(p);
    const auto s = static_cast<Eigen::Index>(support.size());
    if (s > 0) {
      Matrix h(s, s);
      Vector rhs(s);
      for (Eigen::Index a = 0; a < s; ++a) {
        rhs(a) = -(sys.linear(support[a]) + lambda * sign[static_cast<std::size_t>(support[a])]);
        for (Eigen::Index b = 0; b < s; ++b) h(a, b) = two_dn * sys.gram(support[a], support[b]);
      }
      Eigen::FullPivLU<Matrix> lu(h);
      if (!lu.isInvertible()) continue;
      const Vector sol = lu.solve(rhs);
      bool consistent = true;
      for (Eigen::Index a = 0; a < s; ++a)
        if (sol(a) * sign[static_cast<std::size_t>(support[a])] <= 0.0) consistent = false;
      if (!consistent) continue;
      for (Eigen::Index a = 0; a < s; ++a) theta(support[a]) = sol(a);
    }
    const Vector g = sys.gradient(theta);
    bool feasible = true;
    for (int j = 0; j < p; ++j)
      if (sign[static_cast<std::size_t>(j)] == 0 && std::abs(g(j)) > lambda + slack) feasible = false;
    if (!feasible) continue;
    const double obj = penalized_objective(sys, theta, lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best = theta;
    }
  }
  if (!std::isfinite(best_obj)) throw NumericDegeneracy("no sign pattern satisfies the optimality conditions");
  return best;
}

Matrix empirical_covariance(const Trajectory& traj) {
  const int n = traj.steps();
  if (n < 1) throw InvalidInput("trajectory needs at least one increment");
  const auto prev = traj.states.topRows(n);
  Matrix c = (prev.transpose() * prev) / static_cast<double>(n);
  return 0.5 * (c + c.transpose());
}

GramSystem ou_row_system(const Trajectory& traj, const Matrix& c_t, int row) {
  const int n = traj.steps();
  const auto prev = traj.states.topRows(n);
  const Vector dx = traj.states.col(row).tail(n) - traj.states.col(row).head(n);
  GramSystem sys;
  sys.delta_n = traj.delta_n;
  sys.count = n;
  sys.gram = c_t;
  sys.linear = (2.0 / n) * (prev.transpose() * dx);
  sys.constant = dx.squaredNorm() / (n * traj.delta_n);
  return sys;
}

bool OUEstimate::converged() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.converged; });
}

OUEstimate lasso_ou(const Trajectory& traj, double lambda, const LassoConfig& config) {
  if (traj.steps() < 2) throw InvalidInput("need n >= 2 observations");
  if (!(traj.delta_n > 0.0)) throw InvalidInput("trajectory has non-positive delta_n");
  const int d = traj.dim();
  const Matrix c_t = empirical_covariance(traj);
  OUEstimate out;
  out.a_hat = Matrix::Zero(d, d);
  for (int r = 0; r < d; ++r) {
    out.rows.push_back(lasso_solve(ou_row_system(traj, c_t, r), lambda, config));
    out.a_hat.row(r) = out.rows.back().theta_hat.transpose();
  }
  return out;
}

CvResult cross_validate_blocks(const std::vector<GramSystem>& blocks,
                               const std::vector<double>& lambdas, const LassoConfig& config) {
  const auto folds = static_cast<int>(blocks.size());
  if (folds < 2) throw InvalidInput("cross-validation needs at least 2 folds");
  if (lambdas.empty()) throw InvalidInput("lambda grid is empty");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw InvalidInput("lambda grid must be strictly positive");

  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lambdas[a] > lambdas[b]; });
  std::vector<double> descending;
  std::vector<std::size_t> unique_of(lambdas.size());
  for (std::size_t k : order) {
    if (descending.empty() || lambdas[k] < descending.back()) descending.push_back(lambdas[k]);
    unique_of[k] = descending.size() - 1;
  }

  CvResult out;
  out.lambdas = lambdas;
  out.fold_scores.resize(static_cast<Eigen::Index>(lambdas.size()), folds);
  Matrix unique_scores(static_cast<Eigen::Index>(descending.size()), folds);
  for (int k = 0; k < folds; ++k) {
    std::vector<const GramSystem*> rest;
    for (int b = 0; b < folds; ++b)
      if (b != k) rest.push_back(&blocks[static_cast<std::size_t>(b)]);
    const GramSystem train = combine_grams(rest);
    const auto path = lasso_path(train, descending, config);
    for (std::size_t g = 0; g < path.size(); ++g)
      unique_scores(static_cast<Eigen::Index>(g), k) = blocks[static_cast<std::size_t>(k)].objective(path[g].theta_hat);
  }
  for (std::size_t k = 0; k < lambdas.size(); ++k)
    out.fold_scores.row(static_cast<Eigen::Index>(k)) = unique_scores.row(static_cast<Eigen::Index>(unique_of[k]));
  out.mean_score = out.fold_scores.rowwise().mean();

  // Scan from the largest lambda; only a strictly smaller score moves the choice.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < descending.size(); ++g) {
    const double score = unique_scores.row(static_cast<Eigen::Index>(g)).mean();
    if (score < best) {
      best = score;
      out.lambda_star = descending[g];
    }
  }
  const int p = blocks.front().params();
  for (const auto& b : blocks)
    if (b.count < p) out.short_block_warning = true;
  return out;
}

CvResult cross_validate(const Trajectory& traj, const DriftBasis& basis,
                        const std::vector<double>& lambdas, int folds, const LassoConfig& config) {
  if (folds < 2) throw InvalidInput("cross-validation needs at least 2 folds");
  const int n = traj.steps();
  if (n < folds) throw InvalidInput("fewer increments than folds");
  std::vector<GramSystem> blocks;
  blocks.reserve(static_cast<std::size_t>(folds));
  for (int k = 0; k < folds; ++k) {
    const int first = static_cast<int>(static_cast<long>(k) * n / folds);
    const int last = static_cast<int>(static_cast<long>(k + 1) * n / folds);
    blocks.push_back(build_gram(traj, basis, first, last));
  }
  return cross_validate_blocks(blocks, lambdas, config);
}

std::vector<double> log_grid(double lambda_max, double ratio, int size) {
  if (!(lambda_max > 0.0) || !(ratio > 0.0 && ratio < 1.0) || size < 1)
    throw InvalidInput("invalid lambda grid");
  std::vector<double> grid(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k)
    grid[static_cast<std::size_t>(k)] =
        size == 1 ? lambda_max : lambda_max * std::pow(ratio, static_cast<double>(k) / (size - 1));
  return grid;
}

}  // namespace driftlasso

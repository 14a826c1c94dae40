// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "driftlasso/config.hpp"
#include "driftlasso/estimate.hpp"
#include "driftlasso/experiments.hpp"
#include "driftlasso/model.hpp"
#include "driftlasso/simulate.hpp"
#include "driftlasso/theory.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace driftlasso;
namespace fs = std::filesystem;

namespace {

using ld = long double;

const fs::path kConfigDir = fs::path(DRIFTLASSO_SOURCE_DIR) / "configs";
const fs::path kScratch = fs::temp_directory_path() / "driftlasso_acceptance";

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

// Tiny CSV reader: header row plus rows of cells, no quoting.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("missing column " + name);
  }
  double num(std::size_t row, const std::string& name) const { return std::stod(rows[row][col(name)]); }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) cells.push_back(c);
  return cells;
}

Csv read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Csv csv;
  std::string line;
  std::getline(in, line);
  csv.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) csv.rows.push_back(split(line));
  return csv;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig load(const std::string& file, const std::string& out,
                      const std::vector<std::string>& overrides = {}) {
  auto doc = load_config_file((kConfigDir / file).string());
  doc["output_dir"] = (kScratch / out).string();
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double kkt_bound(const GramSystem& sys, const LassoConfig& config) {
  return 10.0 * config.tol * std::max(1.0, sys.linear.lpNorm<Eigen::Infinity>());
}

// Subgradient residual computed from scratch.
double subgradient_residual(const GramSystem& sys, const Vector& theta, double lambda) {
  const Vector g = sys.linear + 2.0 * sys.delta_n * sys.gram * theta;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double r = theta(j) != 0.0 ? std::abs(g(j) + lambda * (theta(j) > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(g(j)) - lambda);
    worst = std::max(worst, r);
  }
  return worst;
}

// Shared tally for criterion 2 across every converged solve made here.
struct KktTally {
  int solves = 0;
  int violations = 0;
  void add(const GramSystem& sys, const EstimationResult& res, const LassoConfig& config) {
    if (!res.converged) return;
    ++solves;
    violations += subgradient_residual(sys, res.theta_hat, res.lambda) > kkt_bound(sys, config);
  }
} kkt_tally;

// Cosine-basis instance with n = 50 observations.
GramSystem small_instance(int p, std::uint64_t seed, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto basis = DriftBasis::cosine(2, p, 0.5);
  Vector theta(p);
  for (int j = 0; j < p; ++j) theta(j) = coef(rng);
  const auto sim = simulate_linear(basis, SparseParam(theta), Vector::Zero(2), 50, 0.1, 10, seed, {}, 20);
  return build_gram(sim.trajectory, basis);
}

Outcome criterion_solver() {
  Outcome out;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const LassoConfig config;
  double worst = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int rep = 0; rep < 200; ++rep) {
    const int p = 1 + rep % 3;
    const auto sys = small_instance(p, 5000 + rep, rng);
    const double lambda = frac(rng) * sys.linear.lpNorm<Eigen::Infinity>();
    const auto res = lasso_solve(sys, lambda, config);
    kkt_tally.add(sys, res, config);
    worst = std::max(worst, (res.theta_hat - brute_force_lasso(sys, lambda)).cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds(t0);
  out.check(worst <= 1e-6, "max deviation " + fmt(worst));
  out.check(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
  if (out.pass) out.detail = "max deviation " + fmt(worst) + " in " + fmt(elapsed) + " s";
  return out;
}

Outcome criterion_kkt() {
  Outcome out;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const LassoConfig config;
  bool zero_ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    const auto sys = oracle::random_system(2 + rep % 9, rng);
    const double top = sys.linear.lpNorm<Eigen::Infinity>();
    kkt_tally.add(sys, lasso_solve(sys, frac(rng) * top, config), config);
    const auto zero = lasso_solve(sys, top * (1.0 + frac(rng)), config);
    kkt_tally.add(sys, zero, config);
    zero_ok = zero_ok && zero.theta_hat.isZero(0.0);
  }
  out.check(zero_ok, "lambda >= |l|_inf gave a nonzero estimate");
  out.check(kkt_tally.violations == 0,
            std::to_string(kkt_tally.violations) + " of " + std::to_string(kkt_tally.solves) + " residuals too large");

  Matrix a(3, 3);
  a << 1.0, 0.3, 0.0, -0.2, 1.5, 0.4, 0.0, 0.1, 0.8;
  const auto traj = simulate_ou_exact(a, 5000, 0.02, 8, true);
  const auto sys = build_gram(traj, DriftBasis::ou_linear(3));
  LassoConfig tight;
  tight.tol = 1e-13;
  const auto gap = (lasso_solve(sys, 0.0, tight).theta_hat - mle_solve(sys).theta_hat).cwiseAbs().maxCoeff();
  out.check(gap <= 1e-8, "lambda = 0 differs from the MLE by " + fmt(gap));
  if (out.pass)
    out.detail = std::to_string(kkt_tally.solves) + " converged solves certified, lambda=0 gap " + fmt(gap);
  return out;
}

Outcome criterion_path() {
  Outcome out;
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto sys = oracle::random_system(2 + rep % 14, rng);
    const auto grid = log_grid(sys.linear.lpNorm<Eigen::Infinity>(), 1e-3, 30);
    const auto path = lasso_path(sys, grid);
    for (std::size_t g = 1; g < path.size(); ++g) {
      const double rise = path[g - 1].theta_hat.lpNorm<1>() - path[g].theta_hat.lpNorm<1>();
      worst = std::max(worst, rise);
    }
  }
  out.check(worst <= 1e-9, "l1 norm grew by " + fmt(worst) + " as lambda increased");
  if (out.pass) out.detail = "worst violation " + fmt(worst);
  return out;
}

Matrix batch_se(const Trajectory& traj, int batches) {
  const int len = traj.steps() / batches;
  const auto d = traj.dim();
  std::vector<Matrix> covs;
  Matrix mean = Matrix::Zero(d, d);
  for (int b = 0; b < batches; ++b) {
    const Matrix block = traj.states.middleRows(b * len, len);
    covs.push_back(block.transpose() * block / len);
    mean += covs.back() / batches;
  }
  Matrix var = Matrix::Zero(d, d);
  for (const auto& c : covs) var += (c - mean).cwiseAbs2() / (batches - 1);
  return (var / batches).cwiseSqrt();
}

Outcome criterion_ou() {
  Outcome out;
  std::mt19937_64 rng(404);
  double worst_residual = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 1 + rep % 20;
    const Matrix a = oracle::random_stable(d, rng);
    const Matrix c = stationary_covariance(a);
    worst_residual = std::max(worst_residual, (a * c + c * a.transpose() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
  }
  out.check(worst_residual <= 1e-10, "Lyapunov residual " + fmt(worst_residual));

  const double half = (stationary_covariance(0.5 * Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff();
  out.check(half <= 1e-12, "A=0.5I gives C_inf off by " + fmt(half));

  double worst_quad = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix a = oracle::random_stable(2 + rep % 3, rng);
    const double t = 0.1 + 0.2 * rep;
    worst_quad = std::max(worst_quad, (transition_covariance(a, t) - oracle::lyapunov_integral(a, t)).cwiseAbs().maxCoeff());
  }
  out.check(worst_quad <= 1e-8, "transition covariance off quadrature by " + fmt(worst_quad));

  Matrix a(3, 3);
  a << 1.0, 0.8, 0.0, 0.0, 1.5, 0.6, 0.2, 0.0, 2.0;
  const auto traj = simulate_ou_exact(a, 1000000, 0.1, 77, true);
  const Matrix se = batch_se(traj, 100);
  const Matrix gap = (empirical_covariance(traj) - stationary_covariance(a)).cwiseAbs();
  const double z = (gap.array() / se.array()).maxCoeff();
  out.check(z <= 3.0, "empirical covariance " + fmt(z) + " standard errors from C_inf");
  if (out.pass)
    out.detail = "residual " + fmt(worst_residual) + ", quadrature gap " + fmt(worst_quad) + ", max z " + fmt(z);
  return out;
}

Outcome criterion_equivalence() {
  Outcome out;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> frac(0.0, 0.5);
  LassoConfig config;
  config.tol = 1e-12;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + rep % 4;
    const Matrix a = oracle::random_stable(d, rng);
    const auto traj = simulate_ou_exact(a, 400, 0.05, 900 + rep, true);
    const auto sys = build_gram(traj, DriftBasis::ou_linear(d));
    const double lambda = frac(rng) * sys.linear.lpNorm<Eigen::Infinity>();
    const auto flat = lasso_solve(sys, lambda, config);
    kkt_tally.add(sys, flat, config);
    worst = std::max(worst, (vec(lasso_ou(traj, lambda, config).a_hat) - flat.theta_hat).cwiseAbs().maxCoeff());
  }
  out.check(worst <= 1e-9, "max deviation " + fmt(worst));
  if (out.pass) out.detail = "max deviation " + fmt(worst);
  return out;
}

Outcome criterion_support_recovery() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load("support_recovery.json", "support_recovery");
  run_support_recovery(cfg);
  const auto summary = read_csv(kScratch / "support_recovery" / "summary.csv");
  const double f1_lasso = summary.num(0, "median_f1"), f1_mle = summary.num(1, "median_f1");
  const double l2_lasso = summary.num(0, "median_l2"), l2_mle = summary.num(1, "median_l2");
  const double elapsed = seconds(t0);
  out.check(f1_lasso > f1_mle, "median F1 Lasso " + fmt(f1_lasso) + " vs MLE " + fmt(f1_mle));
  out.check(l2_lasso < l2_mle, "median l2 Lasso " + fmt(l2_lasso) + " vs MLE " + fmt(l2_mle));
  out.check(elapsed <= 600.0, "runtime " + fmt(elapsed) + " s");
  if (out.pass)
    out.detail = "F1 " + fmt(f1_lasso) + " > " + fmt(f1_mle) + ", l2 " + fmt(l2_lasso) + " < " + fmt(l2_mle);
  else
    out.detail += " (l2 Lasso " + fmt(l2_lasso) + " vs MLE " + fmt(l2_mle) + ")";
  return out;
}

Outcome criterion_dimension_sweep() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load("dimension_sweep.json", "dimension_sweep");
  run_dimension_sweep(cfg);
  const auto csv = read_csv(kScratch / "dimension_sweep" / "sweep_summary.csv");
  std::map<int, std::map<std::string, std::pair<double, double>>> by_p;
  for (std::size_t r = 0; r < csv.rows.size(); ++r)
    by_p[std::stoi(csv.rows[r][0])][csv.rows[r][1]] = {csv.num(r, "mean_l1"), csv.num(r, "mean_l2")};
  for (const auto& [p, est] : by_p) {
    const auto& lasso = est.at("lasso");
    const auto& mle = est.at("mle");
    out.check(lasso.first <= mle.first && lasso.second <= mle.second, "p=" + std::to_string(p));
  }
  const double elapsed = seconds(t0);
  out.check(elapsed <= 1800.0, "runtime " + fmt(elapsed) + " s");
  if (out.pass) out.detail = std::to_string(by_p.size()) + " dimensions, " + fmt(elapsed) + " s";
  return out;
}

Outcome criterion_rate() {
  Outcome out;
  const auto cfg = load("rate_study.json", "rate_study");
  run_rate_study(cfg);
  const auto fit = read_csv(kScratch / "rate_study" / "rate_fit.csv");
  const double slope = fit.num(0, "slope");
  out.check(slope >= -0.65 && slope <= -0.35, "slope " + fmt(slope));
  if (out.pass) out.detail = "slope " + fmt(slope) + ", r2 " + fmt(fit.num(0, "r2"));
  return out;
}

Outcome criterion_concentration() {
  Outcome out;
  const auto cfg = load("verify_concentration.json", "verify_concentration");
  run_verifications(cfg);
  const auto dir = kScratch / "verify_concentration";
  const auto& a = cfg.audit;

  // Linear setting: recompute L = |A|_op, M = lambda_min(sym A) and the bound.
  const Matrix& lin = a.linear_matrix;
  const ld L = Eigen::JacobiSVD<Matrix>(lin).singularValues()(0);
  const ld M = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (lin + lin.transpose())).eigenvalues()(0);
  const ld n = a.linear_n, dn = a.linear_delta_n, d = static_cast<ld>(lin.rows());
  const auto linear = read_csv(dir / "concentration_linear.csv");
  int violations = 0;
  double worst_rel = 0.0;
  for (std::size_t r = 0; r < linear.rows.size(); ++r) {
    const ld x = linear.num(r, "r_or_x");
    const ld c = 1.0L - std::exp(-M * dn);
    const ld bound = std::exp(-x * x * n * c * c / (64.0L * d * dn * std::exp(4.0L * L * dn)));
    worst_rel = std::max(worst_rel, static_cast<double>(std::abs(linear.num(r, "bound") - bound) / bound));
    violations += linear.num(r, "empirical") > linear.num(r, "bound") + 3.0 * linear.num(r, "se");
    out.check(std::stoi(linear.rows[r][linear.col("reps")]) == 10000, "linear reps");
  }

  // OU setting: 2 exp(-n dn m x^2 / (8 p l_max (x + l_max))).
  const auto ou = ou_spectral_constants(a.ou_matrix);
  const auto table = read_csv(dir / "concentration_ou.csv");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const ld x = table.num(r, "r_or_x");
    const ld h = static_cast<ld>(ou.m_frak) / (8.0L * ou.p_frak * ou.l_max) * x * x / (x + ou.l_max);
    const ld bound = 2.0L * std::exp(-static_cast<ld>(a.ou_n) * a.ou_delta_n * h);
    worst_rel = std::max(worst_rel, static_cast<double>(std::abs(table.num(r, "bound") - bound) / bound));
    violations += table.num(r, "empirical") > table.num(r, "bound") + 3.0 * table.num(r, "se");
    out.check(std::stoi(table.rows[r][table.col("reps")]) == 10000, "OU reps");
  }
  out.check(violations == 0, std::to_string(violations) + " grid points above bound + 3 se");
  out.check(worst_rel <= 1e-14, "bound recomputation differs by " + fmt(worst_rel));
  if (out.pass)
    out.detail = std::to_string(linear.rows.size() + table.rows.size()) + " grid points, recomputation within " +
                 fmt(worst_rel);
  return out;
}

Outcome criterion_event_sets() {
  Outcome out;
  const auto cfg = load("verify_sets.json", "verify_sets");
  run_verifications(cfg);
  const auto sets = read_csv(kScratch / "verify_sets" / "sets_summary.csv");
  std::map<std::string, std::size_t> row;
  for (std::size_t r = 0; r < sets.rows.size(); ++r) row[sets.rows[r][0]] = r;
  const double eps = cfg.audit.epsilon;
  const double reps = cfg.reps;
  auto test = [&](const std::string& name, double target) {
    const double q = sets.num(row.at(name), "frequency");
    const double se = std::sqrt(q * (1.0 - q) / reps);
    out.check(q >= target - 3.0 * se, name + " frequency " + fmt(q) + " < " + fmt(target));
    return q;
  };
  const double qt = test("T", 1.0 - eps);
  const double qo = test("oracle_inequality", 1.0 - 3.0 * eps);
  out.check(cfg.reps == 200 && cfg.model.d == 5, "protocol mismatch");
  if (out.pass) out.detail = "P(T) " + fmt(qt) + ", oracle inequality " + fmt(qo) + " over 200 reps";
  return out;
}

std::map<std::string, std::string> csv_contents(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") files[entry.path().filename().string()] = slurp(entry.path());
  return files;
}

Outcome criterion_reproducibility() {
  Outcome out;
  struct Case {
    std::string config;
    std::vector<std::string> overrides;
  };
  const std::vector<Case> cases = {
      {"support_recovery.json", {"reps=3"}},
      {"dimension_sweep.json", {"reps=2", "model.p_grid=[10,20]"}},
      {"rate_study.json", {"reps=2", "sampling.T_grid=[100,200]"}},
      {"verify_sets.json", {"reps=6", "sampling.T=10"}},
      {"verify_concentration.json", {"audit.concentration_reps=300", "audit.ou_n=500"}},
  };
  int compared = 0;
  for (const auto& c : cases) {
    std::vector<std::map<std::string, std::string>> runs;
    for (const auto& [tag, jobs] : std::vector<std::pair<std::string, int>>{{"a", 1}, {"b", 1}, {"c", 3}}) {
      auto overrides = c.overrides;
      overrides.push_back("jobs=" + std::to_string(jobs));
      const std::string out_name = "repro_" + fs::path(c.config).stem().string() + "_" + tag;
      fs::remove_all(kScratch / out_name);
      run_experiment(load(c.config, out_name, overrides));
      runs.push_back(csv_contents(kScratch / out_name));
    }
    out.check(!runs[0].empty(), c.config + " wrote no CSV");
    out.check(runs[0] == runs[1], c.config + " differs between identical runs");
    out.check(runs[0] == runs[2], c.config + " differs between --jobs 1 and 3");
    compared += static_cast<int>(runs[0].size());
  }
  if (out.pass) out.detail = std::to_string(compared) + " CSV files byte-identical across reruns and job counts";
  return out;
}

}  // namespace

int main() {
  fs::create_directories(kScratch);
  struct Entry {
    const char* name;
    Outcome (*run)();
  };
  const Entry criteria[] = {
      {"solver correctness against brute force", criterion_solver},
      {"KKT certification", criterion_kkt},
      {"l1-path monotonicity", criterion_path},
      {"OU machinery", criterion_ou},
      {"formulation equivalence", criterion_equivalence},
      {"support-recovery reproduction", criterion_support_recovery},
      {"dimension-sweep reproduction", criterion_dimension_sweep},
      {"rate regime", criterion_rate},
      {"concentration audits", criterion_concentration},
      {"event sets and oracle inequality", criterion_event_sets},
      {"reproducibility", criterion_reproducibility},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << index << " (" << c.name << "): " << o.detail
              << " [" << fmt(seconds(t0)) << " s]" << std::endl;
  }
  std::cout << 11 - failed << "/11 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

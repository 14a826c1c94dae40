#include "driftlasso/experiments.hpp"

#include "driftlasso/errors.hpp"
#include "driftlasso/io.hpp"
#include "driftlasso/metrics.hpp"
#include "driftlasso/parallel.hpp"
#include "driftlasso/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <unordered_map>

namespace driftlasso {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class Progress {
 public:
  Progress(bool enabled, std::string label, std::size_t total)
      : enabled_(enabled), label_(std::move(label)), total_(total) {}

  void tick() {
    if (!enabled_) return;
    const std::size_t done = ++done_;
    std::lock_guard lock(mutex_);
    std::cerr << '\r' << label_ << ' ' << done << '/' << total_ << std::flush;
    if (done == total_) std::cerr << '\n';
  }

 private:
  bool enabled_;
  std::string label_;
  std::size_t total_;
  std::atomic<std::size_t> done_{0};
  std::mutex mutex_;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double binomial_se(double q, int reps) { return std::sqrt(q * (1.0 - q) / reps); }

int count_nonzero(const Vector& v) { return sparsity(v, 0.0); }

// Coefficient vector laid out for a heatmap: d x d for the interaction
// matrix, otherwise rows of ten (zero padded).
Matrix heatmap_layout(const Vector& theta, BasisFamily family, int d) {
  if (family == BasisFamily::OuLinear) return unvec(theta, d);
  const auto p = theta.size();
  const Eigen::Index width = std::min<Eigen::Index>(p, 10);
  const Eigen::Index rows = (p + width - 1) / width;
  Matrix m = Matrix::Zero(rows, width);
  for (Eigen::Index j = 0; j < p; ++j) m(j / width, j % width) = theta(j);
  return m;
}

std::string trajectory_svg(const Trajectory& traj) {
  std::vector<Series> series;
  const int shown = std::min(traj.dim(), 10);
  const int stride = std::max(1, traj.steps() / 1000);
  for (int c = 0; c < shown; ++c) {
    Series s;
    s.name = "x_" + std::to_string(c + 1);
    for (int i = 0; i <= traj.steps(); i += stride) {
      s.x.push_back(i * traj.delta_n);
      s.y.push_back(traj.states(i, c));
    }
    series.push_back(std::move(s));
  }
  PlotSpec spec;
  spec.title = "Simulated sample path";
  spec.xlabel = "t";
  spec.ylabel = "state";
  spec.markers = false;
  return line_plot_svg(spec, series);
}

void write_vector_csv(OutputSet& out, const std::string& name, const std::vector<std::string>& header,
                      const std::vector<const Vector*>& columns) {
  CsvTable table(header);
  const auto p = columns.front()->size();
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<std::string> row = {cell(static_cast<int>(j))};
    for (const auto* c : columns) row.push_back(cell((*c)(j)));
    table.row(std::move(row));
  }
  out.write(name, table);
}

struct ConstantsDetail {
  TuningConstants tc;
  json detail;
  double k = 0.0;
  double l = 0.0;
};

ConstantsDetail constants_detail(const ExperimentConfig& cfg, const Instance& inst, std::uint64_t seed) {
  const auto& a = cfg.audit;
  const int d = inst.basis.dim();
  const int n = inst.traj.steps();
  const double dn = inst.traj.delta_n;
  const int s = std::max(1, inst.sparsity);
  ConstantsDetail out;
  if (inst.basis.family() == BasisFamily::OuLinear) {
    const OUModel ou = ou_spectral_constants(unvec(inst.theta0, d));
    out.l = a.l.value_or(ou.l_min);
    out.k = a.k.value_or(std::sqrt(ou.l_min) / 2.0);
    if (!(out.k * out.k < ou.l_min)) throw ConfigError("audit.k", "k^2 must be smaller than l_min of the interaction matrix");
    out.tc = tuning_constants_ou(ou, d, n, s, dn, a.epsilon, a.gamma, out.k, a.C_b);
    out.detail = {{"m_frak", ou.m_frak}, {"p_frak", ou.p_frak}, {"l_min", ou.l_min},
                  {"l_max", ou.l_max},   {"a_frak", ou.a_frak}, {"C_b", a.C_b}};
  } else {
    if (inst.basis.family() != BasisFamily::Cosine)
      throw ConfigError("model.family", "formula constants need the cosine or ou-linear family");
    const auto parts = cosine_constant_parts(inst.basis, inst.theta0);
    ModelConstants mc;
    mc.L = a.L.value_or(parts.L);
    if (a.M)
      mc.M = *a.M;
    else if (parts.M_lower > 0.0)
      mc.M = parts.M_lower;
    else
      throw ConfigError("audit.M", "required: the cosine bound 3 s_anchor - sum |theta_j| L_j is not positive");
    if (a.R) {
      mc.R = *a.R;
    } else {
      const auto pre = simulate_linear(inst.basis, SparseParam(inst.theta0), Vector::Constant(d, cfg.sampling.x0), n,
                                       dn, cfg.sampling.substeps, substream_seed(seed, kPreRunStream), {},
                                       cfg.sampling.burn_in_for(n));
      mc.R = moment_constant(parts.growth, max_second_moment(pre.trajectory));
    }
    mc.H_dn = h_delta(mc.L, mc.M, dn, parts.max_lip_sq);
    mc.K_dn = k_delta(mc.L, mc.M, dn, parts.lip_matrix_op_norm);
    mc.C_b = a.C_b;
    mc.l = a.l.value_or(1.0);
    mc.k = a.k.value_or(std::sqrt(mc.l) / 2.0);
    mc.gamma = a.gamma;
    out.k = mc.k;
    out.l = mc.l;
    out.tc = tuning_constants_linear(mc, {d, inst.basis.params(), n, s}, dn, a.epsilon);
    out.detail = {{"L", mc.L}, {"M", mc.M}, {"R", mc.R}, {"H_dn", mc.H_dn}, {"K_dn", mc.K_dn}, {"C_b", mc.C_b}};
  }
  return out;
}

json tuning_json(const TuningConstants& tc) {
  if (tc.ou)
    return {{"lambda_1_ou", tc.lambda_1_ou}, {"lambda_2_ou", tc.lambda_2_ou}, {"T_1_ou", tc.T_1_ou},
            {"log_alpha", tc.log_alpha},     {"beta", tc.beta},               {"lambda", tc.lambda()},
            {"epsilon", tc.epsilon}};
  return {{"lambda_11", tc.lambda_11}, {"lambda_12", tc.lambda_12}, {"lambda_1", tc.lambda_1},
          {"lambda_2", tc.lambda_2},   {"T_1", tc.T_1},             {"lambda", tc.lambda()},
          {"epsilon", tc.epsilon}};
}

RegimeReport instance_regime(const Instance& inst) {
  const auto kind = inst.basis.family() == BasisFamily::OuLinear ? RegimeKind::OU : RegimeKind::Linear;
  return rate_regime(kind, inst.basis.dim(), inst.traj.steps(), inst.traj.delta_n, std::max(1, inst.sparsity));
}

json base_manifest(const ExperimentConfig& cfg) {
  return {{"experiment", to_string(cfg.kind)}, {"seed", cfg.seed}, {"config", cfg.resolved}};
}

void budget_check(const ExperimentConfig& cfg, RunResult& result) {
  const double projected = estimated_cost_seconds(cfg);
  result.summary["projected_seconds"] = projected;
  if (projected > cfg.budget_seconds) {
    const std::string w = "projected run time " + format_double(std::round(projected)) +
                          " s exceeds budget_seconds " + format_double(cfg.budget_seconds);
    result.warnings.push_back(w);
    std::cerr << "warning: " << w << "\n";
  }
}

void finish(const ExperimentConfig& cfg, OutputSet& out, RunResult& result, const json& timings) {
  out.write_json("timings.json", timings);
  json manifest = base_manifest(cfg);
  manifest["warnings"] = result.warnings;
  manifest["summary"] = result.summary;
  out.write_manifest(manifest);
  result.files = out.files();
}

struct EstimatorRow {
  std::string estimator;
  double lambda = 0.0;
  ErrorNorms err;
  SupportScore score;
  int sweeps = 0;
  double kkt = 0.0;
  bool converged = true;
};

struct Replication {
  std::uint64_t seed = 0;
  EstimatorRow lasso;
  EstimatorRow mle;
  bool short_block_warning = false;
  double seconds = 0.0;
  Vector theta0, lasso_hat, mle_hat;
  Trajectory traj;
};

Replication run_replication(const ExperimentConfig& cfg, int p, double horizon, double dn, std::uint64_t seed,
                            bool keep) {
  const auto start = Clock::now();
  Replication rep;
  rep.seed = seed;
  const Instance inst = draw_instance(cfg, p, horizon, dn, seed);
  const GramSystem sys = build_gram(inst.traj, inst.basis);
  const LambdaChoice choice = choose_lambda(cfg, inst, sys, seed);
  const auto lasso = lasso_solve(sys, choice.lambda, cfg.estimation.solver);
  const auto mle = mle_solve(sys);
  rep.short_block_warning = choice.short_block_warning;
  rep.lasso = {"lasso", choice.lambda, error_norms(lasso.theta_hat, inst.theta0),
               support_score(lasso.theta_hat, inst.theta0, 0.0), lasso.sweeps_used, lasso.kkt_residual,
               lasso.converged};
  rep.mle = {"mle", 0.0, error_norms(mle.theta_hat, inst.theta0),
             support_score(mle.theta_hat, inst.theta0, cfg.estimation.mle_threshold), 0,
             kkt_residual(sys, mle.theta_hat, 0.0), !mle.rank_deficient};
  if (keep) {
    rep.theta0 = inst.theta0;
    rep.lasso_hat = lasso.theta_hat;
    rep.mle_hat = mle.theta_hat;
    rep.traj = inst.traj;
  }
  rep.seconds = seconds_since(start);
  return rep;
}

std::vector<std::string> estimator_cells(const EstimatorRow& e) {
  return {e.estimator,
          cell(e.lambda),
          cell(e.err.l1),
          cell(e.err.l2),
          cell(e.score.precision),
          cell(e.score.recall),
          cell(e.score.f1),
          cell(e.score.true_positives),
          cell(e.score.false_positives),
          cell(e.score.false_negatives),
          cell(e.score.threshold),
          cell(e.sweeps),
          cell(e.kkt),
          cell(e.converged)};
}

const std::vector<std::string> kEstimatorHeader = {"estimator", "lambda", "l1", "l2", "precision",
                                                   "recall", "f1", "true_positives", "false_positives",
                                                   "false_negatives", "threshold", "sweeps", "kkt_residual",
                                                   "converged"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double linear_replication_cost(const ExperimentConfig& cfg, int p, double horizon, double dn) {
  const double n = horizon / dn;
  const double d = cfg.model.d;
  const double pp = cfg.model.family == BasisFamily::OuLinear ? d * d : p;
  const double burn = cfg.sampling.burn_in >= 0 ? cfg.sampling.burn_in : 0.1 * n;
  double cost = (n + burn) * cfg.sampling.substeps * d * pp * 2e-8 + n * d * pp * pp * 2e-9;
  if (cfg.estimation.lambda_mode == LambdaMode::CrossValidation)
    cost += cfg.estimation.folds * (n * d * pp * pp * 2e-9 + cfg.estimation.grid_size * pp * pp * 100 * 1e-9);
  return cost;
}

void warn_cv(RunResult& result, int count) {
  if (count > 0)
    result.warnings.push_back("cross-validation blocks shorter than p observations in " + std::to_string(count) +
                              " replication(s)");
}

}  // namespace

Vector generate_theta(int p, const ModelSpec& spec, Rng& rng) {
  const int nonzero = static_cast<int>(std::lround((1.0 - spec.sparsity) * p));
  std::vector<int> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates with explicit draws so the result does not depend on
  // the standard library's shuffle implementation
  for (int i = 0; i < nonzero; ++i) {
    std::uniform_int_distribution<int> pick(i, p - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  std::uniform_real_distribution<double> value(spec.nonzero_low, spec.nonzero_high);
  Vector theta = Vector::Zero(p);
  std::vector<int> chosen(idx.begin(), idx.begin() + nonzero);
  std::sort(chosen.begin(), chosen.end());
  for (int j : chosen) theta(j) = value(rng);
  return theta;
}

Matrix ou_truth(const ExperimentConfig& cfg) {
  if (cfg.model.ou_matrix.size() > 0) return cfg.model.ou_matrix;
  Rng rng = make_rng(substream_seed(cfg.seed, kTruthStream));
  std::uniform_real_distribution<double> value(cfg.model.nonzero_low, cfg.model.nonzero_high);
  Matrix a = Matrix::Zero(cfg.model.d, cfg.model.d);
  for (int i = 0; i < cfg.model.d; ++i) a(i, i) = value(rng);
  return a;
}

Instance draw_instance(const ExperimentConfig& cfg, int p, double horizon, double delta_n, std::uint64_t seed,
                       RecordFlags record) {
  const int d = cfg.model.d;
  const int n = cfg.sampling.steps_for(horizon, delta_n);
  const Vector x0 = Vector::Constant(d, cfg.sampling.x0);
  const std::uint64_t path_seed = substream_seed(seed, kPathStream);
  if (cfg.model.family == BasisFamily::OuLinear) {
    const Matrix a = ou_truth(cfg);
    Instance inst{DriftBasis::ou_linear(d), vec(a), {}, std::nullopt, count_nonzero(vec(a))};
    if (record.noise || record.fine) {
      auto sim = simulate_linear(inst.basis, SparseParam(inst.theta0), x0, n, delta_n, cfg.sampling.substeps,
                                 path_seed, record, cfg.sampling.burn_in_for(n));
      inst.traj = std::move(sim.trajectory);
      inst.noise = std::move(sim.noise);
    } else {
      inst.traj = simulate_ou_exact(a, n, delta_n, path_seed, cfg.sampling.stationary_init);
    }
    return inst;
  }
  Rng rng = make_rng(substream_seed(seed, kThetaStream));
  Vector theta = generate_theta(p, cfg.model, rng);
  const int s = count_nonzero(theta);
  const double anchor = cfg.model.s_anchor.value_or(std::max(1, s));
  Instance inst{DriftBasis::cosine(d, p, anchor), std::move(theta), {}, std::nullopt, s};
  auto sim = simulate_linear(inst.basis, SparseParam(inst.theta0), x0, n, delta_n, cfg.sampling.substeps, path_seed,
                             record, cfg.sampling.burn_in_for(n));
  inst.traj = std::move(sim.trajectory);
  inst.noise = std::move(sim.noise);
  return inst;
}

TuningConstants instance_constants(const ExperimentConfig& cfg, const Instance& inst, std::uint64_t seed) {
  return constants_detail(cfg, inst, seed).tc;
}

LambdaChoice choose_lambda(const ExperimentConfig& cfg, const Instance& inst, const GramSystem& sys,
                           std::uint64_t seed) {
  const auto& e = cfg.estimation;
  LambdaChoice out;
  switch (e.lambda_mode) {
    case LambdaMode::Fixed:
      out.lambda = *e.lambda;
      break;
    case LambdaMode::CrossValidation: {
      const double top = sys.linear.lpNorm<Eigen::Infinity>();
      if (!(top > 0.0)) break;
      auto cv = cross_validate(inst.traj, inst.basis, log_grid(top, e.grid_ratio, e.grid_size), e.folds, e.solver);
      out.lambda = cv.lambda_star;
      out.short_block_warning = cv.short_block_warning;
      out.cv = std::move(cv);
      break;
    }
    case LambdaMode::Formula:
      out.lambda = e.lambda_multiplier * instance_constants(cfg, inst, seed).lambda();
      break;
    case LambdaMode::FormulaLambda1: {
      const auto tc = instance_constants(cfg, inst, seed);
      out.lambda = e.lambda_multiplier * (tc.ou ? tc.lambda_1_ou : tc.lambda_1);
      break;
    }
  }
  return out;
}

double estimated_cost_seconds(const ExperimentConfig& cfg) {
  const auto& s = cfg.sampling;
  double total = 0.0;
  switch (cfg.kind) {
    case ExperimentKind::SupportRecovery:
      total = cfg.reps * linear_replication_cost(cfg, cfg.model.p, s.T, s.delta_n);
      break;
    case ExperimentKind::EstimateSingle:
      total = linear_replication_cost(cfg, cfg.model.p, s.T, s.delta_n);
      break;
    case ExperimentKind::DimensionSweep:
      for (int p : cfg.model.p_grid) total += cfg.reps * linear_replication_cost(cfg, p, s.T, s.delta_n);
      break;
    case ExperimentKind::RateStudy:
      for (double t : s.T_grid) {
        const double dn = s.delta_times_T ? *s.delta_times_T / t : s.delta_n;
        total += cfg.reps * linear_replication_cost(cfg, cfg.model.p, t, dn) / std::max(1, s.substeps);
      }
      break;
    case ExperimentKind::VerifySets: {
      const double per = linear_replication_cost(cfg, cfg.model.p, s.T, s.delta_n);
      const double pp = cfg.model.family == BasisFamily::OuLinear ? cfg.model.d * cfg.model.d : cfg.model.p;
      total = cfg.reps * (3.0 * per + cfg.audit.cone_budget * pp * pp * 2e-9);
      break;
    }
    case ExperimentKind::VerifyConcentration: {
      const double dl = static_cast<double>(cfg.audit.linear_matrix.rows());
      const double dou = static_cast<double>(cfg.audit.ou_matrix.rows());
      total = cfg.audit.concentration_reps *
              (cfg.audit.linear_n * cfg.audit.linear_substeps * dl * dl * 5e-8 + cfg.audit.ou_n * dou * dou * 5e-9);
      break;
    }
  }
  return total / cfg.jobs;
}

RunResult run_support_recovery(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunResult result;
  budget_check(cfg, result);
  OutputSet out(cfg.output_dir);
  const auto start = Clock::now();
  std::vector<Replication> reps(static_cast<std::size_t>(cfg.reps));
  Progress progress(opt.progress, "support-recovery", reps.size());
  parallel_for(reps.size(), cfg.jobs, [&](std::size_t r) {
    reps[r] = run_replication(cfg, cfg.model.p, cfg.sampling.T, cfg.sampling.delta_n, replication_seed(cfg.seed, r),
                              r == 0);
    progress.tick();
  });

  CsvTable table(concat({"replication", "seed"}, kEstimatorHeader));
  int short_blocks = 0;
  json timing = json::array();
  for (std::size_t r = 0; r < reps.size(); ++r) {
    for (const auto* e : {&reps[r].lasso, &reps[r].mle})
      table.row(concat({cell(static_cast<int>(r)), cell(reps[r].seed)}, estimator_cells(*e)));
    short_blocks += reps[r].short_block_warning;
    timing.push_back(reps[r].seconds);
  }
  warn_cv(result, short_blocks);
  out.write("replications.csv", table);

  CsvTable summary({"estimator", "reps", "median_l1", "median_l2", "median_precision", "median_recall",
                    "median_f1", "mean_f1", "median_lambda"});
  for (const bool lasso : {true, false}) {
    std::vector<double> l1, l2, pr, rc, f1, lam;
    for (const auto& rep : reps) {
      const auto& e = lasso ? rep.lasso : rep.mle;
      l1.push_back(e.err.l1);
      l2.push_back(e.err.l2);
      pr.push_back(e.score.precision);
      rc.push_back(e.score.recall);
      f1.push_back(e.score.f1);
      lam.push_back(e.lambda);
    }
    const std::string name = lasso ? "lasso" : "mle";
    summary.row({name, cell(cfg.reps), cell(median(l1)), cell(median(l2)), cell(median(pr)), cell(median(rc)),
                 cell(median(f1)), cell(mean(f1)), cell(median(lam))});
    result.summary[name] = {{"median_l1", median(l1)}, {"median_l2", median(l2)}, {"median_f1", median(f1)}};
  }
  out.write("summary.csv", summary);

  const auto& first = reps.front();
  write_vector_csv(out, "coefficients.csv", {"index", "true", "mle", "lasso"},
                   {&first.theta0, &first.mle_hat, &first.lasso_hat});
  const int d = cfg.model.d;
  out.write("coefficients.svg",
            heatmap_svg("True parameter, MLE and Lasso (replication 0)",
                        {{"true", heatmap_layout(first.theta0, cfg.model.family, d)},
                         {"MLE", heatmap_layout(first.mle_hat, cfg.model.family, d)},
                         {"Lasso", heatmap_layout(first.lasso_hat, cfg.model.family, d)}}));
  std::ostringstream traj_csv;
  write_trajectory_csv(first.traj, traj_csv);
  out.write("trajectory.csv", traj_csv.str());
  out.write("trajectory.svg", trajectory_svg(first.traj));

  finish(cfg, out, result, {{"total_seconds", seconds_since(start)}, {"replication_seconds", timing}});
  return result;
}

RunResult run_dimension_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunResult result;
  budget_check(cfg, result);
  OutputSet out(cfg.output_dir);
  const auto start = Clock::now();
  const auto& grid = cfg.model.p_grid;
  const std::size_t per = static_cast<std::size_t>(cfg.reps);
  std::vector<Replication> reps(grid.size() * per);
  Progress progress(opt.progress, "dimension-sweep", reps.size());
  parallel_for(reps.size(), cfg.jobs, [&](std::size_t i) {
    const int p = grid[i / per];
    const auto r = i % per;
    reps[i] = run_replication(cfg, p, cfg.sampling.T, cfg.sampling.delta_n,
                              replication_seed(substream_seed(cfg.seed, static_cast<std::uint64_t>(p)), r), false);
    progress.tick();
  });

  CsvTable rows(concat({"p", "replication", "seed"}, kEstimatorHeader));
  CsvTable summary({"p", "estimator", "mean_l1", "sd_l1", "mean_l2", "sd_l2", "reps"});
  std::vector<Series> l1_series(2), l2_series(2);
  l1_series[0].name = l2_series[0].name = "lasso";
  l1_series[1].name = l2_series[1].name = "mle";
  json timing = json::array();
  int short_blocks = 0;
  json summary_json = json::array();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> l1[2], l2[2];
    for (std::size_t r = 0; r < per; ++r) {
      const auto& rep = reps[g * per + r];
      for (int k = 0; k < 2; ++k) {
        const auto& e = k == 0 ? rep.lasso : rep.mle;
        rows.row(concat({cell(grid[g]), cell(static_cast<int>(r)), cell(rep.seed)}, estimator_cells(e)));
        l1[k].push_back(e.err.l1);
        l2[k].push_back(e.err.l2);
      }
      short_blocks += rep.short_block_warning;
      timing.push_back(rep.seconds);
    }
    for (int k = 0; k < 2; ++k) {
      summary.row({cell(grid[g]), k == 0 ? "lasso" : "mle", cell(mean(l1[k])), cell(sample_sd(l1[k])),
                   cell(mean(l2[k])), cell(sample_sd(l2[k])), cell(cfg.reps)});
      l1_series[static_cast<std::size_t>(k)].x.push_back(grid[g]);
      l1_series[static_cast<std::size_t>(k)].y.push_back(mean(l1[k]));
      l1_series[static_cast<std::size_t>(k)].err.push_back(sample_sd(l1[k]));
      l2_series[static_cast<std::size_t>(k)].x.push_back(grid[g]);
      l2_series[static_cast<std::size_t>(k)].y.push_back(mean(l2[k]));
      l2_series[static_cast<std::size_t>(k)].err.push_back(sample_sd(l2[k]));
    }
    summary_json.push_back({{"p", grid[g]},
                            {"lasso_mean_l1", mean(l1[0])},
                            {"mle_mean_l1", mean(l1[1])},
                            {"lasso_mean_l2", mean(l2[0])},
                            {"mle_mean_l2", mean(l2[1])}});
  }
  warn_cv(result, short_blocks);
  result.summary["points"] = summary_json;
  out.write("sweep_replications.csv", rows);
  out.write("sweep_summary.csv", summary);
  PlotSpec spec;
  spec.xlabel = "p";
  spec.title = "Mean l1 error (+/- 1 sd)";
  spec.ylabel = "l1 error";
  out.write("sweep_l1.svg", line_plot_svg(spec, l1_series));
  spec.title = "Mean l2 error (+/- 1 sd)";
  spec.ylabel = "l2 error";
  out.write("sweep_l2.svg", line_plot_svg(spec, l2_series));
  finish(cfg, out, result, {{"total_seconds", seconds_since(start)}, {"replication_seconds", timing}});
  return result;
}

RunResult run_rate_study(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunResult result;
  budget_check(cfg, result);
  OutputSet out(cfg.output_dir);
  const auto start = Clock::now();
  const auto& grid = cfg.sampling.T_grid;
  const Matrix a0 = ou_truth(cfg);
  const int d = cfg.model.d;
  const std::size_t per = static_cast<std::size_t>(cfg.reps);

  struct Point {
    double T, dn;
    int n;
  };
  std::vector<Point> points;
  for (double t : grid) {
    const double dn = cfg.sampling.delta_times_T ? *cfg.sampling.delta_times_T / t : cfg.sampling.delta_n;
    points.push_back({t, dn, cfg.sampling.steps_for(t, dn)});
  }

  struct RateRep {
    std::uint64_t seed;
    double lambda, l2, seconds;
    bool converged;
  };
  std::vector<RateRep> reps(points.size() * per);
  Progress progress(opt.progress, "rate-study", reps.size());
  parallel_for(reps.size(), cfg.jobs, [&](std::size_t i) {
    const auto t0 = Clock::now();
    const Point& pt = points[i / per];
    const std::uint64_t seed = replication_seed(substream_seed(cfg.seed, 1000 + i / per), i % per);
    const Instance inst = draw_instance(cfg, d * d, pt.T, pt.dn, seed);
    double lambda = 0.0;
    if (cfg.estimation.lambda_mode == LambdaMode::CrossValidation) {
      lambda = choose_lambda(cfg, inst, build_gram(inst.traj, inst.basis), seed).lambda;
    } else {
      GramSystem unused;
      lambda = choose_lambda(cfg, inst, unused, seed).lambda;
    }
    const auto est = lasso_ou(inst.traj, lambda, cfg.estimation.solver);
    reps[i] = {seed, lambda, (est.a_hat - a0).norm(), seconds_since(t0), est.converged()};
    progress.tick();
  });

  CsvTable rep_table({"T", "replication", "seed", "lambda", "l2", "converged"});
  CsvTable point_table({"T", "delta_n", "n", "regime_value", "regime", "mean_lambda", "mean_l2", "sd_l2", "reps"});
  std::vector<std::pair<double, double>> fit_points;
  std::vector<Regime> regimes;
  Series curve;
  curve.name = "mean l2";
  json timing = json::array();
  for (std::size_t g = 0; g < points.size(); ++g) {
    std::vector<double> l2, lam;
    for (std::size_t r = 0; r < per; ++r) {
      const auto& rep = reps[g * per + r];
      rep_table.row({cell(points[g].T), cell(static_cast<int>(r)), cell(rep.seed), cell(rep.lambda), cell(rep.l2),
                     cell(rep.converged)});
      l2.push_back(rep.l2);
      lam.push_back(rep.lambda);
      timing.push_back(rep.seconds);
    }
    const auto regime = rate_regime(RegimeKind::OU, d, points[g].n, points[g].dn, 1);
    regimes.push_back(regime.regime);
    point_table.row({cell(points[g].T), cell(points[g].dn), cell(points[g].n), cell(regime.value),
                     to_string(regime.regime), cell(mean(lam)), cell(mean(l2)), cell(sample_sd(l2)), cell(cfg.reps)});
    fit_points.emplace_back(points[g].T, mean(l2));
    curve.x.push_back(points[g].T);
    curve.y.push_back(mean(l2));
  }

  RateFit fit;
  std::vector<std::string> flags;
  if (fit_points.size() >= 3) {
    fit = rate_fit(fit_points);
  } else {
    const auto& [t1, e1] = fit_points[0];
    const auto& [t2, e2] = fit_points[1];
    fit.slope = std::log(e2 / e1) / std::log(t2 / t1);
    fit.intercept = std::log(e1) - fit.slope * std::log(t1);
    fit.r2 = 1.0;
    flags.push_back("two-point");
  }
  if (std::any_of(regimes.begin(), regimes.end(), [](Regime r) { return r == Regime::DiscretizationDominated; })) {
    flags.push_back("regime-contaminated");
    result.warnings.push_back(
        "d^2 n delta_n^2 exceeds 10 at some horizons: the discretization term may dominate the error");
  }
  if (std::adjacent_find(regimes.begin(), regimes.end(), std::not_equal_to<>()) != regimes.end()) {
    flags.push_back("straddles-boundary");
    result.warnings.push_back("configured horizons fall in different rate regimes");
  }
  std::string flag_text;
  for (const auto& f : flags) flag_text += (flag_text.empty() ? "" : ";") + f;
  CsvTable fit_table({"slope", "intercept", "r2", "points", "flags"});
  fit_table.row({cell(fit.slope), cell(fit.intercept), cell(fit.r2), cell(static_cast<int>(fit_points.size())),
                 flag_text});

  out.write("rate_replications.csv", rep_table);
  out.write("rate_points.csv", point_table);
  out.write("rate_fit.csv", fit_table);
  Series reference;
  reference.name = "T^(-1/2)";
  for (double t : curve.x) {
    reference.x.push_back(t);
    reference.y.push_back(curve.y.front() * std::sqrt(curve.x.front() / t));
  }
  PlotSpec spec;
  spec.title = "Mean l2 error of the interaction-matrix Lasso";
  spec.xlabel = "T";
  spec.ylabel = "mean l2 error";
  spec.logx = spec.logy = true;
  out.write("rate.svg", line_plot_svg(spec, {curve, reference}));
  result.summary["slope"] = fit.slope;
  result.summary["r2"] = fit.r2;
  result.summary["flags"] = flags;
  finish(cfg, out, result, {{"total_seconds", seconds_since(start)}, {"replication_seconds", timing}});
  return result;
}

namespace {

void verify_sets(const ExperimentConfig& cfg, const RunOptions& opt, OutputSet& out, RunResult& result,
                 json& timing) {
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);
  const int p = cfg.model.family == BasisFamily::OuLinear ? cfg.model.d * cfg.model.d : cfg.model.p;

  struct SetRep {
    std::uint64_t seed;
    double lambda, k, l;
    int s;
    EventStatistics ev;
    GramSystem gram;
    Vector theta0;
    double seconds;
  };
  std::vector<SetRep> rows(reps);
  Progress progress(opt.progress, "verify-sets", reps);
  ConstantsDetail first_constants;
  parallel_for(reps, cfg.jobs, [&](std::size_t r) {
    const auto t0 = Clock::now();
    const std::uint64_t seed = replication_seed(cfg.seed, r);
    const Instance inst = draw_instance(cfg, p, cfg.sampling.T, cfg.sampling.delta_n, seed, {true, true});
    const GramSystem sys = build_gram(inst.traj, inst.basis);
    const auto detail = constants_detail(cfg, inst, seed);
    if (r == 0) first_constants = detail;
    const double lambda = choose_lambda(cfg, inst, sys, seed).lambda;
    const int s = std::max(1, inst.sparsity);
    auto ev = event_statistics(inst.traj, *inst.noise, inst.basis, SparseParam(inst.theta0), s, cfg.audit.gamma,
                               cfg.audit.cone_budget, substream_seed(seed, kConeStream), lambda, detail.k);
    rows[r] = {seed, lambda, detail.k, detail.l, s, ev, sys, inst.theta0, seconds_since(t0)};
    progress.tick();
  });

  // The oracle audit re-uses the Gram systems built above, keyed by seed.
  std::unordered_map<std::uint64_t, std::size_t> by_seed;
  for (std::size_t r = 0; r < reps; ++r) by_seed[rows[r].seed] = r;
  auto make = [&](std::uint64_t seed) {
    const auto& row = rows.at(by_seed.at(seed));
    return OracleReplication{row.gram, row.theta0};
  };
  // Every replication shares lambda, k and s unless the truth is random, in
  // which case the per-replication values are audited one at a time.
  std::vector<double> lhs(reps), rhs(reps);
  std::vector<char> holds(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto& row = rows[r];
    const auto audit =
        oracle_audit([&](std::uint64_t) { return make(row.seed); }, row.lambda, row.k,
                     row.l, cfg.audit.gamma, row.s, cfg.sampling.delta_n, cfg.audit.epsilon, 1, row.seed,
                     cfg.estimation.solver, 1);
    lhs[r] = audit.lhs[0];
    rhs[r] = audit.rhs;
    holds[r] = audit.holds[0];
  }

  CsvTable events({"replication", "stat_T", "stat_Tp", "k_hat", "holds_T", "holds_Tp", "holds_Tpp"});
  CsvTable oracle({"replication", "lambda", "lhs", "rhs", "holds"});
  int n_t = 0, n_tp = 0, n_tpp = 0, n_all = 0, n_oracle = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto& ev = rows[r].ev;
    events.row({cell(static_cast<int>(r)), cell(ev.stat_T), cell(ev.stat_Tp), cell(ev.k_hat), cell(ev.holds_T),
                cell(ev.holds_Tp), cell(ev.holds_Tpp)});
    oracle.row({cell(static_cast<int>(r)), cell(rows[r].lambda), cell(lhs[r]), cell(rhs[r]), cell(holds[r] != 0)});
    n_t += ev.holds_T;
    n_tp += ev.holds_Tp;
    n_tpp += ev.holds_Tpp;
    n_all += ev.holds_T && ev.holds_Tp && ev.holds_Tpp;
    n_oracle += holds[r] != 0;
    timing.push_back(rows[r].seconds);
  }
  const int total = cfg.reps;
  const double eps = cfg.audit.epsilon;
  CsvTable sets({"quantity", "frequency", "target", "se", "reps"});
  json freq = json::object();
  auto add = [&](const std::string& name, int hits, double target) {
    const double q = static_cast<double>(hits) / total;
    sets.row({name, cell(q), cell(target), cell(binomial_se(q, total)), cell(total)});
    freq[name] = {{"frequency", q}, {"target", target}};
  };
  add("T", n_t, 1.0 - eps);
  add("Tp", n_tp, 1.0 - eps);
  add("Tpp", n_tpp, 1.0 - eps);
  add("intersection", n_all, 1.0 - 3.0 * eps);
  add("oracle_inequality", n_oracle, 1.0 - 3.0 * eps);
  out.write("events.csv", events);
  out.write("oracle.csv", oracle);
  out.write("sets_summary.csv", sets);

  const auto& c = first_constants;
  CsvTable constants({"name", "value"});
  for (auto it = c.detail.begin(); it != c.detail.end(); ++it) constants.row({it.key(), cell(it.value().get<double>())});
  const json tj = tuning_json(c.tc);
  for (auto it = tj.begin(); it != tj.end(); ++it) constants.row({it.key(), cell(it.value().get<double>())});
  constants.row({"k", cell(c.k)});
  constants.row({"l", cell(c.l)});
  constants.row({"gamma", cell(cfg.audit.gamma)});
  constants.row({"lambda_used", cell(rows.front().lambda)});
  constants.row({"s", cell(rows.front().s)});
  const auto kind = cfg.model.family == BasisFamily::OuLinear ? RegimeKind::OU : RegimeKind::Linear;
  const auto regime = rate_regime(kind, cfg.model.d, cfg.sampling.steps_for(cfg.sampling.T, cfg.sampling.delta_n),
                                  cfg.sampling.delta_n, rows.front().s);
  constants.row({"regime_value", cell(regime.value)});
  out.write("constants.csv", constants);
  result.summary["sets"] = freq;
  result.summary["lambda"] = rows.front().lambda;
  result.summary["regime"] = to_string(regime.regime);
}

void verify_concentration(const ExperimentConfig& cfg, const RunOptions& opt, OutputSet& out, RunResult& result) {
  const auto& a = cfg.audit;
  const Matrix& lin = a.linear_matrix;
  const int dl = static_cast<int>(lin.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> sym(0.5 * (lin + lin.transpose()), Eigen::EigenvaluesOnly);
  const double M = a.M.value_or(sym.eigenvalues().minCoeff());
  if (!(M > 0.0)) throw ConfigError("audit.linear_matrix", "symmetric part must be positive definite");
  const double L = a.L.value_or(lin.jacobiSvd().singularValues()(0));
  LinearAuditModel model{DriftBasis::ou_linear(dl), SparseParam(vec(lin)), Vector::Zero(dl), a.linear_n,
                         a.linear_delta_n, a.linear_substeps, 0, L, M};
  const double clip = a.clip;
  auto f = [clip](const Vector& x) { return std::clamp(x(0), -clip, clip); };
  if (opt.progress) std::cerr << "verify-concentration: linear audit\n";
  const auto linear_rows = concentration_audit_linear(model, f, 1.0, a.r_grid, a.concentration_reps,
                                                      substream_seed(cfg.seed, 11), cfg.jobs);
  const OUModel ou = ou_spectral_constants(a.ou_matrix);
  if (opt.progress) std::cerr << "verify-concentration: OU audit\n";
  const auto ou_rows = concentration_audit_ou(ou, a.ou_n, a.ou_delta_n, a.x_grid, a.concentration_reps,
                                              substream_seed(cfg.seed, 12), a.directions, cfg.jobs);

  int violations = 0;
  auto table = [&](const std::vector<AuditRow>& rows, const std::string& name, const std::string& title) {
    CsvTable t({"r_or_x", "empirical", "bound", "se", "reps"});
    Series emp, bound;
    emp.name = "empirical";
    bound.name = "bound";
    for (const auto& row : rows) {
      t.row({cell(row.point), cell(row.empirical), cell(row.bound), cell(row.se), cell(row.reps)});
      violations += row.empirical > row.bound + 3.0 * row.se;
      emp.x.push_back(row.point);
      emp.y.push_back(row.empirical);
      emp.err.push_back(row.se);
      bound.x.push_back(row.point);
      bound.y.push_back(std::min(row.bound, 1.0));
    }
    out.write(name + ".csv", t);
    PlotSpec spec;
    spec.title = title;
    spec.xlabel = name == "concentration_linear" ? "r" : "x";
    spec.ylabel = "tail probability";
    out.write(name + ".svg", line_plot_svg(spec, {emp, bound}));
  };
  table(linear_rows, "concentration_linear", "Tail of the path average of f against the bound");
  table(ou_rows, "concentration_ou", "Tail of |v'(C_T - C_inf)v| against 2 exp(-n dn H0(x))");
  CsvTable params({"name", "value"});
  params.row({"linear_L", cell(L)});
  params.row({"linear_M", cell(M)});
  params.row({"ou_m_frak", cell(ou.m_frak)});
  params.row({"ou_p_frak", cell(ou.p_frak)});
  params.row({"ou_l_max", cell(ou.l_max)});
  out.write("concentration_params.csv", params);
  result.summary["concentration_violations"] = violations;
}

}  // namespace

RunResult run_verifications(const ExperimentConfig& cfg, const RunOptions& opt, bool both) {
  RunResult result;
  budget_check(cfg, result);
  OutputSet out(cfg.output_dir);
  const auto start = Clock::now();
  json timing = json::array();
  if (both || cfg.kind == ExperimentKind::VerifySets) verify_sets(cfg, opt, out, result, timing);
  if (both || cfg.kind == ExperimentKind::VerifyConcentration) verify_concentration(cfg, opt, out, result);
  finish(cfg, out, result, {{"total_seconds", seconds_since(start)}, {"replication_seconds", timing}});
  return result;
}

RunResult run_estimate_single(const ExperimentConfig& cfg, const RunOptions&) {
  RunResult result;
  OutputSet out(cfg.output_dir);
  const auto start = Clock::now();
  const std::uint64_t seed = replication_seed(cfg.seed, 0);
  const Instance inst = draw_instance(cfg, cfg.model.p, cfg.sampling.T, cfg.sampling.delta_n, seed);
  const GramSystem sys = build_gram(inst.traj, inst.basis);
  const auto choice = choose_lambda(cfg, inst, sys, seed);
  const auto lasso = lasso_solve(sys, choice.lambda, cfg.estimation.solver);
  const auto mle = mle_solve(sys);
  write_vector_csv(out, "estimate.csv", {"index", "true", "lasso", "mle"}, {&inst.theta0, &lasso.theta_hat, &mle.theta_hat});
  std::ostringstream traj_csv;
  write_trajectory_csv(inst.traj, traj_csv);
  out.write("trajectory.csv", traj_csv.str());
  const auto le = error_norms(lasso.theta_hat, inst.theta0), me = error_norms(mle.theta_hat, inst.theta0);
  result.summary = {{"lambda", choice.lambda},
                    {"lambda_mode", to_string(cfg.estimation.lambda_mode)},
                    {"kkt_residual", lasso.kkt_residual},
                    {"sweeps", lasso.sweeps_used},
                    {"converged", lasso.converged},
                    {"lasso_l1", le.l1},
                    {"lasso_l2", le.l2},
                    {"mle_l1", me.l1},
                    {"mle_l2", me.l2},
                    {"mle_rank", mle.rank},
                    {"mle_rank_deficient", mle.rank_deficient}};
  out.write_json("estimate.json", result.summary);
  finish(cfg, out, result, {{"total_seconds", seconds_since(start)}});
  return result;
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  switch (cfg.kind) {
    case ExperimentKind::SupportRecovery: return run_support_recovery(cfg, opt);
    case ExperimentKind::DimensionSweep: return run_dimension_sweep(cfg, opt);
    case ExperimentKind::RateStudy: return run_rate_study(cfg, opt);
    case ExperimentKind::VerifySets:
    case ExperimentKind::VerifyConcentration: return run_verifications(cfg, opt);
    case ExperimentKind::EstimateSingle: return run_estimate_single(cfg, opt);
  }
  throw ConfigError("experiment", "unknown experiment kind");
}

RunResult run_simulate(const ExperimentConfig& cfg, bool binary) {
  RunResult result;
  OutputSet out(cfg.output_dir);
  const auto start = Clock::now();
  const Instance inst =
      draw_instance(cfg, cfg.model.p, cfg.sampling.T, cfg.sampling.delta_n, replication_seed(cfg.seed, 0));
  const std::string name = binary ? "trajectory.bin" : "trajectory.csv";
  out.write(name, [&] {
    std::ostringstream buf;
    if (binary)
      write_trajectory_binary(inst.traj, buf);
    else
      write_trajectory_csv(inst.traj, buf);
    return buf.str();
  }());
  write_vector_csv(out, "truth.csv", {"index", "value"}, {&inst.theta0});
  result.summary = {{"steps", inst.traj.steps()},
                    {"delta_n", inst.traj.delta_n},
                    {"dim", inst.traj.dim()},
                    {"s_anchor", inst.basis.s_anchor()},
                    {"sparsity", inst.sparsity}};
  finish(cfg, out, result, {{"total_seconds", seconds_since(start)}});
  return result;
}

namespace {

DriftBasis basis_for_file(const ExperimentConfig& cfg, const Trajectory& traj) {
  if (cfg.model.family == BasisFamily::OuLinear) return DriftBasis::ou_linear(traj.dim());
  if (!cfg.model.s_anchor)
    throw ConfigError("model.s_anchor", "required when estimating from a stored trajectory");
  if (traj.dim() != cfg.model.d)
    throw ConfigError("model.d", "trajectory has dimension " + std::to_string(traj.dim()));
  return DriftBasis::cosine(cfg.model.d, cfg.model.p, *cfg.model.s_anchor);
}

Instance file_instance(const ExperimentConfig& cfg, const std::string& input) {
  if (cfg.estimation.lambda_mode == LambdaMode::Formula || cfg.estimation.lambda_mode == LambdaMode::FormulaLambda1)
    throw ConfigError("estimation.lambda_mode", "formula modes need the ground truth; use cv or fixed");
  Trajectory traj = load_trajectory(input);
  DriftBasis basis = basis_for_file(cfg, traj);
  const int p = basis.params();
  return Instance{std::move(basis), Vector::Zero(p), std::move(traj), std::nullopt, 0};
}

}  // namespace

RunResult run_estimate_file(const ExperimentConfig& cfg, const std::string& input) {
  RunResult result;
  OutputSet out(cfg.output_dir);
  const auto start = Clock::now();
  const Instance inst = file_instance(cfg, input);
  const GramSystem sys = build_gram(inst.traj, inst.basis);
  const auto choice = choose_lambda(cfg, inst, sys, cfg.seed);
  const auto lasso = lasso_solve(sys, choice.lambda, cfg.estimation.solver);
  const auto mle = mle_solve(sys);
  write_vector_csv(out, "estimate.csv", {"index", "lasso", "mle"}, {&lasso.theta_hat, &mle.theta_hat});
  result.summary = {{"input", input},
                    {"lambda", choice.lambda},
                    {"lambda_mode", to_string(cfg.estimation.lambda_mode)},
                    {"kkt_residual", lasso.kkt_residual},
                    {"sweeps", lasso.sweeps_used},
                    {"converged", lasso.converged},
                    {"mle_rank", mle.rank},
                    {"mle_rank_deficient", mle.rank_deficient}};
  out.write_json("estimate.json", result.summary);
  finish(cfg, out, result, {{"total_seconds", seconds_since(start)}});
  return result;
}

RunResult run_cv(const ExperimentConfig& cfg, const std::string& input) {
  RunResult result;
  OutputSet out(cfg.output_dir);
  const auto start = Clock::now();
  ExperimentConfig local = cfg;
  local.estimation.lambda_mode = LambdaMode::CrossValidation;
  const Instance inst = input.empty() ? draw_instance(local, local.model.p, local.sampling.T, local.sampling.delta_n,
                                                      replication_seed(local.seed, 0))
                                      : file_instance(local, input);
  const GramSystem sys = build_gram(inst.traj, inst.basis);
  const auto choice = choose_lambda(local, inst, sys, local.seed);
  if (!choice.cv) throw NumericDegeneracy("linear term vanishes; no lambda grid can be formed");
  const auto& cv = *choice.cv;
  std::vector<std::string> header = {"lambda"};
  for (Eigen::Index k = 0; k < cv.fold_scores.cols(); ++k) header.push_back("fold_" + std::to_string(k + 1));
  header.push_back("mean");
  CsvTable table(header);
  for (std::size_t g = 0; g < cv.lambdas.size(); ++g) {
    std::vector<std::string> row = {cell(cv.lambdas[g])};
    for (Eigen::Index k = 0; k < cv.fold_scores.cols(); ++k) row.push_back(cell(cv.fold_scores(static_cast<Eigen::Index>(g), k)));
    row.push_back(cell(cv.mean_score(static_cast<Eigen::Index>(g))));
    table.row(std::move(row));
  }
  out.write("cv_scores.csv", table);
  if (cv.short_block_warning) result.warnings.push_back("cross-validation blocks shorter than p observations");
  result.summary = {{"lambda_star", cv.lambda_star}, {"folds", cv.fold_scores.cols()},
                    {"short_block_warning", cv.short_block_warning}};
  out.write_json("cv.json", result.summary);
  finish(cfg, out, result, {{"total_seconds", seconds_since(start)}});
  return result;
}

json constants_report(const ExperimentConfig& cfg) {
  const std::uint64_t seed = replication_seed(cfg.seed, 0);
  const Instance inst = draw_instance(cfg, cfg.model.p, cfg.sampling.T, cfg.sampling.delta_n, seed);
  const auto detail = constants_detail(cfg, inst, seed);
  const auto regime = instance_regime(inst);
  return {{"family", to_string(inst.basis.family())},
          {"d", inst.basis.dim()},
          {"p", inst.basis.params()},
          {"n", inst.traj.steps()},
          {"s", std::max(1, inst.sparsity)},
          {"delta_n", inst.traj.delta_n},
          {"gamma", cfg.audit.gamma},
          {"k", detail.k},
          {"l", detail.l},
          {"model_constants", detail.detail},
          {"tuning_constants", tuning_json(detail.tc)},
          {"regime", {{"value", regime.value}, {"tag", to_string(regime.regime)}}}};
}

}  // namespace driftlasso

#pragma once

#include "driftlasso/config.hpp"
#include "driftlasso/estimate.hpp"
#include "driftlasso/rng.hpp"
#include "driftlasso/simulate.hpp"
#include "driftlasso/theory.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace driftlasso {

struct RunOptions {
  bool progress = false;  ///< textual replication counter on stderr
};

struct RunResult {
  std::vector<std::string> files;  ///< written into the output directory, manifest excluded
  std::vector<std::string> warnings;
  nlohmann::json summary;
};

/// Purposes of the per-replication random streams.
enum Stream : std::uint64_t {
  kThetaStream = 1,
  kPathStream = 2,
  kConeStream = 3,
  kPreRunStream = 4,
  kTruthStream = 5,
};

/// round((1 - sparsity) p) nonzeros at uniformly random positions, values
/// Uniform[nonzero_low, nonzero_high].
Vector generate_theta(int p, const ModelSpec& spec, Rng& rng);

/// The configured interaction matrix, or a diagonal one drawn from
/// Uniform[nonzero_low, nonzero_high] with the experiment seed.
Matrix ou_truth(const ExperimentConfig& cfg);

/// One simulated data set together with its ground truth.
struct Instance {
  DriftBasis basis;
  Vector theta0;
  Trajectory traj;
  std::optional<NoiseRecord> noise;
  int sparsity = 0;
};

/// Draws theta0 (cosine family) or uses ou_truth (ou-linear family) and
/// simulates. The ou-linear family uses the exact sampler unless noise
/// records are requested, in which case the instrumented Euler sampler runs.
Instance draw_instance(const ExperimentConfig& cfg, int p, double horizon, double delta_n,
                       std::uint64_t seed, RecordFlags record = {});

/// Formula thresholds for an instance under the audit block.
TuningConstants instance_constants(const ExperimentConfig& cfg, const Instance& inst, std::uint64_t seed);

struct LambdaChoice {
  double lambda = 0.0;
  bool short_block_warning = false;
  std::optional<CvResult> cv;
};

LambdaChoice choose_lambda(const ExperimentConfig& cfg, const Instance& inst, const GramSystem& sys,
                           std::uint64_t seed);

/// Projected wall time of the configured run in seconds, from a rough
/// operation count.
double estimated_cost_seconds(const ExperimentConfig& cfg);

RunResult run_support_recovery(const ExperimentConfig& cfg, const RunOptions& opt = {});
RunResult run_dimension_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {});
RunResult run_rate_study(const ExperimentConfig& cfg, const RunOptions& opt = {});
/// Event sets and oracle inequality (verify-sets), concentration tables
/// (verify-concentration), or both when `both` is set.
RunResult run_verifications(const ExperimentConfig& cfg, const RunOptions& opt = {}, bool both = false);
RunResult run_estimate_single(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Dispatches on cfg.kind.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Simulates one path per the model and sampling blocks and writes it as
/// trajectory.csv or trajectory.bin with the ground truth alongside.
RunResult run_simulate(const ExperimentConfig& cfg, bool binary);

/// Lasso (fixed or CV lambda) and MLE on a stored trajectory.
RunResult run_estimate_file(const ExperimentConfig& cfg, const std::string& input);

/// CV score table on a stored trajectory, or on a fresh simulation when
/// `input` is empty.
RunResult run_cv(const ExperimentConfig& cfg, const std::string& input);

/// Model and tuning constants of the configured instance.
nlohmann::json constants_report(const ExperimentConfig& cfg);

}  // namespace driftlasso

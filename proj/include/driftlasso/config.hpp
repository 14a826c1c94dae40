#pragma once

#include "driftlasso/estimate.hpp"
#include "driftlasso/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace driftlasso {

enum class ExperimentKind {
  SupportRecovery,
  DimensionSweep,
  RateStudy,
  VerifySets,
  VerifyConcentration,
  EstimateSingle,
};

const char* to_string(ExperimentKind kind);

enum class LambdaMode { CrossValidation, Fixed, Formula, FormulaLambda1 };

const char* to_string(LambdaMode mode);

struct ModelSpec {
  BasisFamily family = BasisFamily::Cosine;
  int d = 10;
  int p = 30;
  std::vector<int> p_grid;
  std::optional<double> s_anchor;  ///< defaults to the number of nonzeros of theta0
  double sparsity = 0.7;           ///< fraction of zero entries in theta0
  double nonzero_low = 2.0;
  double nonzero_high = 3.0;
  Matrix ou_matrix;  ///< empty unless given; ou_diagonal is folded in here
};

struct SamplingSpec {
  double T = 7.0;
  double delta_n = 0.01;
  std::vector<double> T_grid;
  std::optional<double> delta_times_T;  ///< when set, delta_n = delta_times_T / T
  int substeps = 10;
  int burn_in = -1;  ///< -1 means ceil(0.1 n)
  double x0 = 0.0;
  bool stationary_init = true;

  int steps_for(double horizon, double dn) const;
  int burn_in_for(int n) const;
};

struct EstimationSpec {
  LambdaMode lambda_mode = LambdaMode::CrossValidation;
  std::optional<double> lambda;
  double lambda_multiplier = 1.0;
  int grid_size = 30;
  double grid_ratio = 1e-3;
  int folds = 5;
  double mle_threshold = 0.5;
  LassoConfig solver;
};

struct AuditSpec {
  double epsilon = 0.1;
  double gamma = 1.0;
  std::optional<double> k;
  std::optional<double> l;
  double C_b = 1.0;
  std::optional<double> M;
  std::optional<double> L;
  std::optional<double> R;
  int cone_budget = 2000;
  std::vector<double> r_grid;
  std::vector<double> x_grid;
  int directions = 20;
  int concentration_reps = 10000;
  Matrix linear_matrix;
  int linear_n = 100;
  double linear_delta_n = 0.1;
  int linear_substeps = 1;
  double clip = 10.0;
  Matrix ou_matrix;
  int ou_n = 5000;
  double ou_delta_n = 0.1;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SupportRecovery;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int jobs = 1;
  double budget_seconds = 600.0;
  int reps = 20;
  ModelSpec model;
  SamplingSpec sampling;
  EstimationSpec estimation;
  AuditSpec audit;
  nlohmann::json resolved;  ///< the validated document, defaults filled in
};

/// Every recognised key with its default value; doubles as the schema.
nlohmann::json default_config();

/// Parses a JSON config file. Syntax errors raise ConfigError.
nlohmann::json load_config_file(const std::string& path);

/// Applies `a.b.c=value`; the value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Merges `doc` over the defaults, rejecting unknown keys and wrong types,
/// then range-checks every field. Errors carry the dotted key path.
ExperimentConfig parse_config(const nlohmann::json& doc);

}  // namespace driftlasso

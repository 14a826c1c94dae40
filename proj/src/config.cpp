#include "driftlasso/config.hpp"

#include "driftlasso/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace driftlasso {

using nlohmann::json;

namespace {

enum class Kind { Int, Number, OptNumber, String, Bool, IntList, NumberList, MatrixValue };

struct Entry {
  const char* path;
  Kind kind;
  json value;
};

const std::vector<Entry>& schema() {
  static const std::vector<Entry> table = {
      {"experiment", Kind::String, "support-recovery"},
      {"seed", Kind::Int, 1},
      {"output_dir", Kind::String, "out"},
      {"jobs", Kind::Int, 1},
      {"budget_seconds", Kind::Number, 600.0},
      {"reps", Kind::Int, 20},
      {"model.family", Kind::String, "cosine"},
      {"model.d", Kind::Int, 10},
      {"model.p", Kind::Int, 30},
      {"model.p_grid", Kind::IntList, json::array()},
      {"model.s_anchor", Kind::OptNumber, nullptr},
      {"model.sparsity", Kind::Number, 0.7},
      {"model.nonzero_low", Kind::Number, 2.0},
      {"model.nonzero_high", Kind::Number, 3.0},
      {"model.ou_diagonal", Kind::NumberList, json::array()},
      {"model.ou_matrix", Kind::MatrixValue, json::array()},
      {"sampling.T", Kind::Number, 7.0},
      {"sampling.delta_n", Kind::Number, 0.01},
      {"sampling.T_grid", Kind::NumberList, json::array()},
      {"sampling.delta_times_T", Kind::OptNumber, nullptr},
      {"sampling.substeps", Kind::Int, 10},
      {"sampling.burn_in", Kind::Int, -1},
      {"sampling.x0", Kind::Number, 0.0},
      {"sampling.stationary_init", Kind::Bool, true},
      {"estimation.lambda_mode", Kind::String, "cv"},
      {"estimation.lambda", Kind::OptNumber, nullptr},
      {"estimation.lambda_multiplier", Kind::Number, 1.0},
      {"estimation.grid_size", Kind::Int, 30},
      {"estimation.grid_ratio", Kind::Number, 1e-3},
      {"estimation.folds", Kind::Int, 5},
      {"estimation.mle_threshold", Kind::Number, 0.5},
      {"estimation.tol", Kind::Number, 1e-9},
      {"estimation.max_sweeps", Kind::Int, 10000},
      {"audit.epsilon", Kind::Number, 0.1},
      {"audit.gamma", Kind::Number, 1.0},
      {"audit.k", Kind::OptNumber, nullptr},
      {"audit.l", Kind::OptNumber, nullptr},
      {"audit.C_b", Kind::Number, 1.0},
      {"audit.M", Kind::OptNumber, nullptr},
      {"audit.L", Kind::OptNumber, nullptr},
      {"audit.R", Kind::OptNumber, nullptr},
      {"audit.cone_budget", Kind::Int, 2000},
      {"audit.r_grid", Kind::NumberList, json::array({0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0})},
      {"audit.x_grid", Kind::NumberList, json::array({0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0})},
      {"audit.directions", Kind::Int, 20},
      {"audit.concentration_reps", Kind::Int, 10000},
      {"audit.linear_matrix", Kind::MatrixValue, json::array({json::array({1.0, 0.3}), json::array({-0.2, 1.5})})},
      {"audit.linear_n", Kind::Int, 100},
      {"audit.linear_delta_n", Kind::Number, 0.1},
      {"audit.linear_substeps", Kind::Int, 1},
      {"audit.clip", Kind::Number, 10.0},
      {"audit.ou_diagonal", Kind::NumberList, json::array({1.0, 2.0, 3.0})},
      {"audit.ou_n", Kind::Int, 5000},
      {"audit.ou_delta_n", Kind::Number, 0.1},
  };
  return table;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  return parts;
}

json::json_pointer pointer(const std::string& path) {
  std::string p;
  for (const auto& part : split_path(path)) p += "/" + part;
  return json::json_pointer(p);
}

const Entry* find_entry(const std::string& path) {
  for (const auto& e : schema())
    if (path == e.path) return &e;
  return nullptr;
}

bool is_prefix(const std::string& path) {
  for (const auto& e : schema()) {
    const std::string full = e.path;
    if (full.size() > path.size() && full.compare(0, path.size(), path) == 0 && full[path.size()] == '.')
      return true;
  }
  return false;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Int: return "an integer";
    case Kind::Number: return "a number";
    case Kind::OptNumber: return "a number or null";
    case Kind::String: return "a string";
    case Kind::Bool: return "a boolean";
    case Kind::IntList: return "an array of integers";
    case Kind::NumberList: return "an array of numbers";
    case Kind::MatrixValue: return "an array of equal-length numeric rows";
  }
  return "";
}

bool type_ok(Kind k, const json& v) {
  switch (k) {
    case Kind::Int: return v.is_number_integer();
    case Kind::Number: return v.is_number();
    case Kind::OptNumber: return v.is_null() || v.is_number();
    case Kind::String: return v.is_string();
    case Kind::Bool: return v.is_boolean();
    case Kind::IntList:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); });
    case Kind::NumberList:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
    case Kind::MatrixValue: {
      if (!v.is_array()) return false;
      std::size_t cols = 0;
      for (const auto& row : v) {
        if (!row.is_array() || row.empty()) return false;
        if (cols == 0) cols = row.size();
        if (row.size() != cols) return false;
        for (const auto& x : row)
          if (!x.is_number()) return false;
      }
      return true;
    }
  }
  return false;
}

void check_and_merge(const json& user, json& target, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError(prefix, "expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (const Entry* e = find_entry(path)) {
      if (!type_ok(e->kind, it.value()))
        throw ConfigError(path, std::string("expected ") + kind_name(e->kind));
      target[it.key()] = it.value();
    } else if (is_prefix(path)) {
      check_and_merge(it.value(), target[it.key()], path);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }
}

struct Reader {
  const json& doc;

  const json& at(const char* path) const { return doc.at(pointer(path)); }
  double num(const char* path) const {
    const double v = at(path).get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
  }
  double positive(const char* path) const {
    const double v = num(path);
    if (!(v > 0.0)) throw ConfigError(path, "must be positive");
    return v;
  }
  std::optional<double> opt_positive(const char* path) const {
    if (at(path).is_null()) return std::nullopt;
    return positive(path);
  }
  int integer(const char* path, long long lo, long long hi = 1000000000LL) const {
    const auto v = at(path).get<long long>();
    if (v < lo || v > hi)
      throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }
  std::string str(const char* path) const { return at(path).get<std::string>(); }
  std::vector<double> numbers(const char* path) const {
    std::vector<double> out = at(path).get<std::vector<double>>();
    for (double v : out)
      if (!std::isfinite(v)) throw ConfigError(path, "entries must be finite");
    return out;
  }
  Matrix matrix(const char* path) const {
    const json& v = at(path);
    if (v.empty()) return {};
    Matrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v[0].size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = v[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    if (!m.allFinite()) throw ConfigError(path, "entries must be finite");
    if (m.rows() != m.cols()) throw ConfigError(path, "matrix must be square");
    return m;
  }
};

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::SupportRecovery, ExperimentKind::DimensionSweep, ExperimentKind::RateStudy,
                 ExperimentKind::VerifySets, ExperimentKind::VerifyConcentration, ExperimentKind::EstimateSingle})
    if (s == to_string(k)) return k;
  throw ConfigError("experiment", "unknown experiment kind '" + s + "'");
}

LambdaMode parse_mode(const std::string& s) {
  for (auto m : {LambdaMode::CrossValidation, LambdaMode::Fixed, LambdaMode::Formula, LambdaMode::FormulaLambda1})
    if (s == to_string(m)) return m;
  throw ConfigError("estimation.lambda_mode", "expected one of cv, fixed, formula, formula-lambda1");
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SupportRecovery: return "support-recovery";
    case ExperimentKind::DimensionSweep: return "dimension-sweep";
    case ExperimentKind::RateStudy: return "rate-study";
    case ExperimentKind::VerifySets: return "verify-sets";
    case ExperimentKind::VerifyConcentration: return "verify-concentration";
    case ExperimentKind::EstimateSingle: return "estimate-single";
  }
  return "unknown";
}

const char* to_string(LambdaMode mode) {
  switch (mode) {
    case LambdaMode::CrossValidation: return "cv";
    case LambdaMode::Fixed: return "fixed";
    case LambdaMode::Formula: return "formula";
    case LambdaMode::FormulaLambda1: return "formula-lambda1";
  }
  return "unknown";
}

int SamplingSpec::steps_for(double horizon, double dn) const {
  const double ratio = horizon / dn;
  const auto n = std::llround(ratio);
  if (n < 2 || n > 100000000LL) throw ConfigError("sampling", "T / delta_n must give between 2 and 1e8 steps");
  if (std::abs(static_cast<double>(n) - ratio) > 1e-6 * ratio)
    throw ConfigError("sampling", "T must be an integer multiple of delta_n");
  return static_cast<int>(n);
}

int SamplingSpec::burn_in_for(int n) const {
  return burn_in >= 0 ? burn_in : static_cast<int>(std::ceil(0.1 * n));
}

json default_config() {
  json doc = json::object();
  for (const auto& e : schema()) doc[pointer(e.path)] = e.value;
  return doc;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "config file '" + path + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("", "override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (!find_entry(key)) throw ConfigError(key, "unknown key");
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  if (!doc.is_object()) doc = json::object();
  doc[pointer(key)] = value;
}

ExperimentConfig parse_config(const json& doc) {
  json merged = default_config();
  check_and_merge(doc.is_null() ? json::object() : doc, merged, "");
  const Reader r{merged};

  ExperimentConfig cfg;
  cfg.resolved = merged;
  cfg.kind = parse_kind(r.str("experiment"));
  if (!merged["seed"].is_number_unsigned() && merged["seed"].get<long long>() < 0)
    throw ConfigError("seed", "must be nonnegative");
  cfg.seed = merged["seed"].get<std::uint64_t>();
  cfg.output_dir = r.str("output_dir");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  cfg.jobs = r.integer("jobs", 1, 1024);
  cfg.budget_seconds = r.positive("budget_seconds");
  cfg.reps = r.integer("reps", 1);

  auto& m = cfg.model;
  const std::string family = r.str("model.family");
  if (family == "cosine")
    m.family = BasisFamily::Cosine;
  else if (family == "ou-linear")
    m.family = BasisFamily::OuLinear;
  else
    throw ConfigError("model.family", "expected cosine or ou-linear");
  m.d = r.integer("model.d", 1, 10000);
  m.p = r.integer("model.p", 1, 1000000);
  m.p_grid = merged.at(pointer("model.p_grid")).get<std::vector<int>>();
  for (int p : m.p_grid)
    if (p < 1) throw ConfigError("model.p_grid", "entries must be >= 1");
  m.s_anchor = r.opt_positive("model.s_anchor");
  m.sparsity = r.num("model.sparsity");
  if (m.sparsity < 0.0 || m.sparsity > 1.0) throw ConfigError("model.sparsity", "must lie in [0, 1]");
  m.nonzero_low = r.num("model.nonzero_low");
  m.nonzero_high = r.num("model.nonzero_high");
  if (m.nonzero_low > m.nonzero_high) throw ConfigError("model.nonzero_high", "must be >= model.nonzero_low");
  const auto diag = r.numbers("model.ou_diagonal");
  m.ou_matrix = r.matrix("model.ou_matrix");
  if (!diag.empty() && m.ou_matrix.size() > 0)
    throw ConfigError("model.ou_matrix", "give either model.ou_diagonal or model.ou_matrix, not both");
  if (!diag.empty()) {
    m.ou_matrix = Matrix::Zero(static_cast<Eigen::Index>(diag.size()), static_cast<Eigen::Index>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) m.ou_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
  }
  if (m.ou_matrix.size() > 0 && m.ou_matrix.rows() != m.d)
    throw ConfigError(diag.empty() ? "model.ou_matrix" : "model.ou_diagonal", "size must equal model.d");
  if (m.family == BasisFamily::OuLinear) m.p = m.d * m.d;

  auto& s = cfg.sampling;
  s.T = r.positive("sampling.T");
  s.delta_n = r.positive("sampling.delta_n");
  s.T_grid = r.numbers("sampling.T_grid");
  for (double t : s.T_grid)
    if (!(t > 0.0)) throw ConfigError("sampling.T_grid", "entries must be positive");
  s.delta_times_T = r.opt_positive("sampling.delta_times_T");
  s.substeps = r.integer("sampling.substeps", 1, 100000);
  s.burn_in = r.integer("sampling.burn_in", -1, 100000000);
  s.x0 = r.num("sampling.x0");
  s.stationary_init = merged.at(pointer("sampling.stationary_init")).get<bool>();

  auto& e = cfg.estimation;
  e.lambda_mode = parse_mode(r.str("estimation.lambda_mode"));
  if (!r.at("estimation.lambda").is_null()) {
    e.lambda = r.num("estimation.lambda");
    if (*e.lambda < 0.0) throw ConfigError("estimation.lambda", "must be nonnegative");
  }
  if (e.lambda_mode == LambdaMode::Fixed && !e.lambda)
    throw ConfigError("estimation.lambda", "required when estimation.lambda_mode is fixed");
  e.lambda_multiplier = r.positive("estimation.lambda_multiplier");
  e.grid_size = r.integer("estimation.grid_size", 1, 10000);
  e.grid_ratio = r.positive("estimation.grid_ratio");
  if (e.grid_ratio >= 1.0) throw ConfigError("estimation.grid_ratio", "must be below 1");
  e.folds = r.integer("estimation.folds", 2, 1000);
  e.mle_threshold = r.num("estimation.mle_threshold");
  if (e.mle_threshold < 0.0) throw ConfigError("estimation.mle_threshold", "must be nonnegative");
  e.solver.tol = r.positive("estimation.tol");
  e.solver.max_sweeps = r.integer("estimation.max_sweeps", 1);

  auto& a = cfg.audit;
  a.epsilon = r.num("audit.epsilon");
  if (!(a.epsilon > 0.0 && a.epsilon < 1.0)) throw ConfigError("audit.epsilon", "must lie in (0, 1)");
  a.gamma = r.positive("audit.gamma");
  a.k = r.opt_positive("audit.k");
  a.l = r.opt_positive("audit.l");
  a.C_b = r.positive("audit.C_b");
  a.M = r.opt_positive("audit.M");
  a.L = r.opt_positive("audit.L");
  a.R = r.opt_positive("audit.R");
  if (a.k && a.l && !(*a.k * *a.k < *a.l)) throw ConfigError("audit.k", "k^2 must be smaller than audit.l");
  a.cone_budget = r.integer("audit.cone_budget", 1);
  a.r_grid = r.numbers("audit.r_grid");
  a.x_grid = r.numbers("audit.x_grid");
  for (double v : a.r_grid)
    if (v < 0.0) throw ConfigError("audit.r_grid", "entries must be nonnegative");
  for (double v : a.x_grid)
    if (!(v > 0.0)) throw ConfigError("audit.x_grid", "entries must be positive");
  a.directions = r.integer("audit.directions", 1);
  a.concentration_reps = r.integer("audit.concentration_reps", 1);
  a.linear_matrix = r.matrix("audit.linear_matrix");
  if (a.linear_matrix.size() == 0) throw ConfigError("audit.linear_matrix", "must not be empty");
  a.linear_n = r.integer("audit.linear_n", 1);
  a.linear_delta_n = r.positive("audit.linear_delta_n");
  a.linear_substeps = r.integer("audit.linear_substeps", 1, 100000);
  a.clip = r.positive("audit.clip");
  const auto ou_diag = r.numbers("audit.ou_diagonal");
  if (ou_diag.empty()) throw ConfigError("audit.ou_diagonal", "must not be empty");
  a.ou_matrix = Matrix::Zero(static_cast<Eigen::Index>(ou_diag.size()), static_cast<Eigen::Index>(ou_diag.size()));
  for (std::size_t i = 0; i < ou_diag.size(); ++i) {
    if (!(ou_diag[i] > 0.0)) throw ConfigError("audit.ou_diagonal", "entries must be positive");
    a.ou_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = ou_diag[i];
  }
  a.ou_n = r.integer("audit.ou_n", 1);
  a.ou_delta_n = r.positive("audit.ou_delta_n");

  switch (cfg.kind) {
    case ExperimentKind::DimensionSweep:
      if (m.family != BasisFamily::Cosine) throw ConfigError("model.family", "dimension-sweep needs the cosine family");
      if (m.p_grid.empty()) m.p_grid = {m.p};
      break;
    case ExperimentKind::RateStudy:
      if (m.family != BasisFamily::OuLinear) throw ConfigError("model.family", "rate-study needs the ou-linear family");
      if (s.T_grid.size() < 2) throw ConfigError("sampling.T_grid", "rate-study needs at least two horizons");
      break;
    default:
      break;
  }
  if (cfg.kind != ExperimentKind::VerifyConcentration && cfg.kind != ExperimentKind::RateStudy &&
      cfg.kind != ExperimentKind::DimensionSweep)
    s.steps_for(s.T, s.delta_n);
  return cfg;
}

}  // namespace driftlasso

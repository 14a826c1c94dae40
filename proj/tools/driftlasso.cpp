// Command-line front end: one subcommand per experiment, all driven by a JSON
// config with dotted-path overrides.

#include "driftlasso/config.hpp"
#include "driftlasso/errors.hpp"
#include "driftlasso/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace dl = driftlasso;
using nlohmann::json;

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  bool print_config = false;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--set", args.overrides, "override a key, e.g. --set sampling.T=5 (repeatable)");
  sub->add_option("--seed", args.seed, "master seed");
  sub->add_option("--jobs", args.jobs, "worker threads");
  sub->add_option("--out", args.out, "output directory");
  sub->add_flag("--print-config", args.print_config, "print the resolved config and exit");
  sub->add_flag("--quiet", args.quiet, "no progress counter");
}

dl::ExperimentConfig resolve(const CommonArgs& args, const std::string& experiment) {
  json doc = args.config.empty() ? json::object() : dl::load_config_file(args.config);
  if (!experiment.empty()) doc["experiment"] = experiment;
  for (const auto& o : args.overrides) dl::apply_override(doc, o);
  if (args.seed) doc["seed"] = *args.seed;
  if (args.jobs) doc["jobs"] = *args.jobs;
  if (!args.out.empty()) doc["output_dir"] = args.out;
  return dl::parse_config(doc);
}

void report(const dl::RunResult& result) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << result.summary.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse drift estimation for diffusions observed at discrete times"};
  app.require_subcommand(1);
  CommonArgs args;

  auto* simulate = app.add_subcommand("simulate", "simulate one path and write it with its ground truth");
  std::string format = "csv";
  simulate->add_option("--format", format, "trajectory file format")->check(CLI::IsMember({"csv", "bin"}));

  auto* estimate = app.add_subcommand("estimate", "Lasso and MLE on a stored or freshly simulated path");
  std::string input;
  estimate->add_option("--input", input, "trajectory file (.csv or .bin)")->check(CLI::ExistingFile);

  auto* cv = app.add_subcommand("cv", "blocked cross-validation score table");
  cv->add_option("--input", input, "trajectory file (.csv or .bin)")->check(CLI::ExistingFile);

  auto* support = app.add_subcommand("support-recovery", "Lasso versus thresholded MLE over replications");
  auto* sweep = app.add_subcommand("dimension-sweep", "estimation error across a grid of p");
  auto* rate = app.add_subcommand("rate-study", "error decay of the interaction-matrix Lasso in T");

  auto* verify = app.add_subcommand("verify", "event sets, oracle inequality and concentration audits");
  std::string only;
  verify->add_option("--only", only, "restrict to one audit")->check(CLI::IsMember({"sets", "concentration"}));

  auto* constants = app.add_subcommand("constants", "print model and tuning constants of the configured instance");

  for (auto* sub : {simulate, estimate, cv, support, sweep, rate, verify, constants}) add_common(sub, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    std::string experiment;
    if (support->parsed()) experiment = "support-recovery";
    else if (sweep->parsed()) experiment = "dimension-sweep";
    else if (rate->parsed()) experiment = "rate-study";
    else if (verify->parsed()) experiment = only == "concentration" ? "verify-concentration" : "verify-sets";
    else experiment = "estimate-single";

    const dl::ExperimentConfig cfg = resolve(args, experiment);
    if (args.print_config) {
      std::cout << cfg.resolved.dump(2) << "\n";
      return 0;
    }
    const dl::RunOptions opt{!args.quiet};

    if (simulate->parsed()) report(dl::run_simulate(cfg, format == "bin"));
    else if (estimate->parsed()) report(input.empty() ? dl::run_estimate_single(cfg, opt) : dl::run_estimate_file(cfg, input));
    else if (cv->parsed()) report(dl::run_cv(cfg, input));
    else if (verify->parsed()) report(dl::run_verifications(cfg, opt, only.empty()));
    else if (constants->parsed()) std::cout << dl::constants_report(cfg).dump(2) << "\n";
    else report(dl::run_experiment(cfg, opt));
  } catch (const dl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const dl::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigExit;
  } catch (const dl::Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "run.hpp"

namespace {

int usage_error(const std::string& message) {
  std::cerr << nlohmann::json{{"error", {{"code", "Usage"}, {"message", message}, {"exit_code", 2}}}}.dump() << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using censreg::cli::RunConfig;
  RunConfig cfg;

  if (const char* env = std::getenv("CENSREG_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument(env);
    } catch (const std::exception&) {
      return usage_error(std::string("CENSREG_SEED is not an unsigned integer: ") + env);
    }
  }

  CLI::App app{"Two-step estimation and selection-adjusted inference for censored regression"};
  app.require_subcommand(1);

  std::string model = "tobit1";
  std::string method = "bias-corrected";
  double level = cfg.level;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--model,-m", model, "tobit1, tobit2, tobit3 or aft")->capture_default_str();
    sub->add_option("--output,-o", cfg.output_path, "JSON output file (default stdout)");
    sub->add_option("--seed", cfg.seed, "random seed (default from CENSREG_SEED, else 1)");
    sub->add_option("--level", level, "confidence level of intervals")->capture_default_str();
    sub->add_flag("--pretty", cfg.json_pretty, "indent the JSON output");
    sub->add_option("--threads", cfg.threads, "worker threads, 0 = all cores")->capture_default_str();
  };
  const auto design = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n, "observations per dataset")->capture_default_str();
    sub->add_option("--p", cfg.p, "covariates (both equations unless --p1/--p2)")->capture_default_str();
    sub->add_option("--p1", cfg.p1, "selection-equation covariates");
    sub->add_option("--p2", cfg.p2, "outcome-equation covariates");
    sub->add_option("--sigma", cfg.sigma, "error sd (sigma1 for bivariate models), default 1");
    sub->add_option("--sigma2", cfg.sigma2, "outcome error sd, default 1");
    sub->add_option("--sigma12", cfg.sigma12, "error covariance, default 0.5");
    sub->add_option("--signal-scale", cfg.signal_scale, "multiplier on the N(0,1) coefficients")
        ->capture_default_str();
    sub->add_option("--csv", cfg.csv_path, "CSV output file");
  };

  auto* fit = app.add_subcommand("fit", "two-step fit of a CSV dataset");
  common(fit);
  fit->add_option("--input,-i", cfg.input_path, "CSV data")->required();

  auto* infer = app.add_subcommand("infer", "selection-adjusted intervals and tests per coefficient");
  common(infer);
  infer->add_option("--input,-i", cfg.input_path, "CSV data")->required();
  infer->add_option("--fit", cfg.fit_path, "reuse the JSON written by fit");
  infer->add_option("--sigma", cfg.sigma, "known error sd (sigma1 for tobit3); default plug-in");
  infer->add_option("--sigma2", cfg.sigma2, "known outcome error sd (tobit3)");
  infer->add_option("--sigma12", cfg.sigma12, "known error covariance (tobit3)");
  infer->add_option("--null", cfg.null_value, "null value of each test")->capture_default_str();
  infer->add_option("--coefficient", cfg.coefficient, "report only this covariate");
  infer->add_option("--bootstrap,-B", cfg.bootstrap, "bootstrap replications (tobit2)")->capture_default_str();
  infer->add_option("--method", method, "bootstrap interval: bias-corrected or percentile")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "generate a dataset in the CSV layout read by fit");
  common(sim);
  design(sim);

  auto* pivot = app.add_subcommand("validate-pivot", "KS check that the Type 1 pivot is uniform");
  common(pivot);
  design(pivot);
  pivot->add_option("--draws", cfg.draws, "conditional draws")->capture_default_str();
  pivot->add_option("--shift", cfg.shift, "evaluate the pivot this many sd off the truth")->capture_default_str();

  auto* cov = app.add_subcommand("coverage", "Monte Carlo coverage of corrected and naive intervals");
  common(cov);
  design(cov);
  cov->add_option("--replications,-r", cfg.replications, "simulated datasets")->capture_default_str();
  cov->add_option("--equation", cfg.equation, "tobit3: equation whose first coefficient is covered")
      ->capture_default_str();
  cov->add_flag("--plug-in", cfg.plug_in, "use estimated instead of design variances");
  cov->add_option("--bootstrap,-B", cfg.bootstrap, "bootstrap replications (tobit2)")->capture_default_str();
  cov->add_option("--method", method, "bootstrap interval: bias-corrected or percentile")->capture_default_str();

  auto* width = app.add_subcommand("width-curve", "corrected vs normal interval width for one truncated normal");
  common(width);
  width->add_option("--sigma", cfg.sigma, "standard deviation, default 1");
  width->add_option("--lower", cfg.lower_trunc, "truncation lower end in sd units")->capture_default_str();
  width->add_option("--upper", cfg.upper_trunc, "truncation upper end in sd units (inf allowed)");
  width->add_option("--from", cfg.grid_from, "first grid point in sd units")->capture_default_str();
  width->add_option("--to", cfg.grid_to, "last grid point in sd units")->capture_default_str();
  width->add_option("--step", cfg.grid_step, "grid spacing")->capture_default_str();
  width->add_option("--csv", cfg.csv_path, "CSV output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }

  try {
    cfg.command = censreg::cli::parse_command(app.get_subcommands().front()->get_name());
    cfg.model = censreg::cli::parse_model(model);
    if (method == "bias-corrected") {
      cfg.bootstrap_method = censreg::BootstrapMethod::BiasCorrected;
    } else if (method == "percentile") {
      cfg.bootstrap_method = censreg::BootstrapMethod::Percentile;
    } else {
      return usage_error("unknown --method '" + method + "'");
    }
  } catch (const censreg::Error& e) {
    return usage_error(e.what());
  }
  cfg.level = level;
  return censreg::cli::run(cfg, std::cout, std::cerr);
}

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <censreg/bootstrap.hpp>
#include <censreg/error.hpp>
#include <censreg/normal_dist.hpp>

#include "dataset.hpp"

namespace censreg::cli {

enum class Command { Fit, Infer, Simulate, ValidatePivot, Coverage, WidthCurve };

std::string_view to_string(Command command);
Command parse_command(std::string_view name);

struct RunConfig {
  Command command = Command::Fit;
  Model model = Model::Tobit1;
  std::string input_path;
  std::string output_path;  // JSON; empty means the `out` stream
  std::string csv_path;     // tabular artifact, optional except for simulate
  std::string fit_path;     // infer: reuse a fit written by `fit`
  double level = 0.95;      // confidence level; tests reject at 1 - level
  double null_value = 0.0;
  std::string coefficient;  // infer: restrict to one covariate name
  // Known standard deviations (sigma, sigma2) and covariance sigma12. For infer
  // they replace the plug-in estimates; for simulations they set the design.
  std::optional<double> sigma;
  std::optional<double> sigma2;
  std::optional<double> sigma12;
  std::uint64_t seed = 1;
  int replications = 1000;
  int bootstrap = 1000;
  BootstrapMethod bootstrap_method = BootstrapMethod::BiasCorrected;
  unsigned threads = 1;
  bool json_pretty = false;

  // simulation designs
  int n = 100;
  int p = 10;  // tobit1, and p1 = p2 = p unless set
  std::optional<int> p1;
  std::optional<int> p2;
  double signal_scale = 1.0;
  int equation = 2;  // coverage for tobit3: which equation's first coefficient
  bool plug_in = false;
  int draws = 10000;
  double shift = 0.0;  // validate-pivot: mu offset in sd units
  // width-curve, in units of sigma
  double lower_trunc = -3.0;
  double upper_trunc = kInf;
  double grid_from = -4.0;
  double grid_to = 4.0;
  double grid_step = 0.1;

  /// InvalidArgument describing the first unsupported combination or value.
  void validate() const;
};

/// Exit status for an error code: 2 usage, 3 data, 4 numerical.
int exit_code(ErrorCode code);

/// Runs one command. JSON goes to config.output_path or `out`; progress notes
/// and the structured error report go to `err`. Returns the exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace censreg::cli

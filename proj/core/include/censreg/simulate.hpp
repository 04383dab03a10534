#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "censreg/bootstrap.hpp"
#include "censreg/polyhedral_pivot.hpp"
#include "censreg/rng.hpp"
#include "censreg/two_step.hpp"

namespace censreg {

/// Parameters of a simulated Tobit study with a standard Gaussian design.
///
/// Unset coefficient vectors are drawn i.i.d. N(0, 1) for every dataset and
/// multiplied by signal_scale (a set vector is used as given, also scaled).
struct SimDesign {
  Eigen::Index n = 100;
  Eigen::Index p = 10;   // Type 1
  Eigen::Index p1 = 10;  // Types 2/3, selection equation
  Eigen::Index p2 = 10;  // Types 2/3, outcome equation
  std::optional<Eigen::VectorXd> beta;
  std::optional<Eigen::VectorXd> beta1;
  std::optional<Eigen::VectorXd> beta2;
  double sigma2 = 1.0;  // Type 1 error variance
  double sigma1_2 = 1.0;
  double sigma2_2 = 1.0;
  double sigma12 = 0.5;
  double signal_scale = 1.0;
  bool shared_design = false;  // X2 = X1 (needs p1 == p2)
  std::uint64_t seed = 0;
  int replications = 1000;
  unsigned threads = 1;  // 0 = all cores

  void validate_tobit1() const;
  /// Also checks the error covariance is positive definite (NonPDCovariance).
  void validate_bivariate() const;
};

struct Tobit1Sample {
  Tobit1Data data;
  Eigen::VectorXd beta;
  Eigen::VectorXd y_star;
};

struct BivariateSample {
  Eigen::MatrixXd X1;
  Eigen::MatrixXd X2;
  Eigen::VectorXd beta1;
  Eigen::VectorXd beta2;
  Eigen::VectorXd y1_star;
  Eigen::VectorXd y2_star;

  Tobit3Data tobit3() const;
  Tobit2Data tobit2() const;
};

/// Draws X, beta and y* = X beta + eps, eps ~ N(0, sigma2 I); y = max(0, y*).
Tobit1Sample gen_tobit1(const SimDesign& design, Rng& rng);

/// Draws X1, X2, beta1, beta2 and jointly normal (eps1, eps2) per row with the
/// design's 2x2 covariance. Censoring/selection is by y1* > 0.
BivariateSample gen_bivariate(const SimDesign& design, Rng& rng);
Tobit3Data gen_tobit3(const SimDesign& design, Rng& rng);
Tobit2Data gen_tobit2(const SimDesign& design, Rng& rng);

/// `count` i.i.d. draws (one per column) from N(mu, sigma) conditioned on the
/// event, by accept/reject.
///
/// When sigma is sigma2 * I and the event is an orthant {y_i >= 0} on leading
/// coordinates, coordinates are independent under both the law and the event
/// and are accepted one at a time; otherwise whole vectors are proposed.
/// Throws AcceptanceTooLow once at least 1e5 proposals (for any one target)
/// have been made with an acceptance rate below 1e-4.
Eigen::MatrixXd rejection_sample_conditional(const Eigen::VectorXd& mu, const Covariance& sigma,
                                             const PolyhedralConstraint& constraint, int count, Rng& rng);

struct KsReport {
  int count = 0;
  double statistic = 0.0;
  double critical_value = 0.0;  // at the 1% level
  bool pass = false;
};

/// One-sample KS distance of the values from Unif(0, 1).
double ks_uniform_statistic(std::vector<double> values);
/// Two-sample KS distance.
double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic critical value sqrt(-log(level / 2) / 2) * sqrt((n + m) / (n m));
/// pass m = 0 for the one-sample test.
double ks_critical_value(int n, int m = 0, double level = 0.01);

struct PivotUniformityReport {
  KsReport ks;
  Eigen::VectorXd pivots;  // in draw order
  Eigen::VectorXd beta;
  std::vector<Eigen::Index> selected_rows;
  Eigen::Index coefficient = 0;
  double mu_target = 0.0;  // eta' mu used in the pivot (true value + shift)
  double shift_sd = 0.0;
};

/// Type 1 pivot calibration: draws X and beta once, fixes the uncensored set S
/// from an initial y*, then rejection-samples y_bar ~ N(X_bar beta, sigma2 I)
/// given y_bar > 0 `count` times and evaluates the pivot for beta_j at
/// beta_j + shift_sd * sd. Throws InvalidArgument for count < 1.
PivotUniformityReport pivot_uniformity_experiment(const SimDesign& design, int count,
                                                  Eigen::Index coefficient = 0, double shift_sd = 0.0);

enum class CoverageModel { Tobit1, Tobit3Beta1, Tobit3Beta2, Tobit2Bootstrap };

std::string_view to_string(CoverageModel model);
CoverageModel parse_coverage_model(std::string_view name);

struct CoverageOptions {
  CoverageModel model = CoverageModel::Tobit1;
  double alpha = 0.05;
  Eigen::Index coefficient = 0;
  // Known (design) variances by default; plug-in uses the two-step estimates.
  bool plug_in = false;
  int bootstrap_replications = 1000;
  BootstrapMethod bootstrap_method = BootstrapMethod::BiasCorrected;
  double max_excluded_fraction = 0.05;
};

struct CoverageRecord {
  int index = 0;
  bool excluded = false;
  std::string error;  // why the replication was excluded or failed to fit
  bool fit_failed = false;
  Eigen::Index n_selected = 0;
  double truth = 0.0;
  double estimate = 0.0;
  Interval corrected;
  Interval naive;
  double v_minus = 0.0;
  double v_plus = 0.0;
  bool corrected_covers = false;
  bool naive_covers = false;
};

struct CoverageReport {
  CoverageModel model = CoverageModel::Tobit1;
  double alpha = 0.05;
  int requested = 0;
  int used = 0;
  int excluded = 0;
  int fit_failures = 0;  // includes fits that failed but whose pivot was still usable
  int corrected_hits = 0;
  int naive_hits = 0;
  double corrected_coverage = 0.0;
  double naive_coverage = 0.0;
  Interval corrected_ci;  // Clopper-Pearson 99%
  Interval naive_ci;
  Interval nominal_band;  // exact binomial 99% band around 1 - alpha for `used` trials
  double corrected_median_width = 0.0;
  double naive_median_width = 0.0;
  std::vector<CoverageRecord> records;

  bool corrected_in_band() const { return nominal_band.contains(corrected_coverage); }
};

/// Per replication: generate, fit, form the conditional and the naive normal
/// interval for the chosen coefficient and record coverage and width.
///
/// With known variances the conditional interval needs only X_bar, y_bar and
/// the design variance; a failed two-step fit is then counted in fit_failures
/// without excluding the replication. Replications where the interval itself
/// cannot be formed (too few uncensored rows, rank deficiency), or where a
/// needed fit fails, are excluded; more than max_excluded_fraction of them
/// throws TooManyFailures. Replication r uses Rng::stream(seed, r).
CoverageReport coverage_experiment(const SimDesign& design, const CoverageOptions& options);

/// Exact binomial band [lo, hi] / trials with P(X < lo) <= (1 - conf)/2 and
/// P(X > hi) <= (1 - conf)/2 for X ~ Bin(trials, prob).
Interval binomial_band(int trials, double prob, double conf = 0.99);
/// Clopper-Pearson interval for `hits` out of `trials`.
Interval clopper_pearson(int hits, int trials, double conf = 0.99);

struct WidthRow {
  double x = 0.0;  // observation in units of sigma
  Interval corrected;
  Interval normal;
  double ratio() const { return corrected.width() / normal.width(); }
};

/// For each grid point x (in units of sigma) the conditional interval for the
/// mean of x ~ N(mu, sigma^2) truncated to [lo, hi] * sigma, next to x +- z sigma.
std::vector<WidthRow> interval_width_curve(double sigma, double lo, double hi, const std::vector<double>& grid,
                                           double alpha = 0.05);

}  // namespace censreg

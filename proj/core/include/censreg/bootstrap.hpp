#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "censreg/rng.hpp"
#include "censreg/two_step.hpp"

namespace censreg {

enum class BootstrapMethod { Percentile, BiasCorrected };

struct BootstrapConfig {
  int replications = 1000;  // B
  std::uint64_t seed = 0;
  double level = 0.95;  // confidence level of the interval
  BootstrapMethod method = BootstrapMethod::BiasCorrected;
  unsigned threads = 1;  // 0 = all cores
  double max_failure_fraction = 0.05;

  /// Throws InvalidArgument unless B >= 100 and 0 < level < 1.
  void validate() const;
};

struct BootstrapResult {
  Eigen::VectorXd replicates;  // successful refits only, in replicate order
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double bias_correction_z0 = 0.0;  // 0 for the percentile method
  int failures = 0;
};

/// One draw of (y1*, y2*) from the bivariate normal with means
/// (x1'alpha1, x2'beta2), unit first variance, covariance sigma12 and second
/// variance sigma2_2, conditioned on y1* > 0: y1* by inverse CDF of
/// TN(x1'alpha1, 1, 0, inf), then y2* from its conditional normal.
/// Throws NonPDCovariance unless sigma2_2 - sigma12^2 > 0.
std::pair<double, double> sample_selected_pair(const Eigen::Ref<const Eigen::RowVectorXd>& x1row,
                                               const Eigen::Ref<const Eigen::RowVectorXd>& x2row,
                                               const Eigen::VectorXd& alpha1, const Eigen::VectorXd& beta2,
                                               double sigma12, double sigma2_2, Rng& rng);

/// Parametric bootstrap of beta2_j in the Type 2 model.
///
/// Each replicate redraws the latent y1* ~ N(x1'alpha1_hat, 1) for every row,
/// selects rows with y1* > 0, draws y2* for those rows from its conditional law
/// and refits fit_tobit2. Replicate b uses Rng::stream(seed, b). Failed refits
/// are counted and dropped; more than max_failure_fraction of them throws
/// TooManyFailures.
BootstrapResult bootstrap_tobit2(const Tobit2Data& data, const TwoStepFit& fit, Eigen::Index j,
                                 const BootstrapConfig& config);

/// Type 7 (linear interpolation) sample quantile of sorted values.
double sorted_quantile(const Eigen::VectorXd& sorted, double prob);

/// Percentile interval of the replicates at confidence `level`.
std::pair<double, double> percentile_interval(const Eigen::VectorXd& replicates, double level);

struct BiasCorrectedInterval {
  double lower;
  double upper;
  double z0;
};

/// BC interval: z0 = Phi^-1(#{b* < b} / B), ties counted as half and the count
/// clamped to [1/2, B - 1/2]; quantile levels Phi(2 z0 -+ z_{1-alpha/2}).
BiasCorrectedInterval bias_corrected_interval(const Eigen::VectorXd& replicates, double estimate,
                                              double level);

}  // namespace censreg

#include "censreg/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "censreg/error.hpp"
#include "censreg/normal_dist.hpp"
#include "censreg/parallel.hpp"

namespace censreg {

void BootstrapConfig::validate() const {
  if (replications < 100) {
    throw Error(ErrorCode::InvalidArgument,
                "bootstrap: need at least 100 replications, got " + std::to_string(replications));
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap: level must lie in (0, 1)");
  }
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap: max_failure_fraction must lie in [0, 1)");
  }
}

std::pair<double, double> sample_selected_pair(const Eigen::Ref<const Eigen::RowVectorXd>& x1row,
                                               const Eigen::Ref<const Eigen::RowVectorXd>& x2row,
                                               const Eigen::VectorXd& alpha1, const Eigen::VectorXd& beta2,
                                               double sigma12, double sigma2_2, Rng& rng) {
  const double residual_var = sigma2_2 - sigma12 * sigma12;
  if (!(residual_var > 0.0)) {
    throw Error(ErrorCode::NonPDCovariance,
                "sample_selected_pair: sigma2^2 - sigma12^2 must be positive");
  }
  const double index1 = x1row.dot(alpha1);
  const double mean2 = x2row.dot(beta2);
  const double y1 = truncnorm_quantile(rng.uniform(), {index1, 1.0, 0.0, kInf});
  const double y2 = mean2 + sigma12 * (y1 - index1) + std::sqrt(residual_var) * rng.normal();
  return {y1, y2};
}

double sorted_quantile(const Eigen::VectorXd& sorted, double prob) {
  const Eigen::Index n = sorted.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  const double h = (n - 1) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const Eigen::Index hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

namespace {

Eigen::VectorXd sorted_copy(const Eigen::VectorXd& v) {
  Eigen::VectorXd s = v;
  std::sort(s.data(), s.data() + s.size());
  return s;
}

}  // namespace

std::pair<double, double> percentile_interval(const Eigen::VectorXd& replicates, double level) {
  const double alpha = 1.0 - level;
  const auto s = sorted_copy(replicates);
  return {sorted_quantile(s, 0.5 * alpha), sorted_quantile(s, 1.0 - 0.5 * alpha)};
}

BiasCorrectedInterval bias_corrected_interval(const Eigen::VectorXd& replicates, double estimate,
                                              double level) {
  const double B = static_cast<double>(replicates.size());
  if (replicates.size() == 0) throw Error(ErrorCode::InvalidArgument, "bootstrap: no replicates");
  double below = 0.0;
  for (Eigen::Index b = 0; b < replicates.size(); ++b) {
    if (replicates[b] < estimate) below += 1.0;
    else if (replicates[b] == estimate) below += 0.5;
  }
  below = std::clamp(below, 0.5, B - 0.5);
  const double z0 = Phi_inv(below / B);
  const double z = Phi_inv(0.5 + 0.5 * level);
  const auto s = sorted_copy(replicates);
  return {sorted_quantile(s, Phi(2.0 * z0 - z)), sorted_quantile(s, Phi(2.0 * z0 + z)), z0};
}

BootstrapResult bootstrap_tobit2(const Tobit2Data& data, const TwoStepFit& fit, Eigen::Index j,
                                 const BootstrapConfig& config) {
  config.validate();
  validate(data);
  const Eigen::Index p2 = data.X2.cols();
  if (j < 0 || j >= p2) throw Error(ErrorCode::InvalidArgument, "bootstrap: coefficient index out of range");
  if (fit.alpha_hat.size() != data.X1.cols() || fit.gamma_hat.size() != p2 + 1) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap: fit does not match the data dimensions");
  }
  const double sigma2_2 = fit.require_sigma2();
  const double sigma12 = fit.scale_hat();
  const double residual_var = sigma2_2 - sigma12 * sigma12;
  if (!(residual_var > 0.0)) {
    throw Error(ErrorCode::NonPDCovariance,
                "bootstrap: fitted sigma2^2 - sigma12^2 is not positive; cannot simulate");
  }
  const double residual_sd = std::sqrt(residual_var);
  const Eigen::VectorXd index1 = data.X1 * fit.alpha_hat;
  const Eigen::VectorXd mean2 = data.X2 * fit.beta_hat();
  const Eigen::Index n = index1.size();

  const auto B = static_cast<std::size_t>(config.replications);
  std::vector<std::optional<double>> draws(B);
  detail::parallel_for(B, config.threads, [&](std::size_t b) {
    Rng rng = Rng::stream(config.seed, b);
    Tobit2Data sim{data.X1, Indicator(n), data.X2, Eigen::VectorXd::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y1 = index1[i] + rng.normal();
      const double e2 = rng.normal();
      if (y1 > 0.0) {
        sim.z[i] = 1;
        sim.y2[i] = mean2[i] + sigma12 * (y1 - index1[i]) + residual_sd * e2;
      }
    }
    try {
      draws[b] = fit_tobit2(sim, {}).gamma_hat[j];
    } catch (const Error&) {
      draws[b].reset();
    }
  });

  BootstrapResult result;
  result.estimate = fit.gamma_hat[j];
  std::vector<double> ok;
  ok.reserve(B);
  for (const auto& d : draws) {
    if (d) ok.push_back(*d);
    else ++result.failures;
  }
  if (result.failures > config.max_failure_fraction * static_cast<double>(B)) {
    throw Error(ErrorCode::TooManyFailures,
                "bootstrap: " + std::to_string(result.failures) + " of " + std::to_string(B) +
                    " refits failed");
  }
  result.replicates = Eigen::Map<const Eigen::VectorXd>(ok.data(), static_cast<Eigen::Index>(ok.size()));
  if (config.method == BootstrapMethod::Percentile) {
    std::tie(result.lower, result.upper) = percentile_interval(result.replicates, config.level);
  } else {
    const auto bc = bias_corrected_interval(result.replicates, result.estimate, config.level);
    result.lower = bc.lower;
    result.upper = bc.upper;
    result.bias_correction_z0 = bc.z0;
  }
  return result;
}

}  // namespace censreg

#pragma once

#include <limits>

namespace censreg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard normal primitives. All functions are pure and reentrant.

double phi(double x);
double log_phi(double x);

/// Standard normal CDF. Accepts +-infinity.
double Phi(double x);
/// 1 - Phi(x), accurate in the far right tail.
double Phi_upper(double x);
/// log Phi(x) without underflow for very negative x.
double log_Phi(double x);

/// Inverse CDF (Wichura's AS241). Throws InvalidArgument unless 0 < p < 1.
double Phi_inv(double p);
/// Returns x with log Phi(x) == log_p, for log_p < 0. Usable where p itself underflows.
double Phi_inv_log(double log_p);

/// Inverse Mills ratio phi(x) / (1 - Phi(x)).
///
/// The literal ratio is used up to x = 30, beyond that the Laplace continued
/// fraction, which converges in a handful of terms out there. For very negative
/// x the value underflows gracefully towards +0.
double inverse_mills(double x);

/// TN(mu, sigma2) restricted to (lo, hi). lo may be -inf and hi may be +inf.
struct TruncatedNormalParams {
  double mu = 0.0;
  double sigma2 = 1.0;
  double lo = -kInf;
  double hi = kInf;
};

/// Throws InvalidArgument when sigma2 <= 0, lo >= hi or a field is NaN.
void validate(const TruncatedNormalParams& params);

/// log P(lo < X < hi) for X ~ N(mu, sigma2).
double truncation_log_mass(const TruncatedNormalParams& params);

/// CDF of the truncated normal; 0 at or below lo, 1 at or above hi.
///
/// Both the numerator and denominator of the textbook ratio are evaluated as
/// differences of log tail probabilities on whichever side of mu the interval
/// sits, so intervals many standard deviations out keep full relative
/// precision. Throws DegenerateTruncation if the interval mass is not
/// representable even in log space.
double truncnorm_cdf(double x, const TruncatedNormalParams& params);

/// Density of the truncated normal (zero outside (lo, hi)).
double truncnorm_pdf(double x, const TruncatedNormalParams& params);

/// Inverse of truncnorm_cdf; result lies in [lo, hi]. Throws InvalidArgument unless 0 < p < 1.
double truncnorm_quantile(double p, const TruncatedNormalParams& params);

}  // namespace censreg

#include "censreg/normal_dist.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "censreg/error.hpp"

namespace censreg {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kSqrt1_2 = 0.70710678118654752440084436210485;

// Beyond this the erfc-based tail is replaced by the continued fraction.
constexpr double kMillsSwitch = 30.0;

double mills_continued_fraction(double x) {
  // lambda(x) = x + 1/(x + 2/(x + 3/(x + ...))), evaluated backwards.
  double t = x;
  for (int k = 60; k >= 1; --k) {
    t = x + k / t;
  }
  return t;
}

struct Standardized {
  double lo, x, hi;
};

Standardized standardize(double x, const TruncatedNormalParams& p) {
  const double s = std::sqrt(p.sigma2);
  auto z = [&](double v) { return std::isinf(v) ? v : (v - p.mu) / s; };
  return {z(p.lo), z(x), z(p.hi)};
}

// True when the interval sits on the right of the mean, where upper tail
// probabilities carry the precision.
bool use_upper_tail(double zlo, double zhi) {
  if (std::isinf(zlo) && std::isinf(zhi)) return false;
  if (std::isinf(zhi)) return true;
  if (std::isinf(zlo)) return false;
  return zlo + zhi > 0.0;
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::AllSameLabel: return "AllSameLabel";
    case ErrorCode::TooFewUncensored: return "TooFewUncensored";
    case ErrorCode::InfeasibleObservation: return "InfeasibleObservation";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::Separation: return "Separation";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::NonPDCovariance: return "NonPDCovariance";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::DegenerateTruncation: return "DegenerateTruncation";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::AcceptanceTooLow: return "AcceptanceTooLow";
  }
  return "Unknown";
}

double phi(double x) { return std::exp(log_phi(x)); }

double log_phi(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double Phi(double x) { return 0.5 * std::erfc(-x * kSqrt1_2); }

double Phi_upper(double x) { return 0.5 * std::erfc(x * kSqrt1_2); }

double log_Phi(double x) {
  if (std::isnan(x)) return x;
  if (x == kInf) return 0.0;
  if (x == -kInf) return -kInf;
  if (x > 0.0) return std::log1p(-Phi_upper(x));
  if (x > -kMillsSwitch) return std::log(Phi(x));
  // Phi(x) = phi(x) / lambda(-x)
  return log_phi(x) - std::log(mills_continued_fraction(-x));
}

double inverse_mills(double x) {
  if (x > kMillsSwitch) return mills_continued_fraction(x);
  return phi(x) / Phi_upper(x);
}

double Phi_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "Phi_inv: probability must lie in (0, 1), got " + std::to_string(p));
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  const double tail = q < 0.0 ? p : 1.0 - p;
  const double x = Phi_inv_log(std::log(tail));
  return q < 0.0 ? x : -x;
}

double Phi_inv_log(double log_p) {
  if (!(log_p < 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "Phi_inv_log: log probability must be negative");
  }
  // Central region and the upper half go through the ordinary routine.
  constexpr double kLogCentral = -2.5902671654458267;  // log(0.075)
  if (log_p > kLogCentral) {
    const double p = std::exp(log_p);
    if (p < 0.925) return Phi_inv(p);
    // upper tail: 1 - p without cancellation
    const double tail = -std::expm1(log_p);
    return -Phi_inv_log(std::log(tail));
  }

  double r = std::sqrt(-log_p);
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
              0.24178072517745061177) * r + 1.27045825245236838258) * r +
            3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734) /
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
              0.0151986665636164571966) * r + 0.14810397642748007459) * r +
            0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              0.0012426609473880784386) * r + 0.026532189526576123093) * r +
            0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772) /
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
              1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
            0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
  }
  x = -x;
  // AS241 is built for p itself; once p underflows its rational fit is out of
  // range, so polish in log space. d/dx log Phi(x) = lambda(-x).
  if (log_p < -700.0) {
    for (int it = 0; it < 50; ++it) {
      const double step = (log_Phi(x) - log_p) / inverse_mills(-x);
      x -= step;
      if (std::fabs(step) <= 1e-15 * std::fabs(x)) break;
    }
  }
  return x;
}

void validate(const TruncatedNormalParams& p) {
  if (std::isnan(p.mu) || std::isinf(p.mu)) {
    throw Error(ErrorCode::InvalidArgument, "truncated normal: mu must be finite");
  }
  if (!(p.sigma2 > 0.0) || std::isinf(p.sigma2)) {
    throw Error(ErrorCode::InvalidArgument, "truncated normal: sigma2 must be positive and finite");
  }
  if (std::isnan(p.lo) || std::isnan(p.hi) || !(p.lo < p.hi)) {
    throw Error(ErrorCode::InvalidArgument, "truncated normal: requires lo < hi");
  }
}

double truncation_log_mass(const TruncatedNormalParams& params) {
  validate(params);
  const auto z = standardize(0.0, params);
  double log_mass;
  if (use_upper_tail(z.lo, z.hi)) {
    const double a = log_Phi(-z.lo);
    log_mass = a + std::log(-std::expm1(log_Phi(-z.hi) - a));
  } else {
    const double b = log_Phi(z.hi);
    log_mass = b + std::log(-std::expm1(log_Phi(z.lo) - b));
  }
  if (!(log_mass > -kInf) || std::isnan(log_mass)) {
    throw Error(ErrorCode::DegenerateTruncation, "truncated normal: interval has no representable mass");
  }
  return log_mass;
}

double truncnorm_cdf(double x, const TruncatedNormalParams& params) {
  validate(params);
  if (std::isnan(x)) {
    throw Error(ErrorCode::InvalidArgument, "truncnorm_cdf: x is NaN");
  }
  if (x <= params.lo) return 0.0;
  if (x >= params.hi) return 1.0;

  const auto z = standardize(x, params);
  // Above one half return 1 - G with G the upper mass computed directly, so that
  // values near 1 stay monotone in x and mu.
  double f, g;
  if (use_upper_tail(z.lo, z.hi)) {
    // (Q(lo) - Q(x)) / (Q(lo) - Q(hi)) with Q(t) = Phi(-t)
    const double q_lo = log_Phi(-z.lo);
    const double q_x = log_Phi(-z.x);
    const double q_hi = log_Phi(-z.hi);
    const double den = std::expm1(q_hi - q_lo);
    if (!(den < 0.0)) {
      throw Error(ErrorCode::DegenerateTruncation, "truncnorm_cdf: interval mass underflows");
    }
    f = std::expm1(q_x - q_lo) / den;
    g = std::exp(q_x - q_lo) * std::expm1(q_hi - q_x) / den;
  } else {
    // (Phi(x) - Phi(lo)) / (Phi(hi) - Phi(lo))
    const double p_x = log_Phi(z.x);
    const double p_hi = log_Phi(z.hi);
    const double p_lo = log_Phi(z.lo);
    const double den = std::expm1(p_lo - p_hi);
    if (!(den < 0.0)) {
      throw Error(ErrorCode::DegenerateTruncation, "truncnorm_cdf: interval mass underflows");
    }
    f = std::exp(p_x - p_hi) * std::expm1(p_lo - p_x) / den;
    g = std::expm1(p_x - p_hi) / den;
  }
  const double v = f <= 0.5 ? f : 1.0 - g;
  return std::min(1.0, std::max(0.0, v));
}

double truncnorm_pdf(double x, const TruncatedNormalParams& params) {
  const double log_mass = truncation_log_mass(params);
  if (!(x > params.lo && x < params.hi)) return 0.0;
  const double s = std::sqrt(params.sigma2);
  return std::exp(log_phi((x - params.mu) / s) - log_mass) / s;
}

double truncnorm_quantile(double p, const TruncatedNormalParams& params) {
  validate(params);
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "truncnorm_quantile: probability must lie in (0, 1), got " + std::to_string(p));
  }
  const double s = std::sqrt(params.sigma2);
  const auto z = standardize(0.0, params);

  double zx;
  if (use_upper_tail(z.lo, z.hi)) {
    // log Q(x) = log Q(lo) + log1p(p * expm1(log Q(hi) - log Q(lo)))
    const double qlo = log_Phi(-z.lo);
    const double span = std::expm1(log_Phi(-z.hi) - qlo);
    if (!(span < 0.0)) {
      throw Error(ErrorCode::DegenerateTruncation, "truncnorm_quantile: interval mass underflows");
    }
    const double log_q = qlo + std::log1p(p * span);
    zx = -Phi_inv_log(std::min(log_q, -std::numeric_limits<double>::min()));
  } else {
    // log Phi(x) = log Phi(hi) + log1p((1 - p) * expm1(log Phi(lo) - log Phi(hi)))
    const double phi_hi = log_Phi(z.hi);
    const double span = std::expm1(log_Phi(z.lo) - phi_hi);
    if (!(span < 0.0)) {
      throw Error(ErrorCode::DegenerateTruncation, "truncnorm_quantile: interval mass underflows");
    }
    const double log_c = phi_hi + std::log1p((1.0 - p) * span);
    zx = Phi_inv_log(std::min(log_c, -std::numeric_limits<double>::min()));
  }
  double x = params.mu + s * zx;
  if (x < params.lo) x = params.lo;
  if (x > params.hi) x = params.hi;
  return x;
}

}  // namespace censreg

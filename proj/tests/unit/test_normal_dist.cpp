#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "censreg/normal_dist.hpp"
#include "censreg/rng.hpp"
#include "test_helpers.hpp"

using namespace censreg;

// Reference values below come from tests/oracles/normal_reference_values.py
// (mpmath at 60 digits).

TEST(Phi, Values) {
  EXPECT_DOUBLE_EQ(phi(0.0), 1.0 / std::sqrt(2.0 * M_PI));
  EXPECT_LT(rel_err(phi(5.0), 1.486719514734297707908239633606412167019e-6), 1e-14);
  EXPECT_EQ(Phi(0.0), 0.5);
  EXPECT_EQ(Phi(-kInf), 0.0);
  EXPECT_EQ(Phi(kInf), 1.0);
  EXPECT_LT(rel_err(Phi(-10.0), 7.619853024160526065973343251599308363504e-24), 1e-13);
  EXPECT_LT(rel_err(Phi_upper(10.0), 7.619853024160526065973343251599308363504e-24), 1e-13);
}

TEST(Phi, LogTailFarBeyondUnderflow) {
  // Phi(-40) ~ 3.66e-350 is below the smallest double; the log must still be exact.
  const double want = std::log(3.655893540915029703748985802688283665054) - 350.0 * std::log(10.0);
  EXPECT_LT(rel_err(log_Phi(-40.0), want), 1e-13);
  EXPECT_NEAR(log_Phi(3.0), std::log(Phi(3.0)), 1e-15);
}

TEST(Phi, SymmetryAndMonotone) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double x = 10.0 * (rng.uniform() - 0.5);
    EXPECT_NEAR(Phi(x) + Phi(-x), 1.0, 1e-15);
    EXPECT_EQ(phi(x), phi(-x));
  }
  double prev = 0.0;
  for (double x = -38.0; x <= 9.0; x += 0.01) {
    const double v = Phi(x);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
}

TEST(Phi, DensityIsDerivative) {
  for (double x = -37.0; x <= 37.0; x += 0.25) {
    const double h = 1e-4 / std::max(1.0, std::abs(x));
    double fd;
    if (x > 0.0) {
      fd = (Phi_upper(x - h) - Phi_upper(x + h)) / (2.0 * h);
    } else {
      fd = (Phi(x + h) - Phi(x - h)) / (2.0 * h);
    }
    if (phi(x) > 1e-300) {
      EXPECT_LT(rel_err(fd, phi(x)), 1e-6) << "x=" << x;
    }
  }
}

TEST(PhiInv, Values) {
  EXPECT_LT(rel_err(Phi_inv(0.975), 1.959963984540054235524594430520551527956), 1e-14);
  EXPECT_EQ(Phi_inv(0.5), 0.0);
  EXPECT_CENSREG_ERROR(Phi_inv(0.0), ErrorCode::InvalidArgument);
  EXPECT_CENSREG_ERROR(Phi_inv(1.0), ErrorCode::InvalidArgument);
  EXPECT_CENSREG_ERROR(Phi_inv(std::nan("")), ErrorCode::InvalidArgument);
}

TEST(PhiInv, RoundTrip) {
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double back = x < 0.0 ? Phi_inv(Phi(x)) : -Phi_inv(Phi_upper(x));
    EXPECT_LE(std::abs(back - x), 1e-10 * std::max(1.0, std::abs(x))) << x;
  }
  for (double x = -38.0; x < -8.0; x += 0.5) {
    EXPECT_LT(rel_err(Phi_inv(Phi(x)), x), 1e-10) << x;
  }
}

TEST(PhiInv, LogSpace) {
  for (double x : {-1.0, -5.0, -20.0, -40.0, -100.0, -1000.0}) {
    EXPECT_LT(rel_err(Phi_inv_log(log_Phi(x)), x), 1e-10) << x;
  }
  EXPECT_NEAR(Phi_inv_log(std::log(0.975)), 1.959963984540054, 1e-12);
}

TEST(InverseMills, Values) {
  EXPECT_NEAR(inverse_mills(0.0), std::sqrt(2.0 / M_PI), 1e-15);
  EXPECT_LT(rel_err(inverse_mills(5.0), 5.186503967125842115616508962005236720272), 1e-13);
  const double l40 = inverse_mills(40.0);
  EXPECT_LT(rel_err(l40, 40.02496884720726372324487099536973575337), 1e-14);
  EXPECT_GT(l40 - 40.0, 0.0);
  EXPECT_LT(l40 - 40.0, 1.0 / 40.0);
  const double lm30 = inverse_mills(-30.0);
  EXPECT_GT(lm30, 0.0);
  EXPECT_LT(rel_err(lm30, 1.47364613487854751904949326604507448706e-196), 1e-12);
}

TEST(InverseMills, TailBoundsAndMonotone) {
  double prev = 0.0;
  for (double x = -37.0; x <= 1e4; x = x < 50.0 ? x + 0.05 : x * 1.1) {
    const double l = inverse_mills(x);
    ASSERT_TRUE(std::isfinite(l)) << x;
    EXPECT_GT(l, prev) << x;
    if (x > 1.0) {
      EXPECT_GT(l, x);
      EXPECT_LT(l, x + 1.0 / x);
    }
    prev = l;
  }
}

TEST(TruncNorm, CdfValues) {
  EXPECT_NEAR(truncnorm_cdf(0.0, {0.0, 1.0, -1.0, 1.0}), 0.5, 1e-15);
  EXPECT_LT(rel_err(truncnorm_cdf(0.5, {0.0, 1.0, 0.0, 1.0}), 0.5609064251880031086663238936539607891216), 1e-13);
  for (double x : {-3.0, -0.2, 1.7}) {
    EXPECT_NEAR(truncnorm_cdf(x, {0.3, 4.0, -kInf, kInf}), Phi((x - 0.3) / 2.0), 1e-15);
  }
  EXPECT_EQ(truncnorm_cdf(-2.0, {0.0, 1.0, -1.0, 1.0}), 0.0);
  EXPECT_EQ(truncnorm_cdf(2.0, {0.0, 1.0, -1.0, 1.0}), 1.0);
}

TEST(TruncNorm, CdfDeepTails) {
  EXPECT_LT(rel_err(truncnorm_cdf(40.01, {0.0, 1.0, 40.0, 42.0}), 0.3298807901963378504328079123469858777527), 1e-10);
  EXPECT_LT(rel_err(truncnorm_cdf(-40.01, {0.0, 1.0, -42.0, -40.0}), 0.6701192098036621495671920876530141222473), 1e-10);
}

TEST(TruncNorm, Validation) {
  EXPECT_CENSREG_ERROR(truncnorm_cdf(0.0, {0.0, 0.0, -1.0, 1.0}), ErrorCode::InvalidArgument);
  EXPECT_CENSREG_ERROR(truncnorm_cdf(0.0, {0.0, 1.0, 1.0, 1.0}), ErrorCode::InvalidArgument);
  // mass ~1e-300 but Phi(hi) and Phi(lo) round to the same double
  EXPECT_CENSREG_ERROR(truncnorm_cdf(0.0, {0.0, 1.0, -1e-300, 1e-300}), ErrorCode::DegenerateTruncation);
  EXPECT_CENSREG_ERROR(truncation_log_mass({0.0, 1.0, -1e-300, 1e-300}), ErrorCode::DegenerateTruncation);
  // far out but representable in log space
  EXPECT_NEAR(truncnorm_cdf(1e5 + 1e-5, {0.0, 1.0, 1e5, kInf}), 1.0 - std::exp(-1.0), 1e-6);
  EXPECT_CENSREG_ERROR(truncnorm_quantile(0.0, {}), ErrorCode::InvalidArgument);
}

TEST(TruncNorm, MonotoneInXAndMu) {
  const TruncatedNormalParams base{0.0, 1.0, -1.0, 3.0};
  for (double mu = -6.0; mu <= 6.0; mu += 0.5) {
    double prev = 0.0;
    for (double x = -1.0; x <= 3.0; x += 0.05) {
      const double v = truncnorm_cdf(x, {mu, base.sigma2, base.lo, base.hi});
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
  for (int k = 1; k < 13; ++k) {
    const double x = -1.0 + 0.3 * k;
    double prev = 1.0;
    for (double mu = -20.0; mu <= 20.0; mu += 0.25) {
      const double v = truncnorm_cdf(x, {mu, 1.0, -1.0, 3.0});
      EXPECT_LE(v, prev) << x << " " << mu;
      prev = v;
    }
  }
}

TEST(TruncNorm, QuantileValues) {
  EXPECT_NEAR(truncnorm_quantile(0.5, {0.0, 1.0, -1.0, 1.0}), 0.0, 1e-14);
  EXPECT_LT(rel_err(truncnorm_quantile(0.9, {0.0, 1.0, 0.0, kInf}), 1.644853626951472714863848907991632136083), 1e-12);
}

TEST(TruncNorm, QuantileCdfRoundTrip) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const double mu = 20.0 * (rng.uniform() - 0.5);
    const double sigma2 = std::exp(4.0 * (rng.uniform() - 0.5));
    double lo = mu + 8.0 * (rng.uniform() - 0.5) * std::sqrt(sigma2);
    double hi = lo + 3.0 * rng.uniform() * std::sqrt(sigma2) + 1e-3;
    if (i % 5 == 0) lo = -kInf;
    if (i % 7 == 0) hi = kInf;
    const TruncatedNormalParams params{mu, sigma2, lo, hi};
    const double p = rng.uniform();
    const double x = truncnorm_quantile(p, params);
    EXPECT_NEAR(truncnorm_cdf(x, params), p, 1e-10);
    if (std::isfinite(lo) && std::isfinite(hi)) {
      const double y = lo + rng.uniform() * (hi - lo);
      EXPECT_NEAR(truncnorm_quantile(truncnorm_cdf(y, params), params), y, 1e-8 * std::max(1.0, std::abs(y)));
    }
  }
}

TEST(TruncNorm, PdfIntegratesToCdf) {
  const TruncatedNormalParams params{1.0, 0.5, -0.5, 2.0};
  double integral = 0.0;
  const int steps = 20000;
  const double h = (params.hi - params.lo) / steps;
  for (int k = 0; k < steps; ++k) integral += h * truncnorm_pdf(params.lo + (k + 0.5) * h, params);
  EXPECT_NEAR(integral, 1.0, 1e-8);
}

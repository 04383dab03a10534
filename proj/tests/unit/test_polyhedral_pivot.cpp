#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "censreg/least_squares.hpp"
#include "censreg/polyhedral_pivot.hpp"
#include "censreg/rng.hpp"
#include "censreg/simulate.hpp"
#include "line_search_oracle.hpp"
#include "test_helpers.hpp"

using namespace censreg;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

struct Instance {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd Sigma;
  Eigen::VectorXd y;
  Eigen::VectorXd eta;
};

Instance random_instance(Rng& rng) {
  const auto n = 1 + static_cast<Eigen::Index>(rng.uniform() * 4);
  const auto m = static_cast<Eigen::Index>(rng.uniform() * 7);
  Instance in;
  in.A = gaussian(m, n, rng);
  in.y = gaussian(n, 1, rng).col(0);
  in.b = in.A * in.y;
  for (Eigen::Index j = 0; j < m; ++j) in.b[j] += 2.0 * rng.uniform();
  const Eigen::MatrixXd B = gaussian(n, n, rng);
  in.Sigma = B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  in.eta = gaussian(n, 1, rng).col(0);
  return in;
}

void expect_bound_eq(double got, double want) {
  if (std::abs(want) > 1e10) {
    EXPECT_GT(std::abs(got), 1e10);
    EXPECT_EQ(std::signbit(got), std::signbit(want));
  } else {
    EXPECT_LE(std::abs(got - want), 1e-9 * std::max(1.0, std::abs(want))) << got << " vs " << want;
  }
}

}  // namespace

TEST(TruncationBounds, WorkedExample) {
  const auto b = truncation_bounds(Eigen::Vector2d(2.0, 3.0), PolyhedralConstraint::nonnegative(2),
                                   Covariance::scaled_identity(2, 1.0), Eigen::Vector2d(1.0, 0.0));
  EXPECT_EQ(b.v_minus, 0.0);
  EXPECT_EQ(b.v_plus, kInf);
  EXPECT_EQ(b.v_zero, 3.0);
}

TEST(TruncationBounds, Unconstrained) {
  const auto b = truncation_bounds(Eigen::Vector3d(-1.0, 0.5, 2.0), PolyhedralConstraint::unconstrained(3),
                                   Covariance::scaled_identity(3, 2.0), Eigen::Vector3d(1.0, 1.0, 0.0));
  EXPECT_EQ(b.v_minus, -kInf);
  EXPECT_EQ(b.v_plus, kInf);
  EXPECT_EQ(b.v_zero, kInf);
}

TEST(TruncationBounds, Errors) {
  const auto c = PolyhedralConstraint::nonnegative(2);
  const auto s = Covariance::scaled_identity(2, 1.0);
  EXPECT_CENSREG_ERROR(truncation_bounds(Eigen::Vector2d(-0.1, 1.0), c, s, Eigen::Vector2d(1.0, 0.0)),
                       ErrorCode::InfeasibleObservation);
  EXPECT_NO_THROW(truncation_bounds(Eigen::Vector2d(-1e-10, 1.0), c, s, Eigen::Vector2d(1.0, 0.0)));
  EXPECT_CENSREG_ERROR(truncation_bounds(Eigen::Vector2d(1.0, 1.0), c, s, Eigen::Vector2d::Zero()),
                       ErrorCode::DegenerateDirection);
  EXPECT_CENSREG_ERROR(Covariance::block(2, 1.0, 1.0, 1.0), ErrorCode::NonPDCovariance);
}

TEST(TruncationBounds, MatchesLineSearchOracle) {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng);
    const auto got = truncation_bounds(in.y, {in.A, in.b}, Covariance::dense(in.Sigma), in.eta);
    const auto want = oracle::line_search_bounds(in.A, in.b, in.Sigma, in.y, in.eta);
    expect_bound_eq(got.v_minus, want.v_minus);
    expect_bound_eq(got.v_plus, want.v_plus);
    if (std::isinf(want.v_zero)) {
      EXPECT_TRUE(std::isinf(got.v_zero));
    } else {
      EXPECT_NEAR(got.v_zero, want.v_zero, 1e-9);
    }
  }
}

TEST(TruncationBounds, InvariantAlongSigmaEta) {
  Rng rng(102);
  for (int trial = 0; trial < 500; ++trial) {
    const auto in = random_instance(rng);
    const PolyhedralConstraint c(in.A, in.b);
    const auto cov = Covariance::dense(in.Sigma);
    const auto base = truncation_bounds(in.y, c, cov, in.eta);
    if (!std::isfinite(base.v_minus) || !std::isfinite(base.v_plus)) continue;
    // move to a random feasible point on the same line
    const Eigen::VectorXd dir = in.Sigma * in.eta / in.eta.dot(in.Sigma * in.eta);
    const double t = base.v_minus - in.eta.dot(in.y) + rng.uniform() * (base.v_plus - base.v_minus);
    const auto moved = truncation_bounds(in.y + t * dir, c, cov, in.eta);
    EXPECT_NEAR(moved.v_minus, base.v_minus, 1e-9 * std::max(1.0, std::abs(base.v_minus)));
    EXPECT_NEAR(moved.v_plus, base.v_plus, 1e-9 * std::max(1.0, std::abs(base.v_plus)));
    if (std::isfinite(base.v_zero)) EXPECT_NEAR(moved.v_zero, base.v_zero, 1e-9);
  }
}

TEST(TruncationBounds, SandwichOnFeasibleDraws) {
  Rng rng(103);
  Eigen::MatrixXd A(4, 3);
  A << -1, 0, 0, 0, -1, 0, 1, 1, 1, 0.5, -2, 1;
  const Eigen::Vector4d b(0.0, 0.0, 3.0, 1.0);
  Eigen::Matrix3d S;
  S << 1.0, 0.3, -0.2, 0.3, 2.0, 0.1, -0.2, 0.1, 0.5;
  const PolyhedralConstraint c(A, b);
  const auto cov = Covariance::dense(S);
  const Eigen::Vector3d mu(0.5, 0.5, 0.2);
  const Eigen::Vector3d eta(1.0, -0.5, 2.0);
  const Eigen::MatrixXd draws = rejection_sample_conditional(mu, cov, c, 10000, rng);
  for (Eigen::Index k = 0; k < draws.cols(); ++k) {
    const auto bounds = truncation_bounds(draws.col(k), c, cov, eta);
    const double ety = eta.dot(draws.col(k));
    EXPECT_LE(bounds.v_minus, ety + 1e-12);
    EXPECT_GE(bounds.v_plus, ety - 1e-12);
    EXPECT_GE(bounds.v_zero, 0.0);
  }
}

TEST(TruncationBounds, BlockCovarianceMatchesDense) {
  Rng rng(104);
  const Eigen::Index half = 6;
  Eigen::VectorXd y = gaussian(2 * half, 1, rng).col(0);
  y.head(half) = y.head(half).cwiseAbs();
  const Eigen::VectorXd eta = gaussian(2 * half, 1, rng).col(0);
  const auto block = Covariance::block(half, 1.5, 0.4, 0.8);
  const auto implicit = PolyhedralConstraint::nonnegative_leading(half, 2 * half);
  const PolyhedralConstraint explicit_c(implicit.A(), Eigen::VectorXd::Zero(half));
  const auto a = truncation_bounds(y, implicit, block, eta);
  const auto b = truncation_bounds(y, explicit_c, Covariance::dense(block.to_dense()), eta);
  EXPECT_NEAR(a.v_minus, b.v_minus, 1e-12);
  EXPECT_NEAR(a.v_plus, b.v_plus, 1e-12);
  EXPECT_EQ(a.v_zero, b.v_zero);  // no constraint is parallel here, both +inf
  const Eigen::VectorXd z = gaussian(2 * half, 1, rng).col(0);
  EXPECT_LE((block.factor_apply(z) - Eigen::LLT<Eigen::MatrixXd>(block.to_dense()).matrixL() * z).norm(), 1e-12);
}

TEST(Pivot, SymmetricMidpointAndUnbounded) {
  EXPECT_NEAR(pivot(PivotContext::scalar(1.0, 4.0, -1.0, 3.0), 1.0), 0.5, 1e-15);
  const auto free = PivotContext::scalar(0.7, 2.0, -kInf, kInf);
  for (double mu : {-2.0, 0.0, 0.7, 3.0}) {
    EXPECT_NEAR(pivot(free, mu), Phi((0.7 - mu) / std::sqrt(2.0)), 1e-15);
  }
}

TEST(Pivot, StrictlyDecreasingInMu) {
  Rng rng(105);
  for (int trial = 0; trial < 1000; ++trial) {
    const double var = std::exp(2.0 * rng.normal());
    const double sd = std::sqrt(var);
    const double lo = trial % 3 == 0 ? -kInf : 3.0 * rng.normal();
    const double hi = trial % 4 == 0 ? kInf : (std::isfinite(lo) ? lo : 0.0) + 4.0 * sd * rng.uniform() + 1e-3 * sd;
    const double left = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 1.5 * sd) - 3.0 * sd;
    const double right = std::isfinite(hi) ? hi : left + 3.0 * sd;
    const double x = left + (right - left) * (0.02 + 0.96 * rng.uniform());
    const auto ctx = PivotContext::scalar(x, var, lo, hi);
    double prev = 2.0;
    for (double k = -6.0; k <= 6.0; k += 0.25) {
      const double f = pivot(ctx, x + k * sd);
      EXPECT_LT(f, prev) << trial << " k=" << k;
      prev = f;
    }
    const auto iv = invert_interval(ctx, 0.1);
    EXPECT_LT(iv.lower, iv.upper);
    EXPECT_NEAR(pivot(ctx, iv.lower), 0.95, 1e-7);
    EXPECT_NEAR(pivot(ctx, iv.upper), 0.05, 1e-7);
  }
}

TEST(InvertInterval, ReducesToNormalInterval) {
  for (double alpha : {0.01, 0.05, 0.2, 0.5}) {
    const auto ctx = PivotContext::scalar(1.3, 0.49, -kInf, kInf);
    const auto iv = invert_interval(ctx, alpha);
    const auto nv = normal_interval(ctx, alpha);
    EXPECT_NEAR(iv.lower, nv.lower, 1e-6);
    EXPECT_NEAR(iv.upper, nv.upper, 1e-6);
    EXPECT_NEAR(nv.upper - 1.3, 0.7 * Phi_inv(1.0 - alpha / 2.0), 1e-14);
  }
  EXPECT_CENSREG_ERROR(invert_interval(PivotContext::scalar(0.0, 1.0, -1.0, 1.0), 0.0),
                       ErrorCode::InvalidArgument);
}

TEST(InvertInterval, WiderNearBoundary) {
  const auto near = PivotContext::scalar(-2.9, 1.0, -3.0, 3.0);
  EXPECT_GT(invert_interval(near, 0.05).width(), normal_interval(near, 0.05).width());
}

TEST(InvertInterval, BracketFailureWhenPinnedToBoundary) {
  EXPECT_CENSREG_ERROR(invert_interval(PivotContext::scalar(0.0, 1.0, 0.0, 1.0), 0.05), ErrorCode::BracketFailure);
}

TEST(SignificanceTest, Basics) {
  const auto mid = significance_test(PivotContext::scalar(1.0, 1.0, 0.0, 2.0), 1.0, 0.05);
  EXPECT_NEAR(mid.pivot_value, 0.5, 1e-15);
  EXPECT_NEAR(mid.p_value, 1.0, 1e-14);
  EXPECT_FALSE(mid.reject);
  EXPECT_NEAR(mid.level, 0.95, 1e-15);
  EXPECT_LE(mid.lower, mid.upper);
}

TEST(SignificanceTest, UnconstrainedMatchesZTest) {
  Rng rng(106);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = 4.0 * rng.normal();
    const double var = std::exp(rng.normal());
    const auto ctx = PivotContext::scalar(x, var, -kInf, kInf);
    const double z = x / std::sqrt(var);
    const auto res = significance_test(ctx, 0.0, 0.05);
    EXPECT_EQ(res.reject, std::abs(z) > Phi_inv(0.975)) << z;
    EXPECT_NEAR(res.p_value, 2.0 * Phi(-std::abs(z)), 1e-12);
    EXPECT_NEAR(res.p_value, normal_p_value(ctx, 0.0), 1e-12);
  }
}

TEST(SignificanceTest, NullRejectionRateTobit1) {
  SimDesign d;
  d.beta = Eigen::VectorXd::Ones(10);
  (*d.beta)[0] = 0.0;
  int rejections = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    Rng rng = Rng::stream(555, r);
    const auto s = gen_tobit1(d, rng);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < s.data.y.size(); ++i)
      if (s.data.y[i] > 0) rows.push_back(i);
    TargetSource src;
    src.X_bar = s.data.X(rows, Eigen::all);
    src.y1_bar = s.data.y(rows);
    rejections += significance_test(target_eta(TargetKind::Tobit1Beta, src, 0).context(), 0.0, 0.05).reject;
  }
  const auto band = binomial_band(reps, 0.05);
  EXPECT_TRUE(band.contains(static_cast<double>(rejections) / reps)) << rejections;
}

TEST(Targets, OrthonormalDesign) {
  Rng rng(107);
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(12, 3, rng)).householderQ() *
                            Eigen::MatrixXd::Identity(12, 3);
  TargetSource src;
  src.X_bar = Q;
  src.y1_bar = Eigen::VectorXd::Ones(12);
  for (int j = 0; j < 3; ++j) {
    EXPECT_LE((target_eta(TargetKind::Tobit1Beta, src, j).eta - Q.col(j)).norm(), 1e-12);
  }
  EXPECT_CENSREG_ERROR(target_eta(TargetKind::Tobit1Beta, src, 3), ErrorCode::InvalidArgument);
}

TEST(Targets, RecoverCoefficients) {
  Rng rng(108);
  for (int trial = 0; trial < 50; ++trial) {
    TargetSource src;
    src.X_bar = gaussian(15, 4, rng);
    src.y1_bar = gaussian(15, 1, rng).col(0).cwiseAbs();
    src.y2_bar = gaussian(15, 1, rng).col(0);
    src.sigma12 = 0.3;
    const Eigen::VectorXd beta = gaussian(4, 1, rng).col(0);
    const Eigen::VectorXd mu1 = gaussian(15, 1, rng).col(0);
    Eigen::VectorXd stacked(30);
    stacked << mu1, src.X_bar * beta;
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(target_eta(TargetKind::Tobit1Beta, src, j).eta.dot(src.X_bar * beta), beta[j], 1e-12);
      const auto t2 = target_eta(TargetKind::Tobit3Beta2, src, j);
      EXPECT_NEAR(t2.eta.dot(stacked), beta[j], 1e-12);
      EXPECT_EQ(t2.constraint.rows(), 15);
    }
  }
  TargetSource bad;
  bad.X_bar = Eigen::MatrixXd::Ones(5, 2);
  bad.y1_bar = Eigen::VectorXd::Ones(5);
  EXPECT_CENSREG_ERROR(target_eta(TargetKind::Tobit1Beta, bad, 0), ErrorCode::RankDeficient);
}

TEST(ConditionalCoverage, FixedCensoringPatterns) {
  // With X, beta and the uncensored set fixed, the interval is exact given the
  // pattern; check two different patterns separately.
  for (std::uint64_t seed : {201u, 202u}) {
    SimDesign d;
    d.n = 60;
    d.p = 4;
    d.seed = seed;
    Rng rng(seed);
    const auto s = gen_tobit1(d, rng);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < s.data.y.size(); ++i)
      if (s.data.y[i] > 0) rows.push_back(i);
    const Eigen::MatrixXd X_bar = s.data.X(rows, Eigen::all);
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto event = PolyhedralConstraint::nonnegative(m);
    const auto cov = Covariance::scaled_identity(m, 1.0);
    const Eigen::VectorXd eta = pseudo_inverse_transpose(X_bar).col(1);
    const Eigen::MatrixXd draws = rejection_sample_conditional(X_bar * s.beta, cov, event, 1000, rng);
    int hits = 0;
    for (Eigen::Index k = 0; k < draws.cols(); ++k) {
      hits += invert_interval(PivotContext::make(draws.col(k), event, cov, eta), 0.05).contains(s.beta[1]);
    }
    EXPECT_TRUE(binomial_band(1000, 0.95).contains(hits / 1000.0)) << hits;
  }
}

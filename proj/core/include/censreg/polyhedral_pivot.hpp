#pragma once

#include <variant>

#include <Eigen/Dense>

#include "censreg/normal_dist.hpp"

namespace censreg {

/// Covariance of the response vector, with the structures the Tobit models
/// produce kept implicit so products cost O(n).
class Covariance {
public:
  /// sigma2 * I_n
  static Covariance scaled_identity(Eigen::Index n, double sigma2);
  /// [s11 I, s12 I; s12 I, s22 I] on a stacked (y1, y2) of length 2 * half.
  /// Throws NonPDCovariance unless the 2x2 block is positive definite.
  static Covariance block(Eigen::Index half, double s11, double s12, double s22);
  static Covariance dense(Eigen::MatrixXd sigma);

  Eigen::Index dim() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  /// v' Sigma v
  double quadratic(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd to_dense() const;
  /// L z for a factor with L L' = Sigma; maps standard normal z to N(0, Sigma).
  Eigen::VectorXd factor_apply(const Eigen::VectorXd& z) const;
  /// sigma2 if this is sigma2 * I, else 0.
  double identity_scale() const;

private:
  struct ScaledIdentity {
    Eigen::Index n;
    double sigma2;
  };
  struct Block {
    Eigen::Index half;
    double s11, s12, s22;
  };
  using Rep = std::variant<ScaledIdentity, Block, Eigen::MatrixXd>;
  explicit Covariance(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

/// The conditioning event {y : A y <= b}.
///
/// The Tobit events (-I, 0) and ([-I 0], 0) are stored implicitly; arbitrary
/// (A, b) pairs are stored densely.
class PolyhedralConstraint {
public:
  PolyhedralConstraint(Eigen::MatrixXd A, Eigen::VectorXd b);

  /// y >= 0 on all n coordinates (A = -I, b = 0).
  static PolyhedralConstraint nonnegative(Eigen::Index n);
  /// y_i >= 0 for the leading k of n coordinates (A = [-I 0], b = 0).
  static PolyhedralConstraint nonnegative_leading(Eigen::Index k, Eigen::Index n);
  /// No constraints (m = 0).
  static PolyhedralConstraint unconstrained(Eigen::Index n);

  Eigen::Index rows() const { return b_.size(); }
  Eigen::Index dim() const { return dim_; }
  const Eigen::VectorXd& b() const { return b_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& y) const;  // A y
  Eigen::MatrixXd A() const;
  /// Number k of leading coordinates constrained to be >= 0 when the event is
  /// the implicit [-I 0] form (k = dim for -I), else -1.
  Eigen::Index nonnegative_leading_count() const { return leading_; }

private:
  PolyhedralConstraint() = default;
  Eigen::Index dim_ = 0;
  Eigen::Index leading_ = -1;  // >= 0 for the implicit [-I 0] form
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

struct TruncationBounds {
  double v_minus = -kInf;
  double v_plus = kInf;
  double v_zero = kInf;
};

/// Slab of the event along the direction Sigma eta through y.
///
/// With a = A Sigma eta / (eta' Sigma eta) and slack r = b - A y:
///   v_minus = sup_{a_j < 0} eta'y + r_j / a_j
///   v_plus  = inf_{a_j > 0} eta'y + r_j / a_j
///   v_zero  = inf_{a_j = 0} r_j
/// which are the ends of {eta'y + t : y + t Sigma eta / (eta' Sigma eta) in event}.
/// Components with |a_j| <= 1e-12 ||a||_inf count as a_j = 0.
///
/// Throws InfeasibleObservation when A y <= b fails by more than
/// `feasibility_tol`, DegenerateDirection when eta' Sigma eta <= 0.
TruncationBounds truncation_bounds(const Eigen::VectorXd& y, const PolyhedralConstraint& constraint,
                                   const Covariance& sigma, const Eigen::VectorXd& eta,
                                   double feasibility_tol = 1e-9);

/// Everything the pivot needs for one linear target eta'mu.
struct PivotContext {
  Eigen::VectorXd eta;
  Eigen::VectorXd a_vec;
  double variance = 0.0;  // eta' Sigma eta
  double v_minus = -kInf;
  double v_plus = kInf;
  double v_zero = kInf;
  double eta_y = 0.0;

  double sd() const;

  /// Builds eta, a and the bounds from the observed y.
  static PivotContext make(const Eigen::VectorXd& y, const PolyhedralConstraint& constraint,
                           const Covariance& sigma, const Eigen::VectorXd& eta);
  /// A one-dimensional context with given bounds, as used for width curves.
  static PivotContext scalar(double x, double variance, double v_minus, double v_plus);
};

/// F(eta'y; mu, eta'Sigma eta, v_minus, v_plus): Unif(0,1) given the event
/// when mu_target is the true eta'mu. Decreasing in mu_target.
double pivot(const PivotContext& ctx, double mu_target);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
};

/// The set {nu : alpha/2 <= F(eta'y; nu) <= 1 - alpha/2}.
///
/// Each end is bracketed by doubling steps of sd() away from eta'y, then
/// bisected to 1e-9 * sd(). Throws BracketFailure if F stays saturated out to
/// 1e12 * sd().
Interval invert_interval(const PivotContext& ctx, double alpha);

/// Classical eta'y +- z_{1-alpha/2} sd(), ignoring the truncation.
Interval normal_interval(const PivotContext& ctx, double alpha);
double normal_p_value(const PivotContext& ctx, double null_value);

struct InferenceResult {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;  // confidence level 1 - alpha
  double pivot_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

/// Two-sided conditional test of eta'mu = null_value together with the
/// 1 - alpha interval. Rejects iff the pivot falls below alpha/2 or above
/// 1 - alpha/2; p = 2 min(u, 1 - u).
InferenceResult significance_test(const PivotContext& ctx, double null_value, double alpha);

// ---------------------------------------------------------------------------
// Inference targets for the fitted coefficients.

enum class TargetKind { Tobit1Beta, Tobit3Beta1, Tobit3Beta2 };

/// The pieces of a fitted model an inference target is built from. X_bar is the
/// uncensored design of the equation being targeted (X2_bar for Tobit3Beta2).
struct TargetSource {
  Eigen::MatrixXd X_bar;
  Eigen::VectorXd y1_bar;  // uncensored responses of the censored equation
  Eigen::VectorXd y2_bar;  // Tobit3Beta2 only
  double sigma1_2 = 1.0;   // sigma^2 for Type 1
  double sigma12 = 0.0;
  double sigma2_2 = 1.0;
};

struct InferenceTarget {
  Eigen::VectorXd y;  // observed response the target acts on (stacked for Type 3 beta2)
  Eigen::VectorXd eta;
  Covariance sigma;
  PolyhedralConstraint constraint;

  PivotContext context() const { return PivotContext::make(y, constraint, sigma, eta); }
};

/// eta with eta' mu = beta_j: (X_bar^+)' e_j for Tobit1Beta / Tobit3Beta1 under
/// A = -I, and [0; (X2_bar^+)' e_j] under A = [-I 0] for Tobit3Beta2.
/// Throws RankDeficient, InvalidArgument for j out of range.
InferenceTarget target_eta(TargetKind kind, const TargetSource& source, Eigen::Index j);

/// Same as target_eta, given a precomputed column of pseudo_inverse_transpose(X_bar).
InferenceTarget target_from_direction(TargetKind kind, const TargetSource& source,
                                      const Eigen::VectorXd& direction);

}  // namespace censreg

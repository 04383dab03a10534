#pragma once

#include <vector>

#include <Eigen/Dense>

#include "censreg/probit.hpp"

namespace censreg {

/// Type 1 Tobit observables: y = max(0, X beta + eps).
struct Tobit1Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

/// Type 3 Tobit: y1 censored at zero, y2 observed exactly where y1 > 0.
struct Tobit3Data {
  Eigen::MatrixXd X1;
  Eigen::VectorXd y1;
  Eigen::MatrixXd X2;
  Eigen::VectorXd y2;
};

/// Type 2 Tobit (sample selection): only the selection indicator of the first
/// equation is observed. y2 entries at unselected rows are ignored.
struct Tobit2Data {
  Eigen::MatrixXd X1;
  Indicator z;
  Eigen::MatrixXd X2;
  Eigen::VectorXd y2;
};

// Throw InvariantViolation / AllSameLabel describing the first broken rule.
void validate(const Tobit1Data& data);
void validate(const Tobit3Data& data);
void validate(const Tobit2Data& data);

/// Result of one probit-then-least-squares pass.
///
/// gamma_hat stacks the coefficients of the uncensored-row regression on
/// Z_hat = [X_bar, lambda_hat]: the leading p entries are beta_hat and the last
/// is the scale of the correction column (sigma for Type 1, tau for Types 2/3).
struct TwoStepFit {
  ProbitFit probit;
  Eigen::VectorXd alpha_hat;
  std::vector<Eigen::Index> selected_rows;
  Eigen::VectorXd y_selected;
  Eigen::VectorXd lambda_hat;
  Eigen::MatrixXd Z_hat;
  Eigen::VectorXd gamma_hat;
  // Residual-based error variance for this equation. May come out <= 0 in small
  // samples; then variance_positive is false and consumers that need it throw.
  double sigma2_hat = 0.0;
  bool variance_positive = false;

  Eigen::Index p() const { return Z_hat.cols() - 1; }
  Eigen::VectorXd beta_hat() const { return gamma_hat.head(p()); }
  double scale_hat() const { return gamma_hat[p()]; }
  /// Rows of X restricted to the uncensored observations.
  Eigen::MatrixXd X_selected() const { return Z_hat.leftCols(p()); }
  /// ||Z' (y_bar - Z gamma)||_inf, zero up to rounding.
  double normal_equation_residual() const;
  /// Throws NonPositiveVariance when sigma2_hat <= 0.
  double require_sigma2() const;
};

struct Tobit3Fit {
  TwoStepFit equation1;  // beta1 and sigma1 (as the correction scale)
  TwoStepFit equation2;  // beta2 and tau = sigma12 / sigma1

  /// sigma12 = tau * sigma1, with sigma1 from equation 1's variance estimate.
  double sigma12_hat() const;
};

/// Heckman two-step for the Type 1 model.
TwoStepFit fit_tobit1(const Tobit1Data& data, const ProbitOptions& options = {});

/// Heckman two-step for the Type 3 model, both equations.
Tobit3Fit fit_tobit3(const Tobit3Data& data, const ProbitOptions& options = {});

/// Heckman two-step for the Type 2 model (sigma1 fixed to 1, so sigma12 = tau).
TwoStepFit fit_tobit2(const Tobit2Data& data, const ProbitOptions& options = {});

/// Log-normal AFT to right-censored Tobit: y_i = log(T_i) - log(t_i), zero
/// exactly for units that survived the whole period. Throws InvalidArgument on
/// nonpositive times or t_i > T_i.
Eigen::VectorXd aft_transform(const Eigen::VectorXd& t, const Eigen::VectorXd& T);
Eigen::VectorXd aft_transform(const Eigen::VectorXd& t, double T);

}  // namespace censreg

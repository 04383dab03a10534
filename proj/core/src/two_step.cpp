#include "censreg/two_step.hpp"

#include <cmath>
#include <string>

#include "censreg/error.hpp"
#include "censreg/least_squares.hpp"
#include "censreg/normal_dist.hpp"

namespace censreg {

namespace {

void require_rows(const Eigen::MatrixXd& X, Eigen::Index n, const char* what) {
  if (X.rows() != n) {
    throw Error(ErrorCode::InvariantViolation,
                std::string(what) + " has " + std::to_string(X.rows()) + " rows, expected " +
                    std::to_string(n));
  }
}

void require_finite(const Eigen::MatrixXd& M, const char* what) {
  if (!M.allFinite()) {
    throw Error(ErrorCode::InvariantViolation, std::string(what) + " contains non-finite values");
  }
}

void require_both_labels(const Indicator& z) {
  bool any0 = false, any1 = false;
  for (auto v : z) {
    any0 |= v == 0;
    any1 |= v != 0;
  }
  if (!any0 || !any1) {
    throw Error(ErrorCode::AllSameLabel,
                any1 ? "every observation is uncensored; the probit step is degenerate"
                     : "every observation is censored; the probit step is degenerate");
  }
}

Indicator positive_indicator(const Eigen::VectorXd& y) {
  Indicator z(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) z[i] = y[i] > 0.0 ? 1 : 0;
  return z;
}

std::vector<Eigen::Index> selected_indices(const Indicator& z) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(rows.size(), X.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(k) = X.row(rows[k]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) out[k] = v[rows[k]];
  return out;
}

// Selection-equation pieces shared by every model: the probit fit, the
// uncensored rows, the correction column lambda(-x1'a) (= phi/Phi at x1'a) and
// the per-row conditional-variance term delta_i = lambda_i (lambda_i + x1'a).
struct SelectionStep {
  ProbitFit probit;
  std::vector<Eigen::Index> rows;
  Eigen::VectorXd lambda;
  Eigen::VectorXd delta;
};

SelectionStep selection_step(const Eigen::MatrixXd& X1, const Indicator& z, Eigen::Index min_selected,
                             const ProbitOptions& options) {
  require_both_labels(z);
  SelectionStep step;
  step.rows = selected_indices(z);
  if (static_cast<Eigen::Index>(step.rows.size()) < min_selected) {
    throw Error(ErrorCode::TooFewUncensored,
                "only " + std::to_string(step.rows.size()) + " uncensored observations, need at least " +
                    std::to_string(min_selected));
  }
  step.probit = fit_probit(X1, z, options);
  const Eigen::VectorXd index = take_rows(X1, step.rows) * step.probit.alpha_hat;
  step.lambda.resize(index.size());
  step.delta.resize(index.size());
  for (Eigen::Index i = 0; i < index.size(); ++i) {
    const double l = inverse_mills(-index[i]);
    step.lambda[i] = l;
    step.delta[i] = l * (l + index[i]);
  }
  return step;
}

// Regress y_bar on [X_bar, lambda] and estimate the equation's error variance as
// ||step residual||^2 / (n_bar - p) + scale^2 * mean(delta).
TwoStepFit corrected_regression(const SelectionStep& sel, const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& y) {
  TwoStepFit fit;
  fit.probit = sel.probit;
  fit.alpha_hat = sel.probit.alpha_hat;
  fit.selected_rows = sel.rows;
  fit.y_selected = take(y, sel.rows);
  fit.lambda_hat = sel.lambda;

  const Eigen::Index n_bar = static_cast<Eigen::Index>(sel.rows.size());
  const Eigen::Index p = X.cols();
  fit.Z_hat.resize(n_bar, p + 1);
  fit.Z_hat.leftCols(p) = take_rows(X, sel.rows);
  fit.Z_hat.col(p) = sel.lambda;

  const auto ls = solve_least_squares(fit.Z_hat, fit.y_selected);
  fit.gamma_hat = ls.coef;
  const double scale = fit.gamma_hat[p];
  fit.sigma2_hat = ls.residual.squaredNorm() / static_cast<double>(n_bar - p) +
                   scale * scale * sel.delta.mean();
  fit.variance_positive = fit.sigma2_hat > 0.0 && std::isfinite(fit.sigma2_hat);
  return fit;
}

}  // namespace

double TwoStepFit::normal_equation_residual() const {
  return (Z_hat.transpose() * (y_selected - Z_hat * gamma_hat)).lpNorm<Eigen::Infinity>();
}

double TwoStepFit::require_sigma2() const {
  if (!variance_positive) {
    throw Error(ErrorCode::NonPositiveVariance,
                "two-step variance estimate is not positive (" + std::to_string(sigma2_hat) + ")");
  }
  return sigma2_hat;
}

double Tobit3Fit::sigma12_hat() const {
  return equation2.scale_hat() * std::sqrt(equation1.require_sigma2());
}

void validate(const Tobit1Data& data) {
  require_rows(data.X, data.y.size(), "X");
  require_finite(data.X, "X");
  require_finite(data.y, "y");
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    if (data.y[i] < 0.0) {
      throw Error(ErrorCode::InvariantViolation,
                  "y is negative at row " + std::to_string(i + 1) + "; censored responses must be >= 0");
    }
  }
  require_both_labels(positive_indicator(data.y));
}

void validate(const Tobit3Data& data) {
  const Eigen::Index n = data.y1.size();
  require_rows(data.X1, n, "X1");
  require_rows(data.X2, n, "X2");
  if (data.y2.size() != n) {
    throw Error(ErrorCode::InvariantViolation, "y1 and y2 differ in length");
  }
  require_finite(data.X1, "X1");
  require_finite(data.X2, "X2");
  require_finite(data.y1, "y1");
  require_finite(data.y2, "y2");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data.y1[i] < 0.0) {
      throw Error(ErrorCode::InvariantViolation, "y1 is negative at row " + std::to_string(i + 1));
    }
    if (data.y1[i] == 0.0 && data.y2[i] != 0.0) {
      throw Error(ErrorCode::InvariantViolation,
                  "y1 zero but y2 nonzero at row " + std::to_string(i + 1));
    }
  }
  require_both_labels(positive_indicator(data.y1));
}

void validate(const Tobit2Data& data) {
  const Eigen::Index n = static_cast<Eigen::Index>(data.z.size());
  require_rows(data.X1, n, "X1");
  require_rows(data.X2, n, "X2");
  if (data.y2.size() != n) {
    throw Error(ErrorCode::InvariantViolation, "z and y2 differ in length");
  }
  require_finite(data.X1, "X1");
  require_finite(data.X2, "X2");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data.z[i] > 1) {
      throw Error(ErrorCode::InvariantViolation, "z must be 0 or 1 at row " + std::to_string(i + 1));
    }
    if (data.z[i] && !std::isfinite(data.y2[i])) {
      throw Error(ErrorCode::InvariantViolation,
                  "y2 is not finite at selected row " + std::to_string(i + 1));
    }
  }
  require_both_labels(data.z);
}

TwoStepFit fit_tobit1(const Tobit1Data& data, const ProbitOptions& options) {
  validate(data);
  const auto sel = selection_step(data.X, positive_indicator(data.y), data.X.cols() + 2, options);
  return corrected_regression(sel, data.X, data.y);
}

Tobit3Fit fit_tobit3(const Tobit3Data& data, const ProbitOptions& options) {
  validate(data);
  const Eigen::Index min_selected = std::max(data.X1.cols(), data.X2.cols()) + 2;
  const auto sel = selection_step(data.X1, positive_indicator(data.y1), min_selected, options);
  return {corrected_regression(sel, data.X1, data.y1), corrected_regression(sel, data.X2, data.y2)};
}

TwoStepFit fit_tobit2(const Tobit2Data& data, const ProbitOptions& options) {
  validate(data);
  const auto sel = selection_step(data.X1, data.z, data.X2.cols() + 2, options);
  return corrected_regression(sel, data.X2, data.y2);
}

Eigen::VectorXd aft_transform(const Eigen::VectorXd& t, const Eigen::VectorXd& T) {
  if (t.size() != T.size()) {
    throw Error(ErrorCode::InvalidArgument, "aft_transform: t and T differ in length");
  }
  Eigen::VectorXd y(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(T[i] > 0.0) || !std::isfinite(T[i])) {
      throw Error(ErrorCode::InvalidArgument,
                  "aft_transform: times must be positive and finite (row " + std::to_string(i + 1) + ")");
    }
    if (t[i] > T[i]) {
      throw Error(ErrorCode::InvalidArgument,
                  "aft_transform: failure time exceeds the test period at row " + std::to_string(i + 1));
    }
    y[i] = t[i] == T[i] ? 0.0 : std::log(T[i]) - std::log(t[i]);
  }
  return y;
}

Eigen::VectorXd aft_transform(const Eigen::VectorXd& t, double T) {
  return aft_transform(t, Eigen::VectorXd::Constant(t.size(), T));
}

}  // namespace censreg

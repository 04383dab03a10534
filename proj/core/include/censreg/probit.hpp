#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace censreg {

/// 0/1 indicator per observation (1 = uncensored / selected).
using Indicator = std::vector<std::uint8_t>;

struct ProbitFit {
  Eigen::VectorXd alpha_hat;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;  // infinity norm at alpha_hat
};

struct ProbitOptions {
  double gradient_tol = 1e-8;
  int max_iterations = 100;
  // |x_i' alpha| beyond this while the likelihood still climbs means the MLE
  // is running off to infinity (quasi-complete separation).
  double separation_bound = 35.0;
  // Newton step (inf-norm) must also fall below step_tolerance * (1 + |alpha|_inf).
  double step_tolerance = 1e-6;
};

/// sum_i z_i log Phi(x_i'a) + (1 - z_i) log(1 - Phi(x_i'a)).
double probit_loglik(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X, const Indicator& z);

Eigen::VectorXd probit_gradient(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                                const Indicator& z);

/// Exact Hessian; negative semidefinite everywhere.
Eigen::MatrixXd probit_hessian(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                               const Indicator& z);

/// Probit MLE by damped Newton from alpha = 0.
///
/// Throws AllSameLabel, RankDeficient (X not of full column rank or n < p) and
/// Separation. A fit that hits max_iterations is returned with converged = false.
ProbitFit fit_probit(const Eigen::MatrixXd& X, const Indicator& z, const ProbitOptions& options = {});

}  // namespace censreg

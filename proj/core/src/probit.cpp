#include "censreg/probit.hpp"

#include <cmath>
#include <string>

#include "censreg/error.hpp"
#include "censreg/least_squares.hpp"
#include "censreg/normal_dist.hpp"

namespace censreg {

namespace {

void check_shapes(const Eigen::MatrixXd& X, const Indicator& z) {
  if (static_cast<Eigen::Index>(z.size()) != X.rows()) {
    throw Error(ErrorCode::InvalidArgument, "probit: X has " + std::to_string(X.rows()) +
                                                " rows but z has " + std::to_string(z.size()));
  }
}

// Per-observation first and second derivative of the log-likelihood with
// respect to the linear index t = x'a.
struct IndexDerivatives {
  double first;
  double second;
};

IndexDerivatives index_derivatives(double t, bool selected) {
  if (selected) {
    // d/dt log Phi(t) = lambda(-t), d2 = -lambda(-t) (t + lambda(-t))
    const double m = inverse_mills(-t);
    return {m, -m * (t + m)};
  }
  // d/dt log(1 - Phi(t)) = -lambda(t), d2 = -lambda(t) (lambda(t) - t)
  const double m = inverse_mills(t);
  return {-m, -m * (m - t)};
}

}  // namespace

double probit_loglik(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X, const Indicator& z) {
  check_shapes(X, z);
  const Eigen::VectorXd index = X * alpha;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < index.size(); ++i) {
    ll += z[i] ? log_Phi(index[i]) : log_Phi(-index[i]);
  }
  return ll;
}

Eigen::VectorXd probit_gradient(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                                const Indicator& z) {
  check_shapes(X, z);
  const Eigen::VectorXd index = X * alpha;
  Eigen::VectorXd w(index.size());
  for (Eigen::Index i = 0; i < index.size(); ++i) {
    w[i] = index_derivatives(index[i], z[i] != 0).first;
  }
  return X.transpose() * w;
}

Eigen::MatrixXd probit_hessian(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                               const Indicator& z) {
  check_shapes(X, z);
  const Eigen::VectorXd index = X * alpha;
  Eigen::VectorXd w(index.size());
  for (Eigen::Index i = 0; i < index.size(); ++i) {
    w[i] = index_derivatives(index[i], z[i] != 0).second;
  }
  return X.transpose() * w.asDiagonal() * X;
}

ProbitFit fit_probit(const Eigen::MatrixXd& X, const Indicator& z, const ProbitOptions& options) {
  check_shapes(X, z);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();

  Eigen::Index ones = 0;
  for (auto v : z) {
    if (v > 1) throw Error(ErrorCode::InvalidArgument, "probit: labels must be 0 or 1");
    ones += v;
  }
  if (ones == 0 || ones == n) {
    throw Error(ErrorCode::AllSameLabel, "probit: all observations carry the same label");
  }
  if (n < p || numerical_rank(X) < p) {
    throw Error(ErrorCode::RankDeficient, "probit: design matrix is not of full column rank");
  }

  ProbitFit fit;
  fit.alpha_hat = Eigen::VectorXd::Zero(p);
  fit.loglik = probit_loglik(fit.alpha_hat, X, z);

  Eigen::VectorXd grad(p);
  Eigen::VectorXd w(n);
  Eigen::VectorXd first(n);
  bool settled = false;
  for (int it = 0; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd index = X * fit.alpha_hat;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto d = index_derivatives(index[i], z[i] != 0);
      first[i] = d.first;
      w[i] = -d.second;
    }
    grad.noalias() = X.transpose() * first;
    fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    fit.iterations = it;

    const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) step = grad;
    // Under separation the gradient vanishes long before the index diverges, but
    // the Newton step stays large; only stop once both are small.
    const double step_norm = step.lpNorm<Eigen::Infinity>();
    settled = step_norm <= options.step_tolerance * (1.0 + fit.alpha_hat.lpNorm<Eigen::Infinity>());
    if (fit.gradient_norm <= options.gradient_tol && settled) {
      fit.converged = true;
      return fit;
    }
    if (it == options.max_iterations) break;

    double scale = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial = fit.alpha_hat + step;
    double trial_ll = probit_loglik(trial, X, z);
    // Close to the optimum the predicted gain is below the rounding noise of the
    // summed loglik, so compare gradients instead.
    const double predicted = 0.5 * grad.dot(step);
    if (trial_ll < fit.loglik && predicted <= 1e-12 * (1.0 + std::abs(fit.loglik)) &&
        probit_gradient(trial, X, z).lpNorm<Eigen::Infinity>() < fit.gradient_norm) {
      accepted = true;
    }
    for (int halving = 0; !accepted && halving < 60; ++halving, scale *= 0.5) {
      trial = fit.alpha_hat + scale * step;
      trial_ll = probit_loglik(trial, X, z);
      if (trial_ll >= fit.loglik) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no ascent possible at working precision

    const bool improving = trial_ll > fit.loglik;
    if (improving && (X * trial).lpNorm<Eigen::Infinity>() > options.separation_bound) {
      throw Error(ErrorCode::Separation,
                  "probit: linear index diverges while the likelihood keeps improving "
                  "(quasi-complete separation)");
    }
    fit.alpha_hat = trial;
    fit.loglik = trial_ll;
  }
  fit.converged = fit.gradient_norm <= options.gradient_tol && settled;
  return fit;
}

}  // namespace censreg

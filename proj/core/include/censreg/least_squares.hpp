#pragma once

#include <Eigen/Dense>

namespace censreg {

struct LeastSquaresFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residual;
};

/// Rank of A from a column-pivoted QR at Eigen's default threshold.
Eigen::Index numerical_rank(const Eigen::MatrixXd& A);

/// min ||y - A b|| by column-pivoted Householder QR. Throws RankDeficient.
LeastSquaresFit solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

/// Columns are eta_j = (A^+)' e_j, so that eta_j' A b = b_j for every b.
/// Requires full column rank (throws RankDeficient).
Eigen::MatrixXd pseudo_inverse_transpose(const Eigen::MatrixXd& A);

}  // namespace censreg

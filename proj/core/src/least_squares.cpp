#include "censreg/least_squares.hpp"

#include "censreg/error.hpp"

namespace censreg {

namespace {

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> full_rank_qr(const Eigen::MatrixXd& A) {
  if (A.rows() < A.cols() || A.cols() == 0) {
    throw Error(ErrorCode::RankDeficient, "least squares: fewer rows than columns");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < A.cols()) {
    throw Error(ErrorCode::RankDeficient, "least squares: design is rank deficient");
  }
  return qr;
}

}  // namespace

Eigen::Index numerical_rank(const Eigen::MatrixXd& A) {
  return Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(A).rank();
}

LeastSquaresFit solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  const auto qr = full_rank_qr(A);
  LeastSquaresFit fit;
  fit.coef = qr.solve(y);
  fit.residual = y - A * fit.coef;
  return fit;
}

Eigen::MatrixXd pseudo_inverse_transpose(const Eigen::MatrixXd& A) {
  const auto qr = full_rank_qr(A);
  const Eigen::Index n = A.rows();
  const Eigen::Index p = A.cols();
  // A P = Q R  =>  A^+ = P R^{-1} Q'  =>  (A^+)' = Q R^{-T} P'
  const Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  const auto r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  // rows of (R^{-T})' = R^{-1}; solve R^T M = I for M = R^{-T}
  Eigen::MatrixXd r_inv_t = Eigen::MatrixXd::Identity(p, p);
  r.transpose().solveInPlace(r_inv_t);
  Eigen::MatrixXd etas = thin_q * r_inv_t;  // columns in pivoted order
  return etas * qr.colsPermutation().transpose();
}

}  // namespace censreg

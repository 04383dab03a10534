#include "censreg/polyhedral_pivot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "censreg/error.hpp"
#include "censreg/least_squares.hpp"

namespace censreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

}  // namespace

// --- Covariance -------------------------------------------------------------

Covariance Covariance::scaled_identity(Eigen::Index n, double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw Error(ErrorCode::NonPDCovariance, "covariance: sigma2 must be positive, got " + std::to_string(sigma2));
  }
  return Covariance(ScaledIdentity{n, sigma2});
}

Covariance Covariance::block(Eigen::Index half, double s11, double s12, double s22) {
  if (!(s11 > 0.0) || !(s22 > 0.0) || !(s11 * s22 - s12 * s12 > 0.0)) {
    throw Error(ErrorCode::NonPDCovariance, "covariance: 2x2 block is not positive definite");
  }
  return Covariance(Block{half, s11, s12, s22});
}

Covariance Covariance::dense(Eigen::MatrixXd sigma) {
  if (sigma.rows() != sigma.cols()) {
    throw Error(ErrorCode::InvalidArgument, "covariance: matrix must be square");
  }
  return Covariance(std::move(sigma));
}

Eigen::Index Covariance::dim() const {
  return std::visit(overloaded{[](const ScaledIdentity& s) { return s.n; },
                               [](const Block& b) { return 2 * b.half; },
                               [](const Eigen::MatrixXd& m) { return m.rows(); }},
                    rep_);
}

Eigen::VectorXd Covariance::apply(const Eigen::VectorXd& v) const {
  if (v.size() != dim()) {
    throw Error(ErrorCode::InvalidArgument, "covariance: dimension mismatch");
  }
  return std::visit(
      overloaded{[&](const ScaledIdentity& s) -> Eigen::VectorXd { return s.sigma2 * v; },
                 [&](const Block& b) -> Eigen::VectorXd {
                   Eigen::VectorXd out(v.size());
                   const auto v1 = v.head(b.half);
                   const auto v2 = v.tail(b.half);
                   out.head(b.half) = b.s11 * v1 + b.s12 * v2;
                   out.tail(b.half) = b.s12 * v1 + b.s22 * v2;
                   return out;
                 },
                 [&](const Eigen::MatrixXd& m) -> Eigen::VectorXd { return m * v; }},
      rep_);
}

Eigen::VectorXd Covariance::factor_apply(const Eigen::VectorXd& z) const {
  if (z.size() != dim()) {
    throw Error(ErrorCode::InvalidArgument, "covariance: dimension mismatch");
  }
  return std::visit(
      overloaded{[&](const ScaledIdentity& s) -> Eigen::VectorXd { return std::sqrt(s.sigma2) * z; },
                 [&](const Block& b) -> Eigen::VectorXd {
                   const double l11 = std::sqrt(b.s11);
                   const double l21 = b.s12 / l11;
                   const double l22 = std::sqrt(b.s22 - l21 * l21);
                   Eigen::VectorXd out(z.size());
                   out.head(b.half) = l11 * z.head(b.half);
                   out.tail(b.half) = l21 * z.head(b.half) + l22 * z.tail(b.half);
                   return out;
                 },
                 [&](const Eigen::MatrixXd& m) -> Eigen::VectorXd {
                   Eigen::LLT<Eigen::MatrixXd> llt(m);
                   if (llt.info() != Eigen::Success) {
                     throw Error(ErrorCode::NonPDCovariance, "covariance: matrix is not positive definite");
                   }
                   return llt.matrixL() * z;
                 }},
      rep_);
}

double Covariance::identity_scale() const {
  if (const auto* s = std::get_if<ScaledIdentity>(&rep_)) return s->sigma2;
  return 0.0;
}

double Covariance::quadratic(const Eigen::VectorXd& v) const { return v.dot(apply(v)); }

Eigen::MatrixXd Covariance::to_dense() const {
  return std::visit(
      overloaded{[](const ScaledIdentity& s) -> Eigen::MatrixXd {
                   return s.sigma2 * Eigen::MatrixXd::Identity(s.n, s.n);
                 },
                 [](const Block& b) -> Eigen::MatrixXd {
                   const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(b.half, b.half);
                   Eigen::MatrixXd m(2 * b.half, 2 * b.half);
                   m << b.s11 * I, b.s12 * I, b.s12 * I, b.s22 * I;
                   return m;
                 },
                 [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return m; }},
      rep_);
}

// --- PolyhedralConstraint ---------------------------------------------------

PolyhedralConstraint::PolyhedralConstraint(Eigen::MatrixXd A, Eigen::VectorXd b)
    : dim_(A.cols()), A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) {
    throw Error(ErrorCode::InvalidArgument, "constraint: A and b are not conformable");
  }
  if (!A_.allFinite() || !b_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "constraint: A and b must be finite");
  }
}

PolyhedralConstraint PolyhedralConstraint::nonnegative(Eigen::Index n) {
  return nonnegative_leading(n, n);
}

PolyhedralConstraint PolyhedralConstraint::nonnegative_leading(Eigen::Index k, Eigen::Index n) {
  if (k < 0 || k > n) {
    throw Error(ErrorCode::InvalidArgument, "constraint: leading block larger than the dimension");
  }
  PolyhedralConstraint c;
  c.dim_ = n;
  c.leading_ = k;
  c.b_ = Eigen::VectorXd::Zero(k);
  return c;
}

PolyhedralConstraint PolyhedralConstraint::unconstrained(Eigen::Index n) {
  return PolyhedralConstraint(Eigen::MatrixXd(0, n), Eigen::VectorXd(0));
}

Eigen::VectorXd PolyhedralConstraint::apply(const Eigen::VectorXd& y) const {
  if (y.size() != dim_) {
    throw Error(ErrorCode::InvalidArgument, "constraint: dimension mismatch");
  }
  if (leading_ >= 0) return -y.head(leading_);
  return A_ * y;
}

Eigen::MatrixXd PolyhedralConstraint::A() const {
  if (leading_ < 0) return A_;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(leading_, dim_);
  a.leftCols(leading_) = -Eigen::MatrixXd::Identity(leading_, leading_);
  return a;
}

// --- bounds and pivot -------------------------------------------------------

TruncationBounds truncation_bounds(const Eigen::VectorXd& y, const PolyhedralConstraint& constraint,
                                   const Covariance& sigma, const Eigen::VectorXd& eta,
                                   double feasibility_tol) {
  if (y.size() != eta.size() || y.size() != sigma.dim() || y.size() != constraint.dim()) {
    throw Error(ErrorCode::InvalidArgument, "truncation_bounds: dimension mismatch");
  }
  const Eigen::VectorXd sigma_eta = sigma.apply(eta);
  const double variance = eta.dot(sigma_eta);
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorCode::DegenerateDirection, "truncation_bounds: eta' Sigma eta must be positive");
  }
  const Eigen::VectorXd a = constraint.apply(sigma_eta) / variance;
  const Eigen::VectorXd slack = constraint.b() - constraint.apply(y);
  const double eta_y = eta.dot(y);

  TruncationBounds out;
  if (a.size() == 0) return out;
  const double tie = 1e-12 * a.lpNorm<Eigen::Infinity>();
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (slack[j] < -feasibility_tol) {
      throw Error(ErrorCode::InfeasibleObservation,
                  "truncation_bounds: observation violates constraint " + std::to_string(j + 1) +
                      " by " + std::to_string(-slack[j]));
    }
    const double r = std::max(slack[j], 0.0);
    if (std::fabs(a[j]) <= tie) {
      out.v_zero = std::min(out.v_zero, r);
    } else if (a[j] > 0.0) {
      out.v_plus = std::min(out.v_plus, eta_y + r / a[j]);
    } else {
      out.v_minus = std::max(out.v_minus, eta_y + r / a[j]);
    }
  }
  return out;
}

double PivotContext::sd() const { return std::sqrt(variance); }

PivotContext PivotContext::make(const Eigen::VectorXd& y, const PolyhedralConstraint& constraint,
                                const Covariance& sigma, const Eigen::VectorXd& eta) {
  const auto bounds = truncation_bounds(y, constraint, sigma, eta);
  PivotContext ctx;
  ctx.eta = eta;
  const Eigen::VectorXd sigma_eta = sigma.apply(eta);
  ctx.variance = eta.dot(sigma_eta);
  ctx.a_vec = constraint.apply(sigma_eta) / ctx.variance;
  ctx.v_minus = bounds.v_minus;
  ctx.v_plus = bounds.v_plus;
  ctx.v_zero = bounds.v_zero;
  ctx.eta_y = eta.dot(y);
  // rounding can push eta'y a hair outside its own slab
  ctx.eta_y = std::clamp(ctx.eta_y, ctx.v_minus, ctx.v_plus);
  return ctx;
}

PivotContext PivotContext::scalar(double x, double variance, double v_minus, double v_plus) {
  if (!(variance > 0.0)) {
    throw Error(ErrorCode::DegenerateDirection, "pivot context: variance must be positive");
  }
  if (!(v_minus < v_plus) || x < v_minus || x > v_plus) {
    throw Error(ErrorCode::InfeasibleObservation, "pivot context: x must lie within [v_minus, v_plus]");
  }
  PivotContext ctx;
  ctx.eta = Eigen::VectorXd::Ones(1);
  ctx.a_vec = Eigen::VectorXd(0);
  ctx.variance = variance;
  ctx.v_minus = v_minus;
  ctx.v_plus = v_plus;
  ctx.eta_y = x;
  return ctx;
}

double pivot(const PivotContext& ctx, double mu_target) {
  return truncnorm_cdf(ctx.eta_y, {mu_target, ctx.variance, ctx.v_minus, ctx.v_plus});
}

namespace {

// Root of the decreasing map nu -> F(eta'y; nu) = target.
double solve_pivot_root(const PivotContext& ctx, double target) {
  const double sd = ctx.sd();
  const double cap = 1e12 * sd;
  auto F = [&](double nu) { return pivot(ctx, nu); };

  double left = ctx.eta_y;
  double right = ctx.eta_y;
  double step = sd;
  while (F(left) < target) {
    left = ctx.eta_y - step;
    if (step > cap) {
      throw Error(ErrorCode::BracketFailure,
                  "invert_interval: pivot saturates below " + std::to_string(target) +
                      " within half-width " + std::to_string(step));
    }
    step *= 2.0;
  }
  step = sd;
  while (F(right) > target) {
    right = ctx.eta_y + step;
    if (step > cap) {
      throw Error(ErrorCode::BracketFailure,
                  "invert_interval: pivot saturates above " + std::to_string(target) +
                      " within half-width " + std::to_string(step));
    }
    step *= 2.0;
  }
  // F(left) >= target >= F(right)
  const double tol = 1e-9 * sd;
  for (int it = 0; it < 200 && right - left > tol; ++it) {
    const double mid = 0.5 * (left + right);
    if (mid <= left || mid >= right) break;
    if (F(mid) >= target) {
      left = mid;
    } else {
      right = mid;
    }
  }
  return 0.5 * (left + right);
}

}  // namespace

Interval invert_interval(const PivotContext& ctx, double alpha) {
  require_alpha(alpha);
  return {solve_pivot_root(ctx, 1.0 - 0.5 * alpha), solve_pivot_root(ctx, 0.5 * alpha)};
}

Interval normal_interval(const PivotContext& ctx, double alpha) {
  require_alpha(alpha);
  const double half = Phi_inv(1.0 - 0.5 * alpha) * ctx.sd();
  return {ctx.eta_y - half, ctx.eta_y + half};
}

double normal_p_value(const PivotContext& ctx, double null_value) {
  const double z = (ctx.eta_y - null_value) / ctx.sd();
  return 2.0 * Phi_upper(std::fabs(z));
}

InferenceResult significance_test(const PivotContext& ctx, double null_value, double alpha) {
  require_alpha(alpha);
  InferenceResult out;
  const auto ci = invert_interval(ctx, alpha);
  out.lower = ci.lower;
  out.upper = ci.upper;
  out.level = 1.0 - alpha;
  out.pivot_value = pivot(ctx, null_value);
  out.p_value = std::min(1.0, 2.0 * std::min(out.pivot_value, 1.0 - out.pivot_value));
  out.reject = out.pivot_value < 0.5 * alpha || out.pivot_value > 1.0 - 0.5 * alpha;
  return out;
}

// --- targets ----------------------------------------------------------------

InferenceTarget target_from_direction(TargetKind kind, const TargetSource& source,
                                      const Eigen::VectorXd& direction) {
  switch (kind) {
    case TargetKind::Tobit1Beta:
    case TargetKind::Tobit3Beta1: {
      const Eigen::Index n = source.y1_bar.size();
      if (direction.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "target: direction length differs from y_bar");
      }
      return {source.y1_bar, direction, Covariance::scaled_identity(n, source.sigma1_2),
              PolyhedralConstraint::nonnegative(n)};
    }
    case TargetKind::Tobit3Beta2: {
      const Eigen::Index n = source.y1_bar.size();
      if (source.y2_bar.size() != n || direction.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "target: y1_bar, y2_bar and direction must match");
      }
      Eigen::VectorXd y(2 * n), eta(2 * n);
      y << source.y1_bar, source.y2_bar;
      eta << Eigen::VectorXd::Zero(n), direction;
      return {std::move(y), std::move(eta),
              Covariance::block(n, source.sigma1_2, source.sigma12, source.sigma2_2),
              PolyhedralConstraint::nonnegative_leading(n, 2 * n)};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "target: unknown kind");
}

InferenceTarget target_eta(TargetKind kind, const TargetSource& source, Eigen::Index j) {
  if (j < 0 || j >= source.X_bar.cols()) {
    throw Error(ErrorCode::InvalidArgument, "target: coefficient index out of range");
  }
  if (source.X_bar.rows() != source.y1_bar.size()) {
    throw Error(ErrorCode::InvalidArgument, "target: X_bar and y_bar differ in rows");
  }
  const Eigen::MatrixXd etas = pseudo_inverse_transpose(source.X_bar);
  return target_from_direction(kind, source, etas.col(j));
}

}  // namespace censreg

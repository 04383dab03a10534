// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "censreg/error.hpp"
#include "censreg/least_squares.hpp"
#include "censreg/normal_dist.hpp"
#include "censreg/polyhedral_pivot.hpp"
#include "censreg/probit.hpp"
#include "censreg/simulate.hpp"
#include "censreg/two_step.hpp"
#include "line_search_oracle.hpp"

using namespace censreg;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0, double e = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d, e);
  return buf;
}

Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

bool close_bound(double got, double want, double tol) {
  if (std::abs(want) > 1e10 || std::isinf(want)) {
    return std::abs(got) > 1e10 && std::signbit(got) == std::signbit(want);
  }
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

// 1. Pivot uniformity at n = 100, p = 10, sigma^2 = 1.
Outcome pivot_uniformity() {
  SimDesign d;
  d.seed = 20240601;
  const auto rep = pivot_uniformity_experiment(d, 10000);
  return {rep.ks.pass, fmt("KS %.5f vs 1%% critical %.5f (n_bar = %.0f)", rep.ks.statistic,
                           rep.ks.critical_value, static_cast<double>(rep.selected_rows.size()))};
}

// 2. Corrected coverage, Type 1 beta_1 and Type 3 beta_{2,1} at sigma12 = 0.5.
Outcome corrected_coverage() {
  SimDesign d;
  d.seed = 1001;
  d.replications = 1000;
  d.threads = 0;
  CoverageOptions o;
  const auto t1 = coverage_experiment(d, o);
  d.sigma12 = 0.5;
  d.seed = 1002;
  o.model = CoverageModel::Tobit3Beta2;
  const auto t3 = coverage_experiment(d, o);
  const bool pass = t1.corrected_in_band() && t3.corrected_in_band();
  return {pass, fmt("type1 %.3f in [%.3f, %.3f] (%.0f used); ", t1.corrected_coverage, t1.nominal_band.lower,
                    t1.nominal_band.upper, t1.used) +
                    fmt("type3 beta2 %.3f in [%.3f, %.3f] (%.0f used)", t3.corrected_coverage, t3.nominal_band.lower,
                        t3.nominal_band.upper, t3.used)};
}

// 3. Naive normal intervals under weak signal (beta scaled by 0.1).
Outcome naive_undercoverage() {
  SimDesign d;
  d.seed = 1003;
  d.replications = 1000;
  d.signal_scale = 0.1;
  d.threads = 0;
  const auto rep = coverage_experiment(d, {});
  const bool pass = rep.naive_coverage < rep.nominal_band.lower;
  return {pass, fmt("naive %.3f, corrected %.3f, band lower edge %.3f", rep.naive_coverage, rep.corrected_coverage,
                    rep.nominal_band.lower)};
}

// 4. Width curve for [-3s, inf] and [-3s, 3s].
Outcome width_behavior() {
  std::vector<double> grid;
  for (int k = -29; k <= 60; ++k) grid.push_back(0.1 * k);
  double worst_center = 0.0, worst_boundary = 1e300;
  for (double hi : {kInf, 3.0}) {
    std::vector<double> g;
    for (double x : grid)
      if (x < hi) g.push_back(x);
    for (const auto& row : interval_width_curve(1.0, -3.0, hi, g)) {
      const double dist = std::min(row.x + 3.0, hi - row.x);
      if (std::abs(row.x) < 1e-12) worst_center = std::max(worst_center, row.ratio());
      if (dist <= 0.2 + 1e-9) worst_boundary = std::min(worst_boundary, row.ratio());
    }
  }
  return {worst_center <= 1.2 && worst_boundary >= 2.0,
          fmt("max center ratio %.3f (<= 1.2), min ratio within 0.2 sigma of a boundary %.3f (>= 2)", worst_center,
              worst_boundary)};
}

// 5. Closed-form truncation bounds vs brute-force line search.
Outcome truncation_oracle() {
  Rng rng(5005);
  int bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + static_cast<Eigen::Index>(rng.uniform() * 4);
    const auto m = static_cast<Eigen::Index>(rng.uniform() * 7);
    const Eigen::MatrixXd A = gaussian(m, n, rng);
    const Eigen::VectorXd y = gaussian(n, 1, rng).col(0);
    Eigen::VectorXd b = A * y;
    for (Eigen::Index j = 0; j < m; ++j) b[j] += 2.0 * rng.uniform();
    const Eigen::MatrixXd B = gaussian(n, n, rng);
    const Eigen::MatrixXd S = B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd eta = gaussian(n, 1, rng).col(0);
    const auto got = truncation_bounds(y, {A, b}, Covariance::dense(S), eta);
    const auto want = oracle::line_search_bounds(A, b, S, y, eta);
    const bool ok = close_bound(got.v_minus, want.v_minus, 1e-9) && close_bound(got.v_plus, want.v_plus, 1e-9) &&
                    (std::isinf(want.v_zero) ? std::isinf(got.v_zero) : std::abs(got.v_zero - want.v_zero) <= 1e-9);
    bad += !ok;
    if (std::isfinite(want.v_minus)) worst = std::max(worst, std::abs(got.v_minus - want.v_minus));
    if (std::isfinite(want.v_plus)) worst = std::max(worst, std::abs(got.v_plus - want.v_plus));
  }
  return {bad == 0, fmt("%.0f of 1000 instances disagree; max abs difference %.2e", bad, worst)};
}

// 6. F strictly decreasing in mu; interval roots unique.
Outcome monotonicity() {
  Rng rng(6006);
  int violations = 0, root_errors = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double var = std::exp(2.0 * rng.normal());
    const double sd = std::sqrt(var);
    const double lo = trial % 3 == 0 ? -kInf : 3.0 * rng.normal();
    const double hi = trial % 4 == 0 ? kInf : (std::isfinite(lo) ? lo : 0.0) + 4.0 * sd * rng.uniform() + 1e-3 * sd;
    const double left = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 1.5 * sd) - 3.0 * sd;
    const double right = std::isfinite(hi) ? hi : left + 3.0 * sd;
    const double x = left + (right - left) * (0.02 + 0.96 * rng.uniform());
    const auto ctx = PivotContext::scalar(x, var, lo, hi);
    const auto iv = invert_interval(ctx, 0.05);
    // strict decrease on a grid spanning the bracket and beyond
    const double a = iv.lower - 2.0 * sd, b = iv.upper + 2.0 * sd;
    double prev = 2.0;
    for (int k = 0; k <= 200; ++k) {
      const double f = pivot(ctx, a + (b - a) * k / 200.0);
      if (!(f < prev)) ++violations;
      prev = f;
    }
    if (std::abs(pivot(ctx, iv.lower) - 0.975) > 1e-7 || std::abs(pivot(ctx, iv.upper) - 0.025) > 1e-7 ||
        !(iv.lower < iv.upper)) {
      ++root_errors;
    }
  }
  return {violations == 0 && root_errors == 0,
          fmt("%.0f non-decreasing steps, %.0f bad roots over 1000 draws", violations, root_errors)};
}

// 7. Probit closed form and gradient.
Outcome probit_closed_form() {
  double worst_closed = 0.0;
  for (int n : {10, 37, 200}) {
    for (int k = 1; k < n; k += std::max(1, n / 7)) {
      Indicator z(n, 0);
      for (int i = 0; i < k; ++i) z[i] = 1;
      const auto fit = fit_probit(Eigen::MatrixXd::Ones(n, 1), z);
      worst_closed = std::max(worst_closed, std::abs(fit.alpha_hat[0] - Phi_inv(static_cast<double>(k) / n)));
    }
  }
  Rng rng(7007);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd X = gaussian(60, 4, rng);
    X.col(0).setOnes();
    const Eigen::VectorXd alpha = gaussian(4, 1, rng).col(0);
    Indicator z(60);
    for (int i = 0; i < 60; ++i) z[i] = X.row(i).dot(alpha) + rng.normal() > 0.0;
    const Eigen::VectorXd g = probit_gradient(alpha, X, z);
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd up = alpha, down = alpha;
      up[j] += 1e-5;
      down[j] -= 1e-5;
      const double fd = (probit_loglik(up, X, z) - probit_loglik(down, X, z)) / 2e-5;
      worst_grad = std::max(worst_grad, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
    }
  }
  return {worst_closed <= 1e-8 && worst_grad <= 1e-5,
          fmt("max |alpha - Phi^-1(k/n)| %.2e, max gradient relative error %.2e", worst_closed, worst_grad)};
}

// 8. Consistency at n = 1e5.
Outcome consistency() {
  SimDesign d;
  d.n = 100000;
  Rng rng(8008);
  const auto s1 = gen_tobit1(d, rng);
  const double err1 = (fit_tobit1(s1.data).beta_hat() - s1.beta).lpNorm<Eigen::Infinity>();

  d.sigma1_2 = 1.0;
  d.sigma2_2 = 1.0;
  d.sigma12 = 0.5;
  const auto s3 = gen_bivariate(d, rng);
  const auto f3 = fit_tobit3(s3.tobit3());
  const double tau3 = std::abs(f3.equation2.scale_hat() - 0.5);
  const double var3 = std::abs(f3.equation2.sigma2_hat - 1.0);
  const auto s2 = gen_bivariate(d, rng);
  const auto f2 = fit_tobit2(s2.tobit2());
  const double tau2 = std::abs(f2.scale_hat() - 0.5);
  const double var2 = std::abs(f2.sigma2_hat - 1.0);
  const bool pass = err1 <= 0.05 && tau3 <= 0.05 && tau2 <= 0.05 && var3 <= 0.1 && var2 <= 0.1;
  return {pass, fmt("type1 |beta err| %.4f; tau err type3 %.4f type2 %.4f; sigma2^2 err type3 %.4f type2 %.4f", err1,
                    tau3, tau2, var3, var2)};
}

// 9. Bias-corrected bootstrap at the n = 100, p1 = p2 = 10, sigma12 = 0.5 point.
Outcome bootstrap_coverage() {
  SimDesign d;
  d.seed = 9009;
  d.replications = 200;
  d.sigma12 = 0.5;
  d.signal_scale = 0.2;  // keeps the selection probit identifiable in bootstrap refits
  d.threads = 0;
  CoverageOptions o;
  o.model = CoverageModel::Tobit2Bootstrap;
  o.bootstrap_replications = 1000;
  const auto rep = coverage_experiment(d, o);
  const double ratio = rep.corrected_median_width / rep.naive_median_width;
  return {rep.corrected_coverage >= 0.9 && ratio >= 0.7 && ratio <= 1.5,
          fmt("coverage %.3f over %.0f datasets (%.0f excluded), median width ratio %.3f", rep.corrected_coverage,
              rep.used, rep.excluded, ratio)};
}

// 10. Reductions: untruncated pivot is the z procedure; duplicated Type 3 is Type 1.
Outcome reductions() {
  Rng rng(10010);
  double worst_interval = 0.0;
  int decision_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = 3.0 * rng.normal();
    const double var = std::exp(rng.normal());
    const double alpha = 0.01 + 0.5 * rng.uniform();
    const auto ctx = PivotContext::scalar(x, var, -kInf, kInf);
    const auto iv = invert_interval(ctx, alpha);
    const auto nv = normal_interval(ctx, alpha);
    worst_interval = std::max({worst_interval, std::abs(iv.lower - nv.lower), std::abs(iv.upper - nv.upper)});
    const auto t = significance_test(ctx, 0.0, alpha);
    const double z = x / std::sqrt(var);
    decision_mismatch += t.reject != (std::abs(z) > Phi_inv(1.0 - alpha / 2.0));
    worst_interval = std::max(worst_interval, std::abs(t.p_value - normal_p_value(ctx, 0.0)));
  }
  double worst_dup = 0.0;
  SimDesign d;
  for (std::uint64_t r = 0; r < 20; ++r) {
    Rng gen = Rng::stream(10011, r);
    d.signal_scale = 0.5;
    const auto s = gen_tobit1(d, gen);
    try {
      const auto f1 = fit_tobit1(s.data);
      const auto f3 = fit_tobit3({s.data.X, s.data.y, s.data.X, s.data.y});
      worst_dup = std::max({worst_dup, (f3.equation2.beta_hat() - f1.beta_hat()).lpNorm<Eigen::Infinity>(),
                            (f3.equation1.gamma_hat - f1.gamma_hat).lpNorm<Eigen::Infinity>()});
    } catch (const Error&) {
      // same failure either way; nothing to compare
    }
  }
  return {worst_interval <= 1e-6 && decision_mismatch == 0 && worst_dup <= 1e-10,
          fmt("max interval/p-value gap %.2e, %.0f decision mismatches, duplicated type3 gap %.2e", worst_interval,
              decision_mismatch, worst_dup)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"pivot uniformity (KS, 10^4 draws)", pivot_uniformity},
      {"corrected coverage (1000 reps, type 1 and type 3)", corrected_coverage},
      {"naive under-coverage at 0.1 signal", naive_undercoverage},
      {"interval width curve", width_behavior},
      {"truncation bounds vs line search", truncation_oracle},
      {"pivot monotone in mu, unique roots", monotonicity},
      {"probit closed form and gradient", probit_closed_form},
      {"two-step consistency at n = 1e5", consistency},
      {"bias-corrected bootstrap coverage and width", bootstrap_coverage},
      {"reductions to classical procedures", reductions},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = Clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const Error& e) {
      out = {false, std::string("error ") + std::string(to_string(e.code())) + ": " + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("criterion %2d %s: %s -- %s [%.1fs]\n", index, out.pass ? "PASS" : "FAIL", name, out.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}

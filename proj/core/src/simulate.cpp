#include "censreg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/binomial.hpp>

#include "censreg/error.hpp"
#include "censreg/least_squares.hpp"
#include "censreg/normal_dist.hpp"
#include "censreg/parallel.hpp"

namespace censreg {

namespace {

constexpr double kMinAcceptance = 1e-4;
constexpr double kMinProposals = 1e5;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, "design: " + what);
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Eigen::VectorXd coefficients(const std::optional<Eigen::VectorXd>& fixed, Eigen::Index p, double scale,
                             Rng& rng) {
  if (fixed) return scale * *fixed;
  Eigen::VectorXd beta(p);
  for (Eigen::Index j = 0; j < p; ++j) beta[j] = rng.normal();
  return scale * beta;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

std::vector<Eigen::Index> positive_rows(const Eigen::VectorXd& y) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] > 0.0) rows.push_back(i);
  return rows;
}

}  // namespace

void SimDesign::validate_tobit1() const {
  require(p >= 1, "p must be positive");
  require(n > p, "n must exceed p");
  require(sigma2 > 0.0, "sigma2 must be positive");
  require(!beta || beta->size() == p, "beta must have p entries");
  require(replications >= 1, "replications must be positive");
}

void SimDesign::validate_bivariate() const {
  require(p1 >= 1 && p2 >= 1, "p1 and p2 must be positive");
  require(n > std::max(p1, p2), "n must exceed p1 and p2");
  require(!beta1 || beta1->size() == p1, "beta1 must have p1 entries");
  require(!beta2 || beta2->size() == p2, "beta2 must have p2 entries");
  require(!shared_design || p1 == p2, "shared_design needs p1 == p2");
  require(replications >= 1, "replications must be positive");
  if (!(sigma1_2 > 0.0 && sigma2_2 > 0.0 && sigma1_2 * sigma2_2 - sigma12 * sigma12 > 0.0)) {
    throw Error(ErrorCode::NonPDCovariance, "design: [sigma1^2 sigma12; sigma12 sigma2^2] is not positive definite");
  }
}

Tobit3Data BivariateSample::tobit3() const {
  Tobit3Data d{X1, y1_star.cwiseMax(0.0), X2, Eigen::VectorXd::Zero(y2_star.size())};
  for (Eigen::Index i = 0; i < y1_star.size(); ++i)
    if (y1_star[i] > 0.0) d.y2[i] = y2_star[i];
  return d;
}

Tobit2Data BivariateSample::tobit2() const {
  Tobit2Data d{X1, Indicator(static_cast<std::size_t>(y1_star.size()), 0), X2,
               Eigen::VectorXd::Zero(y2_star.size())};
  for (Eigen::Index i = 0; i < y1_star.size(); ++i) {
    if (y1_star[i] > 0.0) {
      d.z[i] = 1;
      d.y2[i] = y2_star[i];
    }
  }
  return d;
}

Tobit1Sample gen_tobit1(const SimDesign& design, Rng& rng) {
  design.validate_tobit1();
  Tobit1Sample s;
  s.beta = coefficients(design.beta, design.p, design.signal_scale, rng);
  s.data.X = gaussian_matrix(design.n, design.p, rng);
  const double sd = std::sqrt(design.sigma2);
  s.y_star = s.data.X * s.beta;
  for (Eigen::Index i = 0; i < design.n; ++i) s.y_star[i] += sd * rng.normal();
  s.data.y = s.y_star.cwiseMax(0.0);
  return s;
}

BivariateSample gen_bivariate(const SimDesign& design, Rng& rng) {
  design.validate_bivariate();
  BivariateSample s;
  s.beta1 = coefficients(design.beta1, design.p1, design.signal_scale, rng);
  s.beta2 = coefficients(design.beta2, design.p2, design.signal_scale, rng);
  s.X1 = gaussian_matrix(design.n, design.p1, rng);
  s.X2 = design.shared_design ? s.X1 : gaussian_matrix(design.n, design.p2, rng);
  const double l11 = std::sqrt(design.sigma1_2);
  const double l21 = design.sigma12 / l11;
  const double l22 = std::sqrt(design.sigma2_2 - l21 * l21);
  s.y1_star = s.X1 * s.beta1;
  s.y2_star = s.X2 * s.beta2;
  for (Eigen::Index i = 0; i < design.n; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    s.y1_star[i] += l11 * z1;
    s.y2_star[i] += l21 * z1 + l22 * z2;
  }
  return s;
}

Tobit3Data gen_tobit3(const SimDesign& design, Rng& rng) { return gen_bivariate(design, rng).tobit3(); }
Tobit2Data gen_tobit2(const SimDesign& design, Rng& rng) { return gen_bivariate(design, rng).tobit2(); }

Eigen::MatrixXd rejection_sample_conditional(const Eigen::VectorXd& mu, const Covariance& sigma,
                                             const PolyhedralConstraint& constraint, int count, Rng& rng) {
  const Eigen::Index n = mu.size();
  if (count < 0) throw Error(ErrorCode::InvalidArgument, "rejection sampler: count must be nonnegative");
  if (sigma.dim() != n || constraint.dim() != n) {
    throw Error(ErrorCode::InvalidArgument, "rejection sampler: dimension mismatch");
  }
  auto check_rate = [](double proposals, double accepted) {
    if (proposals >= kMinProposals && accepted < kMinAcceptance * proposals) {
      throw Error(ErrorCode::AcceptanceTooLow,
                  "rejection sampler: estimated acceptance rate " + std::to_string(accepted / proposals));
    }
  };
  Eigen::MatrixXd out(n, count);
  const double s2 = sigma.identity_scale();
  const Eigen::Index k = constraint.nonnegative_leading_count();
  if (s2 > 0.0 && k >= 0) {
    const double sd = std::sqrt(s2);
    for (int c = 0; c < count; ++c) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double proposals = 0.0;
        while (true) {
          const double v = mu[i] + sd * rng.normal();
          proposals += 1.0;
          if (i >= k || v >= 0.0) {
            out(i, c) = v;
            break;
          }
          check_rate(proposals, 0.0);
        }
      }
    }
    return out;
  }
  double proposals = 0.0;
  double accepted = 0.0;
  Eigen::VectorXd z(n);
  for (int c = 0; c < count;) {
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
    const Eigen::VectorXd y = mu + sigma.factor_apply(z);
    proposals += 1.0;
    if (constraint.rows() == 0 || ((constraint.apply(y) - constraint.b()).array() <= 0.0).all()) {
      out.col(c++) = y;
      accepted += 1.0;
    } else {
      check_rate(proposals, accepted);
    }
  }
  return out;
}

double ks_uniform_statistic(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "KS: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, (i + 1) / n - u, u - i / n});
  }
  return d;
}

double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "KS: no values");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_critical_value(int n, int m, double level) {
  if (n < 1 || m < 0) throw Error(ErrorCode::InvalidArgument, "KS: sample sizes must be positive");
  const double c = std::sqrt(-0.5 * std::log(0.5 * level));
  if (m == 0) return c / std::sqrt(static_cast<double>(n));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

PivotUniformityReport pivot_uniformity_experiment(const SimDesign& design, int count, Eigen::Index coefficient,
                                                  double shift_sd) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "pivot experiment: count must be at least 1");
  design.validate_tobit1();
  if (coefficient < 0 || coefficient >= design.p) {
    throw Error(ErrorCode::InvalidArgument, "pivot experiment: coefficient index out of range");
  }
  Rng rng(design.seed);
  Tobit1Sample sample;
  std::vector<Eigen::Index> rows;
  Eigen::MatrixXd X_bar;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 100) {
      throw Error(ErrorCode::TooFewUncensored, "pivot experiment: could not draw a usable uncensored design");
    }
    sample = gen_tobit1(design, rng);
    rows = positive_rows(sample.data.y);
    if (static_cast<Eigen::Index>(rows.size()) <= design.p) continue;
    X_bar = sample.data.X(rows, Eigen::all);
    if (numerical_rank(X_bar) == design.p) break;
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  const Eigen::VectorXd mu = X_bar * sample.beta;
  const Covariance sigma = Covariance::scaled_identity(m, design.sigma2);
  const PolyhedralConstraint event = PolyhedralConstraint::nonnegative(m);
  const Eigen::VectorXd eta = pseudo_inverse_transpose(X_bar).col(coefficient);

  PivotUniformityReport report;
  report.beta = sample.beta;
  report.selected_rows = rows;
  report.coefficient = coefficient;
  report.shift_sd = shift_sd;
  report.mu_target = sample.beta[coefficient] + shift_sd * std::sqrt(sigma.quadratic(eta));

  const Eigen::MatrixXd draws = rejection_sample_conditional(mu, sigma, event, count, rng);
  report.pivots.resize(count);
  for (int c = 0; c < count; ++c) {
    const auto ctx = PivotContext::make(draws.col(c), event, sigma, eta);
    report.pivots[c] = pivot(ctx, report.mu_target);
  }
  report.ks.count = count;
  report.ks.statistic =
      ks_uniform_statistic(std::vector<double>(report.pivots.data(), report.pivots.data() + count));
  report.ks.critical_value = ks_critical_value(count);
  report.ks.pass = report.ks.statistic < report.ks.critical_value;
  return report;
}

std::string_view to_string(CoverageModel model) {
  switch (model) {
    case CoverageModel::Tobit1: return "tobit1";
    case CoverageModel::Tobit3Beta1: return "tobit3-beta1";
    case CoverageModel::Tobit3Beta2: return "tobit3-beta2";
    case CoverageModel::Tobit2Bootstrap: return "tobit2-bootstrap";
  }
  return "unknown";
}

CoverageModel parse_coverage_model(std::string_view name) {
  for (auto m : {CoverageModel::Tobit1, CoverageModel::Tobit3Beta1, CoverageModel::Tobit3Beta2,
                 CoverageModel::Tobit2Bootstrap}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown coverage model '" + std::string(name) + "'");
}

Interval binomial_band(int trials, double prob, double conf) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "binomial band: trials must be positive");
  const boost::math::binomial_distribution<> dist(trials, prob);
  const double tail = 0.5 * (1.0 - conf);
  int lo = 0;
  while (lo < trials && boost::math::cdf(dist, lo) < tail) ++lo;
  int hi = lo;
  while (hi < trials && boost::math::cdf(dist, hi) < 1.0 - tail) ++hi;
  return {static_cast<double>(lo) / trials, static_cast<double>(hi) / trials};
}

Interval clopper_pearson(int hits, int trials, double conf) {
  using boost::math::binomial_distribution;
  if (trials < 1) return {0.0, 1.0};
  const double tail = 0.5 * (1.0 - conf);
  return {binomial_distribution<>::find_lower_bound_on_p(trials, hits, tail),
          binomial_distribution<>::find_upper_bound_on_p(trials, hits, tail)};
}

namespace {

void fill_from_context(CoverageRecord& rec, const PivotContext& ctx, double alpha) {
  rec.estimate = ctx.eta_y;
  rec.corrected = invert_interval(ctx, alpha);
  rec.naive = normal_interval(ctx, alpha);
  rec.v_minus = ctx.v_minus;
  rec.v_plus = ctx.v_plus;
}

TargetSource source_for(const Eigen::MatrixXd& X, const Eigen::VectorXd& y1, const std::vector<Eigen::Index>& rows) {
  TargetSource src;
  src.X_bar = X(rows, Eigen::all);
  src.y1_bar = y1(rows);
  return src;
}

CoverageRecord run_replication(const SimDesign& design, const CoverageOptions& opt, int r) {
  CoverageRecord rec;
  rec.index = r;
  Rng rng = Rng::stream(design.seed, static_cast<std::uint64_t>(r));
  const Eigen::Index j = opt.coefficient;
  try {
    switch (opt.model) {
      case CoverageModel::Tobit1: {
        const auto sample = gen_tobit1(design, rng);
        const auto rows = positive_rows(sample.data.y);
        rec.n_selected = static_cast<Eigen::Index>(rows.size());
        rec.truth = sample.beta[j];
        TargetSource src = source_for(sample.data.X, sample.data.y, rows);
        src.sigma1_2 = design.sigma2;
        try {
          const auto fit = fit_tobit1(sample.data);
          if (opt.plug_in) src.sigma1_2 = fit.require_sigma2();
        } catch (const Error& e) {
          rec.fit_failed = true;
          rec.error = std::string(to_string(e.code()));
          if (opt.plug_in) throw;
        }
        fill_from_context(rec, target_eta(TargetKind::Tobit1Beta, src, j).context(), opt.alpha);
        break;
      }
      case CoverageModel::Tobit3Beta1:
      case CoverageModel::Tobit3Beta2: {
        const auto sample = gen_bivariate(design, rng);
        const auto data = sample.tobit3();
        const auto rows = positive_rows(data.y1);
        rec.n_selected = static_cast<Eigen::Index>(rows.size());
        const bool first = opt.model == CoverageModel::Tobit3Beta1;
        rec.truth = first ? sample.beta1[j] : sample.beta2[j];
        TargetSource src = source_for(first ? data.X1 : data.X2, data.y1, rows);
        src.y2_bar = data.y2(rows);
        src.sigma1_2 = design.sigma1_2;
        src.sigma12 = design.sigma12;
        src.sigma2_2 = design.sigma2_2;
        try {
          const auto fit = fit_tobit3(data);
          if (opt.plug_in) {
            src.sigma1_2 = fit.equation1.require_sigma2();
            if (!first) {
              src.sigma12 = fit.sigma12_hat();
              src.sigma2_2 = fit.equation2.require_sigma2();
            }
          }
        } catch (const Error& e) {
          rec.fit_failed = true;
          rec.error = std::string(to_string(e.code()));
          if (opt.plug_in) throw;
        }
        const auto kind = first ? TargetKind::Tobit3Beta1 : TargetKind::Tobit3Beta2;
        fill_from_context(rec, target_eta(kind, src, j).context(), opt.alpha);
        break;
      }
      case CoverageModel::Tobit2Bootstrap: {
        const auto sample = gen_bivariate(design, rng);
        const auto data = sample.tobit2();
        const auto rows = positive_rows(sample.y1_star);
        rec.n_selected = static_cast<Eigen::Index>(rows.size());
        rec.truth = sample.beta2[j];
        TwoStepFit fit;
        try {
          fit = fit_tobit2(data);
        } catch (const Error&) {
          rec.fit_failed = true;
          throw;
        }
        // Normal interval from least squares of y2_bar on X2_bar, ignoring selection.
        const Eigen::MatrixXd X2_bar = data.X2(rows, Eigen::all);
        const Eigen::VectorXd eta = pseudo_inverse_transpose(X2_bar).col(j);
        const double s2 = opt.plug_in ? fit.require_sigma2() : design.sigma2_2;
        const auto naive_ctx = PivotContext::scalar(eta.dot(data.y2(rows)), s2 * eta.squaredNorm(), -kInf, kInf);
        rec.naive = normal_interval(naive_ctx, opt.alpha);

        BootstrapConfig cfg;
        cfg.replications = opt.bootstrap_replications;
        cfg.seed = rng.engine()();
        cfg.level = 1.0 - opt.alpha;
        cfg.method = opt.bootstrap_method;
        const auto boot = bootstrap_tobit2(data, fit, j, cfg);
        rec.estimate = boot.estimate;
        rec.corrected = {boot.lower, boot.upper};
        rec.v_minus = -kInf;
        rec.v_plus = kInf;
        break;
      }
    }
  } catch (const Error& e) {
    rec.excluded = true;
    rec.error = std::string(to_string(e.code())) + ": " + e.what();
    return rec;
  }
  rec.corrected_covers = rec.corrected.contains(rec.truth);
  rec.naive_covers = rec.naive.contains(rec.truth);
  return rec;
}

}  // namespace

CoverageReport coverage_experiment(const SimDesign& design, const CoverageOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "coverage: alpha must lie in (0, 1)");
  }
  if (options.model == CoverageModel::Tobit1) {
    design.validate_tobit1();
    require(options.coefficient >= 0 && options.coefficient < design.p, "coefficient index out of range");
  } else {
    design.validate_bivariate();
    const Eigen::Index p = options.model == CoverageModel::Tobit3Beta1 ? design.p1 : design.p2;
    require(options.coefficient >= 0 && options.coefficient < p, "coefficient index out of range");
  }
  if (options.model == CoverageModel::Tobit2Bootstrap) {
    BootstrapConfig probe;
    probe.replications = options.bootstrap_replications;
    probe.level = 1.0 - options.alpha;
    probe.validate();
  }

  CoverageReport report;
  report.model = options.model;
  report.alpha = options.alpha;
  report.requested = design.replications;
  report.records.resize(static_cast<std::size_t>(design.replications));
  detail::parallel_for(report.records.size(), design.threads, [&](std::size_t r) {
    report.records[r] = run_replication(design, options, static_cast<int>(r));
  });

  std::vector<double> corrected_widths, naive_widths;
  for (const auto& rec : report.records) {
    if (rec.fit_failed) ++report.fit_failures;
    if (rec.excluded) {
      ++report.excluded;
      continue;
    }
    ++report.used;
    report.corrected_hits += rec.corrected_covers;
    report.naive_hits += rec.naive_covers;
    corrected_widths.push_back(rec.corrected.width());
    naive_widths.push_back(rec.naive.width());
  }
  if (report.excluded > options.max_excluded_fraction * report.requested) {
    throw Error(ErrorCode::TooManyFailures, "coverage: " + std::to_string(report.excluded) + " of " +
                                                std::to_string(report.requested) + " replications failed");
  }
  if (report.used > 0) {
    report.corrected_coverage = static_cast<double>(report.corrected_hits) / report.used;
    report.naive_coverage = static_cast<double>(report.naive_hits) / report.used;
    report.corrected_ci = clopper_pearson(report.corrected_hits, report.used);
    report.naive_ci = clopper_pearson(report.naive_hits, report.used);
    report.nominal_band = binomial_band(report.used, 1.0 - options.alpha);
  }
  report.corrected_median_width = median(corrected_widths);
  report.naive_median_width = median(naive_widths);
  return report;
}

std::vector<WidthRow> interval_width_curve(double sigma, double lo, double hi, const std::vector<double>& grid,
                                           double alpha) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "width curve: sigma must be positive");
  if (!(lo < hi)) throw Error(ErrorCode::DegenerateTruncation, "width curve: need lo < hi");
  std::vector<WidthRow> rows;
  rows.reserve(grid.size());
  for (double x : grid) {
    if (x < lo || x > hi) {
      throw Error(ErrorCode::InvalidArgument, "width curve: grid point outside the truncation region");
    }
    const auto ctx = PivotContext::scalar(x * sigma, sigma * sigma, lo * sigma, hi * sigma);
    rows.push_back({x, invert_interval(ctx, alpha), normal_interval(ctx, alpha)});
  }
  return rows;
}

}  // namespace censreg

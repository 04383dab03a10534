#include "run.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include <censreg/least_squares.hpp>
#include <censreg/normal_dist.hpp>
#include <censreg/polyhedral_pivot.hpp>
#include <censreg/simulate.hpp>

namespace censreg::cli {

using nlohmann::json;

namespace {

constexpr Command kCommands[] = {Command::Fit,           Command::Infer,    Command::Simulate,
                                 Command::ValidatePivot, Command::Coverage, Command::WidthCurve};

[[noreturn]] void usage(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }

// JSON has no infinities; spell them as strings and NaN as null.
json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

json interval(const Interval& iv) { return {{"lower", num(iv.lower)}, {"upper", num(iv.upper)}}; }

std::vector<Eigen::Index> positive_rows(const Eigen::VectorXd& y) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) rows.push_back(i);
  }
  return rows;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) usage("cannot open '" + path + "' for writing");
  f << text;
  if (!f.flush()) usage("failed writing '" + path + "'");
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line + '\n';
}

std::string header_names(const std::string& prefix, Eigen::Index count) {
  std::string out;
  for (Eigen::Index k = 1; k <= count; ++k) out += ',' + prefix + std::to_string(k);
  return out;
}

std::string row_cells(const Eigen::MatrixXd& X, Eigen::Index i) {
  std::string out;
  for (Eigen::Index k = 0; k < X.cols(); ++k) out += ',' + format_number(X(i, k));
  return out;
}

// ---------------------------------------------------------------------------
// fit

json selection_json(const TwoStepFit& f, const std::vector<std::string>& names) {
  return {{"covariates", names},
          {"alpha_hat", vec(f.alpha_hat)},
          {"loglik", num(f.probit.loglik)},
          {"iterations", f.probit.iterations},
          {"converged", f.probit.converged},
          {"gradient_norm", num(f.probit.gradient_norm)}};
}

json equation_json(const TwoStepFit& f, int equation, const std::vector<std::string>& names) {
  return {{"equation", equation},
          {"covariates", names},
          {"beta_hat", vec(f.beta_hat())},
          {"scale_hat", num(f.scale_hat())},
          {"sigma2_hat", num(f.sigma2_hat)},
          {"variance_positive", f.variance_positive},
          {"n_selected", f.selected_rows.size()},
          {"normal_equation_residual", num(f.normal_equation_residual())}};
}

// A fit as the inference step needs it: one or two equations sharing a probit.
struct Fitted {
  TwoStepFit first;  // tobit1/aft and tobit2: the only equation; tobit3: equation 1
  TwoStepFit second;  // tobit3 equation 2
};

Fitted fit_dataset(const Dataset& ds) {
  switch (ds.model) {
    case Model::Tobit1:
    case Model::Aft: return {fit_tobit1(ds.tobit1), {}};
    case Model::Tobit2: return {fit_tobit2(ds.tobit2), {}};
    case Model::Tobit3: {
      auto f = fit_tobit3(ds.tobit3);
      return {std::move(f.equation1), std::move(f.equation2)};
    }
  }
  return {};
}

json fit_json(const Dataset& ds, const Fitted& f) {
  json out = {{"command", "fit"}, {"model", to_string(ds.model)}, {"rows", ds.rows}, {"censored", ds.censored}};
  out["selection"] = selection_json(f.first, ds.x1_names);
  switch (ds.model) {
    case Model::Tobit1:
    case Model::Aft: out["equations"] = {equation_json(f.first, 1, ds.x1_names)}; break;
    case Model::Tobit2:
      out["equations"] = {equation_json(f.first, 2, ds.x2_names)};
      out["sigma12_hat"] = num(f.first.scale_hat());
      break;
    case Model::Tobit3:
      out["equations"] = {equation_json(f.first, 1, ds.x1_names), equation_json(f.second, 2, ds.x2_names)};
      out["sigma12_hat"] = f.first.variance_positive ? num(Tobit3Fit{f.first, f.second}.sigma12_hat()) : json();
      break;
  }
  return out;
}

// Reads back what `fit` wrote. Only the estimates survive; the inference step
// needs nothing else (Z_hat is kept at zero rows to carry p).
Fitted load_fit(const std::string& path, const Dataset& ds) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open fit file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  try {
    if (j.at("model").get<std::string>() != to_string(ds.model)) {
      throw Error(ErrorCode::InvariantViolation, "fit file '" + path + "' is for model " +
                                                     j.at("model").get<std::string>() + ", not " +
                                                     std::string(to_string(ds.model)));
    }
    const auto to_vec = [](const json& a) {
      Eigen::VectorXd v(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
      return v;
    };
    const Eigen::VectorXd alpha = to_vec(j.at("selection").at("alpha_hat"));
    if (alpha.size() != static_cast<Eigen::Index>(ds.x1_names.size())) {
      throw Error(ErrorCode::InvariantViolation, "fit file '" + path + "' has " + std::to_string(alpha.size()) +
                                                     " selection coefficients, data has " +
                                                     std::to_string(ds.x1_names.size()));
    }
    const auto equation = [&](const json& e, std::size_t p) {
      TwoStepFit f;
      f.alpha_hat = alpha;
      f.probit.alpha_hat = alpha;
      const Eigen::VectorXd beta = to_vec(e.at("beta_hat"));
      if (beta.size() != static_cast<Eigen::Index>(p)) {
        throw Error(ErrorCode::InvariantViolation,
                    "fit file '" + path + "' coefficient count does not match the data columns");
      }
      f.gamma_hat.resize(beta.size() + 1);
      f.gamma_hat << beta, e.at("scale_hat").get<double>();
      f.sigma2_hat = e.at("sigma2_hat").get<double>();
      f.variance_positive = e.at("variance_positive").get<bool>();
      f.Z_hat.resize(0, beta.size() + 1);
      return f;
    };
    const auto& eqs = j.at("equations");
    switch (ds.model) {
      case Model::Tobit1:
      case Model::Aft: return {equation(eqs.at(0), ds.x1_names.size()), {}};
      case Model::Tobit2: return {equation(eqs.at(0), ds.x2_names.size()), {}};
      case Model::Tobit3: return {equation(eqs.at(0), ds.x1_names.size()), equation(eqs.at(1), ds.x2_names.size())};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "fit file '" + path + "': " + e.what());
  }
  return {};
}

// ---------------------------------------------------------------------------
// infer

json conditional_record(const InferenceTarget& target, int equation, const std::string& name, double two_step,
                        double null_value, double alpha) {
  const auto ctx = target.context();
  const auto test = significance_test(ctx, null_value, alpha);
  return {{"equation", equation},
          {"coefficient", name},
          {"estimate", num(ctx.eta_y)},
          {"two_step_estimate", num(two_step)},
          {"corrected", interval({test.lower, test.upper})},
          {"corrected_p_value", num(test.p_value)},
          {"reject", test.reject},
          {"naive", interval(normal_interval(ctx, alpha))},
          {"naive_p_value", num(normal_p_value(ctx, null_value))},
          {"v_minus", num(ctx.v_minus)},
          {"v_plus", num(ctx.v_plus)},
          {"pivot", num(test.pivot_value)}};
}

json infer_json(const RunConfig& cfg, const Dataset& ds, const Fitted& f) {
  const double alpha = 1.0 - cfg.level;
  const bool known = cfg.sigma.has_value();
  json out = {{"command", "infer"},   {"model", to_string(ds.model)}, {"rows", ds.rows},
              {"censored", ds.censored}, {"level", cfg.level},        {"null_value", cfg.null_value}};
  json records = json::array();
  const auto wanted = [&](const std::string& name) { return cfg.coefficient.empty() || cfg.coefficient == name; };

  switch (ds.model) {
    case Model::Tobit1:
    case Model::Aft: {
      const double s2 = known ? *cfg.sigma * *cfg.sigma : f.first.require_sigma2();
      out["variance"] = {{"mode", known ? "known" : "plug-in"}, {"sigma2", num(s2)}};
      out["interval"] = "conditional";
      const auto rows = positive_rows(ds.tobit1.y);
      TargetSource src;
      src.X_bar = ds.tobit1.X(rows, Eigen::all);
      src.y1_bar = ds.tobit1.y(rows);
      src.sigma1_2 = s2;
      for (std::size_t j = 0; j < ds.x1_names.size(); ++j) {
        if (!wanted(ds.x1_names[j])) continue;
        const auto target = target_eta(TargetKind::Tobit1Beta, src, static_cast<Eigen::Index>(j));
        records.push_back(conditional_record(target, 1, ds.x1_names[j], f.first.gamma_hat[j], cfg.null_value, alpha));
      }
      break;
    }
    case Model::Tobit3: {
      const double s1 = known ? *cfg.sigma * *cfg.sigma : f.first.require_sigma2();
      const double s12 = known ? *cfg.sigma12 : Tobit3Fit{f.first, f.second}.sigma12_hat();
      const double s22 = known ? *cfg.sigma2 * *cfg.sigma2 : f.second.require_sigma2();
      out["variance"] = {
          {"mode", known ? "known" : "plug-in"}, {"sigma1_2", num(s1)}, {"sigma12", num(s12)}, {"sigma2_2", num(s22)}};
      out["interval"] = "conditional";
      const auto rows = positive_rows(ds.tobit3.y1);
      TargetSource src;
      src.y1_bar = ds.tobit3.y1(rows);
      src.y2_bar = ds.tobit3.y2(rows);
      src.sigma1_2 = s1;
      src.sigma12 = s12;
      src.sigma2_2 = s22;
      src.X_bar = ds.tobit3.X1(rows, Eigen::all);
      for (std::size_t j = 0; j < ds.x1_names.size(); ++j) {
        if (!wanted(ds.x1_names[j])) continue;
        const auto target = target_eta(TargetKind::Tobit3Beta1, src, static_cast<Eigen::Index>(j));
        records.push_back(conditional_record(target, 1, ds.x1_names[j], f.first.gamma_hat[j], cfg.null_value, alpha));
      }
      src.X_bar = ds.tobit3.X2(rows, Eigen::all);
      for (std::size_t j = 0; j < ds.x2_names.size(); ++j) {
        if (!wanted(ds.x2_names[j])) continue;
        const auto target = target_eta(TargetKind::Tobit3Beta2, src, static_cast<Eigen::Index>(j));
        records.push_back(conditional_record(target, 2, ds.x2_names[j], f.second.gamma_hat[j], cfg.null_value, alpha));
      }
      break;
    }
    case Model::Tobit2: {
      const double s22 = f.first.require_sigma2();
      out["variance"] = {{"mode", "plug-in"}, {"sigma2_2", num(s22)}, {"sigma12", num(f.first.scale_hat())}};
      const bool bc = cfg.bootstrap_method == BootstrapMethod::BiasCorrected;
      out["interval"] = bc ? "bootstrap-bias-corrected" : "bootstrap-percentile";
      out["bootstrap"] = {{"replications", cfg.bootstrap}, {"seed", cfg.seed}};
      BootstrapConfig bcfg;
      bcfg.replications = cfg.bootstrap;
      bcfg.seed = cfg.seed;
      bcfg.level = cfg.level;
      bcfg.method = cfg.bootstrap_method;
      bcfg.threads = cfg.threads;

      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < ds.tobit2.z.size(); ++i) {
        if (ds.tobit2.z[i]) rows.push_back(static_cast<Eigen::Index>(i));
      }
      const Eigen::MatrixXd X2_bar = ds.tobit2.X2(rows, Eigen::all);
      const Eigen::VectorXd y2_bar = ds.tobit2.y2(rows);
      const Eigen::MatrixXd directions = pseudo_inverse_transpose(X2_bar);
      for (std::size_t j = 0; j < ds.x2_names.size(); ++j) {
        if (!wanted(ds.x2_names[j])) continue;
        const Eigen::VectorXd eta = directions.col(static_cast<Eigen::Index>(j));
        const auto naive_ctx = PivotContext::scalar(eta.dot(y2_bar), s22 * eta.squaredNorm(), -kInf, kInf);
        const auto boot = bootstrap_tobit2(ds.tobit2, f.first, static_cast<Eigen::Index>(j), bcfg);
        records.push_back({{"equation", 2},
                           {"coefficient", ds.x2_names[j]},
                           {"estimate", num(boot.estimate)},
                           {"two_step_estimate", num(boot.estimate)},
                           {"corrected", interval({boot.lower, boot.upper})},
                           {"corrected_p_value", nullptr},
                           {"reject", nullptr},
                           {"naive", interval(normal_interval(naive_ctx, alpha))},
                           {"naive_p_value", num(normal_p_value(naive_ctx, cfg.null_value))},
                           {"v_minus", nullptr},
                           {"v_plus", nullptr},
                           {"pivot", nullptr},
                           {"bootstrap_z0", num(boot.bias_correction_z0)},
                           {"bootstrap_failures", boot.failures}});
      }
      break;
    }
  }
  if (records.empty()) usage("no covariate named '" + cfg.coefficient + "'");
  out["records"] = std::move(records);
  return out;
}

// ---------------------------------------------------------------------------
// simulation drivers

SimDesign design_from(const RunConfig& cfg) {
  SimDesign d;
  d.n = cfg.n;
  d.p = cfg.p;
  d.p1 = cfg.p1.value_or(cfg.p);
  d.p2 = cfg.p2.value_or(cfg.p);
  const double s = cfg.sigma.value_or(1.0);
  d.sigma2 = s * s;
  d.sigma1_2 = s * s;
  d.sigma2_2 = cfg.sigma2 ? *cfg.sigma2 * *cfg.sigma2 : 1.0;
  d.sigma12 = cfg.sigma12.value_or(0.5);
  d.signal_scale = cfg.signal_scale;
  d.seed = cfg.seed;
  d.replications = cfg.replications;
  d.threads = cfg.threads;
  return d;
}

json design_json(const SimDesign& d, Model model) {
  json out = {{"n", d.n}, {"signal_scale", d.signal_scale}, {"seed", d.seed}};
  if (model == Model::Tobit1) {
    out["p"] = d.p;
    out["sigma2"] = d.sigma2;
  } else {
    out["p1"] = d.p1;
    out["p2"] = d.p2;
    out["sigma1_2"] = d.sigma1_2;
    out["sigma12"] = d.sigma12;
    out["sigma2_2"] = d.sigma2_2;
  }
  return out;
}

json simulate(const RunConfig& cfg, std::string& csv) {
  const SimDesign d = design_from(cfg);
  Rng rng(cfg.seed);
  json out = {{"command", "simulate"}, {"model", to_string(cfg.model)}, {"design", design_json(d, cfg.model)}};
  std::size_t censored = 0;
  if (cfg.model == Model::Tobit1) {
    const auto s = gen_tobit1(d, rng);
    csv = "y" + header_names("x", d.p) + '\n';
    for (Eigen::Index i = 0; i < d.n; ++i) {
      csv += format_number(s.data.y[i]) + row_cells(s.data.X, i) + '\n';
      censored += s.data.y[i] == 0.0;
    }
    out["beta"] = vec(s.beta);
  } else {
    const auto s = gen_bivariate(d, rng);
    const bool type3 = cfg.model == Model::Tobit3;
    csv = std::string(type3 ? "y1" : "z") + ",y2" + header_names("x1_", d.p1) + header_names("x2_", d.p2) + '\n';
    for (Eigen::Index i = 0; i < d.n; ++i) {
      const bool selected = s.y1_star[i] > 0.0;
      censored += !selected;
      const std::string first = type3 ? format_number(selected ? s.y1_star[i] : 0.0) : (selected ? "1" : "0");
      const std::string second =
          selected ? format_number(s.y2_star[i]) : (type3 ? format_number(0.0) : std::string("NA"));
      csv += first + ',' + second + row_cells(s.X1, i) + row_cells(s.X2, i) + '\n';
    }
    out["beta1"] = vec(s.beta1);
    out["beta2"] = vec(s.beta2);
  }
  out["censored"] = censored;
  return out;
}

json validate_pivot(const RunConfig& cfg, std::string& csv) {
  const SimDesign d = design_from(cfg);
  const auto rep = pivot_uniformity_experiment(d, cfg.draws, 0, cfg.shift);
  csv = "draw,pivot\n";
  for (Eigen::Index k = 0; k < rep.pivots.size(); ++k) {
    csv += std::to_string(k) + ',' + format_number(rep.pivots[k]) + '\n';
  }
  return {{"command", "validate-pivot"},
          {"model", "tobit1"},
          {"design", design_json(d, Model::Tobit1)},
          {"draws", rep.ks.count},
          {"coefficient", rep.coefficient},
          {"n_selected", rep.selected_rows.size()},
          {"mu_target", num(rep.mu_target)},
          {"shift_sd", rep.shift_sd},
          {"ks_statistic", num(rep.ks.statistic)},
          {"critical_value", num(rep.ks.critical_value)},
          {"ks_level", 0.01},
          {"pass", rep.ks.pass}};
}

json coverage(const RunConfig& cfg, std::string& csv) {
  const SimDesign d = design_from(cfg);
  CoverageOptions o;
  switch (cfg.model) {
    case Model::Tobit1: o.model = CoverageModel::Tobit1; break;
    case Model::Tobit3: o.model = cfg.equation == 1 ? CoverageModel::Tobit3Beta1 : CoverageModel::Tobit3Beta2; break;
    case Model::Tobit2: o.model = CoverageModel::Tobit2Bootstrap; break;
    case Model::Aft: usage("coverage does not support model aft");
  }
  o.alpha = 1.0 - cfg.level;
  o.plug_in = cfg.plug_in;
  o.bootstrap_replications = cfg.bootstrap;
  o.bootstrap_method = cfg.bootstrap_method;
  const auto rep = coverage_experiment(d, o);

  csv = "replication,excluded,fit_failed,n_selected,truth,estimate,corrected_lower,corrected_upper,"
        "naive_lower,naive_upper,v_minus,v_plus,corrected_covers,naive_covers,error\n";
  for (const auto& r : rep.records) {
    csv += csv_row({std::to_string(r.index), r.excluded ? "1" : "0", r.fit_failed ? "1" : "0",
                    std::to_string(r.n_selected), format_number(r.truth), format_number(r.estimate),
                    format_number(r.corrected.lower), format_number(r.corrected.upper), format_number(r.naive.lower),
                    format_number(r.naive.upper), format_number(r.v_minus), format_number(r.v_plus),
                    r.corrected_covers ? "1" : "0", r.naive_covers ? "1" : "0", r.error});
  }
  const double ratio = rep.corrected_median_width / rep.naive_median_width;
  json out = {{"command", "coverage"},
              {"model", to_string(rep.model)},
              {"design", design_json(d, cfg.model == Model::Tobit1 ? Model::Tobit1 : Model::Tobit3)},
              {"level", cfg.level},
              {"variance", cfg.plug_in ? "plug-in" : "known"},
              {"coefficient", 0},
              {"requested", rep.requested},
              {"used", rep.used},
              {"excluded", rep.excluded},
              {"fit_failures", rep.fit_failures},
              {"corrected_coverage", num(rep.corrected_coverage)},
              {"corrected_ci99", interval(rep.corrected_ci)},
              {"naive_coverage", num(rep.naive_coverage)},
              {"naive_ci99", interval(rep.naive_ci)},
              {"nominal_band99", interval(rep.nominal_band)},
              {"corrected_in_band", rep.corrected_in_band()},
              {"corrected_median_width", num(rep.corrected_median_width)},
              {"naive_median_width", num(rep.naive_median_width)},
              {"median_width_ratio", num(ratio)}};
  if (o.model == CoverageModel::Tobit2Bootstrap) {
    out["bootstrap"] = {{"replications", cfg.bootstrap},
                        {"method", cfg.bootstrap_method == BootstrapMethod::BiasCorrected ? "bias-corrected"
                                                                                          : "percentile"}};
  }
  return out;
}

json width_curve(const RunConfig& cfg, std::string& csv) {
  const double sigma = cfg.sigma.value_or(1.0);
  std::vector<double> grid;
  const auto steps = static_cast<long>(std::floor((cfg.grid_to - cfg.grid_from) / cfg.grid_step + 1e-9));
  for (long k = 0; k <= steps; ++k) grid.push_back(cfg.grid_from + static_cast<double>(k) * cfg.grid_step);
  const auto rows = interval_width_curve(sigma, cfg.lower_trunc, cfg.upper_trunc, grid, 1.0 - cfg.level);

  csv = "x,corrected_lower,corrected_upper,normal_lower,normal_upper,width_ratio\n";
  json table = json::array();
  for (const auto& r : rows) {
    csv += csv_row({format_number(r.x), format_number(r.corrected.lower), format_number(r.corrected.upper),
                    format_number(r.normal.lower), format_number(r.normal.upper), format_number(r.ratio())});
    table.push_back({{"x", num(r.x)},
                     {"corrected", interval(r.corrected)},
                     {"normal", interval(r.normal)},
                     {"width_ratio", num(r.ratio())}});
  }
  return {{"command", "width-curve"},
          {"sigma", sigma},
          {"truncation", {{"lower", num(cfg.lower_trunc)}, {"upper", num(cfg.upper_trunc)}}},
          {"level", cfg.level},
          {"rows", std::move(table)}};
}

Dataset load_input(const RunConfig& cfg, std::ostream& err) {
  auto ds = load_csv(cfg.input_path, cfg.model);
  err << "read " << ds.rows << " rows (" << ds.censored << " censored) from " << cfg.input_path << '\n';
  return ds;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Fit: return "fit";
    case Command::Infer: return "infer";
    case Command::Simulate: return "simulate";
    case Command::ValidatePivot: return "validate-pivot";
    case Command::Coverage: return "coverage";
    case Command::WidthCurve: return "width-curve";
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (auto c : kCommands) {
    if (name == to_string(c)) return c;
  }
  usage("unknown command '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (!(level > 0.0 && level < 1.0)) usage("--level must lie strictly between 0 and 1");
  for (const auto& [value, flag] : {std::pair{sigma, "--sigma"}, std::pair{sigma2, "--sigma2"}}) {
    if (value && !(*value > 0.0 && std::isfinite(*value))) usage(std::string(flag) + " must be positive");
  }
  if (sigma12 && !std::isfinite(*sigma12)) usage("--sigma12 must be finite");
  if (threads > 1024) usage("--threads is unreasonably large");

  const bool needs_input = command == Command::Fit || command == Command::Infer;
  if (needs_input && input_path.empty()) usage(std::string(to_string(command)) + " needs --input");
  if (!needs_input && !input_path.empty()) usage(std::string(to_string(command)) + " takes no --input");
  if (!fit_path.empty() && command != Command::Infer) usage("--fit applies to infer only");

  switch (command) {
    case Command::Fit: break;
    case Command::Infer:
      if (model == Model::Tobit2) {
        // routed to the parametric bootstrap, which always uses the fitted variances
        if (sigma || sigma2 || sigma12) usage("tobit2 inference is by bootstrap; --sigma* do not apply");
        if (bootstrap < 100) usage("--bootstrap must be at least 100");
      } else if (model == Model::Tobit3) {
        if ((sigma || sigma2 || sigma12) && !(sigma && sigma2 && sigma12)) {
          usage("known-variance tobit3 inference needs all of --sigma, --sigma2 and --sigma12");
        }
      } else if (sigma2 || sigma12) {
        usage("--sigma2 and --sigma12 apply to tobit3 only");
      }
      break;
    case Command::Simulate:
      if (model == Model::Aft) usage("simulate supports tobit1, tobit2 and tobit3");
      if (csv_path.empty()) usage("simulate needs --csv for the generated data");
      break;
    case Command::ValidatePivot:
      if (model != Model::Tobit1) usage("validate-pivot supports tobit1 only");
      if (draws < 1) usage("--draws must be positive");
      break;
    case Command::Coverage:
      if (model == Model::Aft) usage("coverage supports tobit1, tobit2 and tobit3");
      if (replications < 1) usage("--replications must be positive");
      if (equation != 1 && equation != 2) usage("--equation must be 1 or 2");
      if (model == Model::Tobit2 && bootstrap < 100) usage("--bootstrap must be at least 100");
      break;
    case Command::WidthCurve:
      if (!(grid_step > 0.0) || !(grid_to >= grid_from)) usage("width-curve grid needs --from <= --to and --step > 0");
      if ((grid_to - grid_from) / grid_step > 1e6) usage("width-curve grid has too many points");
      if (!(lower_trunc < upper_trunc)) usage("--lower must be below --upper");
      break;
  }
  if (command == Command::Simulate || command == Command::ValidatePivot || command == Command::Coverage) {
    if (n < 1 || p < 1 || (p1 && *p1 < 1) || (p2 && *p2 < 1)) usage("--n and --p must be positive");
    if (!(signal_scale >= 0.0 && std::isfinite(signal_scale))) usage("--signal-scale must be nonnegative");
  }
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return 2;
    case ErrorCode::ParseError:
    case ErrorCode::InvariantViolation:
    case ErrorCode::AllSameLabel:
    case ErrorCode::TooFewUncensored:
    case ErrorCode::InfeasibleObservation: return 3;
    default: return 4;
  }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto report = [&err](std::string_view code, const std::string& message, int status) {
    err << json{{"error", {{"code", code}, {"message", message}, {"exit_code", status}}}}.dump() << '\n';
    return status;
  };
  try {
    config.validate();
    json result;
    std::string csv;
    switch (config.command) {
      case Command::Fit: {
        const auto ds = load_input(config, err);
        result = fit_json(ds, fit_dataset(ds));
        break;
      }
      case Command::Infer: {
        const auto ds = load_input(config, err);
        const auto fitted = config.fit_path.empty() ? fit_dataset(ds) : load_fit(config.fit_path, ds);
        result = infer_json(config, ds, fitted);
        break;
      }
      case Command::Simulate: result = simulate(config, csv); break;
      case Command::ValidatePivot: result = validate_pivot(config, csv); break;
      case Command::Coverage: result = coverage(config, csv); break;
      case Command::WidthCurve: result = width_curve(config, csv); break;
    }
    const std::string text = result.dump(config.json_pretty ? 2 : -1) + '\n';
    if (!config.csv_path.empty()) write_text(config.csv_path, csv);
    if (config.output_path.empty()) {
      out << text;
    } else {
      write_text(config.output_path, text);
    }
    return 0;
  } catch (const Error& e) {
    return report(censreg::to_string(e.code()), e.what(), exit_code(e.code()));
  } catch (const std::exception& e) {
    return report("Internal", e.what(), 4);
  }
}

}  // namespace censreg::cli

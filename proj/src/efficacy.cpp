#include "sme/efficacy.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/digamma.hpp>

#include "sme/simulci.hpp"
#include "sme/survival.hpp"

namespace sme {

namespace {

const double kLog2 = std::log(2.0);

double cell_median(const ModelParams& p, ArmGroupLabel label) {
  return p.lambda *
         std::pow(kLog2 / p.relative_hazard(label), 1.0 / p.k);
}

double cell_mean(const ModelParams& p, ArmGroupLabel label) {
  return p.lambda * std::tgamma(1.0 + 1.0 / p.k) *
         std::pow(p.relative_hazard(label), -1.0 / p.k);
}

// Covariate vector (trt, marker, trt*marker) for a cell.
Eigen::Vector3d cell_covariates(ArmGroupLabel label) {
  double trt = label.arm == Arm::treatment ? 1.0 : 0.0;
  double m = label.group == Marker::g_plus ? 1.0 : 0.0;
  return {trt, m, trt * m};
}

// Analytic gradient row for an explicit cell summary of the form
// value = exp(eta0 + c(k) - lin/k); shape_term = d c(k) / d log k + lin/k.
Eigen::Matrix<double, 1, 5> cell_row(double value, double shape_term,
                                     const Eigen::Vector3d& x, double k) {
  Eigen::Matrix<double, 1, 5> row;
  row(0) = value;
  row(1) = value * shape_term;
  row.tail<3>() = (-value / k) * x.transpose();
  return row;
}

}  // namespace

CellSummaries subgroup_medians(const ModelParams& params) {
  params.validate();
  return {cell_median(params, {Arm::treatment, Marker::g_plus}),
          cell_median(params, {Arm::control, Marker::g_plus}),
          cell_median(params, {Arm::treatment, Marker::g_minus}),
          cell_median(params, {Arm::control, Marker::g_minus})};
}

CellSummaries subgroup_means(const ModelParams& params) {
  params.validate();
  return {cell_mean(params, {Arm::treatment, Marker::g_plus}),
          cell_mean(params, {Arm::control, Marker::g_plus}),
          cell_mean(params, {Arm::treatment, Marker::g_minus}),
          cell_mean(params, {Arm::control, Marker::g_minus})};
}

double mixture_quantile(const ModelParams& params, const MixtureSpec& mix,
                        Arm arm, double p, double tol) {
  params.validate();
  mix.validate();
  if (!(p > 0.0 && p < 1.0))
    throw domain_error("mixture_quantile: p must lie in (0,1)");
  if (!(tol > 0.0)) throw domain_error("mixture_quantile: tol must be positive");

  // Component quantiles bracket the mixture quantile. Zero-weight components
  // do not constrain the root and are left out, so a degenerate mixture
  // returns its single component's quantile exactly.
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& c : mix.components) {
    if (c.weight == 0.0) continue;
    double theta = params.relative_hazard({arm, c.group});
    double t = params.lambda * std::pow(-std::log(p) / theta, 1.0 / params.k);
    if (first) {
      lo = hi = t;
      first = false;
    } else {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (hi - lo <= tol * std::max(1.0, hi)) return 0.5 * (lo + hi);

  auto f = [&](double t) { return mixture_survival(params, mix, arm, t) - p; };
  double fa = f(lo), fb = f(hi);
  if (fa < 0.0 || fb > 0.0)
    throw bracket_failure_error("mixture_quantile: component quantiles fail to bracket");

  // Illinois-damped regula falsi with a bisection fallback.
  double a = lo, b = hi;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double t;
    double denom = fb - fa;
    if (denom != 0.0) {
      t = a - fa * (b - a) / denom;
      if (!(t > a && t < b)) t = 0.5 * (a + b);
    } else {
      t = 0.5 * (a + b);
    }
    double ft = f(t);
    if (ft > 0.0) {
      a = t;
      fa = ft;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else if (ft < 0.0) {
      b = t;
      fb = ft;
      if (side == 1) fa *= 0.5;
      side = 1;
    } else {
      return t;
    }
    if (b - a <= tol * std::max(1.0, b)) break;
  }
  return 0.5 * (a + b);
}

double mixture_median(const ModelParams& params, const MixtureSpec& mix,
                      Arm arm, double tol) {
  return mixture_quantile(params, mix, arm, 0.5, tol);
}

double mixture_mean(const ModelParams& params, const MixtureSpec& mix, Arm arm) {
  params.validate();
  mix.validate();
  double mu = 0.0;
  for (const auto& c : mix.components)
    mu += c.weight * cell_mean(params, {arm, c.group});
  return mu;
}

Vector6 summary_vector(const ModelParams& params, const MixtureSpec& mix,
                       Summary summary) {
  Vector6 s;
  if (summary == Summary::median) {
    CellSummaries m = subgroup_medians(params);
    s << m.c_gminus, m.rx_gminus, m.c_gplus, m.rx_gplus,
        mixture_median(params, mix, Arm::control, 1e-12),
        mixture_median(params, mix, Arm::treatment, 1e-12);
  } else {
    CellSummaries m = subgroup_means(params);
    s << m.c_gminus, m.rx_gminus, m.c_gplus, m.rx_gplus,
        mixture_mean(params, mix, Arm::control),
        mixture_mean(params, mix, Arm::treatment);
  }
  return s;
}

Matrix6x5 median_gradients(const ModelParams& params, const MixtureSpec& mix) {
  params.validate();
  mix.validate();
  Matrix6x5 jac;
  const double k = params.k;

  const ArmGroupLabel cells[4] = {{Arm::control, Marker::g_minus},
                                  {Arm::treatment, Marker::g_minus},
                                  {Arm::control, Marker::g_plus},
                                  {Arm::treatment, Marker::g_plus}};
  for (int i = 0; i < 4; ++i) {
    double nu = cell_median(params, cells[i]);
    // d log nu / d log k = -log(nu/lambda)
    double shape_term = -std::log(nu / params.lambda);
    jac.row(i) = cell_row(nu, shape_term, cell_covariates(cells[i]), k);
  }

  // Implicit rows: F(t, eta) = sum_i w_i exp(-theta_i (t/lambda)^k) - 1/2 = 0.
  const Arm arms[2] = {Arm::control, Arm::treatment};
  for (int a = 0; a < 2; ++a) {
    double nu = mixture_median(params, mix, arms[a], 1e-12);
    double w = std::log(nu / params.lambda);
    double z = std::exp(k * w);
    double weighted_sum = 0.0;              // sum w_i theta_i S_i
    Eigen::Vector3d covariate_sum = Eigen::Vector3d::Zero();  // sum w_i theta_i x_ij S_i
    for (const auto& c : mix.components) {
      ArmGroupLabel label{arms[a], c.group};
      double theta = params.relative_hazard(label);
      double s = std::exp(-theta * z);
      weighted_sum += c.weight * theta * s;
      covariate_sum += c.weight * theta * s * cell_covariates(label);
    }
    // dF/dt = -(k z / t) A, dF/deta0 = k z A, dF/dlogk = -k w z A,
    // dF/dbeta_j = -z B_j  =>  implicit-function quotients below.
    jac(4 + a, 0) = nu;
    jac(4 + a, 1) = -nu * w;
    jac.row(4 + a).tail<3>() =
        (-(nu / k) / weighted_sum) * covariate_sum.transpose();
  }
  return jac;
}

Matrix6x5 mean_gradients(const ModelParams& params, const MixtureSpec& mix) {
  params.validate();
  mix.validate();
  Matrix6x5 jac;
  const double k = params.k;
  const double psi = boost::math::digamma(1.0 + 1.0 / k);

  const ArmGroupLabel cells[4] = {{Arm::control, Marker::g_minus},
                                  {Arm::treatment, Marker::g_minus},
                                  {Arm::control, Marker::g_plus},
                                  {Arm::treatment, Marker::g_plus}};
  Eigen::Matrix<double, 4, 5> cell_rows;
  for (int i = 0; i < 4; ++i) {
    double mu = cell_mean(params, cells[i]);
    double lin = params.log_relative_hazard(cells[i]);
    // d log mu / d log k = (lin - psi(1+1/k)) / k
    double shape_term = (lin - psi) / k;
    cell_rows.row(i) = cell_row(mu, shape_term, cell_covariates(cells[i]), k);
    jac.row(i) = cell_rows.row(i);
  }

  const Arm arms[2] = {Arm::control, Arm::treatment};
  for (int a = 0; a < 2; ++a) {
    Eigen::Matrix<double, 1, 5> row = Eigen::Matrix<double, 1, 5>::Zero();
    for (const auto& c : mix.components) {
      int idx = (c.group == Marker::g_plus ? 2 : 0) + a;
      row += c.weight * cell_rows.row(idx);
    }
    jac.row(4 + a) = row;
  }
  return jac;
}

std::array<double, 3> linear_mix_efficacy(double mu_rx_gplus,
                                          double mu_rx_gminus,
                                          double mu_c_gplus, double mu_c_gminus,
                                          double prevalence) {
  if (!(prevalence > 0.0 && prevalence < 1.0))
    throw domain_error("linear_mix_efficacy: prevalence must lie in (0,1)");
  double eff_minus = mu_rx_gminus - mu_c_gminus;
  double eff_plus = mu_rx_gplus - mu_c_gplus;
  double eff_mix = prevalence * eff_plus + (1.0 - prevalence) * eff_minus;
  return {eff_minus, eff_plus, eff_mix};
}

std::array<double, 3> true_efficacy(const ModelParams& params,
                                    double prevalence, Measure measure,
                                    Summary summary) {
  MixtureSpec mix = MixtureSpec::two_group(prevalence);
  Vector6 s = summary_vector(params, mix, summary);
  std::array<double, 3> out;
  for (int g = 0; g < 3; ++g) {
    double c = s[2 * g], rx = s[2 * g + 1];
    out[g] = measure == Measure::difference ? rx - c : rx / c;
  }
  return out;
}

EfficacyReport efficacy(const FitResult& fit, double prevalence,
                        Measure measure, Summary summary, Scale scale,
                        double alpha, const QuantileOptions& opts) {
  if (!fit.converged)
    throw not_converged_error("efficacy: fit did not converge");
  if (scale == Scale::log_scale && measure != Measure::ratio)
    throw domain_error("efficacy: log scale applies to ratio measures only");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw domain_error("efficacy: alpha must lie in (0,1)");

  const ModelParams& p = fit.params;
  MixtureSpec mix = MixtureSpec::two_group(prevalence);

  Vector6 s = summary_vector(p, mix, summary);
  Matrix6x5 jac = summary == Summary::median ? median_gradients(p, mix)
                                             : mean_gradients(p, mix);
  Eigen::Matrix<double, 6, 6> cov6 = jac * fit.cov * jac.transpose();

  // Second delta step onto the three contrasts, on the working scale.
  Eigen::Vector3d work_point;
  Eigen::Matrix<double, 3, 6> d = Eigen::Matrix<double, 3, 6>::Zero();
  for (int g = 0; g < 3; ++g) {
    double c = s[2 * g], rx = s[2 * g + 1];
    switch (measure) {
      case Measure::difference:
        work_point[g] = rx - c;
        d(g, 2 * g) = -1.0;
        d(g, 2 * g + 1) = 1.0;
        break;
      case Measure::ratio:
        if (scale == Scale::log_scale) {
          work_point[g] = std::log(rx) - std::log(c);
          d(g, 2 * g) = -1.0 / c;
          d(g, 2 * g + 1) = 1.0 / rx;
        } else {
          work_point[g] = rx / c;
          d(g, 2 * g) = -rx / (c * c);
          d(g, 2 * g + 1) = 1.0 / c;
        }
        break;
    }
  }
  Eigen::Matrix3d cov3 = d * cov6 * d.transpose();

  Eigen::Vector3d se;
  for (int g = 0; g < 3; ++g) se[g] = std::sqrt(std::max(cov3(g, g), 0.0));

  Eigen::Matrix3d corr = Eigen::Matrix3d::Identity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      double denom = se[i] * se[j];
      corr(i, j) = denom > 0.0 ? std::clamp(cov3(i, j) / denom, -1.0, 1.0) : 0.0;
    }
  corr = 0.5 * (corr + corr.transpose());

  QuantileResult q =
      equicoordinate_quantile(corr, 1.0 - alpha, opts.seed, opts.n_samples);

  EfficacyReport report;
  report.corr = corr;
  report.critical_value = q.value;
  report.critical_value_mc_se = q.mc_se;
  report.alpha = alpha;
  report.prevalence = prevalence;
  report.measure = measure;
  report.summary = summary;
  report.scale = scale;

  const Group groups[3] = {Group::g_minus, Group::g_plus, Group::mixture};
  for (int g = 0; g < 3; ++g) {
    EfficacyEstimate& e = report.estimates[g];
    e.group = groups[g];
    e.measure = measure;
    e.summary = summary;
    e.scale = scale;
    e.se = se[g];
    double lo = work_point[g] - q.value * se[g];
    double hi = work_point[g] + q.value * se[g];
    if (measure == Measure::ratio && scale == Scale::log_scale) {
      e.point = std::exp(work_point[g]);
      e.sci_low = std::exp(lo);
      e.sci_high = std::exp(hi);
    } else {
      e.point = work_point[g];
      e.sci_low = lo;
      e.sci_high = hi;
    }
    double null_value = measure == Measure::difference ? 0.0 : 1.0;
    e.significant = e.sci_low > null_value || e.sci_high < null_value;
  }

  // Per-arm summaries for reporting and M&M plots.
  CellSummaries med = subgroup_medians(p);
  CellSummaries mean = subgroup_means(p);
  report.control = {Arm::control,
                    med.c_gminus,
                    med.c_gplus,
                    mixture_median(p, mix, Arm::control, 1e-12),
                    mean.c_gminus,
                    mean.c_gplus,
                    mixture_mean(p, mix, Arm::control)};
  report.treatment = {Arm::treatment,
                      med.rx_gminus,
                      med.rx_gplus,
                      mixture_median(p, mix, Arm::treatment, 1e-12),
                      mean.rx_gminus,
                      mean.rx_gplus,
                      mixture_mean(p, mix, Arm::treatment)};
  return report;
}

}  // namespace sme

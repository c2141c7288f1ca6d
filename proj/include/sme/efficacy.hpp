#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "sme/likelihood.hpp"
#include "sme/model.hpp"

namespace sme {

enum class Measure { difference, ratio };
enum class Summary { median, mean };
enum class Scale { natural, log_scale };
enum class Group { g_minus, g_plus, mixture };

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6x5 = Eigen::Matrix<double, 6, 5>;

/// Closed-form per-cell summaries of the Weibull-PH model.
struct CellSummaries {
  double rx_gplus = 0.0;
  double c_gplus = 0.0;
  double rx_gminus = 0.0;
  double c_gminus = 0.0;
};

/// Median survival per cell: lambda (log2 / theta)^(1/k).
CellSummaries subgroup_medians(const ModelParams& params);

/// Mean survival per cell: lambda Gamma(1+1/k) theta^(-1/k).
CellSummaries subgroup_means(const ModelParams& params);

/// The unique t with mixture_survival(t) = p, bracketed by the component
/// quantiles and refined by Illinois-damped secant/bisection to relative
/// tolerance tol.
double mixture_quantile(const ModelParams& params, const MixtureSpec& mix,
                        Arm arm, double p, double tol = 1e-10);

/// Mixture median, the p = 0.5 quantile.
double mixture_median(const ModelParams& params, const MixtureSpec& mix,
                      Arm arm, double tol = 1e-10);

/// Prevalence-weighted mixture mean for one arm (exact, no root finding).
double mixture_mean(const ModelParams& params, const MixtureSpec& mix, Arm arm);

/// The six per-arm summaries in the fixed order
/// (C g-, Rx g-, C g+, Rx g+, C mixture, Rx mixture).
Vector6 summary_vector(const ModelParams& params, const MixtureSpec& mix,
                       Summary summary);

/// Jacobian of the six medians with respect to
/// eta = (log lambda, log k, beta1, beta2, beta3). Subgroup rows are
/// analytic; mixture rows use the implicit-function rule on the
/// half-survival equation, evaluated at the solved median.
Matrix6x5 median_gradients(const ModelParams& params, const MixtureSpec& mix);

/// Same for means; fully analytic (digamma term for the shape derivative).
Matrix6x5 mean_gradients(const ModelParams& params, const MixtureSpec& mix);

struct ArmSummary {
  Arm arm = Arm::control;
  double median_gminus = 0.0, median_gplus = 0.0, median_mixture = 0.0;
  double mean_gminus = 0.0, mean_gplus = 0.0, mean_mixture = 0.0;
};

/// One efficacy contrast (Rx vs C) for a group. For ratio on the log scale
/// the standard error refers to the log ratio and the interval bounds are
/// back-transformed, so they are always positive; point estimates are on the
/// natural scale in every case.
struct EfficacyEstimate {
  Group group = Group::g_minus;
  Measure measure = Measure::difference;
  Summary summary = Summary::median;
  Scale scale = Scale::natural;
  double point = 0.0;
  double se = 0.0;
  double sci_low = 0.0;
  double sci_high = 0.0;
  bool significant = false;
};

struct EfficacyReport {
  std::array<EfficacyEstimate, 3> estimates;  // g-, g+, mixture
  Eigen::Matrix3d corr = Eigen::Matrix3d::Identity();
  double critical_value = 0.0;
  double critical_value_mc_se = 0.0;
  double alpha = 0.05;
  double prevalence = 0.5;
  Measure measure = Measure::difference;
  Summary summary = Summary::median;
  Scale scale = Scale::natural;
  ArmSummary control, treatment;
};

struct QuantileOptions {
  std::uint64_t seed = 42;
  std::size_t n_samples = 2'000'000;
};

/// The full pipeline on a converged fit: per-arm subgroup and mixture
/// summaries, delta-method propagation of the fit covariance through the
/// summary Jacobian, efficacy contrasts with a second delta step (on the log
/// scale for scale=log_scale), and simultaneous (1-alpha) intervals using the
/// equicoordinate critical value for the estimated 3x3 correlation.
EfficacyReport efficacy(const FitResult& fit, double prevalence,
                        Measure measure, Summary summary, Scale scale,
                        double alpha = 0.05, const QuantileOptions& opts = {});

/// Efficacy of the mixture under a linear response scale: the mixture
/// difference is exactly the prevalence-weighted average of the subgroup
/// differences. Returns (g-, g+, mixture).
std::array<double, 3> linear_mix_efficacy(double mu_rx_gplus,
                                          double mu_rx_gminus,
                                          double mu_c_gplus,
                                          double mu_c_gminus,
                                          double prevalence);

/// True efficacy values (g-, g+, mixture) implied by known parameters;
/// medians root-solved, means closed-form.
std::array<double, 3> true_efficacy(const ModelParams& params,
                                    double prevalence, Measure measure,
                                    Summary summary);

}  // namespace sme

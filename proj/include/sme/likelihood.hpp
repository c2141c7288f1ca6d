#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sme/model.hpp"

namespace sme {

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;

/// One subject: follow-up time (same units as lambda), event indicator
/// (1 = event observed, 0 = right-censored), arm and marker flags.
struct SubjectRecord {
  double time = 0.0;
  int event = 0;
  int trt = 0;
  int marker = 0;

  void validate() const {
    if (!(time > 0.0) || !std::isfinite(time))
      throw domain_error("SubjectRecord: time must be positive and finite");
    if (event != 0 && event != 1)
      throw domain_error("SubjectRecord: event must be 0 or 1");
    if (trt != 0 && trt != 1)
      throw domain_error("SubjectRecord: trt must be 0 or 1");
    if (marker != 0 && marker != 1)
      throw domain_error("SubjectRecord: marker must be 0 or 1");
  }
};

/// Maximum-likelihood fit. The covariance refers to the unconstrained
/// optimization coordinates eta = (log lambda, log k, beta1, beta2, beta3);
/// eta_jacobian() gives the transform to (lambda, k, beta) scale.
struct FitResult {
  ModelParams params;
  Matrix5 cov = Matrix5::Zero();
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;

  Vector5 eta() const {
    Vector5 v;
    v << std::log(params.lambda), std::log(params.k), params.beta1,
        params.beta2, params.beta3;
    return v;
  }

  /// d(lambda,k,beta)/d(eta), for reporting covariance on the natural scale.
  Matrix5 eta_jacobian() const {
    Matrix5 j = Matrix5::Identity();
    j(0, 0) = params.lambda;
    j(1, 1) = params.k;
    return j;
  }
};

/// Censored Weibull-PH log likelihood
/// sum_i [event_i log h(t_i) + log S(t_i)].
double log_likelihood(std::span<const SubjectRecord> data,
                      const ModelParams& params);

/// Analytic gradient of log_likelihood in eta coordinates.
Vector5 log_likelihood_gradient(std::span<const SubjectRecord> data,
                                const ModelParams& params);

/// Negative Hessian of log_likelihood in eta coordinates, by central finite
/// differences of the analytic gradient; symmetrized.
Matrix5 observed_information(std::span<const SubjectRecord> data,
                             const ModelParams& params);

/// Quasi-Newton (BFGS) maximization of the censored log likelihood over eta.
/// Requires at least one event in each (trt, marker) cell; throws
/// non_identifiable_error naming the empty cell otherwise. converged is set
/// iff the gradient sup-norm drops below tol within max_iter; the covariance
/// (inverse observed information) is computed only for converged fits and
/// singular_information_error is thrown when the information is not positive
/// definite there.
FitResult fit_mle(std::span<const SubjectRecord> data,
                  std::optional<ModelParams> init = std::nullopt,
                  double tol = 1e-8, int max_iter = 200);

}  // namespace sme

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sme/errors.hpp"

namespace sme {

enum class Arm { control, treatment };
enum class Marker { g_minus, g_plus };

struct ArmGroupLabel {
  Arm arm;
  Marker group;
};

/// The five parameters of the Weibull proportional-hazards model:
/// baseline Weibull scale/shape plus the treatment, marker and
/// treatment-by-marker log-hazard-ratio coefficients. The reference cell
/// is (control, g_minus).
struct ModelParams {
  double lambda = 1.0;  // Weibull scale, in time units (e.g. weeks)
  double k = 1.0;       // Weibull shape
  double beta1 = 0.0;   // treatment
  double beta2 = 0.0;   // marker
  double beta3 = 0.0;   // treatment x marker

  double theta1() const { return std::exp(beta1); }
  double theta2() const { return std::exp(beta2); }
  double theta3() const { return std::exp(beta3); }

  /// Linear predictor beta1*Trt + beta2*M + beta3*Trt*M for a cell.
  double log_relative_hazard(ArmGroupLabel label) const {
    double trt = label.arm == Arm::treatment ? 1.0 : 0.0;
    double m = label.group == Marker::g_plus ? 1.0 : 0.0;
    return beta1 * trt + beta2 * m + beta3 * trt * m;
  }

  /// Hazard multiplier theta for a cell: 1, theta1, theta2, theta1*theta2*theta3.
  double relative_hazard(ArmGroupLabel label) const {
    return std::exp(log_relative_hazard(label));
  }

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw domain_error("ModelParams: lambda must be positive and finite");
    if (!(k > 0.0) || !std::isfinite(k))
      throw domain_error("ModelParams: k must be positive and finite");
    if (!std::isfinite(beta1) || !std::isfinite(beta2) || !std::isfinite(beta3))
      throw domain_error("ModelParams: betas must be finite");
  }
};

struct MixtureComponent {
  Marker group;
  double weight;
};

/// A prevalence-weighted mixture of marker subgroups. The common two-group
/// case has components {(g_minus, 1-gamma_plus), (g_plus, gamma_plus)};
/// m >= 2 components are accepted so combined groups can be evaluated
/// without changing the fitted model.
struct MixtureSpec {
  std::vector<MixtureComponent> components;

  static MixtureSpec two_group(double gamma_plus) {
    if (!(gamma_plus > 0.0 && gamma_plus < 1.0))
      throw domain_error("MixtureSpec: prevalence must lie in (0,1)");
    return MixtureSpec{{{Marker::g_minus, 1.0 - gamma_plus},
                        {Marker::g_plus, gamma_plus}}};
  }

  /// Degenerate zero weights are tolerated so a mixture can collapse onto a
  /// single subgroup; the sum constraint is what matters.
  void validate() const {
    if (components.size() < 2)
      throw domain_error("MixtureSpec: at least two components required");
    double sum = 0.0;
    bool any_positive = false;
    for (const auto& c : components) {
      if (!(c.weight >= 0.0))
        throw domain_error("MixtureSpec: weights must be non-negative");
      any_positive = any_positive || c.weight > 0.0;
      sum += c.weight;
    }
    if (!any_positive)
      throw domain_error("MixtureSpec: at least one weight must be positive");
    if (std::abs(sum - 1.0) > 1e-12)
      throw domain_error("MixtureSpec: weights must sum to 1 within 1e-12");
  }
};

}  // namespace sme

#include "sme/survival.hpp"

#include <cmath>
#include <limits>

namespace sme {

namespace {

constexpr double kTailFloor = 1e-300;

void check_time(double t) {
  if (!(t >= 0.0))
    throw domain_error("time must be non-negative and finite");
}

}  // namespace

double subgroup_survival(const ModelParams& params, ArmGroupLabel label, double t) {
  params.validate();
  check_time(t);
  double z = std::pow(t / params.lambda, params.k);
  return std::exp(-params.relative_hazard(label) * z);
}

double subgroup_hazard(const ModelParams& params, ArmGroupLabel label, double t) {
  params.validate();
  check_time(t);
  double theta = params.relative_hazard(label);
  if (t == 0.0) {
    if (params.k > 1.0) return 0.0;
    if (params.k == 1.0) return theta / params.lambda;
    return std::numeric_limits<double>::infinity();
  }
  return theta * (params.k / params.lambda) *
         std::pow(t / params.lambda, params.k - 1.0);
}

double subgroup_density(const ModelParams& params, ArmGroupLabel label, double t) {
  double h = subgroup_hazard(params, label, t);
  if (std::isinf(h)) return h;  // k<1 integrable singularity at 0
  return h * subgroup_survival(params, label, t);
}

double mixture_survival(const ModelParams& params, const MixtureSpec& mix,
                        Arm arm, double t) {
  mix.validate();
  double s = 0.0;
  for (const auto& c : mix.components)
    s += c.weight * subgroup_survival(params, {arm, c.group}, t);
  return s;
}

double mixture_density(const ModelParams& params, const MixtureSpec& mix,
                       Arm arm, double t) {
  mix.validate();
  double f = 0.0;
  for (const auto& c : mix.components)
    f += c.weight * subgroup_density(params, {arm, c.group}, t);
  return f;
}

double mixture_hazard_ratio(const ModelParams& params, const MixtureSpec& mix,
                            double t) {
  if (!(t > 0.0))
    throw domain_error("mixture_hazard_ratio: time must be positive");
  double s_rx = mixture_survival(params, mix, Arm::treatment, t);
  double s_c = mixture_survival(params, mix, Arm::control, t);
  if (s_rx < kTailFloor || s_c < kTailFloor)
    throw tail_underflow_error(
        "mixture_hazard_ratio: survival underflowed past the representable "
        "tail at t=" + std::to_string(t));
  double f_rx = mixture_density(params, mix, Arm::treatment, t);
  double f_c = mixture_density(params, mix, Arm::control, t);
  return (f_rx * s_c) / (f_c * s_rx);
}

double naive_hr_event_weighted(double hr_gplus, double hr_gminus,
                               long long d_plus, long long d_total) {
  if (!(hr_gplus > 0.0) || !(hr_gminus > 0.0))
    throw domain_error("naive_hr_event_weighted: hazard ratios must be positive");
  if (d_total <= 0 || d_plus < 0 || d_plus > d_total)
    throw domain_error("naive_hr_event_weighted: need 0 <= d_plus <= d_total, d_total > 0");
  double f_plus = static_cast<double>(d_plus) / static_cast<double>(d_total);
  if (d_plus == d_total) return hr_gplus;  // boundary weights stay exact
  if (d_plus == 0) return hr_gminus;
  return std::exp(f_plus * std::log(hr_gplus) +
                  (1.0 - f_plus) * std::log(hr_gminus));
}

double naive_hr_lsmeans(const ModelParams& params) {
  params.validate();
  return std::exp(params.beta1 + params.beta3 / 2.0);
}

}  // namespace sme

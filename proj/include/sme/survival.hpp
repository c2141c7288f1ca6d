#pragma once

#include "sme/model.hpp"

namespace sme {

/// Survival S(t) = exp(-theta (t/lambda)^k) for one (arm, marker) cell.
double subgroup_survival(const ModelParams& params, ArmGroupLabel label, double t);

/// Hazard theta (k/lambda) (t/lambda)^(k-1). At t = 0 this is 0 for k > 1,
/// theta/lambda for k = 1 and +infinity for k < 1.
double subgroup_hazard(const ModelParams& params, ArmGroupLabel label, double t);

/// Density f(t) = h(t) S(t).
double subgroup_density(const ModelParams& params, ArmGroupLabel label, double t);

/// Prevalence-weighted mixture survival for one arm.
double mixture_survival(const ModelParams& params, const MixtureSpec& mix,
                        Arm arm, double t);

/// Prevalence-weighted mixture density for one arm.
double mixture_density(const ModelParams& params, const MixtureSpec& mix,
                       Arm arm, double t);

/// The (generally time-varying) hazard ratio of the mixture population,
/// f_Rx(t) S_C(t) / (f_C(t) S_Rx(t)). Throws tail_underflow_error once either
/// arm's mixture survival underflows past 1e-300; the ratio of vanishing tails
/// is not representable and a silent NaN would be worse than a refusal.
double mixture_hazard_ratio(const ModelParams& params, const MixtureSpec& mix,
                            double t);

/// Event-weighted geometric mixing of subgroup hazard ratios,
/// exp(f+ log HR+ + (1-f+) log HR-) with f+ = d_plus/d_total.
/// This is an incorrect mixture-population estimator, kept as a baseline;
/// a mixture of proportional-hazards subgroups has no constant HR.
double naive_hr_event_weighted(double hr_gplus, double hr_gminus,
                               long long d_plus, long long d_total);

/// Equal-weight least-squares-means contrast exp(beta1 + beta3/2).
/// Also an incorrect constant-HR estimator, kept as a baseline. Equal 1/2
/// weights over the marker levels are the standard convention for a balanced
/// classification; sample-size weighting would give a different constant.
double naive_hr_lsmeans(const ModelParams& params);

}  // namespace sme

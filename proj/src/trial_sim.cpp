#include "sme/trial_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include "sme/rng.hpp"
#include "sme/survival.hpp"

namespace sme {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Adaptive Simpson quadrature.
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, m, fa, flm, fm);
  double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson(f, a, b, fa, fm, fb),
                          tol, 40);
}

struct RepResult {
  bool ok = false;
  std::array<double, 3> point{};
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
};

}  // namespace

void ScenarioConfig::validate() const {
  params.validate();
  if (!(prevalence > 0.0 && prevalence < 1.0))
    throw domain_error("ScenarioConfig: prevalence must lie in (0,1)");
  if (n_total < 8) throw domain_error("ScenarioConfig: n_total must be >= 8");
  if (!(allocation > 0.0 && allocation < 1.0))
    throw domain_error("ScenarioConfig: allocation must lie in (0,1)");
  if (!(censor_target >= 0.0 && censor_target <= 0.9))
    throw domain_error("ScenarioConfig: censor_target must lie in [0, 0.9]");
  if (reps < 1) throw domain_error("ScenarioConfig: reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw domain_error("ScenarioConfig: alpha must lie in (0,1)");
  if (scale == Scale::log_scale && measure != Measure::ratio)
    throw domain_error("ScenarioConfig: log scale applies to ratio measures only");
}

CensoringInterval calibrate_censoring(const ModelParams& params,
                                      double prevalence, double allocation,
                                      double censor_target, double tol) {
  params.validate();
  if (!(censor_target >= 0.0 && censor_target <= 0.9))
    throw domain_error("calibrate_censoring: target must lie in [0, 0.9]");
  if (!(tol > 0.0)) throw domain_error("calibrate_censoring: tol must be positive");
  if (censor_target == 0.0) return {0.0, kInf};

  MixtureSpec mix = MixtureSpec::two_group(prevalence);
  // Work in t/lambda units so the solved b scales exactly with lambda.
  ModelParams unit = params;
  unit.lambda = 1.0;
  auto survival_pop = [&](double tau) {
    return allocation * mixture_survival(unit, mix, Arm::treatment, tau) +
           (1.0 - allocation) * mixture_survival(unit, mix, Arm::control, tau);
  };
  auto censor_prob = [&](double b) {
    return integrate(survival_pop, 0.0, b, 1e-10 * std::max(1.0, b)) / b;
  };

  double hi = 1.0;
  while (censor_prob(hi) > censor_target) {
    hi *= 2.0;
    if (hi > 1e12)
      throw domain_error("calibrate_censoring: target unachievable");
  }
  double lo = 0.0;  // censoring probability tends to 1 as b -> 0
  for (int it = 0; it < 200; ++it) {
    double mid = lo == 0.0 ? 0.5 * hi : 0.5 * (lo + hi);
    double p = censor_prob(mid);
    if (std::abs(p - censor_target) <= tol) return {0.0, params.lambda * mid};
    if (p > censor_target)
      lo = mid;
    else
      hi = mid;
  }
  return {0.0, params.lambda * 0.5 * (lo + hi)};
}

namespace detail {

std::vector<SubjectRecord> generate_trial_with(const ScenarioConfig& config,
                                               std::uint64_t seed,
                                               const CensoringInterval& cens) {
  Rng rng(seed);
  std::vector<SubjectRecord> data;
  data.reserve(config.n_total);
  const ModelParams& p = config.params;
  for (int i = 0; i < config.n_total; ++i) {
    int marker = rng.bernoulli(config.prevalence) ? 1 : 0;
    int trt = rng.bernoulli(config.allocation) ? 1 : 0;
    ArmGroupLabel label{trt ? Arm::treatment : Arm::control,
                        marker ? Marker::g_plus : Marker::g_minus};
    double theta = p.relative_hazard(label);
    double t_event =
        p.lambda * std::pow(-std::log(rng.uniform01()) / theta, 1.0 / p.k);
    double time = t_event;
    int event = 1;
    if (!cens.none()) {
      double c = rng.uniform(cens.a, cens.b);
      if (c < t_event) {
        time = c;
        event = 0;
      }
    }
    data.push_back({time, event, trt, marker});
  }
  return data;
}

}  // namespace detail

std::vector<SubjectRecord> generate_trial(const ScenarioConfig& config,
                                          std::uint64_t seed) {
  config.validate();
  CensoringInterval cens{0.0, kInf};
  if (config.censor_target > 0.0)
    cens = calibrate_censoring(config.params, config.prevalence,
                               config.allocation, config.censor_target);
  return detail::generate_trial_with(config, seed, cens);
}

SimMetrics run_study(const ScenarioConfig& config) {
  config.validate();
  CensoringInterval cens{0.0, kInf};
  if (config.censor_target > 0.0)
    cens = calibrate_censoring(config.params, config.prevalence,
                               config.allocation, config.censor_target);
  std::array<double, 3> truth =
      true_efficacy(config.params, config.prevalence, config.measure,
                    config.summary);

  std::vector<RepResult> results(config.reps);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      int rep = next.fetch_add(1);
      if (rep >= config.reps) return;
      try {
        std::uint64_t data_seed = substream_seed(config.master_seed, 2 * rep);
        std::uint64_t ci_seed = substream_seed(config.master_seed, 2 * rep + 1);
        std::vector<SubjectRecord> data =
            detail::generate_trial_with(config, data_seed, cens);
        FitResult fit;
        try {
          fit = fit_mle(data);
        } catch (const error&) {
          continue;  // counted as a failed fit below
        }
        if (!fit.converged) continue;
        EfficacyReport report =
            efficacy(fit, config.prevalence, config.measure, config.summary,
                     config.scale, config.alpha, {ci_seed, config.ci_samples});
        RepResult& r = results[rep];
        for (int g = 0; g < 3; ++g) {
          r.point[g] = report.estimates[g].point;
          r.lo[g] = report.estimates[g].sci_low;
          r.hi[g] = report.estimates[g].sci_high;
        }
        r.ok = true;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  int n_workers = config.workers > 0
                      ? config.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min(n_workers, config.reps);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  SimMetrics metrics;
  metrics.truth = truth;
  int used = 0;
  int joint_covered = 0;
  std::array<double, 3> sum_point{}, sum_lo{}, sum_hi{};
  std::array<int, 3> covered{};
  for (const RepResult& r : results) {
    if (!r.ok) continue;
    ++used;
    bool all = true;
    for (int g = 0; g < 3; ++g) {
      sum_point[g] += r.point[g];
      sum_lo[g] += r.lo[g];
      sum_hi[g] += r.hi[g];
      bool in = truth[g] >= r.lo[g] && truth[g] <= r.hi[g];
      covered[g] += in;
      all = all && in;
    }
    joint_covered += all;
  }
  metrics.reps_used = used;
  metrics.n_failed_fits = config.reps - used;
  if (used > 0) {
    for (int g = 0; g < 3; ++g) {
      metrics.groups[g].bias = sum_point[g] / used - truth[g];
      metrics.groups[g].avg_sci_low = sum_lo[g] / used;
      metrics.groups[g].avg_sci_high = sum_hi[g] / used;
      metrics.groups[g].coverage_marginal = static_cast<double>(covered[g]) / used;
    }
    metrics.coverage_joint = static_cast<double>(joint_covered) / used;
  }
  return metrics;
}

}  // namespace sme

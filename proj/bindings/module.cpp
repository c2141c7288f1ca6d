#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sme/binary_rr.hpp"
#include "sme/efficacy.hpp"
#include "sme/json_io.hpp"
#include "sme/likelihood.hpp"
#include "sme/mmplot.hpp"
#include "sme/simulci.hpp"
#include "sme/survival.hpp"
#include "sme/trial_sim.hpp"

namespace py = pybind11;
using namespace sme;

namespace {

std::vector<SubjectRecord> records_from_arrays(const std::vector<double>& time,
                                               const std::vector<int>& event,
                                               const std::vector<int>& trt,
                                               const std::vector<int>& marker) {
  size_t n = time.size();
  if (event.size() != n || trt.size() != n || marker.size() != n)
    throw domain_error("fit_arrays: columns must have equal length");
  std::vector<SubjectRecord> data(n);
  for (size_t i = 0; i < n; ++i)
    data[i] = {time[i], event[i], trt[i], marker[i]};
  return data;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Subgroup-mixable efficacy estimation: Weibull PH survival core, "
            "censored MLE, delta-method simultaneous CIs, binary relative-risk "
            "mixing, trial simulation and M&M plots.";

  py::register_exception<error>(m, "SmeError");

  py::enum_<Arm>(m, "Arm")
      .value("control", Arm::control)
      .value("treatment", Arm::treatment);
  py::enum_<Marker>(m, "Marker")
      .value("g_minus", Marker::g_minus)
      .value("g_plus", Marker::g_plus);
  py::enum_<Group>(m, "Group")
      .value("g_minus", Group::g_minus)
      .value("g_plus", Group::g_plus)
      .value("mixture", Group::mixture);
  py::enum_<Measure>(m, "Measure")
      .value("difference", Measure::difference)
      .value("ratio", Measure::ratio);
  py::enum_<Summary>(m, "Summary")
      .value("median", Summary::median)
      .value("mean", Summary::mean);
  py::enum_<Scale>(m, "Scale")
      .value("natural", Scale::natural)
      .value("log", Scale::log_scale);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double lambda, double k, double beta1, double beta2,
                       double beta3) {
             ModelParams p{lambda, k, beta1, beta2, beta3};
             p.validate();
             return p;
           }),
           py::arg("lambda_"), py::arg("k"), py::arg("beta1") = 0.0,
           py::arg("beta2") = 0.0, py::arg("beta3") = 0.0)
      .def_readwrite("lambda_", &ModelParams::lambda)
      .def_readwrite("k", &ModelParams::k)
      .def_readwrite("beta1", &ModelParams::beta1)
      .def_readwrite("beta2", &ModelParams::beta2)
      .def_readwrite("beta3", &ModelParams::beta3)
      .def("theta1", &ModelParams::theta1)
      .def("theta2", &ModelParams::theta2)
      .def("theta3", &ModelParams::theta3);

  py::class_<ArmGroupLabel>(m, "ArmGroupLabel")
      .def(py::init<Arm, Marker>(), py::arg("arm"), py::arg("group"))
      .def_readwrite("arm", &ArmGroupLabel::arm)
      .def_readwrite("group", &ArmGroupLabel::group);

  py::class_<MixtureComponent>(m, "MixtureComponent")
      .def(py::init<Marker, double>(), py::arg("group"), py::arg("weight"))
      .def_readwrite("group", &MixtureComponent::group)
      .def_readwrite("weight", &MixtureComponent::weight);

  py::class_<MixtureSpec>(m, "MixtureSpec")
      .def(py::init([](std::vector<MixtureComponent> cs) {
             MixtureSpec mix{std::move(cs)};
             mix.validate();
             return mix;
           }),
           py::arg("components"))
      .def_static("two_group", &MixtureSpec::two_group, py::arg("gamma_plus"))
      .def_readwrite("components", &MixtureSpec::components);

  m.def("subgroup_survival", &subgroup_survival);
  m.def("subgroup_hazard", &subgroup_hazard);
  m.def("subgroup_density", &subgroup_density);
  m.def("mixture_survival", &mixture_survival);
  m.def("mixture_density", &mixture_density);
  m.def("mixture_hazard_ratio", &mixture_hazard_ratio);
  m.def("naive_hr_event_weighted", &naive_hr_event_weighted,
        py::arg("hr_gplus"), py::arg("hr_gminus"), py::arg("d_plus"),
        py::arg("d_total"),
        "Event-weighted constant-HR baseline; incorrect for mixtures.");
  m.def("naive_hr_lsmeans", &naive_hr_lsmeans,
        "Equal-weight LSmeans constant-HR baseline; incorrect for mixtures.");

  py::class_<SubjectRecord>(m, "SubjectRecord")
      .def(py::init([](double time, int event, int trt, int marker) {
             SubjectRecord r{time, event, trt, marker};
             r.validate();
             return r;
           }),
           py::arg("time"), py::arg("event"), py::arg("trt"), py::arg("marker"))
      .def_readwrite("time", &SubjectRecord::time)
      .def_readwrite("event", &SubjectRecord::event)
      .def_readwrite("trt", &SubjectRecord::trt)
      .def_readwrite("marker", &SubjectRecord::marker);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("cov", &FitResult::cov)
      .def_readonly("loglik", &FitResult::loglik)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("gradient_norm", &FitResult::gradient_norm)
      .def("json", [](const FitResult& f) { return fit_result_to_json(f).dump(2); });

  m.def("log_likelihood",
        [](const std::vector<SubjectRecord>& data, const ModelParams& p) {
          return log_likelihood(data, p);
        });
  m.def("observed_information",
        [](const std::vector<SubjectRecord>& data, const ModelParams& p) {
          return Eigen::MatrixXd(observed_information(data, p));
        });
  m.def(
      "fit_mle",
      [](const std::vector<SubjectRecord>& data, double tol, int max_iter) {
        return fit_mle(data, std::nullopt, tol, max_iter);
      },
      py::arg("data"), py::arg("tol") = 1e-8, py::arg("max_iter") = 200);
  m.def(
      "fit_arrays",
      [](const std::vector<double>& time, const std::vector<int>& event,
         const std::vector<int>& trt, const std::vector<int>& marker,
         double tol, int max_iter) {
        return fit_mle(records_from_arrays(time, event, trt, marker),
                       std::nullopt, tol, max_iter);
      },
      py::arg("time"), py::arg("event"), py::arg("trt"), py::arg("marker"),
      py::arg("tol") = 1e-8, py::arg("max_iter") = 200);

  py::class_<CellSummaries>(m, "CellSummaries")
      .def_readonly("rx_gplus", &CellSummaries::rx_gplus)
      .def_readonly("c_gplus", &CellSummaries::c_gplus)
      .def_readonly("rx_gminus", &CellSummaries::rx_gminus)
      .def_readonly("c_gminus", &CellSummaries::c_gminus);

  m.def("subgroup_medians", &subgroup_medians);
  m.def("subgroup_means", &subgroup_means);
  m.def("mixture_median", &mixture_median, py::arg("params"), py::arg("mix"),
        py::arg("arm"), py::arg("tol") = 1e-10);
  m.def("mixture_quantile", &mixture_quantile, py::arg("params"), py::arg("mix"),
        py::arg("arm"), py::arg("p"), py::arg("tol") = 1e-10);
  m.def("mixture_mean", &mixture_mean);
  m.def("median_gradients",
        [](const ModelParams& p, const MixtureSpec& mix) {
          return Eigen::MatrixXd(median_gradients(p, mix));
        });
  m.def("mean_gradients", [](const ModelParams& p, const MixtureSpec& mix) {
    return Eigen::MatrixXd(mean_gradients(p, mix));
  });
  m.def("linear_mix_efficacy", &linear_mix_efficacy, py::arg("mu_rx_gplus"),
        py::arg("mu_rx_gminus"), py::arg("mu_c_gplus"), py::arg("mu_c_gminus"),
        py::arg("prevalence"));
  m.def("true_efficacy", &true_efficacy, py::arg("params"), py::arg("prevalence"),
        py::arg("measure"), py::arg("summary"));

  py::class_<ArmSummary>(m, "ArmSummary")
      .def_readonly("median_gminus", &ArmSummary::median_gminus)
      .def_readonly("median_gplus", &ArmSummary::median_gplus)
      .def_readonly("median_mixture", &ArmSummary::median_mixture)
      .def_readonly("mean_gminus", &ArmSummary::mean_gminus)
      .def_readonly("mean_gplus", &ArmSummary::mean_gplus)
      .def_readonly("mean_mixture", &ArmSummary::mean_mixture);

  py::class_<EfficacyEstimate>(m, "EfficacyEstimate")
      .def_readonly("group", &EfficacyEstimate::group)
      .def_readonly("point", &EfficacyEstimate::point)
      .def_readonly("se", &EfficacyEstimate::se)
      .def_readonly("sci_low", &EfficacyEstimate::sci_low)
      .def_readonly("sci_high", &EfficacyEstimate::sci_high)
      .def_readonly("significant", &EfficacyEstimate::significant);

  py::class_<EfficacyReport>(m, "EfficacyReport")
      .def_readonly("estimates", &EfficacyReport::estimates)
      .def_readonly("corr", &EfficacyReport::corr)
      .def_readonly("critical_value", &EfficacyReport::critical_value)
      .def_readonly("critical_value_mc_se", &EfficacyReport::critical_value_mc_se)
      .def_readonly("alpha", &EfficacyReport::alpha)
      .def_readonly("prevalence", &EfficacyReport::prevalence)
      .def_readonly("control", &EfficacyReport::control)
      .def_readonly("treatment", &EfficacyReport::treatment)
      .def("json",
           [](const EfficacyReport& r) { return efficacy_report_to_json(r).dump(2); });

  m.def(
      "efficacy",
      [](const FitResult& fit, double prevalence, Measure measure,
         Summary summary, Scale scale, double alpha, std::uint64_t seed,
         std::size_t n_samples) {
        return efficacy(fit, prevalence, measure, summary, scale, alpha,
                        {seed, n_samples});
      },
      py::arg("fit"), py::arg("prevalence"),
      py::arg("measure") = Measure::difference,
      py::arg("summary") = Summary::median, py::arg("scale") = Scale::natural,
      py::arg("alpha") = 0.05, py::arg("seed") = 42,
      py::arg("n_samples") = 2'000'000);

  py::class_<QuantileResult>(m, "QuantileResult")
      .def_readonly("value", &QuantileResult::value)
      .def_readonly("mc_se", &QuantileResult::mc_se)
      .def_readonly("clipped", &QuantileResult::clipped)
      .def_readonly("clamped", &QuantileResult::clamped);

  m.def("normal_quantile", &normal_quantile);
  m.def("sidak_quantile", &sidak_quantile);
  m.def("bonferroni_quantile", &bonferroni_quantile);
  m.def("equicoordinate_quantile", &equicoordinate_quantile, py::arg("corr"),
        py::arg("level"), py::arg("seed"), py::arg("n_samples") = 2'000'000);

  using DoubleTable = ResponseTable<double>;
  py::class_<DoubleTable>(m, "ResponseTable")
      .def_static("from_counts", &DoubleTable::from_counts,
                  py::arg("rx_gplus_r"), py::arg("rx_gplus_nr"),
                  py::arg("rx_gminus_r"), py::arg("rx_gminus_nr"),
                  py::arg("c_gplus_r"), py::arg("c_gplus_nr"),
                  py::arg("c_gminus_r"), py::arg("c_gminus_nr"))
      .def("gamma_plus", &DoubleTable::gamma_plus)
      .def("cells", &DoubleTable::cells);
  m.def("rr_subgroup", &rr_subgroup<double>);
  m.def("rr_overall", &rr_overall<double>);
  m.def("mix_rr_correct", &mix_rr_correct<double>, py::arg("rr_gplus"),
        py::arg("rr_gminus"), py::arg("control_responders_gplus"),
        py::arg("control_responders_gminus"));
  m.def("mix_rr_naive_prevalence", &mix_rr_naive_prevalence<double>,
        "Prevalence-weighted RR mix; incorrect estimator.");
  m.def("mix_rr_naive_log", &mix_rr_naive_log,
        "Prevalence-weighted log-RR mix; incorrect estimator.");
  m.def(
      "rr_report_json",
      [](const std::array<long long, 8>& counts) {
        return rr_report_to_json(make_rr_report(counts)).dump(2);
      },
      "Exact rational RR report for counts ordered rx+R, rx+NR, rx-R, rx-NR, "
      "c+R, c+NR, c-R, c-NR.");

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init([](const ModelParams& params, double prevalence, int n_total,
                       double allocation, double censor_target, int reps,
                       Measure measure, Summary summary, Scale scale,
                       double alpha, std::uint64_t master_seed, int workers,
                       std::size_t ci_samples) {
             ScenarioConfig c{params, prevalence, n_total, allocation,
                              censor_target, reps, measure, summary, scale,
                              alpha, master_seed, workers, ci_samples};
             c.validate();
             return c;
           }),
           py::arg("params"), py::arg("prevalence"), py::arg("n_total"),
           py::arg("allocation") = 0.5, py::arg("censor_target") = 0.0,
           py::arg("reps") = 1000, py::arg("measure") = Measure::difference,
           py::arg("summary") = Summary::median,
           py::arg("scale") = Scale::natural, py::arg("alpha") = 0.05,
           py::arg("master_seed") = 1, py::arg("workers") = 0,
           py::arg("ci_samples") = 2'000'000)
      .def_readwrite("params", &ScenarioConfig::params)
      .def_readwrite("reps", &ScenarioConfig::reps)
      .def_readwrite("master_seed", &ScenarioConfig::master_seed)
      .def_readwrite("workers", &ScenarioConfig::workers)
      .def_readwrite("ci_samples", &ScenarioConfig::ci_samples);

  py::class_<CensoringInterval>(m, "CensoringInterval")
      .def_readonly("a", &CensoringInterval::a)
      .def_readonly("b", &CensoringInterval::b)
      .def("none", &CensoringInterval::none);
  m.def("calibrate_censoring", &calibrate_censoring, py::arg("params"),
        py::arg("prevalence"), py::arg("allocation"), py::arg("censor_target"),
        py::arg("tol") = 1e-4);
  m.def("generate_trial", &generate_trial, py::arg("config"), py::arg("seed"));

  py::class_<GroupMetrics>(m, "GroupMetrics")
      .def_readonly("bias", &GroupMetrics::bias)
      .def_readonly("avg_sci_low", &GroupMetrics::avg_sci_low)
      .def_readonly("avg_sci_high", &GroupMetrics::avg_sci_high)
      .def_readonly("coverage_marginal", &GroupMetrics::coverage_marginal);
  py::class_<SimMetrics>(m, "SimMetrics")
      .def_readonly("groups", &SimMetrics::groups)
      .def_readonly("truth", &SimMetrics::truth)
      .def_readonly("coverage_joint", &SimMetrics::coverage_joint)
      .def_readonly("n_failed_fits", &SimMetrics::n_failed_fits)
      .def_readonly("reps_used", &SimMetrics::reps_used)
      .def("json", [](const SimMetrics& s) { return sim_metrics_to_json(s).dump(2); });
  m.def("run_study", &run_study, py::call_guard<py::gil_scoped_release>());

  m.def("perpendicular_offset", &perpendicular_offset);
  m.def("arc_angles_deg", &arc_angles_deg);
  m.def("render_mm_plot", [](const EfficacyReport& report) {
    return render_mm_plot(mmplot_spec_from_report(report));
  });

  m.attr("__version__") = "1.0.0";
}

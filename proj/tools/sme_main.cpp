#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sme/json_io.hpp"
#include "sme/mmplot.hpp"
#include "sme/simulci.hpp"
#include "sme/survival.hpp"
#include "sme/trial_sim.hpp"

namespace {

using sme::json;

struct AnalysisOptions {
  std::string input;
  std::string config_path;
  std::string measure = "diff";
  std::string summary = "median";
  std::string scale;  // empty = natural for diff, log for ratio
  double alpha = 0.05;
  double prevalence = -1.0;  // <0 = sample marker fraction
  std::uint64_t seed = 42;
  std::string json_out = "-";
  std::string svg_out;

  bool measure_set = false, summary_set = false, scale_set = false;
  bool alpha_set = false, prevalence_set = false, seed_set = false;
};

void add_common_options(CLI::App* cmd, AnalysisOptions& opt, bool needs_input) {
  auto* in = cmd->add_option("--input,-i", opt.input, "input file")
                 ->envname("SME_INPUT");
  if (needs_input) in->required();
  cmd->add_option("--config", opt.config_path, "JSON analysis config")
      ->envname("SME_CONFIG");
  cmd->add_option("--measure", opt.measure, "efficacy measure: diff or ratio")
      ->envname("SME_MEASURE")
      ->check(CLI::IsMember({"diff", "difference", "ratio"}));
  cmd->add_option("--summary", opt.summary, "per-arm summary: median or mean")
      ->envname("SME_SUMMARY")
      ->check(CLI::IsMember({"median", "mean"}));
  cmd->add_option("--scale", opt.scale,
                  "delta-method scale for ratios: natural or log (default log)")
      ->envname("SME_SCALE")
      ->check(CLI::IsMember({"natural", "log"}));
  cmd->add_option("--alpha", opt.alpha, "simultaneous error rate (default 0.05)")
      ->envname("SME_ALPHA");
  cmd->add_option("--prevalence", opt.prevalence,
                  "fixed g+ prevalence; defaults to the sample marker fraction")
      ->envname("SME_PREVALENCE");
  cmd->add_option("--seed", opt.seed, "seed for all randomized steps")
      ->envname("SME_SEED");
  cmd->add_option("--json-out", opt.json_out, "JSON output path ('-' = stdout)")
      ->envname("SME_JSON_OUT");
  cmd->add_option("--svg-out", opt.svg_out, "write an M&M plot SVG here")
      ->envname("SME_SVG_OUT");
}

// Fill in values from --config for options the user did not pass explicitly.
void apply_config(const CLI::App* cmd, AnalysisOptions& opt) {
  opt.measure_set = cmd->count("--measure") > 0;
  opt.summary_set = cmd->count("--summary") > 0;
  opt.scale_set = cmd->count("--scale") > 0;
  opt.alpha_set = cmd->count("--alpha") > 0;
  opt.prevalence_set = cmd->count("--prevalence") > 0;
  opt.seed_set = cmd->count("--seed") > 0;
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) throw sme::io_error("cannot open config '" + opt.config_path + "'");
  json cfg = json::parse(in, nullptr, true, true);
  if (opt.input.empty() && cfg.contains("input"))
    opt.input = cfg["input"].get<std::string>();
  if (!opt.measure_set && cfg.contains("measure"))
    opt.measure = cfg["measure"].get<std::string>();
  if (!opt.summary_set && cfg.contains("summary"))
    opt.summary = cfg["summary"].get<std::string>();
  if (!opt.scale_set && cfg.contains("scale"))
    opt.scale = cfg["scale"].get<std::string>();
  if (!opt.alpha_set && cfg.contains("alpha"))
    opt.alpha = cfg["alpha"].get<double>();
  if (!opt.prevalence_set && cfg.contains("prevalence"))
    opt.prevalence = cfg["prevalence"].get<double>();
  if (!opt.seed_set && cfg.contains("seed"))
    opt.seed = cfg["seed"].get<std::uint64_t>();
  if (opt.json_out == "-" && cfg.contains("json_out"))
    opt.json_out = cfg["json_out"].get<std::string>();
  if (opt.svg_out.empty() && cfg.contains("svg_out"))
    opt.svg_out = cfg["svg_out"].get<std::string>();
}

sme::Scale resolve_scale(const AnalysisOptions& opt, sme::Measure measure) {
  if (!opt.scale.empty()) return sme::parse_scale(opt.scale);
  return measure == sme::Measure::ratio ? sme::Scale::log_scale
                                        : sme::Scale::natural;
}

std::vector<sme::SubjectRecord> read_subjects(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sme::io_error("cannot open input '" + path + "'");
  std::vector<std::string> warnings;
  auto data = sme::parse_subject_csv(in, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return data;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sme::io_error("cannot open input '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw sme::io_error("JSON parse error in '" + path + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sme::io_error("cannot open output '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

double resolve_prevalence(const AnalysisOptions& opt,
                          const std::vector<sme::SubjectRecord>& data,
                          std::string* source) {
  if (opt.prevalence >= 0.0) {
    if (!(opt.prevalence > 0.0 && opt.prevalence < 1.0))
      throw sme::domain_error("prevalence must lie in (0,1)");
    *source = "fixed";
    return opt.prevalence;
  }
  long long plus = 0;
  for (const auto& r : data) plus += r.marker;
  if (plus == 0 || plus == static_cast<long long>(data.size()))
    throw sme::domain_error(
        "sample contains a single marker group; pass --prevalence explicitly");
  *source = "sample_fraction";
  return static_cast<double>(plus) / static_cast<double>(data.size());
}

int cmd_fit(const AnalysisOptions& opt) {
  auto data = read_subjects(opt.input);
  sme::FitResult fit = sme::fit_mle(data);
  json j = sme::fit_result_to_json(fit);
  j["n_records"] = data.size();
  write_json(opt.json_out, j);
  return fit.converged ? 0 : 3;
}

int cmd_efficacy(const AnalysisOptions& opt) {
  auto data = read_subjects(opt.input);
  sme::Measure measure = sme::parse_measure(opt.measure);
  sme::Summary summary = sme::parse_summary(opt.summary);
  sme::Scale scale = resolve_scale(opt, measure);
  std::string source;
  double prevalence = resolve_prevalence(opt, data, &source);
  sme::FitResult fit = sme::fit_mle(data);
  sme::EfficacyReport report =
      sme::efficacy(fit, prevalence, measure, summary, scale, opt.alpha,
                    {opt.seed, 2'000'000});
  json j = sme::efficacy_report_to_json(report);
  j["prevalence_source"] = source;
  write_json(opt.json_out, j);
  if (!opt.svg_out.empty())
    write_text(opt.svg_out, sme::render_mm_plot(sme::mmplot_spec_from_report(report)));
  return 0;
}

int cmd_simulate(const AnalysisOptions& opt) {
  json cfg_json = read_json_file(opt.input);
  sme::ScenarioConfig config = sme::scenario_config_from_json(cfg_json);
  if (opt.seed_set) config.master_seed = opt.seed;
  sme::SimMetrics metrics = sme::run_study(config);
  std::string table = sme::sim_metrics_table(metrics, config);
  json j = sme::sim_metrics_to_json(metrics);
  j["scenario"] = sme::scenario_config_to_json(config);
  if (opt.json_out == "-") {
    std::cerr << table;
    write_json("-", j);
  } else {
    std::cout << table;
    write_json(opt.json_out, j);
  }
  return 0;
}

int cmd_rr(const AnalysisOptions& opt) {
  std::array<long long, 8> counts;
  if (opt.input.size() > 4 && opt.input.substr(opt.input.size() - 4) == ".csv") {
    std::ifstream in(opt.input);
    if (!in) throw sme::io_error("cannot open input '" + opt.input + "'");
    counts = sme::parse_rr_counts_csv(in);
  } else {
    counts = sme::parse_rr_counts_json(read_json_file(opt.input));
  }
  sme::RrReport report = sme::make_rr_report(counts);
  write_json(opt.json_out, sme::rr_report_to_json(report));
  return 0;
}

int cmd_hr_curve(const AnalysisOptions& opt, double t_min, double t_max,
                 int t_count, double event_fraction,
                 const std::string& csv_out) {
  sme::ModelParams params = sme::model_params_from_json(read_json_file(opt.input));
  double gamma = opt.prevalence >= 0.0 ? opt.prevalence : 0.5;
  if (!(gamma > 0.0 && gamma < 1.0))
    throw sme::domain_error("prevalence must lie in (0,1)");
  sme::MixtureSpec mix = sme::MixtureSpec::two_group(gamma);
  if (!(t_min > 0.0) || !(t_max > t_min) || t_count < 2)
    throw sme::domain_error("hr-curve: need 0 < t-min < t-max and t-count >= 2");
  double f_plus = event_fraction >= 0.0 ? event_fraction : gamma;
  if (!(f_plus >= 0.0 && f_plus <= 1.0))
    throw sme::domain_error("hr-curve: event fraction must lie in [0,1]");

  double hr_gminus = std::exp(params.beta1);
  double hr_gplus = std::exp(params.beta1 + params.beta3);
  long long denom = 1'000'000;
  double naive5 = sme::naive_hr_event_weighted(
      hr_gplus, hr_gminus,
      static_cast<long long>(f_plus * static_cast<double>(denom)), denom);
  double naive6 = sme::naive_hr_lsmeans(params);

  std::cerr << "note: the naive_* columns are constant-HR approximations that "
               "are incorrect for a mixture population\n";
  std::ostringstream out;
  out << "t,mixture_hr,naive_hr_event_weighted,naive_hr_lsmeans\n";
  char buf[160];
  for (int i = 0; i < t_count; ++i) {
    double t = t_min + (t_max - t_min) * i / (t_count - 1);
    double hr = sme::mixture_hazard_ratio(params, mix, t);
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g\n", t, hr, naive5,
                  naive6);
    out << buf;
  }
  write_text(csv_out, out.str());
  if (opt.json_out != "-") {
    json j;
    j["schema_version"] = sme::kSchemaVersion;
    j["params"] = sme::model_params_to_json(params);
    j["prevalence"] = gamma;
    j["event_fraction"] = f_plus;
    j["naive_hr_event_weighted"] = {{"value", naive5}, {"incorrect_estimator", true}};
    j["naive_hr_lsmeans"] = {{"value", naive6},
                             {"incorrect_estimator", true},
                             {"lsmeans_weights", "equal"}};
    write_json(opt.json_out, j);
  }
  return 0;
}

int cmd_mmplot(const AnalysisOptions& opt) {
  sme::EfficacyReport report = sme::efficacy_report_from_json(read_json_file(opt.input));
  if (opt.svg_out.empty())
    throw sme::domain_error("mmplot: --svg-out is required");
  write_text(opt.svg_out, sme::render_mm_plot(sme::mmplot_spec_from_report(report)));
  return 0;
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const sme::non_identifiable_error*>(&e)) return "non_identifiable";
  if (dynamic_cast<const sme::not_converged_error*>(&e)) return "not_converged";
  if (dynamic_cast<const sme::singular_information_error*>(&e))
    return "singular_information";
  if (dynamic_cast<const sme::zero_denominator_error*>(&e)) return "zero_denominator";
  if (dynamic_cast<const sme::invalid_correlation_error*>(&e))
    return "invalid_correlation";
  if (dynamic_cast<const sme::bracket_failure_error*>(&e)) return "bracket_failure";
  if (dynamic_cast<const sme::tail_underflow_error*>(&e)) return "tail_underflow";
  if (dynamic_cast<const sme::io_error*>(&e)) return "io";
  if (dynamic_cast<const sme::domain_error*>(&e)) return "domain";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgroup-mixable efficacy estimation for time-to-event and "
               "binary outcomes"};
  app.require_subcommand(1);

  AnalysisOptions opt;
  auto* fit = app.add_subcommand("fit", "fit the Weibull PH model to subject CSV");
  add_common_options(fit, opt, true);
  auto* eff = app.add_subcommand(
      "efficacy", "fit and report subgroup/mixture efficacy with simultaneous CIs");
  add_common_options(eff, opt, true);
  auto* sim = app.add_subcommand("simulate", "run a simulation study from JSON config");
  add_common_options(sim, opt, true);
  auto* rr = app.add_subcommand("rr", "relative-risk mixing for an 8-cell count table");
  add_common_options(rr, opt, true);
  auto* hr = app.add_subcommand("hr-curve",
                                "mixture hazard-ratio curve with naive baselines");
  add_common_options(hr, opt, true);
  double t_min = 1.0, t_max = 120.0, event_fraction = -1.0;
  int t_count = 120;
  std::string csv_out = "-";
  hr->add_option("--t-min", t_min, "grid start (default 1)");
  hr->add_option("--t-max", t_max, "grid end (default 120)");
  hr->add_option("--t-count", t_count, "grid size (default 120)");
  hr->add_option("--event-fraction", event_fraction,
                 "f+ for the event-weighted baseline (default: prevalence)");
  hr->add_option("--csv-out", csv_out, "CSV output path ('-' = stdout)");
  auto* mm = app.add_subcommand("mmplot", "render an M&M plot from an efficacy report");
  add_common_options(mm, opt, true);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_config(active, opt);
    if (active == fit) return cmd_fit(opt);
    if (active == eff) return cmd_efficacy(opt);
    if (active == sim) return cmd_simulate(opt);
    if (active == rr) return cmd_rr(opt);
    if (active == hr)
      return cmd_hr_curve(opt, t_min, t_max, t_count, event_fraction, csv_out);
    if (active == mm) return cmd_mmplot(opt);
    return 2;
  } catch (const std::exception& e) {
    json err;
    err["schema_version"] = sme::kSchemaVersion;
    err["error"] = {{"type", error_kind(e)}, {"message", e.what()}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  }
}

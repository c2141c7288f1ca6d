#include "sme/json_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

namespace sme {

namespace {

void require_schema(const json& j) {
  if (!j.is_object()) throw io_error("JSON document must be an object");
  if (j.contains("schema_version") && j["schema_version"].get<int>() != kSchemaVersion)
    throw io_error("unsupported schema_version");
}

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void matrix_from_json(const json& j, Eigen::Ref<Eigen::MatrixXd> m) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows())
    throw io_error("matrix: wrong row count");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols())
      throw io_error("matrix: wrong column count");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = row[c].get<double>();
  }
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

json arm_summary_to_json(const ArmSummary& a) {
  return {{"median_gminus", a.median_gminus}, {"median_gplus", a.median_gplus},
          {"median_mixture", a.median_mixture}, {"mean_gminus", a.mean_gminus},
          {"mean_gplus", a.mean_gplus}, {"mean_mixture", a.mean_mixture}};
}

ArmSummary arm_summary_from_json(const json& j, Arm arm) {
  return {arm,
          j.at("median_gminus").get<double>(),
          j.at("median_gplus").get<double>(),
          j.at("median_mixture").get<double>(),
          j.at("mean_gminus").get<double>(),
          j.at("mean_gplus").get<double>(),
          j.at("mean_mixture").get<double>()};
}

}  // namespace

std::string to_string(Measure m) {
  return m == Measure::difference ? "difference" : "ratio";
}
std::string to_string(Summary s) { return s == Summary::median ? "median" : "mean"; }
std::string to_string(Scale s) { return s == Scale::natural ? "natural" : "log"; }
std::string to_string(Group g) {
  switch (g) {
    case Group::g_minus: return "g_minus";
    case Group::g_plus: return "g_plus";
    default: return "mixture";
  }
}

Measure parse_measure(const std::string& s) {
  if (s == "difference" || s == "diff") return Measure::difference;
  if (s == "ratio") return Measure::ratio;
  throw io_error("unknown measure '" + s + "' (expected diff or ratio)");
}

Summary parse_summary(const std::string& s) {
  if (s == "median") return Summary::median;
  if (s == "mean") return Summary::mean;
  throw io_error("unknown summary '" + s + "' (expected median or mean)");
}

Scale parse_scale(const std::string& s) {
  if (s == "natural") return Scale::natural;
  if (s == "log") return Scale::log_scale;
  throw io_error("unknown scale '" + s + "' (expected natural or log)");
}

static Group parse_group(const std::string& s) {
  if (s == "g_minus") return Group::g_minus;
  if (s == "g_plus") return Group::g_plus;
  if (s == "mixture") return Group::mixture;
  throw io_error("unknown group '" + s + "'");
}

json model_params_to_json(const ModelParams& p) {
  return {{"lambda", p.lambda}, {"k", p.k},     {"beta1", p.beta1},
          {"beta2", p.beta2},   {"beta3", p.beta3}};
}

ModelParams model_params_from_json(const json& j) {
  ModelParams p{j.at("lambda").get<double>(), j.at("k").get<double>(),
                j.at("beta1").get<double>(), j.at("beta2").get<double>(),
                j.at("beta3").get<double>()};
  p.validate();
  return p;
}

json fit_result_to_json(const FitResult& fit) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["params"] = model_params_to_json(fit.params);
  j["covariance_coords"] = {"log_lambda", "log_k", "beta1", "beta2", "beta3"};
  j["covariance"] = matrix_to_json(Eigen::MatrixXd(fit.cov));
  j["loglik"] = fit.loglik;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["gradient_norm"] = fit.gradient_norm;
  return j;
}

FitResult fit_result_from_json(const json& j) {
  require_schema(j);
  FitResult fit;
  fit.params = model_params_from_json(j.at("params"));
  Eigen::MatrixXd cov(5, 5);
  matrix_from_json(j.at("covariance"), cov);
  fit.cov = cov;
  fit.loglik = j.at("loglik").get<double>();
  fit.converged = j.at("converged").get<bool>();
  fit.iterations = j.at("iterations").get<int>();
  fit.gradient_norm = j.at("gradient_norm").get<double>();
  return fit;
}

json efficacy_report_to_json(const EfficacyReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["measure"] = to_string(report.measure);
  j["summary"] = to_string(report.summary);
  j["scale"] = to_string(report.scale);
  j["alpha"] = report.alpha;
  j["prevalence"] = report.prevalence;
  j["critical_value"] = report.critical_value;
  j["critical_value_mc_se"] = report.critical_value_mc_se;
  j["corr"] = matrix_to_json(Eigen::MatrixXd(report.corr));
  json ests = json::array();
  for (const auto& e : report.estimates) {
    ests.push_back({{"group", to_string(e.group)},
                    {"point", e.point},
                    {"se", e.se},
                    {"sci_low", e.sci_low},
                    {"sci_high", e.sci_high},
                    {"significant", e.significant}});
  }
  j["estimates"] = ests;
  j["arms"] = {{"C", arm_summary_to_json(report.control)},
               {"Rx", arm_summary_to_json(report.treatment)}};
  return j;
}

EfficacyReport efficacy_report_from_json(const json& j) {
  require_schema(j);
  EfficacyReport report;
  report.measure = parse_measure(j.at("measure").get<std::string>());
  report.summary = parse_summary(j.at("summary").get<std::string>());
  report.scale = parse_scale(j.at("scale").get<std::string>());
  report.alpha = j.at("alpha").get<double>();
  report.prevalence = j.at("prevalence").get<double>();
  report.critical_value = j.at("critical_value").get<double>();
  report.critical_value_mc_se = j.at("critical_value_mc_se").get<double>();
  Eigen::MatrixXd corr(3, 3);
  matrix_from_json(j.at("corr"), corr);
  report.corr = corr;
  const json& ests = j.at("estimates");
  if (!ests.is_array() || ests.size() != 3)
    throw io_error("efficacy report must carry exactly three estimates");
  for (int g = 0; g < 3; ++g) {
    const json& e = ests[g];
    report.estimates[g] = {parse_group(e.at("group").get<std::string>()),
                           report.measure,
                           report.summary,
                           report.scale,
                           e.at("point").get<double>(),
                           e.at("se").get<double>(),
                           e.at("sci_low").get<double>(),
                           e.at("sci_high").get<double>(),
                           e.at("significant").get<bool>()};
  }
  report.control = arm_summary_from_json(j.at("arms").at("C"), Arm::control);
  report.treatment =
      arm_summary_from_json(j.at("arms").at("Rx"), Arm::treatment);
  return report;
}

json scenario_config_to_json(const ScenarioConfig& config) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["params"] = model_params_to_json(config.params);
  j["prevalence"] = config.prevalence;
  j["n_total"] = config.n_total;
  j["allocation"] = config.allocation;
  j["censor_target"] = config.censor_target;
  j["reps"] = config.reps;
  j["measure"] = to_string(config.measure);
  j["summary"] = to_string(config.summary);
  j["scale"] = to_string(config.scale);
  j["alpha"] = config.alpha;
  j["master_seed"] = config.master_seed;
  j["workers"] = config.workers;
  j["ci_samples"] = config.ci_samples;
  return j;
}

ScenarioConfig scenario_config_from_json(const json& j) {
  require_schema(j);
  ScenarioConfig config;
  config.params = model_params_from_json(j.at("params"));
  config.prevalence = j.at("prevalence").get<double>();
  config.n_total = j.at("n_total").get<int>();
  if (j.contains("allocation")) config.allocation = j["allocation"].get<double>();
  if (j.contains("censor_target"))
    config.censor_target = j["censor_target"].get<double>();
  config.reps = j.at("reps").get<int>();
  if (j.contains("measure"))
    config.measure = parse_measure(j["measure"].get<std::string>());
  if (j.contains("summary"))
    config.summary = parse_summary(j["summary"].get<std::string>());
  if (j.contains("scale")) config.scale = parse_scale(j["scale"].get<std::string>());
  if (j.contains("alpha")) config.alpha = j["alpha"].get<double>();
  if (j.contains("master_seed"))
    config.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("workers")) config.workers = j["workers"].get<int>();
  if (j.contains("ci_samples"))
    config.ci_samples = j["ci_samples"].get<std::size_t>();
  config.validate();
  return config;
}

json sim_metrics_to_json(const SimMetrics& metrics) {
  json j;
  j["schema_version"] = kSchemaVersion;
  const char* names[3] = {"g_minus", "g_plus", "mixture"};
  for (int g = 0; g < 3; ++g) {
    j["groups"][names[g]] = {
        {"bias", metrics.groups[g].bias},
        {"avg_sci", {metrics.groups[g].avg_sci_low, metrics.groups[g].avg_sci_high}},
        {"coverage_marginal", metrics.groups[g].coverage_marginal},
        {"truth", metrics.truth[g]}};
  }
  j["coverage_joint"] = metrics.coverage_joint;
  j["n_failed_fits"] = metrics.n_failed_fits;
  j["reps_used"] = metrics.reps_used;
  return j;
}

SimMetrics sim_metrics_from_json(const json& j) {
  require_schema(j);
  SimMetrics metrics;
  const char* names[3] = {"g_minus", "g_plus", "mixture"};
  for (int g = 0; g < 3; ++g) {
    const json& gj = j.at("groups").at(names[g]);
    metrics.groups[g].bias = gj.at("bias").get<double>();
    metrics.groups[g].avg_sci_low = gj.at("avg_sci")[0].get<double>();
    metrics.groups[g].avg_sci_high = gj.at("avg_sci")[1].get<double>();
    metrics.groups[g].coverage_marginal = gj.at("coverage_marginal").get<double>();
    metrics.truth[g] = gj.at("truth").get<double>();
  }
  metrics.coverage_joint = j.at("coverage_joint").get<double>();
  metrics.n_failed_fits = j.at("n_failed_fits").get<int>();
  metrics.reps_used = j.at("reps_used").get<int>();
  return metrics;
}

std::string sim_metrics_table(const SimMetrics& metrics,
                              const ScenarioConfig& config) {
  char buf[160];
  std::ostringstream out;
  std::snprintf(buf, sizeof(buf), "%-9s %10s %12s %24s %10s\n", "group",
                "truth", "bias", "avg sCI", "coverage");
  out << buf;
  const char* names[3] = {"g-", "g+", "mixture"};
  for (int g = 0; g < 3; ++g) {
    char ci[40];
    std::snprintf(ci, sizeof(ci), "(%.2f, %.2f)", metrics.groups[g].avg_sci_low,
                  metrics.groups[g].avg_sci_high);
    std::snprintf(buf, sizeof(buf), "%-9s %10.3f %12.3f %24s %10.3f\n",
                  names[g], metrics.truth[g], metrics.groups[g].bias, ci,
                  metrics.groups[g].coverage_marginal);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "joint coverage %.3f   failed fits %d/%d   measure %s/%s/%s\n",
                metrics.coverage_joint, metrics.n_failed_fits, config.reps,
                to_string(config.measure).c_str(),
                to_string(config.summary).c_str(),
                to_string(config.scale).c_str());
  out << buf;
  return out.str();
}

RrReport make_rr_report(const std::array<long long, 8>& counts) {
  auto table = ResponseTable<Rational>::from_counts(
      counts[0], counts[1], counts[2], counts[3], counts[4], counts[5],
      counts[6], counts[7]);
  RrReport report;
  report.counts = counts;
  report.rr_gplus = rr_subgroup(table, Marker::g_plus);
  report.rr_gminus = rr_subgroup(table, Marker::g_minus);
  report.rr_overall = rr_overall(table);
  report.mix_correct = mix_rr_correct(report.rr_gplus, report.rr_gminus,
                                      table.c_gplus_r, table.c_gminus_r);
  report.mix_naive_prevalence = mix_rr_naive_prevalence(
      report.rr_gplus, report.rr_gminus, table.gamma_plus());
  report.mix_naive_log =
      mix_rr_naive_log(to_double(report.rr_gplus), to_double(report.rr_gminus),
                       to_double(table.gamma_plus()));
  return report;
}

std::string rational_to_string(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rational rational_from_string(const std::string& s) {
  size_t slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)),
                    std::stoll(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw io_error("cannot parse rational '" + s + "'");
  }
}

json rr_report_to_json(const RrReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  const char* keys[8] = {"rx_gplus_r", "rx_gplus_nr", "rx_gminus_r",
                         "rx_gminus_nr", "c_gplus_r", "c_gplus_nr",
                         "c_gminus_r", "c_gminus_nr"};
  for (int i = 0; i < 8; ++i) j["counts"][keys[i]] = report.counts[i];
  auto rat = [](const Rational& r) {
    return json{{"rational", rational_to_string(r)}, {"value", to_double(r)}};
  };
  j["rr_gplus"] = rat(report.rr_gplus);
  j["rr_gminus"] = rat(report.rr_gminus);
  j["rr_overall"] = rat(report.rr_overall);
  j["mix_correct"] = rat(report.mix_correct);
  j["mix_naive_prevalence"] = rat(report.mix_naive_prevalence);
  j["mix_naive_prevalence"]["incorrect_estimator"] = true;
  j["mix_naive_log"] = {{"value", report.mix_naive_log},
                        {"incorrect_estimator", true}};
  return j;
}

RrReport rr_report_from_json(const json& j) {
  require_schema(j);
  const char* keys[8] = {"rx_gplus_r", "rx_gplus_nr", "rx_gminus_r",
                         "rx_gminus_nr", "c_gplus_r", "c_gplus_nr",
                         "c_gminus_r", "c_gminus_nr"};
  std::array<long long, 8> counts;
  for (int i = 0; i < 8; ++i) counts[i] = j.at("counts").at(keys[i]).get<long long>();
  RrReport report = make_rr_report(counts);
  // Trust the recomputation, but verify the document is consistent.
  if (rational_to_string(report.rr_overall) !=
      j.at("rr_overall").at("rational").get<std::string>())
    throw io_error("rr report is inconsistent with its counts");
  return report;
}

std::vector<SubjectRecord> parse_subject_csv(std::istream& in,
                                             std::vector<std::string>* warnings) {
  std::string line;
  if (!std::getline(in, line)) throw io_error("CSV: empty input, no records");
  std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, size_t> cols;
  for (size_t i = 0; i < header.size(); ++i) {
    std::string name = header[i];
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    cols[name] = i;
  }
  for (const char* required : {"time", "event", "trt", "marker"})
    if (!cols.count(required))
      throw io_error(std::string("CSV: missing required column '") + required + "'");
  if (warnings) {
    for (const auto& [name, idx] : cols)
      if (name != "time" && name != "event" && name != "trt" && name != "marker")
        warnings->push_back("CSV: ignoring extra column '" + name + "'");
  }

  auto flag = [](const std::string& v, const char* what, int lineno) {
    if (v == "0") return 0;
    if (v == "1") return 1;
    throw io_error("CSV line " + std::to_string(lineno) + ": " + what +
                   " must be 0 or 1, got '" + v + "'");
  };

  std::vector<SubjectRecord> data;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw io_error("CSV line " + std::to_string(lineno) + ": expected " +
                     std::to_string(header.size()) + " fields, got " +
                     std::to_string(fields.size()));
    SubjectRecord r;
    const std::string& tv = fields[cols["time"]];
    try {
      size_t pos = 0;
      r.time = std::stod(tv, &pos);
      if (pos != tv.size()) throw std::invalid_argument(tv);
    } catch (const std::exception&) {
      throw io_error("CSV line " + std::to_string(lineno) +
                     ": cannot parse time '" + tv + "'");
    }
    if (!(r.time > 0.0))
      throw io_error("CSV line " + std::to_string(lineno) +
                     ": time must be positive, got '" + tv + "'");
    r.event = flag(fields[cols["event"]], "event", lineno);
    r.trt = flag(fields[cols["trt"]], "trt", lineno);
    r.marker = flag(fields[cols["marker"]], "marker", lineno);
    data.push_back(r);
  }
  return data;
}

std::array<long long, 8> parse_rr_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw io_error("RR CSV: empty input");
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "arm" || header[1] != "group" ||
      header[2] != "response" || header[3] != "count")
    throw io_error("RR CSV: header must be arm,group,response,count");
  std::array<long long, 8> counts{};
  std::array<bool, 8> seen{};
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() < 4)
      throw io_error("RR CSV line " + std::to_string(lineno) + ": expected 4 fields");
    int arm;
    if (f[0] == "Rx" || f[0] == "rx") arm = 0;
    else if (f[0] == "C" || f[0] == "c") arm = 1;
    else throw io_error("RR CSV line " + std::to_string(lineno) + ": arm must be Rx or C");
    int group;
    if (f[1] == "g+" || f[1] == "gplus") group = 0;
    else if (f[1] == "g-" || f[1] == "gminus") group = 1;
    else throw io_error("RR CSV line " + std::to_string(lineno) + ": group must be g+ or g-");
    int resp;
    if (f[2] == "R" || f[2] == "r") resp = 0;
    else if (f[2] == "NR" || f[2] == "nr") resp = 1;
    else throw io_error("RR CSV line " + std::to_string(lineno) + ": response must be R or NR");
    long long count;
    try {
      count = std::stoll(f[3]);
    } catch (const std::exception&) {
      throw io_error("RR CSV line " + std::to_string(lineno) +
                     ": cannot parse count '" + f[3] + "'");
    }
    int idx = arm * 4 + group * 2 + resp;
    counts[idx] = count;
    seen[idx] = true;
  }
  for (bool s : seen)
    if (!s) throw io_error("RR CSV: all 8 (arm, group, response) cells are required");
  return counts;
}

std::array<long long, 8> parse_rr_counts_json(const json& j) {
  const char* keys[8] = {"rx_gplus_r", "rx_gplus_nr", "rx_gminus_r",
                         "rx_gminus_nr", "c_gplus_r", "c_gplus_nr",
                         "c_gminus_r", "c_gminus_nr"};
  const json& src = j.contains("counts") ? j.at("counts") : j;
  std::array<long long, 8> counts;
  for (int i = 0; i < 8; ++i) {
    if (!src.contains(keys[i]))
      throw io_error(std::string("RR JSON: missing count '") + keys[i] + "'");
    counts[i] = src.at(keys[i]).get<long long>();
  }
  return counts;
}

}  // namespace sme

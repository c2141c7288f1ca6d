#pragma once

#include <array>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sme/binary_rr.hpp"
#include "sme/efficacy.hpp"
#include "sme/likelihood.hpp"
#include "sme/trial_sim.hpp"

namespace sme {

using json = nlohmann::json;

/// Version stamp carried by every JSON document this library emits.
inline constexpr int kSchemaVersion = 1;

std::string to_string(Measure m);
std::string to_string(Summary s);
std::string to_string(Scale s);
std::string to_string(Group g);
Measure parse_measure(const std::string& s);   // "difference"/"diff", "ratio"
Summary parse_summary(const std::string& s);   // "median", "mean"
Scale parse_scale(const std::string& s);       // "natural", "log"

json model_params_to_json(const ModelParams& p);
ModelParams model_params_from_json(const json& j);

json fit_result_to_json(const FitResult& fit);
FitResult fit_result_from_json(const json& j);

json efficacy_report_to_json(const EfficacyReport& report);
EfficacyReport efficacy_report_from_json(const json& j);

json scenario_config_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_config_from_json(const json& j);

json sim_metrics_to_json(const SimMetrics& metrics);
SimMetrics sim_metrics_from_json(const json& j);

/// Aligned plain-text table of a simulation study, one row per group.
std::string sim_metrics_table(const SimMetrics& metrics,
                              const ScenarioConfig& config);

/// Relative-risk report for an 8-cell count table; the rational fields are
/// exact. The two prevalence-weighted mixes are incorrect estimators and are
/// flagged as such when serialized.
struct RrReport {
  std::array<long long, 8> counts{};  // rx+R rx+NR rx-R rx-NR c+R c+NR c-R c-NR
  Rational rr_gplus, rr_gminus, rr_overall, mix_correct, mix_naive_prevalence;
  double mix_naive_log = 0.0;
};

RrReport make_rr_report(const std::array<long long, 8>& counts);
json rr_report_to_json(const RrReport& report);
RrReport rr_report_from_json(const json& j);

std::string rational_to_string(const Rational& r);
Rational rational_from_string(const std::string& s);

/// Parse subject-level CSV with header columns time,event,trt,marker
/// (extra columns ignored with a warning). Malformed rows raise io_error
/// with the 1-based line number.
std::vector<SubjectRecord> parse_subject_csv(std::istream& in,
                                             std::vector<std::string>* warnings);

/// Parse an 8-cell count table from a CSV fragment with header
/// arm,group,response,count (arm Rx/C, group g+/g-, response R/NR).
std::array<long long, 8> parse_rr_counts_csv(std::istream& in);

/// Counts from JSON keys rx_gplus_r, rx_gplus_nr, ..., c_gminus_nr.
std::array<long long, 8> parse_rr_counts_json(const json& j);

}  // namespace sme

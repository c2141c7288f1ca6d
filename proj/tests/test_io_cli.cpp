#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sme/json_io.hpp"
#include "sme/trial_sim.hpp"
#include "support.hpp"

using namespace sme;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "sme_cli_tests";
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const char* bin = std::getenv("SME_CLI_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "SME_CLI_BIN must point at the CLI binary");
  fs::path dir = temp_dir();
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string cmd = env + (env.empty() ? "" : " ") + "\"" + bin + "\" " + args +
                    " > " + out.string() + " 2> " + err.string();
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = rc == -1 ? -1 : WEXITSTATUS(rc);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

fs::path write_trial_csv(int n, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.params = testsup::setting_c();
  cfg.prevalence = 0.5;
  cfg.n_total = n;
  auto data = generate_trial(cfg, seed);
  std::ostringstream csv;
  csv << "time,event,trt,marker\n";
  char buf[80];
  for (const auto& r : data) {
    std::snprintf(buf, sizeof(buf), "%.10g,%d,%d,%d\n", r.time, r.event, r.trt,
                  r.marker);
    csv << buf;
  }
  fs::path p = temp_dir() / ("trial_" + std::to_string(seed) + ".csv");
  write_file(p, csv.str());
  return p;
}

const char* kTable2Json = R"({
  "rx_gplus_r": 8, "rx_gplus_nr": 12, "rx_gminus_r": 10, "rx_gminus_nr": 13,
  "c_gplus_r": 3, "c_gplus_nr": 17, "c_gminus_r": 12, "c_gminus_nr": 11
})";

}  // namespace

TEST_CASE("subject CSV parsing: happy path, warnings, line diagnostics") {
  std::istringstream good(
      "time,event,trt,marker,site\n"
      "12.5,1,0,1,A\n"
      "3.25,0,1,0,B\n");
  std::vector<std::string> warnings;
  auto data = parse_subject_csv(good, &warnings);
  REQUIRE(data.size() == 2);
  CHECK(data[0].time == 12.5);
  CHECK(data[1].trt == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("site") != std::string::npos);

  auto expect_line = [](const std::string& csv, const std::string& needle) {
    std::istringstream in(csv);
    try {
      parse_subject_csv(in, nullptr);
      FAIL_CHECK("expected io_error for: " << csv);
    } catch (const io_error& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_line("time,event,trt,marker\n1.0,1,0,0\n-2,1,0,0\n", "line 3");
  expect_line("time,event,trt,marker\n1.0,2,0,0\n", "event");
  expect_line("time,event,trt,marker\nabc,1,0,0\n", "time");
  expect_line("time,event,trt,marker\n1.0,1,0\n", "line 2");
  expect_line("time,trt,marker\n1.0,0,0\n", "event");
  expect_line("", "no records");
}

TEST_CASE("RR counts parse from CSV fragments") {
  std::istringstream in(
      "arm,group,response,count\n"
      "Rx,g+,R,8\nRx,g+,NR,12\nRx,g-,R,10\nRx,g-,NR,13\n"
      "C,g+,R,3\nC,g+,NR,17\nC,g-,R,12\nC,g-,NR,11\n");
  auto counts = parse_rr_counts_csv(in);
  CHECK(counts == std::array<long long, 8>{8, 12, 10, 13, 3, 17, 12, 11});

  std::istringstream missing("arm,group,response,count\nRx,g+,R,8\n");
  CHECK_THROWS_AS(parse_rr_counts_csv(missing), io_error);
}

TEST_CASE("JSON round trips are lossless") {
  ScenarioConfig cfg;
  cfg.params = testsup::setting_b();
  cfg.prevalence = 0.5;
  cfg.n_total = 400;
  cfg.reps = 3;
  cfg.ci_samples = 20'000;
  auto data = generate_trial(cfg, 17);

  FitResult fit = fit_mle(data);
  json jfit = fit_result_to_json(fit);
  CHECK(fit_result_to_json(fit_result_from_json(jfit)).dump() == jfit.dump());

  EfficacyReport report = efficacy(fit, 0.5, Measure::ratio, Summary::median,
                                   Scale::log_scale, 0.05, {42, 20'000});
  json jrep = efficacy_report_to_json(report);
  CHECK(efficacy_report_to_json(efficacy_report_from_json(jrep)).dump() ==
        jrep.dump());

  json jcfg = scenario_config_to_json(cfg);
  CHECK(scenario_config_to_json(scenario_config_from_json(jcfg)).dump() ==
        jcfg.dump());

  SimMetrics metrics = run_study(cfg);
  json jm = sim_metrics_to_json(metrics);
  CHECK(sim_metrics_to_json(sim_metrics_from_json(jm)).dump() == jm.dump());

  RrReport rr = make_rr_report({8, 12, 10, 13, 3, 17, 12, 11});
  json jrr = rr_report_to_json(rr);
  CHECK(rr_report_to_json(rr_report_from_json(jrr)).dump() == jrr.dump());

  CHECK(rational_from_string("18/15") == Rational(6, 5));
  CHECK(rational_to_string(Rational(6, 5)) == "6/5");
  CHECK_THROWS_AS(rational_from_string("x/y"), io_error);
}

TEST_CASE("cli: rr reproduces the worked example exactly") {
  fs::path table = temp_dir() / "table2.json";
  write_file(table, kTable2Json);
  CliResult r = run_cli("rr --input " + table.string());
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j["rr_overall"]["rational"] == "6/5");
  CHECK(j["rr_overall"]["value"] == 1.2);
  CHECK(j["rr_gplus"]["rational"] == "8/3");
  CHECK(j["mix_correct"]["rational"] == "6/5");
  CHECK(j["mix_naive_prevalence"]["rational"] == "145/86");
  CHECK(j["mix_naive_prevalence"]["incorrect_estimator"] == true);
  CHECK(j["mix_naive_log"]["incorrect_estimator"] == true);

  fs::path csv = temp_dir() / "table2.csv";
  write_file(csv,
             "arm,group,response,count\n"
             "Rx,g+,R,8\nRx,g+,NR,12\nRx,g-,R,10\nRx,g-,NR,13\n"
             "C,g+,R,3\nC,g+,NR,17\nC,g-,R,12\nC,g-,NR,11\n");
  CliResult r2 = run_cli("rr --input " + csv.string());
  REQUIRE(r2.exit_code == 0);
  CHECK(r2.out == r.out);
}

TEST_CASE("cli: fit fails cleanly on an empty file") {
  fs::path empty = temp_dir() / "empty.csv";
  write_file(empty, "");
  CliResult r = run_cli("fit --input " + empty.string());
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("no records") != std::string::npos);
  json err = json::parse(r.err);
  CHECK(err["error"]["type"] == "io");
}

TEST_CASE("cli: fit on a simulated trial") {
  fs::path csv = write_trial_csv(400, 404);
  CliResult r = run_cli("fit --input " + csv.string());
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j["converged"] == true);
  CHECK(j["n_records"] == 400);
  FitResult fit = fit_result_from_json(j);
  CHECK(fit.params.lambda > 0.0);
}

TEST_CASE("cli: efficacy output is reproducible and renders SVG") {
  fs::path csv = write_trial_csv(400, 505);
  fs::path svg = temp_dir() / "plot.svg";
  std::string args = "efficacy --input " + csv.string() +
                     " --measure ratio --seed 7 --svg-out " + svg.string();
  CliResult r1 = run_cli(args);
  REQUIRE(r1.exit_code == 0);
  CliResult r2 = run_cli(args);
  CHECK(r1.out == r2.out);  // byte-identical for identical command + seed

  json j = json::parse(r1.out);
  CHECK(j["scale"] == "log");  // ratio defaults to the log scale
  CHECK(j["prevalence_source"] == "sample_fraction");
  EfficacyReport report = efficacy_report_from_json(j);
  CHECK(report.estimates[2].point > 0.0);

  std::string svg_text = slurp(svg);
  std::string why;
  CHECK_MESSAGE(testsup::xml_well_formed(svg_text, &why), why);

  // env override matches the explicit flag
  CliResult r3 = run_cli("efficacy --input " + csv.string() +
                             " --measure ratio --svg-out " + svg.string(),
                         "SME_SEED=7");
  CHECK(r3.out == r1.out);

  // fixed prevalence is honored and recorded
  CliResult r4 = run_cli("efficacy --input " + csv.string() +
                         " --prevalence 0.5 --seed 7");
  REQUIRE(r4.exit_code == 0);
  json j4 = json::parse(r4.out);
  CHECK(j4["prevalence_source"] == "fixed");
  CHECK(j4["prevalence"] == 0.5);
}

TEST_CASE("cli: mmplot renders from a saved report") {
  fs::path csv = write_trial_csv(400, 606);
  fs::path report_path = temp_dir() / "report.json";
  CliResult r1 = run_cli("efficacy --input " + csv.string() +
                         " --seed 3 --json-out " + report_path.string());
  REQUIRE(r1.exit_code == 0);
  fs::path svg = temp_dir() / "mm.svg";
  CliResult r2 = run_cli("mmplot --input " + report_path.string() +
                         " --svg-out " + svg.string());
  REQUIRE(r2.exit_code == 0);
  std::string why;
  CHECK_MESSAGE(testsup::xml_well_formed(slurp(svg), &why), why);
}

TEST_CASE("cli: hr-curve emits the naive baselines as constants") {
  fs::path params = temp_dir() / "params.json";
  write_file(params, model_params_to_json(testsup::setting_a()).dump());
  CliResult r = run_cli("hr-curve --input " + params.string() +
                        " --prevalence 0.5 --t-min 5 --t-max 100 --t-count 20");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,mixture_hr,naive_hr_event_weighted,naive_hr_lsmeans");
  CHECK(r.err.find("incorrect") != std::string::npos);
  int rows = 0;
  double first_hr = 0.0, last_hr = 0.0, naive5 = 0.0, naive6 = 0.0;
  std::string line;
  while (std::getline(lines, line)) {
    double t, hr, n5, n6;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &hr, &n5, &n6) == 4);
    if (rows == 0) first_hr = hr;
    last_hr = hr;
    naive5 = n5;
    naive6 = n6;
    ++rows;
  }
  CHECK(rows == 20);
  CHECK(std::abs(first_hr - last_hr) / first_hr > 0.10);  // mixture HR moves
  CHECK(naive6 == doctest::Approx(1.0));                  // exp(0.5 - 0.5)
  CHECK(naive5 > 0.0);
}

TEST_CASE("cli: simulate runs a tiny scenario") {
  ScenarioConfig cfg;
  cfg.params = testsup::setting_c();
  cfg.prevalence = 0.5;
  cfg.n_total = 150;
  cfg.reps = 5;
  cfg.master_seed = 12;
  cfg.ci_samples = 20'000;
  fs::path scenario = temp_dir() / "scenario.json";
  write_file(scenario, scenario_config_to_json(cfg).dump());
  fs::path json_out = temp_dir() / "metrics.json";
  CliResult r = run_cli("simulate --input " + scenario.string() +
                        " --json-out " + json_out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("joint coverage") != std::string::npos);
  json j = json::parse(slurp(json_out));
  SimMetrics m = sim_metrics_from_json(j);
  CHECK(m.reps_used + m.n_failed_fits == 5);
}

TEST_CASE("cli: malformed rows are reported with their line number") {
  fs::path bad = temp_dir() / "bad.csv";
  write_file(bad, "time,event,trt,marker\n5.0,1,0,0\n7.0,1,2,0\n");
  CliResult r = run_cli("fit --input " + bad.string());
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("line 3") != std::string::npos);
}

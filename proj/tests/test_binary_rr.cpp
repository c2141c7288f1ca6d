#include <doctest.h>

#include <cmath>

#include "sme/binary_rr.hpp"
#include "support.hpp"

using namespace sme;
using testsup::Draw;

namespace {

// Table with treatment assignment independent of subgroup: cells are
// P(arm) * P(group) * rate products. This is the randomized-trial structure
// under which the control-responder-weighted mix reproduces the overall RR.
ResponseTable<double> structured_table(double p_rx, double gamma,
                                       double r_rx_plus, double r_rx_minus,
                                       double r_c_plus, double r_c_minus) {
  ResponseTable<double> t;
  t.rx_gplus_r = p_rx * gamma * r_rx_plus;
  t.rx_gplus_nr = p_rx * gamma * (1.0 - r_rx_plus);
  t.rx_gminus_r = p_rx * (1.0 - gamma) * r_rx_minus;
  t.rx_gminus_nr = p_rx * (1.0 - gamma) * (1.0 - r_rx_minus);
  t.c_gplus_r = (1.0 - p_rx) * gamma * r_c_plus;
  t.c_gplus_nr = (1.0 - p_rx) * gamma * (1.0 - r_c_plus);
  t.c_gminus_r = (1.0 - p_rx) * (1.0 - gamma) * r_c_minus;
  t.c_gminus_nr = (1.0 - p_rx) * (1.0 - gamma) * (1.0 - r_c_minus);
  return t;
}

ResponseTable<Rational> structured_rational(Draw& draw) {
  auto frac = [&](int lo, int hi, int den) {
    return Rational(lo + static_cast<long long>(draw.uniform(0, hi - lo + 1)), den);
  };
  Rational p_rx = frac(1, 9, 10), gamma = frac(1, 9, 10);
  Rational one(1);
  ResponseTable<Rational> t;
  Rational r1 = frac(1, 9, 10), r2 = frac(1, 9, 10), r3 = frac(1, 9, 10),
           r4 = frac(1, 9, 10);
  t.rx_gplus_r = p_rx * gamma * r1;
  t.rx_gplus_nr = p_rx * gamma * (one - r1);
  t.rx_gminus_r = p_rx * (one - gamma) * r2;
  t.rx_gminus_nr = p_rx * (one - gamma) * (one - r2);
  t.c_gplus_r = (one - p_rx) * gamma * r3;
  t.c_gplus_nr = (one - p_rx) * gamma * (one - r3);
  t.c_gminus_r = (one - p_rx) * (one - gamma) * r4;
  t.c_gminus_nr = (one - p_rx) * (one - gamma) * (one - r4);
  return t;
}

// The worked numeric example: counts out of 86.
ResponseTable<Rational> example_table() {
  return ResponseTable<Rational>::from_counts(8, 12, 10, 13, 3, 17, 12, 11);
}

}  // namespace

TEST_CASE("worked example: subgroup and overall relative risks are exact") {
  auto t = example_table();
  CHECK(t.total() == Rational(1));
  CHECK(t.gamma_plus() == Rational(40, 86));
  CHECK(rr_subgroup(t, Marker::g_plus) == Rational(8, 3));
  CHECK(rr_subgroup(t, Marker::g_minus) == Rational(10, 12));
  CHECK(rr_overall(t) == Rational(18, 15));
}

TEST_CASE("worked example: correct mix reproduces the overall RR exactly") {
  auto t = example_table();
  Rational mixed = mix_rr_correct(rr_subgroup(t, Marker::g_plus),
                                  rr_subgroup(t, Marker::g_minus),
                                  t.c_gplus_r, t.c_gminus_r);
  CHECK(mixed == Rational(18, 15));
  CHECK(mixed == rr_overall(t));
}

TEST_CASE("worked example: prevalence-weighted mixes are wrong, exactly") {
  auto t = example_table();
  Rational naive = mix_rr_naive_prevalence(rr_subgroup(t, Marker::g_plus),
                                           rr_subgroup(t, Marker::g_minus),
                                           t.gamma_plus());
  CHECK(naive == Rational(145, 86));
  CHECK(naive != Rational(18, 15));
  CHECK(std::abs(to_double(naive) - 145.0 / 86.0) < 1e-15);
  CHECK(std::abs(to_double(naive) - 18.0 / 15.0) > 1e-12);

  double naive_log = mix_rr_naive_log(8.0 / 3.0, 10.0 / 12.0, 20.0 / 43.0);
  CHECK(std::abs(naive_log - 18.0 / 15.0) > 1e-12);
}

TEST_CASE("symmetric tables have unit relative risk everywhere") {
  auto t = ResponseTable<double>::from_counts(5, 9, 11, 3, 5, 9, 11, 3);
  CHECK(rr_subgroup(t, Marker::g_plus) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rr_subgroup(t, Marker::g_minus) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rr_overall(t) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("equal subgroup RRs are preserved by every mixing rule") {
  double rr = 1.37;
  CHECK(mix_rr_correct(rr, rr, 0.1, 0.25) == doctest::Approx(rr).epsilon(1e-14));
  CHECK(mix_rr_naive_prevalence(rr, rr, 0.3) == doctest::Approx(rr).epsilon(1e-14));
  CHECK(mix_rr_naive_log(rr, rr, 0.3) == doctest::Approx(rr).epsilon(1e-14));
}

TEST_CASE("mixing identity on random randomized tables (float path)") {
  Draw draw(606);
  for (int rep = 0; rep < 1000; ++rep) {
    auto t = structured_table(
        draw.uniform(0.1, 0.9), draw.uniform(0.1, 0.9), draw.uniform(0.05, 0.95),
        draw.uniform(0.05, 0.95), draw.uniform(0.05, 0.95), draw.uniform(0.05, 0.95));
    double mixed = mix_rr_correct(rr_subgroup(t, Marker::g_plus),
                                  rr_subgroup(t, Marker::g_minus),
                                  t.c_gplus_r, t.c_gminus_r);
    double overall = rr_overall(t);
    CHECK(std::abs(mixed - overall) <= 1e-12 * std::max(1.0, overall));
  }
}

TEST_CASE("mixing identity on random randomized tables (exact path)") {
  Draw draw(607);
  for (int rep = 0; rep < 200; ++rep) {
    auto t = structured_rational(draw);
    Rational mixed = mix_rr_correct(rr_subgroup(t, Marker::g_plus),
                                    rr_subgroup(t, Marker::g_minus),
                                    t.c_gplus_r, t.c_gminus_r);
    CHECK(mixed == rr_overall(t));
  }
}

TEST_CASE("overall RR lies strictly between distinct subgroup RRs") {
  Draw draw(608);
  for (int rep = 0; rep < 300; ++rep) {
    auto t = structured_table(
        draw.uniform(0.1, 0.9), draw.uniform(0.1, 0.9), draw.uniform(0.05, 0.95),
        draw.uniform(0.05, 0.95), draw.uniform(0.05, 0.95), draw.uniform(0.05, 0.95));
    double plus = rr_subgroup(t, Marker::g_plus);
    double minus = rr_subgroup(t, Marker::g_minus);
    if (std::abs(plus - minus) < 1e-6) continue;
    double overall = rr_overall(t);
    CHECK(overall > std::min(plus, minus));
    CHECK(overall < std::max(plus, minus));
  }
}

TEST_CASE("degenerate tables raise precise errors") {
  auto no_control_resp = ResponseTable<double>::from_counts(8, 12, 10, 13, 0, 20, 12, 11);
  CHECK_THROWS_AS(rr_subgroup(no_control_resp, Marker::g_plus),
                  zero_denominator_error);
  CHECK_THROWS_AS((ResponseTable<double>::from_counts(-1, 2, 3, 4, 5, 6, 7, 8)),
                  domain_error);
  CHECK_THROWS_AS((ResponseTable<double>::from_counts(0, 0, 0, 0, 0, 0, 0, 0)),
                  domain_error);
  CHECK_THROWS_AS(mix_rr_naive_prevalence(1.0, 1.0, 1.2), domain_error);

  ResponseTable<double> unnormalized;
  unnormalized.rx_gplus_r = 0.7;
  unnormalized.rx_gplus_nr = 0.7;
  CHECK_THROWS_AS(rr_overall(unnormalized), domain_error);
}

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "sme/mmplot.hpp"
#include "support.hpp"

using namespace sme;
using testsup::Draw;

namespace {

using testsup::extract_ci_elements;

MMPlotSpec basic_spec(Measure measure) {
  MMPlotSpec spec;
  spec.measure = measure;
  spec.points[0] = {Group::g_minus, 45.0, 90.0, 30.0, 60.0};
  spec.points[1] = {Group::g_plus, 25.0, 70.0, 30.0, 60.0};
  spec.points[2] = {Group::mixture, 35.0, 80.0, 30.0, 60.0};
  if (measure == Measure::ratio)
    for (auto& p : spec.points) {
      p.interval_low = 1.2;
      p.interval_high = 3.4;
    }
  return spec;
}

// Sign of (rx - c) in pixel space; the frame maps data axes with one scale,
// so this is positive above the diagonal and negative below it.
double diagonal_side(const MMPlotSpec& spec, double x_pix, double y_pix) {
  double m = spec.margin;
  return (spec.height - m - y_pix) - (x_pix - m);
}

}  // namespace

TEST_CASE("perpendicular offset and arc angle helpers") {
  CHECK(perpendicular_offset(45.0, 90.0) ==
        doctest::Approx(45.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(perpendicular_offset(90.0, 45.0) ==
        doctest::Approx(-45.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(perpendicular_offset(30.0, 30.0) == 0.0);

  auto [lo, hi] = arc_angles_deg(1.5, 3.0);
  CHECK(lo == doctest::Approx(56.3099).epsilon(1e-5));
  CHECK(hi == doctest::Approx(71.5651).epsilon(1e-5));
  double point_angle = std::atan(4.0 / 2.0) * 180.0 / 3.14159265358979323846;
  CHECK(point_angle == doctest::Approx(63.4349).epsilon(1e-5));
  CHECK(point_angle > lo);
  CHECK(point_angle < hi);
  CHECK_THROWS_AS(arc_angles_deg(2.0, 1.0), domain_error);
}

TEST_CASE("difference segment: endpoints carry the interval bounds") {
  MMPlotSpec spec = basic_spec(Measure::difference);
  // a point on the diagonal with a symmetric interval
  spec.points[2] = {Group::mixture, 40.0, 40.0, -12.0, 12.0};
  std::string svg = render_mm_plot(spec);
  auto segs = extract_ci_elements(svg);
  REQUIRE(segs.size() == 3);

  // recover data coordinates: the frame maps x_pix = margin + x*s
  double mx = 0.0;
  for (const auto& p : spec.points) {
    mx = std::max({mx, p.c_value, p.rx_value});
    double d0 = p.rx_value - p.c_value;
    for (double b : {p.interval_low, p.interval_high}) {
      double off = (b - d0) / 2.0;
      mx = std::max({mx, p.c_value - off, p.rx_value + off});
    }
  }
  double range = 1.15 * mx;
  double side = std::min(spec.width, spec.height) - 2.0 * spec.margin;
  double scale = side / range;
  auto to_data = [&](double xp, double yp) {
    return std::pair{(xp - spec.margin) / scale,
                     (spec.height - spec.margin - yp) / scale};
  };
  const Segment& s = segs[2];
  auto [x1, y1] = to_data(s.x1, s.y1);
  auto [x2, y2] = to_data(s.x2, s.y2);
  // endpoint perpendicular offsets, scaled by sqrt(2), equal the bounds
  CHECK(perpendicular_offset(x1, y1) * std::sqrt(2.0) ==
        doctest::Approx(-12.0).epsilon(1e-9));
  CHECK(perpendicular_offset(x2, y2) * std::sqrt(2.0) ==
        doctest::Approx(12.0).epsilon(1e-9));
  // symmetric case: midpoint sits on the diagonal, equidistant endpoints
  CHECK((x1 + x2) / 2.0 == doctest::Approx((y1 + y2) / 2.0).epsilon(1e-9));
  double d1 = std::hypot(x1 - 40.0, y1 - 40.0);
  double d2 = std::hypot(x2 - 40.0, y2 - 40.0);
  CHECK(d1 == doctest::Approx(d2).epsilon(1e-9));
}

TEST_CASE("prognostic example: equal offsets for differences, distinct slopes for ratios") {
  // medians: g- gets 45->90, g+ gets 25->70; both differences are 45
  CHECK(perpendicular_offset(45.0, 90.0) ==
        doctest::Approx(perpendicular_offset(25.0, 70.0)).epsilon(1e-14));
  CHECK(90.0 / 45.0 == doctest::Approx(2.0));
  CHECK(70.0 / 25.0 == doctest::Approx(2.8));
  auto [lo_minus, hi_minus] = arc_angles_deg(2.0, 2.0);
  auto [lo_plus, hi_plus] = arc_angles_deg(2.8, 2.8);
  CHECK(lo_minus == doctest::Approx(63.4349).epsilon(1e-5));
  CHECK(lo_plus == doctest::Approx(70.3462).epsilon(1e-5));
  CHECK(lo_minus == hi_minus);
  CHECK(lo_plus == hi_plus);
}

TEST_CASE("segment or arc crosses the diagonal iff the interval holds the null") {
  Draw draw(4242);
  for (int rep = 0; rep < 100; ++rep) {
    Measure measure = rep % 2 == 0 ? Measure::difference : Measure::ratio;
    MMPlotSpec spec;
    spec.measure = measure;
    const Group groups[3] = {Group::g_minus, Group::g_plus, Group::mixture};
    for (int i = 0; i < 3; ++i) {
      double c = draw.uniform(5.0, 100.0);
      double rx = draw.uniform(5.0, 100.0);
      double null_value = measure == Measure::difference ? 0.0 : 1.0;
      double point = measure == Measure::difference ? rx - c : rx / c;
      double lo, hi;
      if (draw.uniform(0.0, 1.0) < 0.5) {
        // interval straddling the null
        lo = null_value - draw.uniform(0.01, 2.0);
        hi = null_value + draw.uniform(0.01, 2.0);
        lo = std::min(lo, point);
        hi = std::max(hi, point);
      } else {
        // interval on the point's side of the null
        double width = draw.uniform(0.01, 0.4) * std::abs(point - null_value);
        lo = point - width;
        hi = point + width;
      }
      spec.points[i] = {groups[i], c, rx, lo, hi};
    }
    std::string svg = render_mm_plot(spec);
    auto segs = extract_ci_elements(svg);
    REQUIRE(segs.size() == 3);
    for (int i = 0; i < 3; ++i) {
      double null_value = measure == Measure::difference ? 0.0 : 1.0;
      bool contains_null = spec.points[i].interval_low <= null_value &&
                           null_value <= spec.points[i].interval_high;
      double s1 = diagonal_side(spec, segs[i].x1, segs[i].y1);
      double s2 = diagonal_side(spec, segs[i].x2, segs[i].y2);
      bool crosses = (s1 <= 0.0 && s2 >= 0.0) || (s1 >= 0.0 && s2 <= 0.0);
      CHECK(crosses == contains_null);
    }
  }
}

TEST_CASE("output is well-formed XML and deterministic") {
  MMPlotSpec spec = basic_spec(Measure::ratio);
  spec.title = "Efficacy <ratio> & \"arcs\"";
  spec.x_label = "C median 'weeks'";
  std::string svg = render_mm_plot(spec);
  std::string why;
  CHECK_MESSAGE(testsup::xml_well_formed(svg, &why), why);
  CHECK(svg == render_mm_plot(spec));
  CHECK(svg.find("<svg") != std::string::npos);

  std::string diff_svg = render_mm_plot(basic_spec(Measure::difference));
  CHECK_MESSAGE(testsup::xml_well_formed(diff_svg, &why), why);
}

TEST_CASE("spec validation rejects degenerate input") {
  MMPlotSpec spec = basic_spec(Measure::difference);
  spec.width = 100;
  spec.margin = 64.0;
  CHECK_THROWS_AS(render_mm_plot(spec), domain_error);

  spec = basic_spec(Measure::difference);
  spec.points[0].c_value = -3.0;
  CHECK_THROWS_AS(render_mm_plot(spec), domain_error);

  spec = basic_spec(Measure::difference);
  spec.points[1].interval_low = 5.0;
  spec.points[1].interval_high = -5.0;
  CHECK_THROWS_AS(render_mm_plot(spec), domain_error);
}

#include "sme/mmplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace sme {

namespace {

const double kPi = 3.14159265358979323846;
const double kSqrt2 = std::sqrt(2.0);

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span) {
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double norm = raw / mag;
  double step = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

struct Frame {
  double scale;    // pixels per data unit, same on both axes
  double origin_x; // pixel x of data 0
  double origin_y; // pixel y of data 0
  double side;     // plot area side in pixels
  double range;    // data range [0, range]

  double px(double x) const { return origin_x + x * scale; }
  double py(double y) const { return origin_y - y * scale; }
};

const char* marker_name(Group g) {
  switch (g) {
    case Group::g_minus: return "g-";
    case Group::g_plus: return "g+";
    default: return "mixture";
  }
}

}  // namespace

double perpendicular_offset(double c_value, double rx_value) {
  return (rx_value - c_value) / kSqrt2;
}

std::pair<double, double> arc_angles_deg(double low, double high) {
  if (!(low <= high)) throw domain_error("arc_angles: low must be <= high");
  return {std::atan(low) * 180.0 / kPi, std::atan(high) * 180.0 / kPi};
}

void MMPlotSpec::validate() const {
  for (const auto& p : points) {
    if (!(p.c_value > 0.0) || !(p.rx_value > 0.0))
      throw domain_error("MMPlotSpec: summaries must be positive");
    if (!(p.interval_low <= p.interval_high))
      throw domain_error("MMPlotSpec: interval bounds out of order");
  }
  if (width - 2.0 * margin < 10.0 || height - 2.0 * margin < 10.0)
    throw domain_error("MMPlotSpec: degenerate canvas");
}

std::string render_mm_plot(const MMPlotSpec& spec) {
  spec.validate();

  // Axis range [0, 1.15 * max coordinate/endpoint], both axes equal scale.
  double mx = 0.0;
  for (const auto& p : spec.points) {
    mx = std::max({mx, p.c_value, p.rx_value});
    if (spec.measure == Measure::difference) {
      double d0 = p.rx_value - p.c_value;
      for (double b : {p.interval_low, p.interval_high}) {
        double s = (b - d0) / 2.0;
        mx = std::max({mx, p.c_value - s, p.rx_value + s});
      }
    } else {
      mx = std::max(mx, std::hypot(p.c_value, p.rx_value));
    }
  }
  Frame fr;
  fr.range = 1.15 * mx;
  fr.side = std::min(spec.width, spec.height) - 2.0 * spec.margin;
  fr.scale = fr.side / fr.range;
  fr.origin_x = spec.margin;
  fr.origin_y = spec.height - spec.margin;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
      << " " << spec.height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" fill=\"white\"/>\n";

  // Axes and ticks.
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << fmt(fr.px(0)) << "\" y1=\"" << fmt(fr.py(0))
      << "\" x2=\"" << fmt(fr.px(fr.range)) << "\" y2=\"" << fmt(fr.py(0))
      << "\"/>\n"
      << "<line x1=\"" << fmt(fr.px(0)) << "\" y1=\"" << fmt(fr.py(0))
      << "\" x2=\"" << fmt(fr.px(0)) << "\" y2=\"" << fmt(fr.py(fr.range))
      << "\"/>\n</g>\n";
  double step = nice_step(fr.range);
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (double v = 0.0; v <= fr.range + 1e-9; v += step) {
    svg << "<line x1=\"" << fmt(fr.px(v)) << "\" y1=\"" << fmt(fr.py(0))
        << "\" x2=\"" << fmt(fr.px(v)) << "\" y2=\"" << fmt(fr.py(0) + 4)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(fr.px(v)) << "\" y=\"" << fmt(fr.py(0) + 16)
        << "\" text-anchor=\"middle\">" << fmt(v) << "</text>\n"
        << "<line x1=\"" << fmt(fr.px(0)) << "\" y1=\"" << fmt(fr.py(v))
        << "\" x2=\"" << fmt(fr.px(0) - 4) << "\" y2=\"" << fmt(fr.py(v))
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(fr.px(0) - 7) << "\" y=\"" << fmt(fr.py(v) + 4)
        << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  svg << "</g>\n";

  // 45-degree identity line.
  svg << "<line x1=\"" << fmt(fr.px(0)) << "\" y1=\"" << fmt(fr.py(0))
      << "\" x2=\"" << fmt(fr.px(fr.range)) << "\" y2=\""
      << fmt(fr.py(fr.range)) << "\" stroke=\"#666666\" stroke-width=\"1\"/>\n";

  for (int i = 0; i < 3; ++i) {
    const MMPoint& p = spec.points[i];
    const std::string& color = spec.colors[i];

    // Guide line through the estimate: parallel to the diagonal for a
    // difference, through the origin for a ratio.
    if (spec.measure == Measure::difference) {
      double d0 = p.rx_value - p.c_value;
      double x0 = std::max(0.0, -d0), y0 = x0 + d0;
      double x1 = std::min(fr.range, fr.range - d0), y1 = x1 + d0;
      svg << "<line x1=\"" << fmt(fr.px(x0)) << "\" y1=\"" << fmt(fr.py(y0))
          << "\" x2=\"" << fmt(fr.px(x1)) << "\" y2=\"" << fmt(fr.py(y1))
          << "\" stroke=\"" << color
          << "\" stroke-width=\"0.8\" stroke-dasharray=\"4 3\"/>\n";
    } else {
      double slope = p.rx_value / p.c_value;
      double x1 = slope > 1.0 ? fr.range / slope : fr.range;
      svg << "<line x1=\"" << fmt(fr.px(0)) << "\" y1=\"" << fmt(fr.py(0))
          << "\" x2=\"" << fmt(fr.px(x1)) << "\" y2=\"" << fmt(fr.py(x1 * slope))
          << "\" stroke=\"" << color
          << "\" stroke-width=\"0.8\" stroke-dasharray=\"4 3\"/>\n";
    }

    // Simultaneous interval: perpendicular segment or origin-centred arc.
    if (spec.measure == Measure::difference) {
      double d0 = p.rx_value - p.c_value;
      double s_lo = (p.interval_low - d0) / 2.0;
      double s_hi = (p.interval_high - d0) / 2.0;
      svg << "<line x1=\"" << fmt(fr.px(p.c_value - s_lo)) << "\" y1=\""
          << fmt(fr.py(p.rx_value + s_lo)) << "\" x2=\""
          << fmt(fr.px(p.c_value - s_hi)) << "\" y2=\""
          << fmt(fr.py(p.rx_value + s_hi)) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
    } else {
      double r = std::hypot(p.c_value, p.rx_value);
      double a_lo = std::atan(p.interval_low);
      double a_hi = std::atan(p.interval_high);
      double x_lo = r * std::cos(a_lo), y_lo = r * std::sin(a_lo);
      double x_hi = r * std::cos(a_hi), y_hi = r * std::sin(a_hi);
      double rp = r * fr.scale;
      svg << "<path d=\"M " << fmt(fr.px(x_lo)) << " " << fmt(fr.py(y_lo))
          << " A " << fmt(rp) << " " << fmt(rp) << " 0 0 0 "
          << fmt(fr.px(x_hi)) << " " << fmt(fr.py(y_hi)) << "\" fill=\"none\" stroke=\""
          << color << "\" stroke-width=\"2\"/>\n";
    }

    // Marker: circle, square, diamond for g-, g+, mixture.
    double cx = fr.px(p.c_value), cy = fr.py(p.rx_value);
    if (p.group == Group::g_minus) {
      svg << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy)
          << "\" r=\"4.5\" fill=\"" << color << "\" stroke=\"black\"/>\n";
    } else if (p.group == Group::g_plus) {
      svg << "<rect x=\"" << fmt(cx - 4.0) << "\" y=\"" << fmt(cy - 4.0)
          << "\" width=\"8\" height=\"8\" fill=\"" << color
          << "\" stroke=\"black\"/>\n";
    } else {
      svg << "<path d=\"M " << fmt(cx) << " " << fmt(cy - 5.5) << " L "
          << fmt(cx + 5.5) << " " << fmt(cy) << " L " << fmt(cx) << " "
          << fmt(cy + 5.5) << " L " << fmt(cx - 5.5) << " " << fmt(cy)
          << " Z\" fill=\"" << color << "\" stroke=\"black\"/>\n";
    }
  }

  // Legend and labels.
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  for (int i = 0; i < 3; ++i) {
    double lx = spec.margin + 12.0, ly = spec.margin + 16.0 * i + 4.0;
    svg << "<rect x=\"" << fmt(lx - 9) << "\" y=\"" << fmt(ly - 9)
        << "\" width=\"9\" height=\"9\" fill=\"" << spec.colors[i] << "\"/>\n"
        << "<text x=\"" << fmt(lx + 4) << "\" y=\"" << fmt(ly) << "\">"
        << escape_xml(marker_name(spec.points[i].group)) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(fr.px(fr.range / 2.0)) << "\" y=\""
      << fmt(spec.height - 12.0) << "\" text-anchor=\"middle\">"
      << escape_xml(spec.x_label) << "</text>\n"
      << "<text x=\"14\" y=\"" << fmt(fr.py(fr.range / 2.0))
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << fmt(fr.py(fr.range / 2.0)) << ")\">" << escape_xml(spec.y_label)
      << "</text>\n";
  if (!spec.title.empty())
    svg << "<text x=\"" << fmt(spec.width / 2.0)
        << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << escape_xml(spec.title) << "</text>\n";
  svg << "</g>\n</svg>\n";
  return svg.str();
}

MMPlotSpec mmplot_spec_from_report(const EfficacyReport& report) {
  MMPlotSpec spec;
  spec.measure = report.measure;
  bool median = report.summary == Summary::median;
  const ArmSummary& c = report.control;
  const ArmSummary& rx = report.treatment;
  const double cs[3] = {median ? c.median_gminus : c.mean_gminus,
                        median ? c.median_gplus : c.mean_gplus,
                        median ? c.median_mixture : c.mean_mixture};
  const double rxs[3] = {median ? rx.median_gminus : rx.mean_gminus,
                         median ? rx.median_gplus : rx.mean_gplus,
                         median ? rx.median_mixture : rx.mean_mixture};
  for (int i = 0; i < 3; ++i) {
    spec.points[i] = {report.estimates[i].group, cs[i], rxs[i],
                      report.estimates[i].sci_low,
                      report.estimates[i].sci_high};
  }
  std::string what = median ? "median" : "mean";
  spec.x_label = "C " + what + " survival";
  spec.y_label = "Rx " + what + " survival";
  spec.title = (report.measure == Measure::difference ? "Difference of "
                                                      : "Ratio of ") +
               what + "s with simultaneous " +
               fmt(100.0 * (1.0 - report.alpha)) + "% intervals";
  return spec;
}

}  // namespace sme

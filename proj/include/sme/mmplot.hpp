#pragma once

#include <array>
#include <string>
#include <utility>

#include "sme/efficacy.hpp"

namespace sme {

struct MMPoint {
  Group group = Group::g_minus;
  double c_value = 0.0;       // horizontal axis: control summary
  double rx_value = 0.0;      // vertical axis: treatment summary
  double interval_low = 0.0;  // simultaneous interval on the chosen measure
  double interval_high = 0.0;
};

struct MMPlotSpec {
  std::array<MMPoint, 3> points;  // g-, g+, mixture
  Measure measure = Measure::difference;
  std::string x_label = "C";
  std::string y_label = "Rx";
  std::string title;
  int width = 640;
  int height = 640;
  double margin = 64.0;
  // marker fill per group (g-, g+, mixture)
  std::array<std::string, 3> colors = {"#c0392b", "#1e8449", "#1f618d"};

  void validate() const;
};

/// Render the plot as a standalone SVG 1.1 document. Points sit in
/// (C, Rx) coordinates against the 45-degree identity line; difference
/// intervals draw as segments through the point perpendicular to the
/// diagonal (endpoint offsets scaled so offset*sqrt(2) equals the bound);
/// ratio intervals draw as origin-centred arcs from atan(low) to atan(high).
/// A segment or arc crossing the diagonal means the interval contains the
/// null value. Both axes share one scale, so the diagonal is visually 45
/// degrees and origin-centred arcs stay circular.
std::string render_mm_plot(const MMPlotSpec& spec);

/// Signed perpendicular distance from (c_value, rx_value) to the diagonal,
/// (rx - c)/sqrt(2). A difference interval bound b sits at offset b/sqrt(2).
double perpendicular_offset(double c_value, double rx_value);

/// Polar angles (degrees from the C axis) of a ratio interval's arc ends:
/// atan of the bounds.
std::pair<double, double> arc_angles_deg(double low, double high);

/// Build a plot spec straight from an efficacy report.
MMPlotSpec mmplot_spec_from_report(const EfficacyReport& report);

}  // namespace sme

#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sme/model.hpp"

namespace testsup {

// The three simulation settings used throughout (lambda=50 weeks, k=1.25).
inline sme::ModelParams setting_a() { return {50.0, 1.25, 0.5, -1.0, -1.0}; }
inline sme::ModelParams setting_b() { return {50.0, 1.25, -0.1, -0.5, -0.5}; }
inline sme::ModelParams setting_c() { return {50.0, 1.25, -0.5, -1.0, 0.0}; }

// Independent adaptive-Simpson quadrature, used as an oracle only.
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double quadrature(const std::function<double(double)>& f, double a,
                         double b, double tol = 1e-10) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Central finite difference.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Deterministic uniform draws for property tests.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) {
    double u = (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  double normal() {
    double u1 = uniform(0.0, 1.0), u2 = uniform(0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Random correlation matrix: normalized Gram matrix of random vectors.
inline Eigen::MatrixXd random_correlation(Draw& draw, int m) {
  Eigen::MatrixXd a(m, m + 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m + 2; ++j) a(i, j) = draw.normal();
  Eigen::MatrixXd s = a * a.transpose();
  Eigen::VectorXd d = s.diagonal().cwiseSqrt();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) s(i, j) /= d[i] * d[j];
  for (int i = 0; i < m; ++i) s(i, i) = 1.0;
  return 0.5 * (s + s.transpose());
}

// Confidence elements in a rendered M&M plot carry stroke-width="2":
// interval segments as <line>, interval arcs as <path d="M ... A ...">.
// Returns their endpoint pixel coordinates in document order.
struct SvgSegment {
  double x1, y1, x2, y2;
};

inline double svg_attr(const std::string& elem, const std::string& name) {
  size_t p = elem.find(name + "=\"");
  if (p == std::string::npos)
    throw std::runtime_error("missing attribute " + name);
  size_t start = p + name.size() + 2;
  return std::stod(elem.substr(start, elem.find('"', start) - start));
}

inline std::vector<SvgSegment> extract_ci_elements(const std::string& svg) {
  std::vector<SvgSegment> out;
  size_t pos = 0;
  while ((pos = svg.find('<', pos)) != std::string::npos) {
    size_t end = svg.find('>', pos);
    if (end == std::string::npos) break;
    std::string elem = svg.substr(pos, end - pos + 1);
    if (elem.find("stroke-width=\"2\"") != std::string::npos) {
      if (elem.rfind("<line", 0) == 0) {
        out.push_back({svg_attr(elem, "x1"), svg_attr(elem, "y1"),
                       svg_attr(elem, "x2"), svg_attr(elem, "y2")});
      } else if (elem.rfind("<path", 0) == 0 &&
                 elem.find(" A ") != std::string::npos) {
        // M x1 y1 A rx ry rot large-arc sweep x2 y2
        size_t d0 = elem.find("d=\"M ") + 5;
        std::string d = elem.substr(d0, elem.find('"', d0) - d0);
        std::istringstream ss(d);
        SvgSegment s{};
        std::string tok;
        double rx, ry, rot, laf, sf;
        ss >> s.x1 >> s.y1 >> tok >> rx >> ry >> rot >> laf >> sf >> s.x2 >> s.y2;
        if (tok != "A") throw std::runtime_error("unexpected path command");
        out.push_back(s);
      }
    }
    pos = end + 1;
  }
  return out;
}

// Minimal XML well-formedness check for the generated SVG subset:
// matched/nested tags, quoted attributes, no stray '<' or '&' in text.
inline bool xml_well_formed(const std::string& doc, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::vector<std::string> stack;
  size_t i = 0;
  bool seen_root = false;
  while (i < doc.size()) {
    char c = doc[i];
    if (c == '<') {
      size_t end = doc.find('>', i);
      if (end == std::string::npos) return fail("unterminated tag");
      std::string tag = doc.substr(i + 1, end - i - 1);
      if (tag.empty()) return fail("empty tag");
      if (tag[0] == '?') {
        if (tag.back() != '?') return fail("bad declaration");
      } else if (tag[0] == '/') {
        std::string name = tag.substr(1);
        if (stack.empty() || stack.back() != name)
          return fail("mismatched closing tag " + name);
        stack.pop_back();
      } else {
        bool self_close = tag.back() == '/';
        std::string body = self_close ? tag.substr(0, tag.size() - 1) : tag;
        size_t sp = body.find_first_of(" \t\n");
        std::string name = sp == std::string::npos ? body : body.substr(0, sp);
        if (name.empty()) return fail("missing tag name");
        // attributes: everything after the name must be key="value" pairs
        size_t p = name.size();
        while (p < body.size()) {
          while (p < body.size() && std::isspace(static_cast<unsigned char>(body[p]))) ++p;
          if (p >= body.size()) break;
          size_t eq = body.find('=', p);
          if (eq == std::string::npos) return fail("attribute without value in " + name);
          if (eq + 1 >= body.size() || body[eq + 1] != '"')
            return fail("unquoted attribute in " + name);
          size_t close = body.find('"', eq + 2);
          if (close == std::string::npos) return fail("unterminated attribute in " + name);
          p = close + 1;
        }
        if (stack.empty() && seen_root && !self_close)
          return fail("second root element");
        if (!self_close) {
          stack.push_back(name);
          seen_root = true;
        } else if (stack.empty()) {
          seen_root = true;
        }
      }
      i = end + 1;
    } else if (c == '&') {
      size_t semi = doc.find(';', i);
      if (semi == std::string::npos || semi - i > 6) return fail("bad entity");
      std::string ent = doc.substr(i + 1, semi - i - 1);
      if (ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" &&
          ent != "apos")
        return fail("unknown entity &" + ent + ";");
      i = semi + 1;
    } else {
      if (c == '>') return fail("stray '>'");
      ++i;
    }
  }
  if (!stack.empty()) return fail("unclosed element " + stack.back());
  return true;
}

}  // namespace testsup

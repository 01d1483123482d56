#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kqf::cli {

namespace {

std::string fmt(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

// Round step of roughly span/5.
double nice_step(double span) {
  if (span <= 0) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
}

}  // namespace

std::string svg_heatmap(const Matrix& m, const std::string& title) {
  const int cell = std::max(1, std::min(12, static_cast<int>(480 / std::max<Index>(1, std::max(m.rows(), m.cols())))));
  const int w = static_cast<int>(m.cols()) * cell + 40;
  const int h = static_cast<int>(m.rows()) * cell + 60;
  const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  std::string out = header(w, h);
  out += "<text x=\"20\" y=\"24\" font-size=\"14\">" + escape(title) + "</text>\n";
  out += "<text x=\"20\" y=\"" + std::to_string(h - 8) + "\" font-size=\"10\">max |entry| = " + tick_label(scale) +
         "</text>\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = scale > 0 ? m(i, j) / scale : 0.0;
      if (v == 0.0) continue;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::min(1.0, std::abs(v)))));
      const std::string color = v > 0 ? "rgb(255," + std::to_string(shade) + "," + std::to_string(shade) + ")"
                                      : "rgb(" + std::to_string(shade) + "," + std::to_string(shade) + ",255)";
      out += "<rect x=\"" + std::to_string(20 + j * cell) + "\" y=\"" + std::to_string(36 + i * cell) +
             "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" + color +
             "\"/>\n";
    }
  }
  out += "<rect x=\"20\" y=\"36\" width=\"" + std::to_string(m.cols() * cell) + "\" height=\"" +
         std::to_string(m.rows() * cell) + "\" fill=\"none\" stroke=\"#444\"/>\n</svg>\n";
  return out;
}

std::string svg_line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel) {
  const int w = 640, h = 420, left = 70, right = 170, top = 40, bottom = 50;
  const int pw = w - left - right, ph = h - top - bottom;
  double xmin = INFINITY, xmax = -INFINITY, ymin = 0.0, ymax = -INFINITY;
  for (const auto& s : series) {
    for (double x : s.x) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
    for (double y : s.y) ymin = std::min(ymin, y), ymax = std::max(ymax, y);
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
  if (!std::isfinite(ymax)) ymax = 1.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const double ystep = nice_step(ymax - ymin);
  ymax = std::ceil(ymax / ystep) * ystep;
  const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  const auto py = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string out = header(w, h);
  out += "<text x=\"" + std::to_string(left) + "\" y=\"24\" font-size=\"14\">" + escape(title) + "</text>\n";
  out += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top) + "\" width=\"" + std::to_string(pw) +
         "\" height=\"" + std::to_string(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double y = ymin; y <= ymax + 1e-9 * ystep; y += ystep) {
    out += "<line x1=\"" + std::to_string(left - 4) + "\" x2=\"" + std::to_string(left + pw) + "\" y1=\"" +
           fmt(py(y)) + "\" y2=\"" + fmt(py(y)) + "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + fmt(py(y) + 4) +
           "\" font-size=\"10\" text-anchor=\"end\">" + tick_label(y) + "</text>\n";
  }
  std::vector<double> xticks;
  for (const auto& s : series) xticks.insert(xticks.end(), s.x.begin(), s.x.end());
  std::sort(xticks.begin(), xticks.end());
  xticks.erase(std::unique(xticks.begin(), xticks.end()), xticks.end());
  for (double x : xticks) {
    out += "<text x=\"" + fmt(px(x)) + "\" y=\"" + std::to_string(top + ph + 16) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + tick_label(x) + "</text>\n";
  }
  out += "<text x=\"" + std::to_string(left + pw / 2) + "\" y=\"" + std::to_string(h - 10) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  out += "<text x=\"16\" y=\"" + std::to_string(top + ph / 2) + "\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 " + std::to_string(top + ph / 2) + ")\">" + escape(ylabel) + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string pts;
    for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
      pts += (j ? " " : "") + fmt(px(s.x[j])) + "," + fmt(py(s.y[j]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"" +
           (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + " points=\"" + pts + "\"/>\n";
    if (!s.dashed) {
      for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
        out += "<circle cx=\"" + fmt(px(s.x[j])) + "\" cy=\"" + fmt(py(s.y[j])) + "\" r=\"3\" fill=\"" + color +
               "\"/>\n";
      }
    }
    const int ly = top + 12 + static_cast<int>(i) * 18;
    out += "<line x1=\"" + std::to_string(left + pw + 12) + "\" x2=\"" + std::to_string(left + pw + 36) + "\" y1=\"" +
           std::to_string(ly) + "\" y2=\"" + std::to_string(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
           (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    out += "<text x=\"" + std::to_string(left + pw + 42) + "\" y=\"" + std::to_string(ly + 4) +
           "\" font-size=\"11\">" + escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace kqf::cli

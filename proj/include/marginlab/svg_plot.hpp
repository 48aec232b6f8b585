#ifndef MARGINLAB_SVG_PLOT_HPP
#define MARGINLAB_SVG_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "marginlab/errors.hpp"
#include "marginlab/trajectory.hpp"

namespace marginlab {

/// Minimal dependency-free SVG line-plot writer. Supports linear or log axes
/// (decade ticks on log axes), several series, dashed horizontal reference
/// lines and a legend. Data with nonpositive coordinates on a log axis is
/// dropped from that series.
class SvgLinePlot {
public:
  SvgLinePlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)),
        xlabel_(std::move(xlabel)),
        ylabel_(std::move(ylabel)) {}

  void set_log_x(bool v) { log_x_ = v; }
  void set_log_y(bool v) { log_y_ = v; }

  void add_series(std::string name,
                  std::vector<std::pair<double, double>> points) {
    series_.push_back({std::move(name), std::move(points)});
  }

  void add_hline(double y, std::string label) {
    hlines_.push_back({y, std::move(label)});
  }

  std::string render() const;

private:
  struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
  };
  struct HLine {
    double y;
    std::string label;
  };

  static constexpr double kWidth = 860.0;
  static constexpr double kHeight = 540.0;
  static constexpr double kLeft = 80.0, kRight = 30.0, kTop = 50.0,
                          kBottom = 60.0;

  bool usable(double x, double y) const {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    if (log_x_ && x <= 0.0) return false;
    if (log_y_ && y <= 0.0) return false;
    return true;
  }

  std::string title_, xlabel_, ylabel_;
  bool log_x_ = false, log_y_ = false;
  std::vector<Series> series_;
  std::vector<HLine> hlines_;
};

inline std::string SvgLinePlot::render() const {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series_)
    for (const auto& [x, y] : s.points) {
      if (!usable(x, y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  for (const auto& h : hlines_)
    if (!log_y_ || h.y > 0.0) {
      ymin = std::min(ymin, h.y);
      ymax = std::max(ymax, h.y);
    }
  if (!(xmin < xmax)) xmax = xmin + 1.0;
  if (!(ymin < ymax)) ymax = ymin + 1.0;
  if (!std::isfinite(xmin) || !std::isfinite(ymin))
    throw InvalidInputError("SvgLinePlot: no plottable points");
  if (!log_y_) {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  auto tx = [&](double x) {
    const double lo = log_x_ ? std::log10(xmin) : xmin;
    const double hi = log_x_ ? std::log10(xmax) : xmax;
    const double v = log_x_ ? std::log10(x) : x;
    return kLeft + (v - lo) / (hi - lo) * (kWidth - kLeft - kRight);
  };
  auto ty = [&](double y) {
    const double lo = log_y_ ? std::log10(ymin) : ymin;
    const double hi = log_y_ ? std::log10(ymax) : ymax;
    const double v = log_y_ ? std::log10(y) : y;
    return kHeight - kBottom -
           (v - lo) / (hi - lo) * (kHeight - kTop - kBottom);
  };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_double(kWidth) + "\" height=\"" + format_double(kHeight) +
         "\" viewBox=\"0 0 " + format_double(kWidth) + " " +
         format_double(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_double(kWidth / 2) +
         "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\" "
         "font-family=\"sans-serif\">" + title_ + "</text>\n";

  // axes
  svg += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" +
         format_double(kHeight - kBottom) + "\" x2=\"" +
         format_double(kWidth - kRight) + "\" y2=\"" +
         format_double(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" +
         format_double(kTop) + "\" x2=\"" + format_double(kLeft) +
         "\" y2=\"" + format_double(kHeight - kBottom) +
         "\" stroke=\"black\"/>\n";

  auto tick_values = [](double lo, double hi, bool log_axis) {
    std::vector<double> ticks;
    if (log_axis) {
      const int e0 = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
      const int e1 = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
      for (int e = e0; e <= e1; ++e) ticks.push_back(std::pow(10.0, e));
    } else {
      const double span = hi - lo;
      const double raw = span / 6.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      double step = mag;
      if (raw / mag > 5.0)
        step = 10.0 * mag;
      else if (raw / mag > 2.0)
        step = 5.0 * mag;
      else if (raw / mag > 1.0)
        step = 2.0 * mag;
      for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span;
           v += step)
        ticks.push_back(v);
    }
    return ticks;
  };

  auto fmt_tick = [](double v, bool log_axis) {
    if (log_axis) {
      const int e = static_cast<int>(std::llround(std::log10(v)));
      return "1e" + std::to_string(e);
    }
    return format_double(v);
  };

  for (double v : tick_values(xmin, xmax, log_x_)) {
    const double px = tx(v);
    svg += "<line x1=\"" + format_double(px) + "\" y1=\"" +
           format_double(kHeight - kBottom) + "\" x2=\"" + format_double(px) +
           "\" y2=\"" + format_double(kHeight - kBottom + 6) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_double(px) + "\" y=\"" +
           format_double(kHeight - kBottom + 22) +
           "\" text-anchor=\"middle\" font-size=\"12\" "
           "font-family=\"sans-serif\">" + fmt_tick(v, log_x_) + "</text>\n";
  }
  for (double v : tick_values(ymin, ymax, log_y_)) {
    const double py = ty(v);
    svg += "<line x1=\"" + format_double(kLeft - 6) + "\" y1=\"" +
           format_double(py) + "\" x2=\"" + format_double(kLeft) + "\" y2=\"" +
           format_double(py) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_double(kLeft - 10) + "\" y=\"" +
           format_double(py + 4) +
           "\" text-anchor=\"end\" font-size=\"12\" "
           "font-family=\"sans-serif\">" + fmt_tick(v, log_y_) + "</text>\n";
  }

  svg += "<text x=\"" + format_double((kLeft + kWidth - kRight) / 2) +
         "\" y=\"" + format_double(kHeight - 16) +
         "\" text-anchor=\"middle\" font-size=\"14\" "
         "font-family=\"sans-serif\">" + xlabel_ + "</text>\n";
  svg += "<text x=\"22\" y=\"" + format_double((kTop + kHeight - kBottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"14\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 22 " +
         format_double((kTop + kHeight - kBottom) / 2) + ")\">" + ylabel_ +
         "</text>\n";

  for (const auto& h : hlines_) {
    if (log_y_ && h.y <= 0.0) continue;
    const double py = ty(std::clamp(h.y, ymin, ymax));
    svg += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" +
           format_double(py) + "\" x2=\"" + format_double(kWidth - kRight) +
           "\" y2=\"" + format_double(py) +
           "\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n";
    svg += "<text x=\"" + format_double(kWidth - kRight - 4) + "\" y=\"" +
           format_double(py - 5) +
           "\" text-anchor=\"end\" font-size=\"12\" "
           "font-family=\"sans-serif\" fill=\"#444\">" + h.label + "</text>\n";
  }

  std::size_t color_idx = 0;
  for (const auto& s : series_) {
    const char* color = kColors[color_idx % 8];
    std::string points;
    for (const auto& [x, y] : s.points) {
      if (!usable(x, y)) continue;
      points += format_double(tx(x)) + "," + format_double(ty(y)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.6\" points=\"" + points + "\"/>\n";
    const double ly = kTop + 18.0 * static_cast<double>(color_idx);
    svg += "<line x1=\"" + format_double(kLeft + 10) + "\" y1=\"" +
           format_double(ly) + "\" x2=\"" + format_double(kLeft + 34) +
           "\" y2=\"" + format_double(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + format_double(kLeft + 40) + "\" y=\"" +
           format_double(ly + 4) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + s.name +
           "</text>\n";
    ++color_idx;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace marginlab

#endif  // MARGINLAB_SVG_PLOT_HPP

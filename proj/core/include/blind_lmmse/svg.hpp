#pragma once

#include <string>
#include <vector>

namespace blmmse {

/// Minimal self-contained SVG line plot: axes, ticks, optional log scales
/// and a legend. Non-positive values are dropped on log axes.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  SvgPlot& log_x(bool on = true) { log_x_ = on; return *this; }
  SvgPlot& log_y(bool on = true) { log_y_ = on; return *this; }
  SvgPlot& add_series(std::string name, std::vector<double> xs, std::vector<double> ys, bool markers = true);
  /// Shaded band between lo and hi along xs.
  SvgPlot& add_band(std::vector<double> xs, std::vector<double> lo, std::vector<double> hi);

  std::string render(int width = 720, int height = 480) const;

 private:
  struct Series {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
    bool markers;
  };
  struct Band {
    std::vector<double> xs;
    std::vector<double> lo;
    std::vector<double> hi;
  };

  std::string title_;
  std::string x_label_;
  std::string y_label_;
  bool log_x_ = false;
  bool log_y_ = false;
  std::vector<Series> series_;
  std::vector<Band> bands_;
};

}  // namespace blmmse

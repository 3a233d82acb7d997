#include "blind_lmmse/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blmmse {

namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double t(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return hi > lo ? (t(v) - lo) / (hi - lo) : 0.5; }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::floor(lo); e <= std::ceil(hi); e += 1.0) {
        if (e >= lo - 1e-9 && e <= hi + 1e-9) out.push_back(std::pow(10.0, e));
      }
      if (out.size() >= 2) return out;
      out.clear();
    }
    const double a = log ? std::pow(10.0, lo) : lo;
    const double b = log ? std::pow(10.0, hi) : hi;
    for (int i = 0; i <= 4; ++i) out.push_back(a + (b - a) * i / 4.0);
    return out;
  }
};

Axis fit_axis(const std::vector<double>& values, bool log) {
  Axis ax;
  ax.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!ax.usable(v)) continue;
    lo = std::min(lo, ax.t(v));
    hi = std::max(hi, ax.t(v));
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::abs(lo) * 0.1, 0.5);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  ax.lo = lo;
  ax.hi = hi;
  return ax;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

SvgPlot& SvgPlot::add_series(std::string name, std::vector<double> xs, std::vector<double> ys, bool markers) {
  if (xs.size() != ys.size()) throw std::invalid_argument("series x and y lengths differ");
  series_.push_back({std::move(name), std::move(xs), std::move(ys), markers});
  return *this;
}

SvgPlot& SvgPlot::add_band(std::vector<double> xs, std::vector<double> lo, std::vector<double> hi) {
  if (xs.size() != lo.size() || xs.size() != hi.size()) throw std::invalid_argument("band lengths differ");
  bands_.push_back({std::move(xs), std::move(lo), std::move(hi)});
  return *this;
}

std::string SvgPlot::render(int width, int height) const {
  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  std::vector<double> all_x;
  std::vector<double> all_y;
  for (const auto& s : series_) {
    all_x.insert(all_x.end(), s.xs.begin(), s.xs.end());
    all_y.insert(all_y.end(), s.ys.begin(), s.ys.end());
  }
  for (const auto& b : bands_) {
    all_x.insert(all_x.end(), b.xs.begin(), b.xs.end());
    all_y.insert(all_y.end(), b.lo.begin(), b.lo.end());
    all_y.insert(all_y.end(), b.hi.begin(), b.hi.end());
  }
  const Axis ax = fit_axis(all_x, log_x_);
  const Axis ay = fit_axis(all_y, log_y_);
  auto px = [&](double v) { return left + ax.frac(v) * pw; };
  auto py = [&](double v) { return top + (1.0 - ay.frac(v)) * ph; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      width, height, width, height);
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", left + pw / 2,
                     escape(title_));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left, top,
                     pw, ph);

  for (double t : ax.ticks()) {
    const double x = px(t);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", x, top, x,
                       top + ph);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.3g}</text>\n", x, top + ph + 16, t);
  }
  for (double t : ay.ticks()) {
    const double y = py(t);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", left, y,
                       left + pw, y);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6, y + 4, t);
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2, height - 16,
                     escape(x_label_ + (log_x_ ? " (log)" : "")));
  out += fmt::format(
      "<text x=\"18\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2f})\">{}</text>\n",
      top + ph / 2, top + ph / 2, escape(y_label_ + (log_y_ ? " (log)" : "")));

  for (const auto& b : bands_) {
    std::string pts;
    for (std::size_t i = 0; i < b.xs.size(); ++i) {
      if (ax.usable(b.xs[i]) && ay.usable(b.hi[i])) pts += fmt::format("{:.2f},{:.2f} ", px(b.xs[i]), py(b.hi[i]));
    }
    for (std::size_t i = b.xs.size(); i-- > 0;) {
      if (ax.usable(b.xs[i]) && ay.usable(b.lo[i])) pts += fmt::format("{:.2f},{:.2f} ", px(b.xs[i]), py(b.lo[i]));
    }
    out += fmt::format("<polygon points=\"{}\" fill=\"#888\" fill-opacity=\"0.2\" stroke=\"none\"/>\n", pts);
  }

  for (std::size_t s = 0; s < series_.size(); ++s) {
    const auto& ser = series_[s];
    const char* color = kPalette[s % kPalette.size()];
    std::string pts;
    for (std::size_t i = 0; i < ser.xs.size(); ++i) {
      if (ax.usable(ser.xs[i]) && ay.usable(ser.ys[i])) {
        pts += fmt::format("{:.2f},{:.2f} ", px(ser.xs[i]), py(ser.ys[i]));
      }
    }
    out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"/>\n", pts, color);
    if (ser.markers) {
      for (std::size_t i = 0; i < ser.xs.size(); ++i) {
        if (ax.usable(ser.xs[i]) && ay.usable(ser.ys[i])) {
          out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(ser.xs[i]),
                             py(ser.ys[i]), color);
        }
      }
    }
    const double ly = top + 14 + 18 * static_cast<double>(s);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       left + pw + 12, ly, left + pw + 36, ly, color);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", left + pw + 42, ly + 4, escape(ser.name));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace blmmse

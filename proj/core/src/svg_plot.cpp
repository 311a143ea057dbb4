#include "vropt/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "vropt/errors.hpp"

namespace vropt {

namespace {

constexpr double kWidth = 960.0, kHeight = 600.0;
constexpr double kLeft = 72.0, kRight = 932.0, kTop = 46.0, kBottom = 548.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  std::array<char, 32> buf;
  std::snprintf(buf.data(), buf.size(), "%.6g", v);
  return std::string(buf.data());
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string emit_plot_svg(const std::vector<Trace>& traces, const PlotOptions& options) {
  if (traces.empty()) throw InvalidArgument("emit_plot_svg: no traces");
  for (const auto& t : traces)
    if (t.records.empty()) throw InvalidArgument("emit_plot_svg: empty trace");

  // Data ranges. The y floor keeps exact zeros drawable on the log axis.
  double x_max = 1.0;
  double y_min_pos = std::numeric_limits<double>::infinity();
  double y_max = 0.0;
  bool any_zero = false;
  for (const auto& t : traces)
    for (const auto& r : t.records) {
      x_max = std::max(x_max, static_cast<double>(r.paper_count));
      if (r.grad_norm > 0.0) {
        y_min_pos = std::min(y_min_pos, r.grad_norm);
        y_max = std::max(y_max, r.grad_norm);
      } else {
        any_zero = true;
      }
    }
  if (!std::isfinite(y_min_pos)) {
    y_min_pos = 1e-16;
    y_max = 1.0;
  }
  const double y_floor = any_zero ? y_min_pos / 10.0 : y_min_pos;
  double lo = std::floor(std::log10(y_floor));
  double hi = std::ceil(std::log10(std::max(y_max, y_floor * 10.0)));
  if (hi - lo < 1.0) hi = lo + 1.0;

  const auto sx = [&](double paper) { return kLeft + (kRight - kLeft) * paper / x_max; };
  const auto sy = [&](double g) {
    const double v = std::log10(std::max(g, y_floor));
    return kBottom - (kBottom - kTop) * (v - lo) / (hi - lo);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 600\" "
         "font-family=\"sans-serif\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"600\" fill=\"white\"/>\n";
  svg += "<text x=\"480\" y=\"24\" text-anchor=\"middle\" font-size=\"17\">" +
         escape_xml(options.title) + "</text>\n";

  // Frame.
  svg += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" +
         fmt(kRight - kLeft) + "\" height=\"" + fmt(kBottom - kTop) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";

  // Horizontal decade grid and labels.
  for (double e = lo; e <= hi + 0.5; e += 1.0) {
    const double y = sy(std::pow(10.0, e));
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kRight) +
           "\" y2=\"" + fmt(y) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + fmt(kLeft - 6.0) + "\" y=\"" + fmt(y + 4.0) +
           "\" text-anchor=\"end\" font-size=\"12\">1e" + fmt(e) + "</text>\n";
  }

  // Five evenly spaced x ticks.
  for (int t = 0; t <= 5; ++t) {
    const double paper = x_max * t / 5.0;
    const double x = sx(paper);
    svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
           fmt(kBottom + 5.0) + "\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(kBottom + 20.0) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + fmt(paper) + "</text>\n";
  }

  svg += "<text x=\"" + fmt((kLeft + kRight) / 2.0) + "\" y=\"588\" text-anchor=\"middle\" "
         "font-size=\"14\">" + escape_xml(options.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt((kTop + kBottom) / 2.0) +
         "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 " +
         fmt((kTop + kBottom) / 2.0) + ")\">" + escape_xml(options.y_label) + "</text>\n";

  // Curves and full-batch markers.
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const auto& t = traces[ti];
    const char* color = kPalette[ti % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string pts;
    for (const auto& r : t.records) {
      pts += fmt(sx(static_cast<double>(r.paper_count)));
      pts += ',';
      pts += fmt(sy(r.grad_norm));
      pts += ' ';
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
    for (const auto& r : t.records)
      if (r.full_batch_event)
        svg += "<circle cx=\"" + fmt(sx(static_cast<double>(r.paper_count))) + "\" cy=\"" +
               fmt(sy(r.grad_norm)) + "\" r=\"4\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
  }

  // Legend, swatches only (circles are reserved for full-batch markers).
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const char* color = kPalette[ti % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const double y = kTop + 16.0 + 18.0 * static_cast<double>(ti);
    const std::string name = traces[ti].label.empty()
                                 ? "trace " + std::to_string(ti + 1)
                                 : traces[ti].label;
    svg += "<rect x=\"" + fmt(kRight - 170.0) + "\" y=\"" + fmt(y - 5.0) +
           "\" width=\"22\" height=\"5\" fill=\"" + std::string(color) + "\"/>\n";
    svg += "<text x=\"" + fmt(kRight - 142.0) + "\" y=\"" + fmt(y) +
           "\" font-size=\"12\">" + escape_xml(name) + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

void write_plot_svg_file(const std::vector<Trace>& traces, const std::string& path,
                         const PlotOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << emit_plot_svg(traces, options);
}

}  // namespace vropt

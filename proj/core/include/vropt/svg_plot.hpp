#pragma once

#include <string>
#include <vector>

#include "vropt/trace.hpp"

namespace vropt {

struct PlotOptions {
  std::string title = "convergence";
  std::string x_label = "stochastic gradient evaluations";
  std::string y_label = "gradient norm";
};

// Static SVG, fixed 960x600 view box: gradient norm on a log axis against
// paper_count, one polyline per trace, a circle marker on every record where
// a full batch (or full participation) happened. Zero grad_norm values are
// floored to a tenth of the smallest positive value so the log axis stays
// finite.
std::string emit_plot_svg(const std::vector<Trace>& traces, const PlotOptions& options = {});
void write_plot_svg_file(const std::vector<Trace>& traces, const std::string& path,
                         const PlotOptions& options = {});

}  // namespace vropt

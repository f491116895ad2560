#pragma once

#include <string>
#include <vector>

#include "voxrf/image.hpp"

namespace voxrf {

struct PlotSeries {
  std::vector<double> x, y;
  Vec3 color{0.9, 0.3, 0.2};
};

// Minimal line/bar plot renderer so analysis artifacts are viewable without
// extra tooling. White background, dark frame, one polyline per series.
void write_line_plot(const std::string& path, const std::vector<PlotSeries>& series, int width = 640,
                     int height = 400);

void write_bar_plot(const std::string& path, const std::vector<double>& heights, int width = 640,
                    int height = 400);

}  // namespace voxrf

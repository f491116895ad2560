#include "voxrf/plot.hpp"

#include <algorithm>
#include <cmath>

namespace voxrf {
namespace {

constexpr int kMargin = 24;

void put_px(Image& img, int x, int y, const Vec3& c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = static_cast<float>(c[ch]);
}

void draw_line(Image& img, double x0, double y0, double x1, double y1, const Vec3& c) {
  double dx = x1 - x0, dy = y1 - y0;
  int steps = static_cast<int>(std::max(std::fabs(dx), std::fabs(dy))) + 1;
  for (int i = 0; i <= steps; ++i) {
    double t = static_cast<double>(i) / steps;
    put_px(img, static_cast<int>(std::lround(x0 + t * dx)),
           static_cast<int>(std::lround(y0 + t * dy)), c);
  }
}

void draw_frame(Image& img) {
  Vec3 dark{0.2, 0.2, 0.2};
  draw_line(img, kMargin, kMargin, img.width - kMargin, kMargin, dark);
  draw_line(img, kMargin, img.height - kMargin, img.width - kMargin, img.height - kMargin, dark);
  draw_line(img, kMargin, kMargin, kMargin, img.height - kMargin, dark);
  draw_line(img, img.width - kMargin, kMargin, img.width - kMargin, img.height - kMargin, dark);
}

}  // namespace

void write_line_plot(const std::string& path, const std::vector<PlotSeries>& series, int width,
                     int height) {
  Image img(width, height, 3, 1.0f);
  draw_frame(img);
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const PlotSeries& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto sx = [&](double x) {
    return kMargin + (x - xmin) / (xmax - xmin) * (width - 2 * kMargin);
  };
  auto sy = [&](double y) {
    return height - kMargin - (y - ymin) / (ymax - ymin) * (height - 2 * kMargin);
  };
  for (const PlotSeries& s : series)
    for (std::size_t i = 1; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i - 1]) || !std::isfinite(s.y[i])) continue;
      draw_line(img, sx(s.x[i - 1]), sy(s.y[i - 1]), sx(s.x[i]), sy(s.y[i]), s.color);
    }
  write_png(path, img);
}

void write_bar_plot(const std::string& path, const std::vector<double>& heights, int width,
                    int height) {
  Image img(width, height, 3, 1.0f);
  draw_frame(img);
  if (heights.empty()) {
    write_png(path, img);
    return;
  }
  double hmax = *std::max_element(heights.begin(), heights.end());
  if (hmax <= 0) hmax = 1;
  double span = width - 2.0 * kMargin;
  Vec3 fill{0.25, 0.45, 0.8};
  for (std::size_t i = 0; i < heights.size(); ++i) {
    int x0 = static_cast<int>(kMargin + span * i / heights.size()) + 1;
    int x1 = static_cast<int>(kMargin + span * (i + 1) / heights.size()) - 1;
    int top = static_cast<int>(height - kMargin - (height - 2.0 * kMargin) * heights[i] / hmax);
    for (int x = x0; x <= x1; ++x)
      for (int y = top; y < height - kMargin; ++y) put_px(img, x, y, fill);
  }
  write_png(path, img);
}

}  // namespace voxrf

#include "srfuse/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srfuse/error.hpp"

namespace srfuse {

ScaleFactor::ScaleFactor(int value) : value_(value) {
  if (value < 2) throw InvalidArgument("scale factor must be >= 2, got " + std::to_string(value));
}

namespace resample {

double cubic_kernel(double x) noexcept {
  const double ax = std::abs(x);
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (ax <= 1.0) return 1.5 * ax3 - 2.5 * ax2 + 1.0;
  if (ax < 2.0) return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
  return 0.0;
}

namespace {

// `stretch` > 1 widens the kernel (antialiasing on shrink).
kernels::AxisWeights build_axis(int in_size, int out_size, double ratio, double stretch) {
  kernels::AxisWeights axis;
  axis.in_size = in_size;
  axis.out_size = out_size;
  const double half_width = 2.0 * stretch;
  axis.taps = static_cast<int>(std::ceil(2.0 * half_width)) + 2;
  axis.index.resize(static_cast<std::size_t>(out_size) * axis.taps);
  axis.weight.resize(axis.index.size());

  for (int o = 0; o < out_size; ++o) {
    // Pixel-center alignment.
    const double center = (o + 0.5) * ratio - 0.5;
    const int left = static_cast<int>(std::floor(center - half_width));
    double sum = 0.0;
    const std::size_t base = static_cast<std::size_t>(o) * axis.taps;
    for (int t = 0; t < axis.taps; ++t) {
      const int src = left + t;
      const double w = cubic_kernel((center - src) / stretch);
      axis.index[base + t] = std::clamp(src, 0, in_size - 1);
      axis.weight[base + t] = w;
      sum += w;
    }
    for (int t = 0; t < axis.taps; ++t) axis.weight[base + t] /= sum;
  }
  return axis;
}

PixelGrid apply_separable(const PixelGrid& grid, const kernels::AxisWeights& ax,
                          const kernels::AxisWeights& ay) {
  const kernels::Plane in{grid.width(), grid.height(), grid.channels()};
  PixelGrid horiz(ax.out_size, grid.height(), grid.channels());
  kernels::parallel::resample_x(grid.data(), in, ax, horiz.data());
  const kernels::Plane mid{ax.out_size, grid.height(), grid.channels()};
  PixelGrid out(ax.out_size, ay.out_size, grid.channels());
  kernels::parallel::resample_y(horiz.data(), mid, ay, out.data());
  return out;
}

}  // namespace

kernels::AxisWeights downscale_axis(int in_size, int scale) {
  if (in_size % scale != 0)
    throw InvalidArgument("size " + std::to_string(in_size) + " is not divisible by scale " +
                          std::to_string(scale));
  return build_axis(in_size, in_size / scale, static_cast<double>(scale),
                    static_cast<double>(scale));
}

kernels::AxisWeights upscale_axis(int in_size, int scale) {
  return build_axis(in_size, in_size * scale, 1.0 / scale, 1.0);
}

PixelGrid downscale(const PixelGrid& grid, ScaleFactor s) {
  const int k = s.value();
  if (grid.width() % k != 0 || grid.height() % k != 0)
    throw InvalidArgument("downscale: " + std::to_string(grid.width()) + "x" +
                          std::to_string(grid.height()) + " is not divisible by " +
                          std::to_string(k));
  return apply_separable(grid, downscale_axis(grid.width(), k), downscale_axis(grid.height(), k));
}

PixelGrid upscale(const PixelGrid& grid, ScaleFactor s) {
  const int k = s.value();
  return apply_separable(grid, upscale_axis(grid.width(), k), upscale_axis(grid.height(), k));
}

PixelGrid upscale_nearest(const PixelGrid& grid, ScaleFactor s) {
  const int k = s.value();
  const int c = grid.channels();
  PixelGrid out(grid.width() * k, grid.height() * k, c);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int ch = 0; ch < c; ++ch) out.at(x, y, ch) = grid.at(x / k, y / k, ch);
  return out;
}

}  // namespace resample
}  // namespace srfuse

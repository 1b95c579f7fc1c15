#include "srfuse/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srfuse/error.hpp"
#include "srfuse/kernels.hpp"

namespace srfuse {

namespace {

void check_shape(int width, int height, int channels) {
  if (width <= 0 || height <= 0)
    throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  if (channels != 1 && channels != 3)
    throw InvalidArgument("channel count must be 1 or 3, got " + std::to_string(channels));
}

}  // namespace

PixelGrid::PixelGrid(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

PixelGrid::PixelGrid(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels)
    throw InvalidArgument("pixel buffer length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height) + "x" + std::to_string(channels));
  for (double v : data_)
    if (!std::isfinite(v)) throw InvalidArgument("pixel buffer contains a non-finite value");
}

PixelGrid PixelGrid::filled(int width, int height, int channels, double value) {
  return PixelGrid(width, height, channels,
                   std::vector<double>(static_cast<std::size_t>(width) * height * channels, value));
}

unsigned char to_byte(double value) noexcept {
  const double clamped = value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
  return static_cast<unsigned char>(std::round(clamped * 255.0));
}

PixelGrid quantize(const PixelGrid& grid) {
  PixelGrid out(grid.width(), grid.height(), grid.channels());
  kernels::parallel::quantize(grid.data(), out.data());
  return out;
}

PixelGrid to_luma(const PixelGrid& grid) {
  if (grid.channels() != 3)
    throw InvalidArgument("to_luma needs a 3-channel image, got " +
                          std::to_string(grid.channels()) + " channel(s)");
  PixelGrid out(grid.width(), grid.height(), 1);
  kernels::parallel::luma(grid.data(), out.data());
  return out;
}

PixelGrid crop_border(const PixelGrid& grid, BorderCrop crop) {
  const int m = crop.margin;
  if (m < 0) throw InvalidArgument("border margin must be non-negative");
  if (2 * m >= grid.width() || 2 * m >= grid.height())
    throw InvalidArgument("border margin " + std::to_string(m) + " too large for " +
                          std::to_string(grid.width()) + "x" + std::to_string(grid.height()));
  if (m == 0) return grid;
  return crop_rect(grid, m, m, grid.width() - 2 * m, grid.height() - 2 * m);
}

PixelGrid crop_rect(const PixelGrid& grid, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > grid.width() || y + h > grid.height())
    throw InvalidArgument("crop rectangle outside image");
  const int c = grid.channels();
  PixelGrid out(w, h, c);
  auto src = grid.data();
  auto dst = out.data();
  for (int row = 0; row < h; ++row) {
    const std::size_t from = grid.index(x, y + row);
    std::copy_n(src.begin() + from, static_cast<std::size_t>(w) * c,
                dst.begin() + static_cast<std::size_t>(row) * w * c);
  }
  return out;
}

}  // namespace srfuse

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace srfuse {

/// Normalized real-valued image, row-major, channel-interleaved.
///
/// Nominal range is [0,1] but values outside it are legal in memory (bicubic
/// overshoot); clamping happens only when writing 8-bit files. Every value
/// must be finite.
class PixelGrid {
 public:
  PixelGrid() = default;

  /// Zero-filled grid. Throws InvalidArgument on non-positive dims or channels not in {1,3}.
  PixelGrid(int width, int height, int channels);

  /// Takes ownership of `data`; validates size and finiteness.
  PixelGrid(int width, int height, int channels, std::vector<double> data);

  /// Grid filled with a constant value.
  static PixelGrid filled(int width, int height, int channels, double value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }
  double& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  bool same_shape(const PixelGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  /// Bit-exact equality of shape and every value.
  friend bool operator==(const PixelGrid& a, const PixelGrid& b) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Symmetric border removed before metric evaluation.
struct BorderCrop {
  int margin = 0;
};

/// Round a single value to the 8-bit lattice: clamp to [0,1], scale by 255,
/// round half away from zero.
unsigned char to_byte(double value) noexcept;

/// Every value snapped to a multiple of 1/255 via to_byte.
PixelGrid quantize(const PixelGrid& grid);

/// BT.601 studio-range luma on the normalized domain:
/// Y = (65.481 R + 128.553 G + 24.966 B + 16) / 255.
PixelGrid to_luma(const PixelGrid& grid);

/// Removes `crop.margin` pixels from each side.
PixelGrid crop_border(const PixelGrid& grid, BorderCrop crop);

/// Copy of the rectangle [x, x+w) x [y, y+h).
PixelGrid crop_rect(const PixelGrid& grid, int x, int y, int w, int h);

/// Loads an 8-bit grayscale or RGB PNG. Values are byte / 255 exactly.
PixelGrid load_image(const std::filesystem::path& path);

/// Writes `grid` as an 8-bit PNG after to_byte quantization.
void save_image(const PixelGrid& grid, const std::filesystem::path& path);

struct ImageSize {
  int width = 0;
  int height = 0;
  int channels = 0;
};

/// Reads only the PNG header. Applies the same format checks as load_image.
ImageSize read_image_size(const std::filesystem::path& path);

}  // namespace srfuse

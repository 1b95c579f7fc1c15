#pragma once

#include "srfuse/image.hpp"
#include "srfuse/kernels.hpp"

namespace srfuse {

/// Integer super-resolution factor (x2, x3, x4, ...).
class ScaleFactor {
 public:
  /// Throws InvalidArgument when value < 2.
  explicit ScaleFactor(int value = 4);
  int value() const noexcept { return value_; }
  friend bool operator==(ScaleFactor, ScaleFactor) = default;

 private:
  int value_;
};

namespace resample {

/// Keys cubic convolution kernel with a = -0.5.
double cubic_kernel(double x) noexcept;

/// Taps for shrinking `in_size` samples by `scale` with an antialiased
/// (stretched) cubic kernel, clamp-to-edge, weights normalized to 1.
kernels::AxisWeights downscale_axis(int in_size, int scale);

/// Taps for enlarging `in_size` samples by `scale` (plain 4-tap cubic).
kernels::AxisWeights upscale_axis(int in_size, int scale);

/// Bicubic shrink; width and height must be divisible by `s`. No clamping:
/// negative lobes may push values outside [0,1].
PixelGrid downscale(const PixelGrid& grid, ScaleFactor s);

/// Bicubic enlarge, output is s x the input in both dimensions.
PixelGrid upscale(const PixelGrid& grid, ScaleFactor s);

/// Block replication.
PixelGrid upscale_nearest(const PixelGrid& grid, ScaleFactor s);

}  // namespace resample
}  // namespace srfuse

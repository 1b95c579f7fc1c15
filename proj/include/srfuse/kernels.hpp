#pragma once

// Inner loops shared by the pipeline modules.
//
// Each kernel exists twice with identical signatures: `serial` is the plain
// reference, `parallel` is the OpenMP version used by the library. Both
// perform the same floating-point operations in the same order per output
// element, and reductions are always per-row partials summed in row order, so
// the two agree bit-for-bit regardless of thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace srfuse::kernels {

/// Precomputed 1-D resampling taps: output i reads
/// `index[i*taps + t]` with weight `weight[i*taps + t]` for t < taps.
/// Source indices are already clamped to [0, in_size).
struct AxisWeights {
  int in_size = 0;
  int out_size = 0;
  int taps = 0;
  std::vector<int> index;
  std::vector<double> weight;
};

/// Shape of an interleaved image buffer.
struct Plane {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width) * height * channels;
  }
};

/// Precomputed normalized 1-D Gaussian used for separable SSIM windows.
struct Window {
  std::vector<double> taps;
  int radius() const noexcept { return static_cast<int>(taps.size()) / 2; }
};

namespace serial {

// Resample along x: dst has shape {axis.out_size, shape.height, shape.channels}.
void resample_x(std::span<const double> src, Plane shape, const AxisWeights& axis,
                std::span<double> dst);
// Resample along y: dst has shape {shape.width, axis.out_size, shape.channels}.
void resample_y(std::span<const double> src, Plane shape, const AxisWeights& axis,
                std::span<double> dst);
// out[i] = std::lerp(a[i], b[i], t)
void lerp(std::span<const double> a, std::span<const double> b, double t,
          std::span<double> out);
// acc[i] += w * src[i]
void axpy(double w, std::span<const double> src, std::span<double> acc);
double sum_squared_diff(std::span<const double> a, std::span<const double> b, Plane shape);
// Mean SSIM over valid (unpadded) window positions; single channel only.
double ssim_mean(std::span<const double> a, std::span<const double> b, Plane shape,
                 const Window& window, double c1, double c2);
void luma(std::span<const double> rgb, std::span<double> y);
void quantize(std::span<const double> src, std::span<double> dst);

}  // namespace serial

namespace parallel {

// Same contracts as serial::, OpenMP over rows.
void resample_x(std::span<const double> src, Plane shape, const AxisWeights& axis,
                std::span<double> dst);
void resample_y(std::span<const double> src, Plane shape, const AxisWeights& axis,
                std::span<double> dst);
void lerp(std::span<const double> a, std::span<const double> b, double t,
          std::span<double> out);
void axpy(double w, std::span<const double> src, std::span<double> acc);
double sum_squared_diff(std::span<const double> a, std::span<const double> b, Plane shape);
double ssim_mean(std::span<const double> a, std::span<const double> b, Plane shape,
                 const Window& window, double c1, double c2);
void luma(std::span<const double> rgb, std::span<double> y);
void quantize(std::span<const double> src, std::span<double> dst);

}  // namespace parallel

/// Number of worker threads the parallel kernels will use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace srfuse::kernels

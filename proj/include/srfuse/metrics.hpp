#pragma once

#include <span>
#include <string>
#include <vector>

#include "srfuse/backend.hpp"
#include "srfuse/image.hpp"
#include "srfuse/kernels.hpp"

namespace srfuse {

/// Evaluation convention. Preprocessing order: quantize, luma, border crop.
struct MetricConfig {
  enum class Mode { YChannel, Rgb };

  Mode mode = Mode::YChannel;
  /// Pixels removed from each side before scoring; conventionally the scale.
  int border_crop = 4;
  bool quantize = true;
};

std::string to_string(MetricConfig::Mode mode);
/// Accepts "y" and "rgb".
MetricConfig::Mode parse_metric_mode(const std::string& text);

struct ImageScore {
  std::string id;
  double psnr = 0.0;  // dB, +inf for identical images
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<ImageScore> images;  // sorted by id
  /// Mean over finite per-image PSNRs; +inf if every image scored +inf.
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  /// Images whose PSNR was infinite and therefore left out of mean_psnr.
  int infinite_psnr_count = 0;
  MetricConfig config;
};

namespace metrics {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Normalized 11-tap Gaussian, sigma 1.5.
const kernels::Window& gaussian_window();

/// Applies the configured preprocessing (quantize, luma if RGB, crop).
PixelGrid prepare(const PixelGrid& grid, const MetricConfig& cfg);

bool is_infinite(double psnr) noexcept;

/// 10 log10(1 / MSE) on the [0,1] domain; +inf when MSE is zero.
double psnr(const PixelGrid& a, const PixelGrid& b, const MetricConfig& cfg);

/// Gaussian-window SSIM, valid region only, L = 1. RGB mode averages the
/// per-channel scores.
double ssim(const PixelGrid& a, const PixelGrid& b, const MetricConfig& cfg);

/// Scores matched pairs by id. Throws PairingError listing missing/extra ids.
MetricReport evaluate_pairs(std::span<const NamedGrid> outputs, std::span<const NamedGrid> truths,
                            const MetricConfig& cfg);

/// Rebuilds the means from per-image scores (used by evaluate_pairs and for
/// reports assembled from stored values).
MetricReport summarize(std::vector<ImageScore> scores, const MetricConfig& cfg);

}  // namespace metrics
}  // namespace srfuse

#pragma once

#include <span>

#include "srfuse/image.hpp"

namespace srfuse {

/// Weight of the strong branch; the base branch gets 1 - alpha.
class FusionWeight {
 public:
  /// Throws InvalidArgument unless 0 <= alpha <= 1.
  explicit FusionWeight(double alpha = 0.0);
  double alpha() const noexcept { return alpha_; }
  double base_weight() const noexcept { return 1.0 - alpha_; }
  friend bool operator==(FusionWeight, FusionWeight) = default;

 private:
  double alpha_;
};

namespace fusion {

/// (1 - alpha) * base + alpha * strong per pixel, in the real domain.
///
/// Evaluated with std::lerp, so alpha = 0 and alpha = 1 reproduce the inputs
/// bit-exactly and each output lies between its two inputs. No clamping.
PixelGrid fuse(const PixelGrid& base, const PixelGrid& strong, FusionWeight w);

/// Convex combination of N same-shaped branches. Weights must be non-negative
/// and sum to 1 within 1e-9. Two branches delegate to fuse() with
/// alpha = weights[1].
PixelGrid fuse_many(std::span<const PixelGrid> branches, std::span<const double> weights);

/// Unconstrained least-squares minimizer of MSE((1-a) base + a strong, truth),
/// clamped to [0,1]. Throws DegenerateInput when base == strong everywhere.
FusionWeight optimal_alpha_mse(const PixelGrid& base, const PixelGrid& strong,
                               const PixelGrid& truth);

}  // namespace fusion
}  // namespace srfuse

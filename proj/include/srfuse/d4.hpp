#pragma once

#include <array>
#include <functional>

#include "srfuse/image.hpp"

namespace srfuse {

/// Element of the dihedral group D4, enumerated as k = 4*flip + rotation.
///
/// Applying k mirrors left-right first (if flip) and then rotates by
/// `rotation` counter-clockwise quarter turns. k = 0 is the identity.
class TransformId {
 public:
  static constexpr int kGroupSize = 8;

  /// Throws InvalidArgument unless 0 <= k < 8.
  explicit TransformId(int k = 0);
  static TransformId from_parts(int rotation, bool flip);

  int value() const noexcept { return k_; }
  int rotation() const noexcept { return k_ % 4; }
  bool flip() const noexcept { return k_ >= 4; }

  friend bool operator==(TransformId, TransformId) = default;

 private:
  int k_;
};

namespace d4 {

/// All eight transforms in k order.
std::array<TransformId, TransformId::kGroupSize> all_transforms() noexcept;

/// Lossless pixel permutation; width and height swap for odd rotations.
PixelGrid apply(TransformId k, const PixelGrid& grid);

TransformId inverse_of(TransformId k) noexcept;

/// Group composition: apply(compose(a, b), g) == apply(a, apply(b, g)).
TransformId compose(TransformId a, TransformId b) noexcept;

using SrFunction = std::function<PixelGrid(const PixelGrid&)>;

/// Mean over k of inverse_k(model(T_k(lr))), summed by a fixed pairwise tree over k in the real
/// domain. Any exception from `model` propagates; no partial mean is returned.
PixelGrid self_ensemble(const SrFunction& model, const PixelGrid& lr);

/// Reduction half of self_ensemble for callers that batch the eight model
/// calls themselves: `outputs[k]` is the model output for T_k(lr).
PixelGrid merge_ensemble(std::span<const PixelGrid> outputs);

}  // namespace d4
}  // namespace srfuse

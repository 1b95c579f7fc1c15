#include "srfuse/d4.hpp"

#include <string>
#include <vector>

#include "srfuse/error.hpp"
#include "srfuse/kernels.hpp"

namespace srfuse {

TransformId::TransformId(int k) : k_(k) {
  if (k < 0 || k >= kGroupSize)
    throw InvalidArgument("transform id must be in [0,8), got " + std::to_string(k));
}

TransformId TransformId::from_parts(int rotation, bool flip) {
  return TransformId(4 * (flip ? 1 : 0) + ((rotation % 4) + 4) % 4);
}

namespace d4 {

namespace {

PixelGrid mirror(const PixelGrid& g) {
  PixelGrid out(g.width(), g.height(), g.channels());
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      for (int c = 0; c < g.channels(); ++c) out.at(x, y, c) = g.at(g.width() - 1 - x, y, c);
  return out;
}

// One counter-clockwise quarter turn: the top-right corner becomes top-left.
PixelGrid rotate_ccw(const PixelGrid& g) {
  PixelGrid out(g.height(), g.width(), g.channels());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int c = 0; c < g.channels(); ++c) out.at(x, y, c) = g.at(g.width() - 1 - y, x, c);
  return out;
}

}  // namespace

std::array<TransformId, TransformId::kGroupSize> all_transforms() noexcept {
  return {TransformId(0), TransformId(1), TransformId(2), TransformId(3),
          TransformId(4), TransformId(5), TransformId(6), TransformId(7)};
}

PixelGrid apply(TransformId k, const PixelGrid& grid) {
  PixelGrid out = k.flip() ? mirror(grid) : grid;
  for (int r = 0; r < k.rotation(); ++r) out = rotate_ccw(out);
  return out;
}

// R^r F is an involution for every r, so flipped elements are self-inverse.
TransformId inverse_of(TransformId k) noexcept {
  if (k.flip()) return k;
  return TransformId((4 - k.rotation()) % 4);
}

// R^a F^f R^b F^g = R^(a + (f ? -b : b)) F^(f xor g), using F R = R^-1 F.
TransformId compose(TransformId a, TransformId b) noexcept {
  const int rot = a.flip() ? a.rotation() - b.rotation() : a.rotation() + b.rotation();
  return TransformId::from_parts(rot, a.flip() != b.flip());
}

PixelGrid merge_ensemble(std::span<const PixelGrid> outputs) {
  if (outputs.size() != TransformId::kGroupSize)
    throw InvalidArgument("self-ensemble needs exactly 8 outputs, got " +
                          std::to_string(outputs.size()));
  std::vector<PixelGrid> terms;
  terms.reserve(TransformId::kGroupSize);
  for (int k = 0; k < TransformId::kGroupSize; ++k) {
    terms.push_back(apply(inverse_of(TransformId(k)), outputs[k]));
    if (!terms.back().same_shape(terms.front()))
      throw DimensionMismatch("self-ensemble output for transform " + std::to_string(k) +
                              " has inconsistent dimensions");
  }
  // Pairwise tree in fixed k order: ((0+1)+(2+3))+((4+5)+(6+7)). Equal terms
  // sum exactly, so an invariant model is reproduced bit-for-bit.
  for (std::size_t stride = 1; stride < terms.size(); stride *= 2)
    for (std::size_t k = 0; k + stride < terms.size(); k += 2 * stride)
      kernels::parallel::axpy(1.0, terms[k + stride].data(), terms[k].data());
  PixelGrid mean = std::move(terms.front());
  for (double& v : mean.data()) v *= 1.0 / TransformId::kGroupSize;
  return mean;
}

PixelGrid self_ensemble(const SrFunction& model, const PixelGrid& lr) {
  std::vector<PixelGrid> outputs;
  outputs.reserve(TransformId::kGroupSize);
  for (TransformId k : all_transforms()) outputs.push_back(model(apply(k, lr)));
  return merge_ensemble(outputs);
}

}  // namespace d4
}  // namespace srfuse

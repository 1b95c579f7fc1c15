#include "srfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srfuse/error.hpp"
#include "srfuse/kernels.hpp"

namespace srfuse {

FusionWeight::FusionWeight(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("fusion weight must lie in [0,1], got " + std::to_string(alpha));
}

namespace fusion {

namespace {

void require_same_shape(const PixelGrid& a, const PixelGrid& b, const char* what) {
  if (!a.same_shape(b))
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + "x" + std::to_string(a.channels()) +
                            " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                            "x" + std::to_string(b.channels()));
}

}  // namespace

PixelGrid fuse(const PixelGrid& base, const PixelGrid& strong, FusionWeight w) {
  require_same_shape(base, strong, "fuse");
  PixelGrid out(base.width(), base.height(), base.channels());
  kernels::parallel::lerp(base.data(), strong.data(), w.alpha(), out.data());
  return out;
}

PixelGrid fuse_many(std::span<const PixelGrid> branches, std::span<const double> weights) {
  if (branches.empty()) throw InvalidArgument("fuse_many: no branches");
  if (branches.size() != weights.size())
    throw InvalidArgument("fuse_many: " + std::to_string(branches.size()) + " branches but " +
                          std::to_string(weights.size()) + " weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("fuse_many: weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidArgument("fuse_many: weights sum to " + std::to_string(sum) + ", expected 1");
  for (const auto& b : branches) require_same_shape(branches.front(), b, "fuse_many");

  if (branches.size() == 1) return branches.front();
  if (branches.size() == 2)
    return fuse(branches[0], branches[1], FusionWeight(std::min(weights[1], 1.0)));

  const auto& first = branches.front();
  PixelGrid out(first.width(), first.height(), first.channels());
  for (std::size_t i = 0; i < branches.size(); ++i)
    kernels::parallel::axpy(weights[i], branches[i].data(), out.data());
  return out;
}

FusionWeight optimal_alpha_mse(const PixelGrid& base, const PixelGrid& strong,
                               const PixelGrid& truth) {
  require_same_shape(base, strong, "optimal_alpha_mse");
  require_same_shape(base, truth, "optimal_alpha_mse");
  auto b = base.data();
  auto s = strong.data();
  auto t = truth.data();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = s[i] - b[i];
    num += (t[i] - b[i]) * d;
    den += d * d;
  }
  if (den == 0.0)
    throw DegenerateInput("optimal_alpha_mse: base and strong are identical, minimizer undefined");
  return FusionWeight(std::clamp(num / den, 0.0, 1.0));
}

}  // namespace fusion
}  // namespace srfuse

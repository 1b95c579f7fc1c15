#pragma once

// Per-element formulas shared by the serial and parallel kernels so the two
// evaluate exactly the same expression.

#include <algorithm>
#include <cmath>

namespace srfuse::kernels::detail {

inline double quantized(double v) noexcept {
  return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

inline double luma_of(double r, double g, double b) noexcept {
  return (65.481 * r + 128.553 * g + 24.966 * b + 16.0) / 255.0;
}

struct Moments {
  double mu_a, mu_b, aa, bb, ab;
};

inline double ssim_of(const Moments& m, double c1, double c2) noexcept {
  const double var_a = m.aa - m.mu_a * m.mu_a;
  const double var_b = m.bb - m.mu_b * m.mu_b;
  const double cov = m.ab - m.mu_a * m.mu_b;
  const double num = (2.0 * m.mu_a * m.mu_b + c1) * (2.0 * cov + c2);
  const double den = (m.mu_a * m.mu_a + m.mu_b * m.mu_b + c1) * (var_a + var_b + c2);
  return num / den;
}

}  // namespace srfuse::kernels::detail

#include "srfuse/kernels.hpp"

#include <cmath>
#include <cstddef>

#ifdef SRFUSE_HAVE_OPENMP
#include <omp.h>
#endif

#include "detail.hpp"

namespace srfuse::kernels {

int max_threads() noexcept {
#ifdef SRFUSE_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace parallel {

namespace {
// Below this many elements the fork/join overhead dominates.
constexpr std::ptrdiff_t kMinParallel = 1 << 14;
}  // namespace

void resample_x(std::span<const double> src, Plane shape, const AxisWeights& axis,
                std::span<double> dst) {
  const int c = shape.channels;
  const bool big = static_cast<std::ptrdiff_t>(dst.size()) >= kMinParallel;
#pragma omp parallel for schedule(static) if (big)
  for (int y = 0; y < shape.height; ++y) {
    const double* row = src.data() + static_cast<std::size_t>(y) * shape.width * c;
    double* out = dst.data() + static_cast<std::size_t>(y) * axis.out_size * c;
    for (int ox = 0; ox < axis.out_size; ++ox) {
      const int* idx = axis.index.data() + static_cast<std::size_t>(ox) * axis.taps;
      const double* w = axis.weight.data() + static_cast<std::size_t>(ox) * axis.taps;
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int t = 0; t < axis.taps; ++t) acc += w[t] * row[idx[t] * c + ch];
        out[ox * c + ch] = acc;
      }
    }
  }
}

void resample_y(std::span<const double> src, Plane shape, const AxisWeights& axis,
                std::span<double> dst) {
  const std::size_t stride = static_cast<std::size_t>(shape.width) * shape.channels;
  const bool big = static_cast<std::ptrdiff_t>(dst.size()) >= kMinParallel;
#pragma omp parallel for schedule(static) if (big)
  for (int oy = 0; oy < axis.out_size; ++oy) {
    const int* idx = axis.index.data() + static_cast<std::size_t>(oy) * axis.taps;
    const double* w = axis.weight.data() + static_cast<std::size_t>(oy) * axis.taps;
    double* out = dst.data() + static_cast<std::size_t>(oy) * stride;
    for (std::size_t i = 0; i < stride; ++i) {
      double acc = 0.0;
      for (int t = 0; t < axis.taps; ++t) acc += w[t] * src[idx[t] * stride + i];
      out[i] = acc;
    }
  }
}

void lerp(std::span<const double> a, std::span<const double> b, double t,
          std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::lerp(a[i], b[i], t);
}

void axpy(double w, std::span<const double> src, std::span<double> acc) {
  const auto n = static_cast<std::ptrdiff_t>(acc.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc[i] += w * src[i];
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b, Plane shape) {
  const std::size_t stride = static_cast<std::size_t>(shape.width) * shape.channels;
  std::vector<double> rows(shape.height);
  const bool big = static_cast<std::ptrdiff_t>(a.size()) >= kMinParallel;
#pragma omp parallel for schedule(static) if (big)
  for (int y = 0; y < shape.height; ++y) {
    double row = 0.0;
    for (std::size_t i = y * stride; i < (y + 1) * stride; ++i) {
      const double d = a[i] - b[i];
      row += d * d;
    }
    rows[y] = row;
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

double ssim_mean(std::span<const double> a, std::span<const double> b, Plane shape,
                 const Window& window, double c1, double c2) {
  const int n = static_cast<int>(window.taps.size());
  const int ow = shape.width - n + 1;
  const int oh = shape.height - n + 1;
  const std::size_t hsize = static_cast<std::size_t>(shape.height) * ow;
  std::vector<double> ha(hsize), hb(hsize), haa(hsize), hbb(hsize), hab(hsize);
  const bool big = static_cast<std::ptrdiff_t>(a.size()) >= kMinParallel / 8;

#pragma omp parallel for schedule(static) if (big)
  for (int y = 0; y < shape.height; ++y) {
    const std::size_t base = static_cast<std::size_t>(y) * shape.width;
    for (int ox = 0; ox < ow; ++ox) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int t = 0; t < n; ++t) {
        const double k = window.taps[t];
        const double va = a[base + ox + t];
        const double vb = b[base + ox + t];
        sa += k * va;
        sb += k * vb;
        saa += k * (va * va);
        sbb += k * (vb * vb);
        sab += k * (va * vb);
      }
      const std::size_t o = static_cast<std::size_t>(y) * ow + ox;
      ha[o] = sa; hb[o] = sb; haa[o] = saa; hbb[o] = sbb; hab[o] = sab;
    }
  }

  std::vector<double> rows(oh);
#pragma omp parallel for schedule(static) if (big)
  for (int oy = 0; oy < oh; ++oy) {
    double row = 0.0;
    for (int ox = 0; ox < ow; ++ox) {
      detail::Moments m{0, 0, 0, 0, 0};
      for (int t = 0; t < n; ++t) {
        const double k = window.taps[t];
        const std::size_t o = static_cast<std::size_t>(oy + t) * ow + ox;
        m.mu_a += k * ha[o];
        m.mu_b += k * hb[o];
        m.aa += k * haa[o];
        m.bb += k * hbb[o];
        m.ab += k * hab[o];
      }
      row += detail::ssim_of(m, c1, c2);
    }
    rows[oy] = row;
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total / (static_cast<double>(ow) * oh);
}

void luma(std::span<const double> rgb, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    y[i] = detail::luma_of(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
}

void quantize(std::span<const double> src, std::span<double> dst) {
  const auto n = static_cast<std::ptrdiff_t>(dst.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) dst[i] = detail::quantized(src[i]);
}

}  // namespace parallel
}  // namespace srfuse::kernels

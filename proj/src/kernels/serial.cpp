#include "srfuse/kernels.hpp"

#include <cmath>

#include "detail.hpp"

namespace srfuse::kernels::serial {

void resample_x(std::span<const double> src, Plane shape, const AxisWeights& axis,
                std::span<double> dst) {
  const int c = shape.channels;
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
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::lerp(a[i], b[i], t);
}

void axpy(double w, std::span<const double> src, std::span<double> acc) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * src[i];
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b, Plane shape) {
  const std::size_t stride = static_cast<std::size_t>(shape.width) * shape.channels;
  double total = 0.0;
  for (int y = 0; y < shape.height; ++y) {
    double row = 0.0;
    for (std::size_t i = y * stride; i < (y + 1) * stride; ++i) {
      const double d = a[i] - b[i];
      row += d * d;
    }
    total += row;
  }
  return total;
}

double ssim_mean(std::span<const double> a, std::span<const double> b, Plane shape,
                 const Window& window, double c1, double c2) {
  const int n = static_cast<int>(window.taps.size());
  const int ow = shape.width - n + 1;
  const int oh = shape.height - n + 1;
  const std::size_t hsize = static_cast<std::size_t>(shape.height) * ow;
  std::vector<double> ha(hsize), hb(hsize), haa(hsize), hbb(hsize), hab(hsize);

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

  double total = 0.0;
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
    total += row;
  }
  return total / (static_cast<double>(ow) * oh);
}

void luma(std::span<const double> rgb, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = detail::luma_of(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
}

void quantize(std::span<const double> src, std::span<double> dst) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = detail::quantized(src[i]);
}

}  // namespace srfuse::kernels::serial

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "srfuse/error.hpp"
#include "srfuse/resample.hpp"

using namespace srfuse;

namespace {

double max_abs_diff(const PixelGrid& a, const PixelGrid& b) {
  EXPECT_TRUE(a.same_shape(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

void expect_partition_of_unity(const kernels::AxisWeights& ax) {
  for (int o = 0; o < ax.out_size; ++o) {
    double sum = 0.0;
    for (int t = 0; t < ax.taps; ++t) {
      const int idx = ax.index[static_cast<std::size_t>(o) * ax.taps + t];
      EXPECT_GE(idx, 0);
      EXPECT_LT(idx, ax.in_size);
      sum += ax.weight[static_cast<std::size_t>(o) * ax.taps + t];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

}  // namespace

TEST(ScaleFactor, RejectsBelowTwo) {
  EXPECT_THROW(ScaleFactor(1), InvalidArgument);
  EXPECT_THROW(ScaleFactor(0), InvalidArgument);
  EXPECT_EQ(ScaleFactor().value(), 4);
}

TEST(CubicKernel, Values) {
  EXPECT_EQ(resample::cubic_kernel(0.0), 1.0);
  EXPECT_EQ(resample::cubic_kernel(1.0), 0.0);
  EXPECT_EQ(resample::cubic_kernel(-1.0), 0.0);
  EXPECT_EQ(resample::cubic_kernel(2.0), 0.0);
  EXPECT_EQ(resample::cubic_kernel(3.5), 0.0);
  EXPECT_NEAR(resample::cubic_kernel(0.5), 0.5625, 1e-15);
  EXPECT_NEAR(resample::cubic_kernel(-1.5), -0.0625, 1e-15);
  for (double x = -2.5; x <= 2.5; x += 0.0625)
    EXPECT_NEAR(resample::cubic_kernel(x), oracle::keys(x), 1e-14) << x;
}

TEST(Downscale, SingleBrightPixelMatchesOracle) {
  for (int px = 0; px < 8; ++px) {
    PixelGrid g(8, 8, 1);
    g.at(px, (px * 3) % 8) = 1.0;
    const PixelGrid got = resample::downscale(g, ScaleFactor(4));
    const PixelGrid want =
        oracle::apply_matrices(g, oracle::downscale_matrix(8, 4), oracle::downscale_matrix(8, 4));
    EXPECT_LT(max_abs_diff(got, want), 1e-6);
  }
}

TEST(Downscale, RandomGridsMatchOracle) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 12; ++i) {
    const int s = 2 + i % 3;
    const int w = s * (2 + i % 4);
    const int h = s * (1 + (i * 7) % 5);
    const PixelGrid g = oracle::random_grid(rng, w, h, i % 2 ? 3 : 1);
    const PixelGrid want =
        oracle::apply_matrices(g, oracle::downscale_matrix(w, s), oracle::downscale_matrix(h, s));
    EXPECT_LT(max_abs_diff(resample::downscale(g, ScaleFactor(s)), want), 1e-6);
  }
}

TEST(Upscale, RandomGridsMatchOracle) {
  std::mt19937_64 rng(32);
  {
    const PixelGrid g(2, 2, 1, {0.1, 0.9, 0.4, 0.6});
    const PixelGrid want =
        oracle::apply_matrices(g, oracle::upscale_matrix(2, 2), oracle::upscale_matrix(2, 2));
    EXPECT_LT(max_abs_diff(resample::upscale(g, ScaleFactor(2)), want), 1e-6);
  }
  for (int i = 0; i < 12; ++i) {
    const int s = 2 + i % 3;
    const int w = 1 + i % 5;
    const int h = 2 + (i * 3) % 4;
    const PixelGrid g = oracle::random_grid(rng, w, h, i % 2 ? 3 : 1);
    const PixelGrid want =
        oracle::apply_matrices(g, oracle::upscale_matrix(w, s), oracle::upscale_matrix(h, s));
    const PixelGrid got = resample::upscale(g, ScaleFactor(s));
    EXPECT_EQ(got.width(), w * s);
    EXPECT_EQ(got.height(), h * s);
    EXPECT_LT(max_abs_diff(got, want), 1e-6);
  }
}

TEST(Resample, ConstantsPreserved) {
  for (double c : {0.0, 0.3, 1.0}) {
    const PixelGrid g = PixelGrid::filled(12, 8, 3, c);
    const PixelGrid down = resample::downscale(g, ScaleFactor(4));
    const PixelGrid up = resample::upscale(g, ScaleFactor(3));
    for (double v : down.data()) EXPECT_NEAR(v, c, 1e-12);
    for (double v : up.data()) EXPECT_NEAR(v, c, 1e-12);
    const PixelGrid round = resample::downscale(resample::upscale(g, ScaleFactor(4)), ScaleFactor(4));
    for (double v : round.data()) EXPECT_NEAR(v, c, 1e-12);
  }
}

TEST(Downscale, LinearRampStaysLinearInInterior) {
  const int w = 48;
  const int s = 4;
  PixelGrid g(w, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < w; ++x) g.at(x, y) = 0.1 + 0.015 * x;
  const PixelGrid d = resample::downscale(g, ScaleFactor(s));
  // The stretched kernel reaches 2s source pixels each side; away from the
  // clamped border the output is the ramp sampled at the tap centre.
  for (int o = 3; o < d.width() - 3; ++o) {
    const double centre = (o + 0.5) * s - 0.5;
    EXPECT_NEAR(d.at(o, 0), 0.1 + 0.015 * centre, 1e-6) << o;
  }
}

TEST(Resample, WeightsFormPartitionOfUnity) {
  for (int n : {1, 2, 5, 8, 17, 64})
    for (int s : {2, 3, 4}) {
      expect_partition_of_unity(resample::upscale_axis(n, s));
      if (n % s == 0) expect_partition_of_unity(resample::downscale_axis(n, s));
    }
  for (int n : {8, 12})
    for (const auto& row : oracle::downscale_matrix(n, 4)) {
      double sum = 0.0;
      for (double w : row) sum += w;
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Downscale, RejectsNonDivisibleDims) {
  EXPECT_THROW(resample::downscale(PixelGrid(10, 8, 1), ScaleFactor(4)), InvalidArgument);
  EXPECT_THROW(resample::downscale(PixelGrid(8, 9, 1), ScaleFactor(4)), InvalidArgument);
}

TEST(UpscaleNearest, BlockReplication) {
  const PixelGrid g(2, 2, 1, {0.1, 0.2, 0.3, 0.4});
  const PixelGrid u = resample::upscale_nearest(g, ScaleFactor(4));
  ASSERT_EQ(u.width(), 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(u.at(x, y), g.at(x / 4, y / 4));
}

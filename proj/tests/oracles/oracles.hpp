#pragma once

// Independent reference implementations used only by tests. Nothing here calls
// into the library code it checks, apart from PixelGrid as a container.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "srfuse/image.hpp"

namespace oracle {

using srfuse::PixelGrid;

/// Dense matrix, row-major: m[i][j].
using Matrix = std::vector<std::vector<double>>;

PixelGrid random_grid(std::mt19937_64& rng, int w, int h, int c, double lo = 0.0, double hi = 1.0);
/// Every value on the byte lattice k/255.
PixelGrid random_byte_grid(std::mt19937_64& rng, int w, int h, int c);

/// Keys cubic, a = -0.5, written from the general piecewise form.
double keys(double x);
/// Resampling matrix built by visiting every source position within the
/// kernel support, clamping out-of-range positions to the edge and
/// normalizing each row.
Matrix downscale_matrix(int n, int s);
Matrix upscale_matrix(int n, int s);
/// out[y][x][c] = sum_j sum_i Wy[y][j] Wx[x][i] in[j][i][c]
PixelGrid apply_matrices(const PixelGrid& in, const Matrix& wx, const Matrix& wy);

/// Source pixel of output (x, y) for D4 element k, from the rigid motion of
/// centred coordinates: mirror x if k >= 4, then rotate k%4 quarter turns
/// counter-clockwise (y axis pointing down).
std::pair<int, int> d4_source(int k, int out_x, int out_y, int in_w, int in_h);
PixelGrid d4_apply(int k, const PixelGrid& g);

/// Number of tiles [o, o+t) covering each position of [0, n).
std::vector<int> coverage(const std::vector<int>& offsets, int t, int n);

/// Gaussian-window SSIM of single-channel grids, evaluated with the full 2-D
/// 11x11 window at every valid position (no separability).
double ssim_direct(const PixelGrid& a, const PixelGrid& b);

double mse(const PixelGrid& a, const PixelGrid& b);
/// argmin over {0, step, ..., 1} of MSE((1-a) base + a strong, truth).
double grid_argmin_alpha(const PixelGrid& base, const PixelGrid& strong, const PixelGrid& truth,
                         double step);

/// Writes a PNG with arbitrary depth/colour type straight through libpng.
void write_png_raw(const std::filesystem::path& path, int w, int h, int bit_depth, int color_type,
                   const std::vector<std::uint8_t>& bytes);
inline constexpr int kPngGray = 0;
inline constexpr int kPngRgb = 2;
inline constexpr int kPngPalette = 3;
inline constexpr int kPngRgba = 6;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_bytes(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
/// Relative path -> file content for every regular file under root.
std::map<std::string, std::string> snapshot_tree(const std::filesystem::path& root);
/// Runs argv via /bin/sh with every argument single-quoted; returns the exit status.
int run(const std::vector<std::string>& argv, const std::filesystem::path& log = {});

inline const char* fake_backend_path() { return SRFUSE_FAKE_BACKEND; }
inline const char* cli_path() { return SRFUSE_CLI; }

}  // namespace oracle

#pragma once

#include <utility>
#include <vector>

#include "srfuse/backend.hpp"
#include "srfuse/image.hpp"

namespace srfuse {

/// Source rectangle of one tile, in LR pixels.
struct TileRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const TileRect&, const TileRect&) = default;
};

/// Overlapping tiling of an image. Tiles are stored row-major (y outer).
/// Interior neighbours share exactly `overlap` pixels; the last tile on each
/// axis is shifted inward so it ends at the image border.
struct TileLayout {
  int tile_size = 0;
  int overlap = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<int> x_offsets;
  std::vector<int> y_offsets;
  std::vector<TileRect> tiles;
};

namespace tiler {

inline constexpr int kDefaultTileSize = 256;
inline constexpr int kDefaultOverlap = 16;

/// Start offsets along one axis of length `extent`.
std::vector<int> tile_offsets(int extent, int tile_size, int overlap);

TileLayout plan(int width, int height, int tile_size, int overlap);

std::pair<std::vector<PixelGrid>, TileLayout> split(const PixelGrid& grid, int tile_size,
                                                    int overlap);

/// Normalized linear feather weights along one axis at output resolution:
/// result[i][p] is the weight of tile i at HR position offsets[i]*scale + p.
/// Weights of all tiles covering a position sum to 1.
std::vector<std::vector<double>> axis_feather(const std::vector<int>& offsets, int tile_extent,
                                              int image_extent, int scale);

/// Sum of the 2-D blend weights of every tile at each HR pixel (row-major).
std::vector<double> weight_sum_field(const TileLayout& layout, int scale);

PixelGrid stitch(std::span<const PixelGrid> tiles, const TileLayout& layout, int scale);

/// split -> one backend batch over all tiles -> stitch.
PixelGrid tiled_run(const BackendSpec& spec, const PixelGrid& grid,
                    int tile_size = kDefaultTileSize, int overlap = kDefaultOverlap);

}  // namespace tiler
}  // namespace srfuse

#include "srfuse/tiler.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "srfuse/error.hpp"

namespace srfuse::tiler {

std::vector<int> tile_offsets(int extent, int tile_size, int overlap) {
  if (tile_size <= 0) throw InvalidArgument("tile size must be positive");
  if (overlap < 0) throw InvalidArgument("tile overlap must be non-negative");
  if (overlap >= tile_size)
    throw InvalidArgument("tile overlap " + std::to_string(overlap) + " must be smaller than tile size " +
                          std::to_string(tile_size));
  if (tile_size >= extent) return {0};
  const int stride = tile_size - overlap;
  std::vector<int> offsets;
  for (int off = 0; off + tile_size < extent; off += stride) offsets.push_back(off);
  offsets.push_back(extent - tile_size);
  return offsets;
}

TileLayout plan(int width, int height, int tile_size, int overlap) {
  TileLayout layout;
  layout.tile_size = tile_size;
  layout.overlap = overlap;
  layout.image_width = width;
  layout.image_height = height;
  layout.x_offsets = tile_offsets(width, tile_size, overlap);
  layout.y_offsets = tile_offsets(height, tile_size, overlap);
  const int tw = std::min(tile_size, width);
  const int th = std::min(tile_size, height);
  for (int y : layout.y_offsets)
    for (int x : layout.x_offsets) layout.tiles.push_back({x, y, tw, th});
  return layout;
}

std::pair<std::vector<PixelGrid>, TileLayout> split(const PixelGrid& grid, int tile_size,
                                                    int overlap) {
  TileLayout layout = plan(grid.width(), grid.height(), tile_size, overlap);
  std::vector<PixelGrid> tiles;
  tiles.reserve(layout.tiles.size());
  for (const auto& r : layout.tiles) tiles.push_back(crop_rect(grid, r.x, r.y, r.width, r.height));
  return {std::move(tiles), std::move(layout)};
}

std::vector<std::vector<double>> axis_feather(const std::vector<int>& offsets, int tile_extent,
                                              int image_extent, int scale) {
  const int n = static_cast<int>(offsets.size());
  const int span = tile_extent * scale;
  std::vector<std::vector<double>> w(n, std::vector<double>(span, 1.0));
  for (int i = 0; i < n; ++i) {
    const double begin = static_cast<double>(offsets[i]) * scale;
    const double end = begin + span;
    const double in_ov = i > 0 ? (offsets[i - 1] + tile_extent - offsets[i]) * scale : 0;
    const double out_ov = i + 1 < n ? (offsets[i] + tile_extent - offsets[i + 1]) * scale : 0;
    for (int p = 0; p < span; ++p) {
      const double x = begin + p;
      double v = 1.0;
      if (in_ov > 0) v = std::min(v, (x - begin + 0.5) / in_ov);
      if (out_ov > 0) v = std::min(v, (end - x - 0.5) / out_ov);
      w[i][p] = v;
    }
  }

  std::vector<double> total(static_cast<std::size_t>(image_extent) * scale, 0.0);
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < span; ++p) total[offsets[i] * scale + p] += w[i][p];
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < span; ++p) w[i][p] /= total[offsets[i] * scale + p];
  return w;
}

std::vector<double> weight_sum_field(const TileLayout& layout, int scale) {
  const int tw = std::min(layout.tile_size, layout.image_width);
  const int th = std::min(layout.tile_size, layout.image_height);
  const auto wx = axis_feather(layout.x_offsets, tw, layout.image_width, scale);
  const auto wy = axis_feather(layout.y_offsets, th, layout.image_height, scale);
  const int out_w = layout.image_width * scale;
  std::vector<double> field(static_cast<std::size_t>(out_w) * layout.image_height * scale, 0.0);
  for (std::size_t j = 0; j < layout.y_offsets.size(); ++j)
    for (std::size_t i = 0; i < layout.x_offsets.size(); ++i)
      for (int py = 0; py < th * scale; ++py)
        for (int px = 0; px < tw * scale; ++px) {
          const int X = layout.x_offsets[i] * scale + px;
          const int Y = layout.y_offsets[j] * scale + py;
          field[static_cast<std::size_t>(Y) * out_w + X] += wx[i][px] * wy[j][py];
        }
  return field;
}

PixelGrid stitch(std::span<const PixelGrid> tiles, const TileLayout& layout, int scale) {
  if (tiles.size() != layout.tiles.size())
    throw DimensionMismatch("stitch: got " + std::to_string(tiles.size()) + " tiles, layout has " +
                            std::to_string(layout.tiles.size()));
  if (tiles.empty()) throw InvalidArgument("stitch: empty layout");
  const int channels = tiles.front().channels();
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const auto& r = layout.tiles[t];
    if (tiles[t].width() != r.width * scale || tiles[t].height() != r.height * scale ||
        tiles[t].channels() != channels)
      throw DimensionMismatch("stitch: tile " + std::to_string(t) + " does not match its layout rectangle");
  }

  const int tw = layout.tiles.front().width;
  const int th = layout.tiles.front().height;
  const auto wx = axis_feather(layout.x_offsets, tw, layout.image_width, scale);
  const auto wy = axis_feather(layout.y_offsets, th, layout.image_height, scale);
  const std::size_t nx = layout.x_offsets.size();

  PixelGrid out(layout.image_width * scale, layout.image_height * scale, channels);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const auto& tile = tiles[t];
    const auto& r = layout.tiles[t];
    const auto& fx = wx[t % nx];
    const auto& fy = wy[t / nx];
    for (int py = 0; py < tile.height(); ++py)
      for (int px = 0; px < tile.width(); ++px) {
        const double w = fx[px] * fy[py];
        for (int c = 0; c < channels; ++c)
          out.at(r.x * scale + px, r.y * scale + py, c) += w * tile.at(px, py, c);
      }
  }
  return out;
}

PixelGrid tiled_run(const BackendSpec& spec, const PixelGrid& grid, int tile_size, int overlap) {
  auto [tiles, layout] = split(grid, tile_size, overlap);
  if (tiles.size() == 1) return backend::run_backend(spec, grid);

  std::vector<NamedGrid> batch;
  batch.reserve(tiles.size());
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "tile%05zu", t);
    batch.push_back({name, std::move(tiles[t])});
  }
  auto results = backend::run_backend_batch(spec, batch);
  std::vector<PixelGrid> upscaled;
  upscaled.reserve(results.size());
  for (auto& r : results) upscaled.push_back(std::move(r.grid));
  return stitch(upscaled, layout, spec.scale.value());
}

}  // namespace srfuse::tiler

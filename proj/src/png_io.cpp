// 8-bit grayscale/RGB PNG reading and writing on top of libpng.

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "srfuse/error.hpp"
#include "srfuse/image.hpp"

namespace srfuse {

namespace {

using Kind = ImageIoError::Kind;

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

FilePtr open_for_read(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw ImageIoError(Kind::MissingFile, path.string(), "");
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw ImageIoError(Kind::MissingFile, path.string(), "cannot open");
  return f;
}

// Validates signature and IHDR. Leaves the stream positioned after the bytes read.
ImageSize check_header(std::FILE* f, const std::string& path) {
  std::array<unsigned char, 26> head{};
  if (std::fread(head.data(), 1, head.size(), f) != head.size())
    throw ImageIoError(Kind::CorruptStream, path, "truncated header");
  if (png_sig_cmp(head.data(), 0, 8) != 0)
    throw ImageIoError(Kind::CorruptStream, path, "bad PNG signature");
  if (std::string(reinterpret_cast<const char*>(head.data() + 12), 4) != "IHDR")
    throw ImageIoError(Kind::CorruptStream, path, "missing IHDR");

  const auto width = be32(head.data() + 16);
  const auto height = be32(head.data() + 20);
  const int depth = head[24];
  const int color = head[25];
  if (width == 0 || height == 0 || width > 0x7fffffffu || height > 0x7fffffffu)
    throw ImageIoError(Kind::CorruptStream, path, "invalid dimensions");
  if (depth != 8)
    throw ImageIoError(Kind::UnsupportedFormat, path,
                       "bit depth " + std::to_string(depth) + ", only 8 is supported");
  int channels = 0;
  switch (color) {
    case PNG_COLOR_TYPE_GRAY: channels = 1; break;
    case PNG_COLOR_TYPE_RGB: channels = 3; break;
    case PNG_COLOR_TYPE_GRAY_ALPHA:
    case PNG_COLOR_TYPE_RGB_ALPHA:
      throw ImageIoError(Kind::UnsupportedFormat, path, "alpha channels are rejected");
    default:
      throw ImageIoError(Kind::UnsupportedFormat, path,
                         "color type " + std::to_string(color) + " (palette?)");
  }
  return {static_cast<int>(width), static_cast<int>(height), channels};
}

void read_error(png_structp png, png_const_charp) { std::longjmp(png_jmpbuf(png), 1); }
void quiet_warning(png_structp, png_const_charp) {}

// Only C objects live in this frame, so longjmp out of libpng is safe.
bool decode_rows(std::FILE* f, png_bytep* rows) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, read_error, quiet_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, f);
  png_read_info(png, info);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_rows(std::FILE* f, png_bytep* rows, int width, int height, int channels) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, read_error, quiet_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, width, height, 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

ImageSize read_image_size(const std::filesystem::path& path) {
  auto f = open_for_read(path);
  return check_header(f.get(), path.string());
}

PixelGrid load_image(const std::filesystem::path& path) {
  auto f = open_for_read(path);
  const std::string name = path.string();
  const ImageSize size = check_header(f.get(), name);
  std::rewind(f.get());

  const std::size_t stride = static_cast<std::size_t>(size.width) * size.channels;
  std::vector<png_byte> pixels(stride * size.height);
  std::vector<png_bytep> rows(size.height);
  for (int y = 0; y < size.height; ++y) rows[y] = pixels.data() + y * stride;

  if (!decode_rows(f.get(), rows.data()))
    throw ImageIoError(Kind::CorruptStream, name, "decode failed");

  std::vector<double> data(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) data[i] = pixels[i] / 255.0;
  return PixelGrid(size.width, size.height, size.channels, std::move(data));
}

void save_image(const PixelGrid& grid, const std::filesystem::path& path) {
  if (grid.empty()) throw InvalidArgument("cannot save an empty grid");
  const std::string name = path.string();
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ImageIoError(Kind::Unwritable, name, "");

  const std::size_t stride = static_cast<std::size_t>(grid.width()) * grid.channels();
  std::vector<png_byte> pixels(grid.size());
  auto src = grid.data();
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(src[i]);
  std::vector<png_bytep> rows(grid.height());
  for (int y = 0; y < grid.height(); ++y) rows[y] = pixels.data() + y * stride;

  if (!encode_rows(f.get(), rows.data(), grid.width(), grid.height(), grid.channels()))
    throw ImageIoError(Kind::Unwritable, name, "encode failed");
  if (std::fflush(f.get()) != 0) throw ImageIoError(Kind::Unwritable, name, "flush failed");
}

}  // namespace srfuse

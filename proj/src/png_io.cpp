#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "gazetk/raster.hpp"
#include "gazetk/roi.hpp"

namespace gazetk {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Reads any PNG as 8- or 16-bit samples, gray or RGB (alpha stripped).
void read_rows(const std::string& path, int* width, int* height,
               int* channels, int* bit_depth,
               std::vector<std::vector<png_byte>>* rows) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) {
    fail(ErrorCode::IoError, "cannot open " + path);
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::ParseError, "corrupt PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  if (png_get_bit_depth(png, info) == 16) {
    png_set_swap(png);  // PNG is big-endian on disk
  }
  png_read_update_info(png, info);

  *width = static_cast<int>(png_get_image_width(png, info));
  *height = static_cast<int>(png_get_image_height(png, info));
  *bit_depth = png_get_bit_depth(png, info);
  *channels = png_get_channels(png, info);

  const size_t rowbytes = png_get_rowbytes(png, info);
  rows->assign(*height, std::vector<png_byte>(rowbytes));
  std::vector<png_bytep> row_ptrs(*height);
  for (int y = 0; y < *height; ++y) row_ptrs[y] = (*rows)[y].data();
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

void write_rows(const std::string& path, int width, int height, int channels,
                int bit_depth, const std::vector<std::vector<png_byte>>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) {
    fail(ErrorCode::IoError, "cannot write " + path);
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoError, "PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  const int color =
      channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, width, height, bit_depth, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) {
    png_set_swap(png);
  }
  std::vector<png_bytep> row_ptrs(height);
  for (int y = 0; y < height; ++y) {
    row_ptrs[y] = const_cast<png_bytep>(rows[y].data());
  }
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Raster read_png(const std::string& path) {
  int w, h, c, depth;
  std::vector<std::vector<png_byte>> rows;
  read_rows(path, &w, &h, &c, &depth, &rows);
  Raster out(w, h, c);
  const double scale = depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < h; ++y) {
    const png_byte* row = rows[y].data();
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        const size_t i = static_cast<size_t>(x) * c + ch;
        const double v = depth == 16
                             ? reinterpret_cast<const uint16_t*>(row)[i]
                             : row[i];
        out.at(x, y, ch) = v / scale;
      }
    }
  }
  return out;
}

void write_png(const std::string& path, const Raster& raster) {
  if (raster.empty() || (raster.channels != 1 && raster.channels != 3)) {
    fail(ErrorCode::InvalidArgument, "PNG writer expects 1 or 3 channels");
  }
  std::vector<std::vector<png_byte>> rows(
      raster.height,
      std::vector<png_byte>(static_cast<size_t>(raster.width) *
                            raster.channels));
  for (int y = 0; y < raster.height; ++y) {
    for (int x = 0; x < raster.width; ++x) {
      for (int c = 0; c < raster.channels; ++c) {
        const double v = std::clamp(raster.at(x, y, c), 0.0, 1.0);
        rows[y][static_cast<size_t>(x) * raster.channels + c] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
  }
  write_rows(path, raster.width, raster.height, raster.channels, 8, rows);
}

void png_size(const std::string& path, int* width, int* height) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) {
    fail(ErrorCode::IoError, "cannot open " + path);
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::ParseError, "corrupt PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  *width = static_cast<int>(png_get_image_width(png, info));
  *height = static_cast<int>(png_get_image_height(png, info));
  png_destroy_read_struct(&png, &info, nullptr);
}

Raster read_depth_png(const std::string& path) {
  int w, h, c, depth;
  std::vector<std::vector<png_byte>> rows;
  read_rows(path, &w, &h, &c, &depth, &rows);
  if (c != 1) {
    fail(ErrorCode::ParseError, "depth PNG must be single-channel: " + path);
  }
  Raster out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    const png_byte* row = rows[y].data();
    for (int x = 0; x < w; ++x) {
      const double mm = depth == 16
                            ? reinterpret_cast<const uint16_t*>(row)[x]
                            : row[x];
      out.at(x, y) = mm / 1000.0;  // millimeters to meters
    }
  }
  return out;
}

void write_mask_png(const std::string& path, const BinaryMask& mask) {
  if (mask.width <= 0 || mask.height <= 0) {
    fail(ErrorCode::InvalidArgument, "empty mask");
  }
  const size_t rowbytes = (static_cast<size_t>(mask.width) + 7) / 8;
  std::vector<std::vector<png_byte>> rows(
      mask.height, std::vector<png_byte>(rowbytes, 0));
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) {
        rows[y][x / 8] |= static_cast<png_byte>(0x80 >> (x % 8));
      }
    }
  }
  write_rows(path, mask.width, mask.height, 1, 1, rows);
}

void write_depth_png(const std::string& path, const Raster& meters) {
  if (meters.empty() || meters.channels != 1) {
    fail(ErrorCode::InvalidArgument, "depth writer expects 1 channel");
  }
  std::vector<std::vector<png_byte>> rows(
      meters.height,
      std::vector<png_byte>(static_cast<size_t>(meters.width) * 2));
  for (int y = 0; y < meters.height; ++y) {
    uint16_t* row = reinterpret_cast<uint16_t*>(rows[y].data());
    for (int x = 0; x < meters.width; ++x) {
      const double mm = std::clamp(meters.at(x, y) * 1000.0, 0.0, 65535.0);
      row[x] = static_cast<uint16_t>(std::lround(mm));
    }
  }
  write_rows(path, meters.width, meters.height, 1, 16, rows);
}

}  // namespace gazetk

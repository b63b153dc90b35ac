#include "gazetk/raster.hpp"

#include <algorithm>
#include <cmath>

namespace gazetk {

void capped_size(int width, int height, int cap, int* out_width,
                 int* out_height) {
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::EmptyImage, "cannot cap an empty raster");
  }
  const int longest = std::max(width, height);
  if (longest <= cap) {
    *out_width = width;
    *out_height = height;
    return;
  }
  if (width >= height) {
    *out_width = cap;
    *out_height = std::max<int64_t>(
        1, static_cast<int64_t>(height) * cap / width);
  } else {
    *out_height = cap;
    *out_width = std::max<int64_t>(
        1, static_cast<int64_t>(width) * cap / height);
  }
}

Raster resample_area(const Raster& src, int out_width, int out_height) {
  if (src.empty()) {
    fail(ErrorCode::EmptyImage, "resample of empty raster");
  }
  if (out_width == src.width && out_height == src.height) {
    return src;
  }
  Raster dst(out_width, out_height, src.channels);
  const double sx = static_cast<double>(src.width) / out_width;
  const double sy = static_cast<double>(src.height) / out_height;
  for (int oy = 0; oy < out_height; ++oy) {
    const double y0 = oy * sy;
    const double y1 = (oy + 1) * sy;
    const int iy0 = static_cast<int>(std::floor(y0));
    const int iy1 = std::min(src.height - 1,
                             static_cast<int>(std::ceil(y1)) - 1);
    for (int ox = 0; ox < out_width; ++ox) {
      const double x0 = ox * sx;
      const double x1 = (ox + 1) * sx;
      const int ix0 = static_cast<int>(std::floor(x0));
      const int ix1 = std::min(src.width - 1,
                               static_cast<int>(std::ceil(x1)) - 1);
      for (int c = 0; c < src.channels; ++c) {
        double acc = 0.0;
        double weight = 0.0;
        for (int iy = iy0; iy <= iy1; ++iy) {
          const double wy = std::min<double>(iy + 1, y1) -
                            std::max<double>(iy, y0);
          if (wy <= 0) continue;
          for (int ix = ix0; ix <= ix1; ++ix) {
            const double wx = std::min<double>(ix + 1, x1) -
                              std::max<double>(ix, x0);
            if (wx <= 0) continue;
            acc += wx * wy * src.at(ix, iy, c);
            weight += wx * wy;
          }
        }
        dst.at(ox, oy, c) = weight > 0 ? acc / weight : 0.0;
      }
    }
  }
  return dst;
}

Raster resample_bilinear(const Raster& src, int out_width, int out_height) {
  if (src.empty()) {
    fail(ErrorCode::EmptyImage, "resample of empty raster");
  }
  if (out_width == src.width && out_height == src.height) {
    return src;
  }
  Raster dst(out_width, out_height, src.channels);
  const double sx = static_cast<double>(src.width) / out_width;
  const double sy = static_cast<double>(src.height) / out_height;
  for (int oy = 0; oy < out_height; ++oy) {
    // pixel-center mapping: output center -> input coordinates
    const double fy = (oy + 0.5) * sy - 0.5;
    const int iy0 = std::clamp(static_cast<int>(std::floor(fy)), 0,
                               src.height - 1);
    const int iy1 = std::min(iy0 + 1, src.height - 1);
    const double ty = std::clamp(fy - iy0, 0.0, 1.0);
    for (int ox = 0; ox < out_width; ++ox) {
      const double fx = (ox + 0.5) * sx - 0.5;
      const int ix0 = std::clamp(static_cast<int>(std::floor(fx)), 0,
                                 src.width - 1);
      const int ix1 = std::min(ix0 + 1, src.width - 1);
      const double tx = std::clamp(fx - ix0, 0.0, 1.0);
      for (int c = 0; c < src.channels; ++c) {
        const double top = (1 - tx) * src.at(ix0, iy0, c) +
                           tx * src.at(ix1, iy0, c);
        const double bottom = (1 - tx) * src.at(ix0, iy1, c) +
                              tx * src.at(ix1, iy1, c);
        dst.at(ox, oy, c) = (1 - ty) * top + ty * bottom;
      }
    }
  }
  return dst;
}

}  // namespace gazetk

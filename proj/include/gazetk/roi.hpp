#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gazetk/geometry.hpp"

namespace gazetk {

// Binarized heatmap; a cell is foreground iff its 8-bit value exceeds the
// stored threshold.
struct BinaryMask {
  int width = 0;
  int height = 0;
  int threshold = 0;
  std::vector<uint8_t> foreground;

  bool at(int x, int y) const {
    return foreground[static_cast<size_t>(y) * width + x] != 0;
  }
  size_t count() const;
};

using Histogram256 = std::array<uint64_t, 256>;

// Threshold maximizing the between-class variance. Candidates below the
// lowest occupied bin are excluded; ties resolve to the lowest threshold.
// Throws EmptyHistogram when every bin is zero.
int otsu_threshold(const Histogram256& histogram);

// Tight box over the foreground, rescaled from mask resolution to
// full_width x full_height (pass 0 to stay at mask resolution). Corners are
// inclusive: a lone foreground cell (x, y) at scale 1 yields (x, y, x, y).
// Throws EmptyMask.
BBox2D mask_to_bbox(const BinaryMask& mask, int full_width = 0,
                    int full_height = 0);

struct RoiResult {
  BBox2D box;
  BinaryMask mask;
};

// Quantizes the field to 8 bits (min-max, then floor(v*255 + 0.5); constant
// fields quantize to 255 so that thresholding empties them), applies Otsu
// and extracts the box. With largest_component_only the box covers only the
// biggest 8-connected foreground region.
RoiResult extract_roi(const Raster& saliency_field,
                      bool largest_component_only = false);

// 1-bit grayscale PNG of the mask.
void write_mask_png(const std::string& path, const BinaryMask& mask);

}  // namespace gazetk

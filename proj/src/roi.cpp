#include "gazetk/roi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gazetk {

size_t BinaryMask::count() const {
  return static_cast<size_t>(
      std::count(foreground.begin(), foreground.end(), uint8_t{1}));
}

int otsu_threshold(const Histogram256& histogram) {
  uint64_t total = 0;
  double weighted_sum = 0.0;
  int min_bin = -1;
  for (int b = 0; b < 256; ++b) {
    total += histogram[b];
    weighted_sum += static_cast<double>(b) * histogram[b];
    if (min_bin < 0 && histogram[b] > 0) min_bin = b;
  }
  if (total == 0) {
    fail(ErrorCode::EmptyHistogram, "all histogram bins are zero");
  }

  int best_t = min_bin;
  double best_var = -1.0;
  uint64_t below = 0;
  double below_sum = 0.0;
  for (int t = 0; t < 256; ++t) {
    below += histogram[t];
    below_sum += static_cast<double>(t) * histogram[t];
    if (t < min_bin) continue;  // background class would be empty
    const uint64_t above = total - below;
    const double w0 = static_cast<double>(below) / total;
    const double w1 = static_cast<double>(above) / total;
    double var = 0.0;
    if (below > 0 && above > 0) {
      const double mu0 = below_sum / below;
      const double mu1 = (weighted_sum - below_sum) / above;
      var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    }
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

BBox2D mask_to_bbox(const BinaryMask& mask, int full_width, int full_height) {
  int min_x = mask.width, min_y = mask.height, max_x = -1, max_y = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) {
    fail(ErrorCode::EmptyMask, "mask has no foreground");
  }
  const double sx = full_width > 0
                        ? static_cast<double>(full_width) / mask.width
                        : 1.0;
  const double sy = full_height > 0
                        ? static_cast<double>(full_height) / mask.height
                        : 1.0;
  // cell (x, y) covers [x*sx, (x+1)*sx - 1] at full resolution
  return BBox2D{min_x * sx, min_y * sy, (max_x + 1) * sx - 1,
                (max_y + 1) * sy - 1};
}

namespace {

// Keeps only the biggest 8-connected foreground region (ties: the one whose
// first cell appears earliest in scan order).
void keep_largest_component(BinaryMask* mask) {
  const int w = mask->width;
  const int h = mask->height;
  std::vector<int> label(static_cast<size_t>(w) * h, -1);
  std::vector<size_t> component_size;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (!mask->foreground[start] || label[start] >= 0) continue;
    const int id = static_cast<int>(component_size.size());
    size_t size = 0;
    stack.push_back(start);
    label[start] = id;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      ++size;
      const int cx = cur % w;
      const int cy = cur / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int ni = ny * w + nx;
          if (mask->foreground[ni] && label[ni] < 0) {
            label[ni] = id;
            stack.push_back(ni);
          }
        }
      }
    }
    component_size.push_back(size);
  }
  if (component_size.size() <= 1) return;
  const int best = static_cast<int>(
      std::max_element(component_size.begin(), component_size.end()) -
      component_size.begin());
  for (size_t i = 0; i < label.size(); ++i) {
    if (mask->foreground[i] && label[i] != best) mask->foreground[i] = 0;
  }
}

}  // namespace

RoiResult extract_roi(const Raster& saliency_field,
                      bool largest_component_only) {
  if (saliency_field.empty() || saliency_field.channels != 1) {
    fail(ErrorCode::InvalidArgument, "expected a single-channel field");
  }
  const auto [lo_it, hi_it] =
      std::minmax_element(saliency_field.data.begin(),
                          saliency_field.data.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  std::vector<uint8_t> quantized(saliency_field.data.size());
  Histogram256 hist{};
  for (size_t i = 0; i < quantized.size(); ++i) {
    int q = 255;
    if (hi - lo > 0.0) {
      const double v = (saliency_field.data[i] - lo) / (hi - lo);
      q = static_cast<int>(std::floor(v * 255.0 + 0.5));
      q = std::clamp(q, 0, 255);
    }
    quantized[i] = static_cast<uint8_t>(q);
    ++hist[q];
  }

  RoiResult result;
  result.mask.width = saliency_field.width;
  result.mask.height = saliency_field.height;
  result.mask.threshold = otsu_threshold(hist);
  result.mask.foreground.resize(quantized.size());
  for (size_t i = 0; i < quantized.size(); ++i) {
    result.mask.foreground[i] = quantized[i] > result.mask.threshold ? 1 : 0;
  }
  if (largest_component_only) {
    keep_largest_component(&result.mask);
  }
  result.box = mask_to_bbox(result.mask);
  return result;
}

}  // namespace gazetk

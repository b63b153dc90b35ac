#pragma once

#include <string>

#include "gazetk/geometry.hpp"

namespace gazetk {

// Box-filter resampling to an arbitrary target size. Every output sample
// averages the (fractionally weighted) input pixels its footprint covers,
// so downscales are alias-free and deterministic.
Raster resample_area(const Raster& src, int out_width, int out_height);

// Bilinear resampling with pixel-center alignment; used for upscaling
// low-resolution activation maps back to image resolution.
Raster resample_bilinear(const Raster& src, int out_width, int out_height);

// Target size for the internal processing grid: the longer edge becomes
// `cap`, the shorter edge keeps the aspect ratio with whole cells only
// (truncated, minimum 1). Inputs already within the cap are unchanged.
void capped_size(int width, int height, int cap, int* out_width,
                 int* out_height);

// 8-bit PNG I/O. Gray or RGB; values clamped to [0,1] on write.
Raster read_png(const std::string& path);
void write_png(const std::string& path, const Raster& raster);

// Reads only the IHDR dimensions.
void png_size(const std::string& path, int* width, int* height);

// 16-bit single-channel PNG holding millimeters; converted to meters.
Raster read_depth_png(const std::string& path);
void write_depth_png(const std::string& path, const Raster& meters);

}  // namespace gazetk

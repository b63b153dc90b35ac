#pragma once

#include <optional>
#include <vector>

#include "gazetk/ingest.hpp"

namespace gazetk {

struct WindowSpec {
  double length_ms = 250.0;
  double stride_ms = 250.0;
};

// One temporal slice of a gaze log. Samples satisfy
// start_ms <= t < start_ms + length_ms; slices may be empty.
struct Window {
  double start_ms = 0.0;
  double length_ms = 0.0;
  std::vector<GazeSample> samples;

  double center_ms() const { return start_ms + 0.5 * length_ms; }
  bool empty() const { return samples.empty(); }
};

struct GridSpec {
  int gx = 30;
  int gy = 30;
  int gz = 1;  // 1 selects the 2D feature

  int cell_count() const { return gx * gy * gz; }
};

// Normalized occupancy grid over the stimulus domain; the flattened vector
// is the machine-learning feature.
struct HeatmapGrid {
  GridSpec grid;
  std::vector<double> values;  // x fastest, then y, then z

  double& at(int x, int y, int z = 0) {
    return values[x + static_cast<size_t>(grid.gx) * (y + static_cast<size_t>(grid.gy) * z)];
  }
  double at(int x, int y, int z = 0) const {
    return values[x + static_cast<size_t>(grid.gx) * (y + static_cast<size_t>(grid.gy) * z)];
  }
  double sum() const;
};

struct WindowLabel {
  bool has_object = false;
  // (x, y, w, h) of the annotated box as fractions of the stimulus
  // resolution, x/y being the top-left corner.
  std::optional<Eigen::Vector4d> target;
};

// Slices the log into windows covering [t_min, t_max] at the given stride.
// Throws EmptyLog for an empty log.
std::vector<Window> windows(const GazeLog& log, const WindowSpec& spec);

// Builds the occupancy grid: each sample increments the cell
// round(p/R * G) per axis (half away from zero, clamped to the grid), then
// the grid is divided by the sample count so it sums to one.
// Throws EmptyWindow for no samples and OutOfRange for coordinates outside
// [0, R*(1+eps)].
HeatmapGrid encode(const std::vector<GazeSample>& samples, double rx,
                   double ry, double rz, const GridSpec& grid);

// Window class and regression target: object iff an annotated frame with a
// box falls inside the window; the target comes from the annotation nearest
// the window center (earlier wins ties).
WindowLabel label_window(const Window& window, const AnnotationSet& annotations,
                         double rx, double ry);

// Row-major feature vector, x fastest.
std::vector<double> flatten(const HeatmapGrid& grid);

}  // namespace gazetk

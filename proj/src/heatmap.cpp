#include "gazetk/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gazetk {

namespace {

constexpr double kRangeEps = 1e-6;

int cell_index(double p, double r, int g, ErrorCode overflow_code) {
  if (!(p >= 0.0) || p > r * (1.0 + kRangeEps)) {
    fail(overflow_code, "coordinate " + std::to_string(p) +
                            " outside [0, " + std::to_string(r) + "]");
  }
  const double scaled = p / r * g;
  const int idx = static_cast<int>(std::round(scaled));  // half away from zero
  return std::clamp(idx, 0, g - 1);
}

}  // namespace

double HeatmapGrid::sum() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

std::vector<Window> windows(const GazeLog& log, const WindowSpec& spec) {
  if (log.samples.empty()) {
    fail(ErrorCode::EmptyLog, "cannot window an empty log");
  }
  if (spec.length_ms <= 0 || spec.stride_ms <= 0) {
    fail(ErrorCode::InvalidArgument, "window length and stride must be > 0");
  }
  const double t0 = log.t_min();
  const double span = log.t_max() - t0;
  // just enough strides that the last window still contains t_max
  const size_t count =
      span < spec.length_ms
          ? 1
          : static_cast<size_t>(
                std::floor((span - spec.length_ms) / spec.stride_ms)) +
                2;

  std::vector<Window> out(count);
  for (size_t i = 0; i < count; ++i) {
    out[i].start_ms = t0 + static_cast<double>(i) * spec.stride_ms;
    out[i].length_ms = spec.length_ms;
  }
  // samples are sorted; a sample at t can only land in windows whose start
  // lies in (t - length, t], which bounds the stride indices to scan
  for (const auto& s : log.samples) {
    const double rel = s.t_ms - t0;
    const size_t first =
        rel < spec.length_ms
            ? 0
            : static_cast<size_t>(
                  std::floor((rel - spec.length_ms) / spec.stride_ms)) +
                  1;
    for (size_t i = first; i < count; ++i) {
      const double start = out[i].start_ms;
      if (start > s.t_ms) break;
      if (s.t_ms < start + spec.length_ms) {
        out[i].samples.push_back(s);
      }
    }
  }
  return out;
}

HeatmapGrid encode(const std::vector<GazeSample>& samples, double rx,
                   double ry, double rz, const GridSpec& grid) {
  if (samples.empty()) {
    fail(ErrorCode::EmptyWindow, "encode requires at least one sample");
  }
  if (grid.gx < 1 || grid.gy < 1 || grid.gz < 1) {
    fail(ErrorCode::InvalidArgument, "grid cells must be >= 1 per axis");
  }
  HeatmapGrid heat;
  heat.grid = grid;
  heat.values.assign(static_cast<size_t>(grid.cell_count()), 0.0);
  for (const auto& s : samples) {
    const int ix = cell_index(s.x, rx, grid.gx, ErrorCode::OutOfRange);
    const int iy = cell_index(s.y, ry, grid.gy, ErrorCode::OutOfRange);
    const int iz = grid.gz == 1
                       ? 0
                       : cell_index(s.z, rz, grid.gz, ErrorCode::OutOfRange);
    heat.at(ix, iy, iz) += 1.0;
  }
  const double total = static_cast<double>(samples.size());
  for (double& v : heat.values) v /= total;
  return heat;
}

WindowLabel label_window(const Window& window, const AnnotationSet& annotations,
                         double rx, double ry) {
  WindowLabel label;
  if (window.empty()) {
    fail(ErrorCode::EmptyWindow, "cannot label an empty window");
  }
  const double lo = window.start_ms;
  const double hi = window.start_ms + window.length_ms;
  const double center = window.center_ms();

  const Annotation* best = nullptr;
  double best_dist = 0.0;
  for (auto it = annotations.lower_bound(lo); it != annotations.end(); ++it) {
    const double t = it->first;
    if (t >= hi) break;
    if (!it->second) continue;  // reviewed frame without an object
    const double dist = std::abs(t - center);
    // map iteration is ascending in t, so strict < keeps the earlier tie
    if (!best || dist < best_dist) {
      best = &*it->second;
      best_dist = dist;
    }
  }
  if (best) {
    label.has_object = true;
    label.target = Eigen::Vector4d(best->box.x1 / rx, best->box.y1 / ry,
                                   best->box.width() / rx,
                                   best->box.height() / ry);
  }
  return label;
}

std::vector<double> flatten(const HeatmapGrid& grid) {
  return grid.values;
}

}  // namespace gazetk

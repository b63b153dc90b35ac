#include "gazetk/gbvs.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gazetk {

namespace {

constexpr double kFeatureFloor = 1e-4;
constexpr double kZeroRowTotal = 1e-12;
constexpr double kConvergeTol = 1e-8;

void affine_to_unit(std::vector<double>* values) {
  const auto [lo_it, hi_it] = std::minmax_element(values->begin(), values->end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi - lo <= 1e-15) {
    std::fill(values->begin(), values->end(), 1.0);
    return;
  }
  for (double& v : *values) {
    v = kFeatureFloor + (1.0 - kFeatureFloor) * (v - lo) / (hi - lo);
  }
}

Eigen::RowVectorXd uniform_state(int states) {
  return Eigen::RowVectorXd::Constant(states, 1.0 / states);
}

}  // namespace

size_t TransitionMatrix::stored_entries() const {
  if (sparse_) {
    return static_cast<size_t>(sparse_m_.nonZeros());
  }
  return static_cast<size_t>(states_) * static_cast<size_t>(states_);
}

Eigen::RowVectorXd TransitionMatrix::step(
    const Eigen::RowVectorXd& state) const {
  if (state.size() != states_) {
    fail(ErrorCode::DimensionMismatch, "state size does not match matrix");
  }
  if (sparse_) {
    return state * sparse_m_;
  }
  return state * dense_;
}

Eigen::VectorXd TransitionMatrix::row_sums() const {
  if (sparse_) {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(states_);
    for (int r = 0; r < sparse_m_.outerSize(); ++r) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
               sparse_m_, r);
           it; ++it) {
        sums[r] += it.value();
      }
    }
    return sums;
  }
  return dense_.rowwise().sum();
}

std::vector<FeatureMap> extract_features(const Raster& image, int cap) {
  if (image.empty()) {
    fail(ErrorCode::EmptyImage, "feature extraction on empty raster");
  }
  int cols = 0, rows = 0;
  capped_size(image.width, image.height, cap, &cols, &rows);
  const Raster small = resample_area(image, cols, rows);

  const int n = rows * cols;
  std::vector<FeatureMap> maps(3);
  for (auto& m : maps) {
    m.rows = rows;
    m.cols = cols;
    m.values.resize(n);
  }
  maps[0].channel = ChannelKind::Intensity;
  maps[1].channel = ChannelKind::RgOpponent;
  maps[2].channel = ChannelKind::ByOpponent;

  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      double r, g, b;
      if (small.channels >= 3) {
        r = small.at(x, y, 0);
        g = small.at(x, y, 1);
        b = small.at(x, y, 2);
      } else {
        r = g = b = small.at(x, y, 0);
      }
      const size_t i = static_cast<size_t>(y) * cols + x;
      maps[0].values[i] = (r + g + b) / 3.0;
      maps[1].values[i] = std::abs(r - g);
      maps[2].values[i] = std::abs(b - 0.5 * (r + g));
    }
  }
  for (auto& m : maps) {
    affine_to_unit(&m.values);
  }
  return maps;
}

double dissimilarity(const FeatureMap& map, int i, int j) {
  const double mi = map.state(i);
  const double mj = map.state(j);
  if (mi <= 0.0 || mj <= 0.0) {
    fail(ErrorCode::NonPositiveFeature,
         "feature values must be positive for the log ratio");
  }
  return std::abs(std::log(mi / mj));
}

double distance_weight(const FeatureMap& geometry, int i, int j, double sigma,
                       bool legacy_sigma) {
  const double dx = geometry.x_of(i) - geometry.x_of(j);
  const double dy = geometry.y_of(i) - geometry.y_of(j);
  const double denom = legacy_sigma ? 2.0 * sigma : 2.0 * sigma * sigma;
  return std::exp(-(dx * dx + dy * dy) / denom);
}

// Shared builder for both Markov passes. In dissimilarity mode the edge
// weight is d(i,j)*F(i,j); otherwise column_weight[j]*F(i,j).
TransitionMatrix build_weighted_transition(const FeatureMap& geometry,
                                           const Eigen::VectorXd& column_weight,
                                           const GbvsParams& params,
                                           bool dissimilarity_mode) {
  const int rows = geometry.rows;
  const int cols = geometry.cols;
  const int n = rows * cols;
  const double sigma = params.effective_sigma(rows, cols);
  const double denom = params.gaussian_denominator(sigma);

  TransitionMatrix out;
  out.states_ = n;
  out.sparse_ = params.sparsity > 0.0;

  // radius implied by F(i,j) >= l
  double radius2 = std::numeric_limits<double>::infinity();
  if (out.sparse_) {
    radius2 = -denom * std::log(params.sparsity);
  }
  const int radius_cells = out.sparse_
                               ? static_cast<int>(std::floor(std::sqrt(radius2)))
                               : std::max(rows, cols);

  // F depends only on the cell offset; precompute the exponential table
  Eigen::MatrixXd f_table(2 * rows - 1, 2 * cols - 1);
  for (int dy = -(rows - 1); dy <= rows - 1; ++dy) {
    for (int dx = -(cols - 1); dx <= cols - 1; ++dx) {
      f_table(dy + rows - 1, dx + cols - 1) =
          std::exp(-(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy) /
                   denom);
    }
  }

  std::vector<double> log_feature;
  if (dissimilarity_mode) {
    log_feature.resize(n);
    for (int i = 0; i < n; ++i) {
      if (geometry.values[i] <= 0.0) {
        fail(ErrorCode::NonPositiveFeature,
             "feature values must be positive for the log ratio");
      }
      log_feature[i] = std::log(geometry.values[i]);
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  if (out.sparse_) {
    const size_t per_row = static_cast<size_t>(2 * radius_cells + 1) *
                           static_cast<size_t>(2 * radius_cells + 1);
    triplets.reserve(std::min<size_t>(static_cast<size_t>(n) * per_row,
                                      static_cast<size_t>(n) * n));
  } else {
    out.dense_ = Eigen::MatrixXd::Zero(n, n);
  }

  std::vector<int> pattern;
  std::vector<double> weights;
  for (int i = 0; i < n; ++i) {
    const int xi = geometry.x_of(i);
    const int yi = geometry.y_of(i);
    pattern.clear();
    weights.clear();
    double total = 0.0;

    const int y_lo = std::max(0, yi - radius_cells);
    const int y_hi = std::min(rows - 1, yi + radius_cells);
    const int x_lo = std::max(0, xi - radius_cells);
    const int x_hi = std::min(cols - 1, xi + radius_cells);
    for (int yj = y_lo; yj <= y_hi; ++yj) {
      for (int xj = x_lo; xj <= x_hi; ++xj) {
        const int dx = xj - xi;
        const int dy = yj - yi;
        if (out.sparse_ &&
            static_cast<double>(dx) * dx + static_cast<double>(dy) * dy >
                radius2) {
          continue;
        }
        const int j = yj * cols + xj;
        pattern.push_back(j);
        if (j == i) {
          weights.push_back(0.0);  // zero self-transition before normalization
          continue;
        }
        const double f = f_table(dy + rows - 1, dx + cols - 1);
        const double base = dissimilarity_mode
                                ? std::abs(log_feature[i] - log_feature[j])
                                : column_weight[j];
        const double w = base * f;
        weights.push_back(w);
        total += w;
      }
    }

    if (total < kZeroRowTotal) {
      // degenerate row: spread uniformly over the allowed pattern
      const double u = 1.0 / static_cast<double>(pattern.size());
      for (size_t p = 0; p < pattern.size(); ++p) weights[p] = u;
    } else {
      for (double& w : weights) w /= total;
    }

    if (out.sparse_) {
      for (size_t p = 0; p < pattern.size(); ++p) {
        triplets.emplace_back(i, pattern[p], weights[p]);
      }
    } else {
      for (size_t p = 0; p < pattern.size(); ++p) {
        out.dense_(i, pattern[p]) = weights[p];
      }
    }
  }

  if (out.sparse_) {
    out.sparse_m_.resize(n, n);
    out.sparse_m_.setFromTriplets(triplets.begin(), triplets.end());
    out.sparse_m_.makeCompressed();
  }
  return out;
}

TransitionMatrix build_transition(const FeatureMap& map,
                                  const GbvsParams& params) {
  return build_weighted_transition(map, Eigen::VectorXd(), params, true);
}

ActivationMap gaze_init(const std::vector<Vec2>& gaze_cells, int rows,
                        int cols, const GbvsParams& params,
                        const std::vector<double>& weights) {
  if (!weights.empty() && weights.size() != gaze_cells.size()) {
    fail(ErrorCode::DimensionMismatch, "one weight per gaze point required");
  }
  const int n = rows * cols;
  const double sigma = params.effective_sigma(rows, cols);
  const double denom = params.gaussian_denominator(sigma);

  Eigen::RowVectorXd nu = Eigen::RowVectorXd::Zero(n);
  double used = 0.0;
  for (size_t t = 0; t < gaze_cells.size(); ++t) {
    const Vec2& g = gaze_cells[t];
    const double b = weights.empty() ? 1.0 : weights[t];
    if (b < 0) {
      fail(ErrorCode::InvalidArgument, "gaze weights must be non-negative");
    }
    if (b == 0.0 || g.x() < -0.5 || g.x() > cols - 0.5 || g.y() < -0.5 ||
        g.y() > rows - 0.5) {
      continue;
    }
    Eigen::RowVectorXd nu_t(n);
    for (int i = 0; i < n; ++i) {
      const double dx = (i % cols) - g.x();
      const double dy = (i / cols) - g.y();
      nu_t[i] = std::exp(-(dx * dx + dy * dy) / denom);
    }
    const double norm = nu_t.sum();
    if (norm > 0) {
      nu += b * nu_t / norm;
      used += b;
    }
  }
  if (used <= 0.0) {
    fail(ErrorCode::NoGazeInDomain, "no gaze point falls inside the grid");
  }
  ActivationMap out;
  out.rows = rows;
  out.cols = cols;
  out.values = nu / nu.sum();
  return out;
}

ActivationMap blend_activation(const ActivationMap& previous,
                               const ActivationMap& current, double q) {
  if (q >= 1.0) {
    return previous;
  }
  if (q <= 0.0) {
    return current;
  }
  if (previous.rows != current.rows || previous.cols != current.cols) {
    fail(ErrorCode::DimensionMismatch, "activation grids differ");
  }
  ActivationMap out;
  out.rows = current.rows;
  out.cols = current.cols;
  out.values = q * previous.values + (1.0 - q) * current.values;
  out.values /= out.values.sum();
  return out;
}

IterateResult iterate(const TransitionMatrix& transition,
                      const ActivationMap& nu, int k, bool converge) {
  IterateResult result;
  result.activation = nu;
  if (!converge && k <= 0) {
    return result;  // k = 0 contract: the input, untouched
  }
  Eigen::RowVectorXd state = nu.values;
  if (converge) {
    const int max_steps = 10 * transition.states();
    result.converged = false;
    for (int s = 0; s < max_steps; ++s) {
      Eigen::RowVectorXd next = transition.step(state);
      next /= next.sum();
      const double residual = (next - state).cwiseAbs().sum();
      state = std::move(next);
      ++result.steps;
      if (residual < kConvergeTol) {
        result.converged = true;
        break;
      }
    }
  } else {
    for (int s = 0; s < k; ++s) {
      state = transition.step(state);
      state /= state.sum();
      ++result.steps;
    }
  }
  result.activation.values = std::move(state);
  return result;
}

ActivationMap normalize_activation(
    const ActivationMap& activation, const GbvsParams& params,
    const std::optional<std::vector<Vec2>>& gaze_cells) {
  const double hi = activation.values.maxCoeff();
  const double lo = activation.values.minCoeff();
  if (hi - lo <= 1e-12 * std::max(std::abs(hi), 1e-300)) {
    return activation;  // constant map: nothing to accentuate
  }
  FeatureMap geometry;
  geometry.rows = activation.rows;
  geometry.cols = activation.cols;
  const TransitionMatrix t_norm = build_weighted_transition(
      geometry, activation.values.transpose(), params, false);

  ActivationMap start;
  start.rows = activation.rows;
  start.cols = activation.cols;
  if (gaze_cells) {
    start = gaze_init(*gaze_cells, activation.rows, activation.cols, params);
  } else {
    start.values = uniform_state(activation.rows * activation.cols);
  }
  return iterate(t_norm, start, std::max(1, params.normalize_k)).activation;
}

namespace {

// Maps pixel coordinates on the full image to continuous cell coordinates
// on the internal grid (pixel centers to cell centers).
std::vector<Vec2> to_cell_coords(const std::vector<Vec2>& gaze_px,
                                 int img_w, int img_h, int cols, int rows) {
  std::vector<Vec2> cells;
  cells.reserve(gaze_px.size());
  for (const auto& g : gaze_px) {
    cells.emplace_back((g.x() + 0.5) * cols / img_w - 0.5,
                       (g.y() + 0.5) * rows / img_h - 0.5);
  }
  return cells;
}

Raster to_unit_raster(const ActivationMap& map) {
  Raster out(map.cols, map.rows, 1);
  const double hi = map.values.maxCoeff();
  const double lo = map.values.minCoeff();
  if (hi - lo <= 0.0) {
    std::fill(out.data.begin(), out.data.end(), 1.0);
    return out;
  }
  for (int y = 0; y < map.rows; ++y) {
    for (int x = 0; x < map.cols; ++x) {
      out.at(x, y) = (map.values[y * map.cols + x] - lo) / (hi - lo);
    }
  }
  return out;
}

}  // namespace

SaliencyResult SaliencyEngine::process(const Raster& image,
                                       const std::vector<Vec2>& gaze_px) {
  if (image.empty()) {
    fail(ErrorCode::EmptyImage, "saliency on empty raster");
  }
  int cols = 0, rows = 0;
  capped_size(image.width, image.height, params_.cap, &cols, &rows);
  const bool uses_gaze = params_.variant != GbvsVariant::Plain;
  const auto gaze_cells =
      to_cell_coords(gaze_px, image.width, image.height, cols, rows);

  SaliencyResult result;

  if (uses_gaze && params_.k == 0 && !params_.converge) {
    // pure fixation heatmap: no Markov pass at all
    result.combined = gaze_init(gaze_cells, rows, cols, params_);
  } else {
    const auto features = extract_features(image, params_.cap);
    if (!previous_.empty() &&
        (previous_.size() != features.size() ||
         previous_[0].rows != rows || previous_[0].cols != cols)) {
      previous_.clear();  // grid changed; temporal history is meaningless
    }
    const bool blend = params_.temporal_blend > 0.0 && !previous_.empty();

    Eigen::RowVectorXd combined = Eigen::RowVectorXd::Zero(rows * cols);
    std::vector<ActivationMap> next_previous;
    bool all_converged = true;
    for (size_t c = 0; c < features.size(); ++c) {
      const TransitionMatrix t = build_transition(features[c], params_);
      ActivationMap nu0;
      nu0.rows = rows;
      nu0.cols = cols;
      if (uses_gaze) {
        nu0 = gaze_init(gaze_cells, rows, cols, params_);
      } else {
        nu0.values = uniform_state(rows * cols);
      }
      if (blend) {
        nu0 = blend_activation(previous_[c], nu0, params_.temporal_blend);
      }
      IterateResult it = iterate(t, nu0, params_.k, params_.converge);
      all_converged = all_converged && it.converged;
      next_previous.push_back(it.activation);
      const ActivationMap normalized = normalize_activation(
          it.activation, params_,
          params_.variant == GbvsVariant::DGA
              ? std::optional<std::vector<Vec2>>(gaze_cells)
              : std::nullopt);
      combined += normalized.values;
    }
    previous_ = std::move(next_previous);
    result.converged = all_converged;
    result.combined.rows = rows;
    result.combined.cols = cols;
    result.combined.values = combined / combined.sum();
  }

  result.field = resample_bilinear(to_unit_raster(result.combined),
                                   image.width, image.height);
  return result;
}

SaliencyResult saliency(const Raster& image, const std::vector<Vec2>& gaze_px,
                        const GbvsParams& params) {
  SaliencyEngine engine(params);
  return engine.process(image, gaze_px);
}

}  // namespace gazetk

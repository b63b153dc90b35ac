#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "gazetk/raster.hpp"

namespace gazetk {

enum class GbvsVariant { Plain, GA, DGA };
enum class ChannelKind { Intensity, RgOpponent, ByOpponent };

struct GbvsParams {
  double sigma = 0.0;           // cells; 0 selects 0.15 * mean(rows, cols)
  int k = 1;                    // activation iterations; 0 = pure gaze heatmap
  double sparsity = 0.0;        // threshold l in [0,1); 0 keeps the matrix dense
  double temporal_blend = 0.0;  // q: weight of the previous activation
  int cap = 32;                 // internal resolution, longest edge in cells
  int normalize_k = 1;          // iterations of the normalization pass
  GbvsVariant variant = GbvsVariant::Plain;
  bool legacy_sigma = false;    // exp(-D^2/(2*sigma)) instead of 2*sigma^2
  bool converge = false;        // iterate the activation to stationarity

  double effective_sigma(int rows, int cols) const {
    return sigma > 0 ? sigma : 0.15 * 0.5 * (rows + cols);
  }
  double gaussian_denominator(double s) const {
    return legacy_sigma ? 2.0 * s : 2.0 * s * s;
  }
};

// One feature channel on the internal grid; values strictly positive so
// the log-ratio dissimilarity is always defined.
struct FeatureMap {
  int rows = 0;
  int cols = 0;
  ChannelKind channel = ChannelKind::Intensity;
  std::vector<double> values;  // row-major

  double at(int x, int y) const {
    return values[static_cast<size_t>(y) * cols + x];
  }
  double& at(int x, int y) {
    return values[static_cast<size_t>(y) * cols + x];
  }
  int states() const { return rows * cols; }
  double state(int i) const { return values[i]; }
  int x_of(int i) const { return i % cols; }
  int y_of(int i) const { return i / cols; }
};

// Markov state vector over grid cells; non-negative, sums to one.
struct ActivationMap {
  int rows = 0;
  int cols = 0;
  Eigen::RowVectorXd values;

  double sum() const { return values.sum(); }
};

// Row-stochastic transition weights, dense or radius-limited sparse.
class TransitionMatrix {
 public:
  int states() const { return states_; }
  bool is_sparse() const { return sparse_; }
  // Touched/stored entry count: n^2 for dense, nnz for sparse.
  size_t stored_entries() const;
  // One Markov step: state * T.
  Eigen::RowVectorXd step(const Eigen::RowVectorXd& state) const;
  // Per-row totals; each must equal one for a stochastic matrix.
  Eigen::VectorXd row_sums() const;

 private:
  friend TransitionMatrix build_weighted_transition(
      const FeatureMap& geometry, const Eigen::VectorXd& column_weight,
      const GbvsParams& params, bool dissimilarity_mode);

  bool sparse_ = false;
  int states_ = 0;
  Eigen::MatrixXd dense_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_m_;
};

// Resamples to the internal grid and extracts intensity, red-green and
// blue-yellow opponency channels, each affinely mapped to [1e-4, 1]
// (constant channels map to 1 everywhere).
std::vector<FeatureMap> extract_features(const Raster& image, int cap);

// |log(M(i)/M(j))|. Throws NonPositiveFeature.
double dissimilarity(const FeatureMap& map, int i, int j);

// exp(-D^2 / (2 sigma^2)) over the Euclidean cell distance of states i, j.
double distance_weight(const FeatureMap& geometry, int i, int j, double sigma,
                       bool legacy_sigma = false);

// Entry (i,j) proportional to d(i,j) * F(i,j), zero diagonal, rows
// normalized to sum one. Sparse mode drops pairs farther apart than
// sqrt(-2 sigma^2 ln l) before normalization. Rows whose total weight
// falls below 1e-12 become uniform over their allowed pattern.
TransitionMatrix build_transition(const FeatureMap& map,
                                  const GbvsParams& params);

// Gaze-seeded initial activation: nu = sum_t b_t * nu_t / ||nu_t||_1 with
// nu_t(i) = F(s_i, g_t), renormalized. Gaze points are given in continuous
// cell coordinates; points outside the grid are ignored and an empty
// remainder throws NoGazeInDomain. Per-point weights b_t (e.g. fixation
// durations) default to uniform.
ActivationMap gaze_init(const std::vector<Vec2>& gaze_cells, int rows,
                        int cols, const GbvsParams& params,
                        const std::vector<double>& weights = {});

// q * previous + (1-q) * current; q = 1 returns previous verbatim.
ActivationMap blend_activation(const ActivationMap& previous,
                               const ActivationMap& current, double q);

struct IterateResult {
  ActivationMap activation;
  bool converged = true;
  int steps = 0;
};

// nu * T^k with renormalization per step; k = 0 returns nu untouched.
// Converge mode iterates until the L1 residual drops below 1e-8 or
// 10 * states steps elapsed, flagging non-convergence on the way out.
IterateResult iterate(const TransitionMatrix& transition,
                      const ActivationMap& nu, int k, bool converge = false);

// Second Markov pass with weights w'(i,j) = A(j) * F(i,j); the start vector
// is uniform unless gaze cells are supplied (DGA). Constant activations are
// returned unchanged.
ActivationMap normalize_activation(
    const ActivationMap& activation, const GbvsParams& params,
    const std::optional<std::vector<Vec2>>& gaze_cells = std::nullopt);

struct SaliencyResult {
  Raster field;             // image resolution, [0,1]
  ActivationMap combined;   // internal grid, sums to one
  bool converged = true;
};

// Full pipeline for a single frame. Gaze points are pixel coordinates on
// the input image; the plain variant ignores them. k = 0 with a gaze
// variant short-circuits to the pure gaze heatmap.
SaliencyResult saliency(const Raster& image, const std::vector<Vec2>& gaze_px,
                        const GbvsParams& params);

// Stateful wrapper for frame sequences: carries the previous per-channel
// activations and blends them into each initialization with weight q.
class SaliencyEngine {
 public:
  explicit SaliencyEngine(const GbvsParams& params) : params_(params) {}

  SaliencyResult process(const Raster& image, const std::vector<Vec2>& gaze_px);
  void reset() { previous_.clear(); }
  const GbvsParams& params() const { return params_; }

 private:
  GbvsParams params_;
  std::vector<ActivationMap> previous_;  // one per channel
};

}  // namespace gazetk

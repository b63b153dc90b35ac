#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gazetk/errors.hpp"

namespace gazetk {

// Exhaustive-scan k-nearest-neighbor model over Euclidean distance.
// Training data is stored verbatim; everything is deterministic, with
// distance ties resolved toward the lower training index.
class KnnModel {
 public:
  // Classifier: labels are 0 (no object) / 1 (object).
  static KnnModel fit(const std::vector<std::vector<double>>& features,
                      const std::vector<int>& labels, int k);
  // Regressor: 4-vector targets (x, y, w, h fractions).
  static KnnModel fit(const std::vector<std::vector<double>>& features,
                      const std::vector<Eigen::Vector4d>& targets, int k);

  struct Vote {
    int label = 0;
    double fraction = 0.0;  // share of the k neighbors voting for `label`
  };

  Vote classify(const std::vector<double>& query) const;
  Eigen::Vector4d regress(const std::vector<double>& query) const;

  // Indices of the k nearest training rows, nearest first.
  std::vector<size_t> neighbors(const std::vector<double>& query) const;

  size_t size() const { return static_cast<size_t>(features_.rows()); }
  size_t dimension() const { return static_cast<size_t>(features_.cols()); }
  int k() const { return k_; }
  bool is_classifier() const { return !labels_.empty(); }

 private:
  KnnModel() = default;

  Eigen::MatrixXd features_;
  Eigen::VectorXd row_norms_;  // squared norms, cached for the distance GEMV
  std::vector<int> labels_;
  Eigen::Matrix<double, Eigen::Dynamic, 4> targets_;
  int k_ = 1;
};

struct ClassificationReport {
  int folds = 0;
  int k = 0;
  uint32_t seed = 0;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

struct RegressionReport {
  int folds = 0;
  int k = 0;
  uint32_t seed = 0;
  std::vector<Eigen::Vector4d> fold_mae;
  Eigen::Vector4d mean_mae = Eigen::Vector4d::Zero();
  Eigen::Vector4d std_mae = Eigen::Vector4d::Zero();
};

// Seeded, reproducible fold assignment (Fisher-Yates over a pinned PRNG).
std::vector<int> fold_assignment(size_t n, int folds, uint32_t seed);

ClassificationReport cross_validate_classifier(
    const std::vector<std::vector<double>>& features,
    const std::vector<int>& labels, int folds = 5, int k = 1,
    uint32_t seed = 42);

RegressionReport cross_validate_regressor(
    const std::vector<std::vector<double>>& features,
    const std::vector<Eigen::Vector4d>& targets, int folds = 5, int k = 1,
    uint32_t seed = 42);

}  // namespace gazetk

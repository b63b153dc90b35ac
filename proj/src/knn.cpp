#include "gazetk/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace gazetk {

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    fail(ErrorCode::TooFewSamples, "no training rows");
  }
  const size_t dim = rows.front().size();
  Eigen::MatrixXd m(rows.size(), dim);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      fail(ErrorCode::DimensionMismatch,
           "row " + std::to_string(i) + " has " +
               std::to_string(rows[i].size()) + " values, expected " +
               std::to_string(dim));
    }
    m.row(i) = Eigen::Map<const Eigen::VectorXd>(rows[i].data(), dim);
  }
  return m;
}

void check_k(int k, size_t n) {
  if (k < 1 || static_cast<size_t>(k) > n) {
    fail(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " with n=" +
                                   std::to_string(n));
  }
}

}  // namespace

KnnModel KnnModel::fit(const std::vector<std::vector<double>>& features,
                       const std::vector<int>& labels, int k) {
  KnnModel model;
  model.features_ = to_matrix(features);
  model.row_norms_ = model.features_.rowwise().squaredNorm();
  if (labels.size() != features.size()) {
    fail(ErrorCode::DimensionMismatch, "label count does not match rows");
  }
  check_k(k, features.size());
  model.labels_ = labels;
  model.k_ = k;
  return model;
}

KnnModel KnnModel::fit(const std::vector<std::vector<double>>& features,
                       const std::vector<Eigen::Vector4d>& targets, int k) {
  KnnModel model;
  model.features_ = to_matrix(features);
  model.row_norms_ = model.features_.rowwise().squaredNorm();
  if (targets.size() != features.size()) {
    fail(ErrorCode::DimensionMismatch, "target count does not match rows");
  }
  check_k(k, features.size());
  model.targets_.resize(targets.size(), 4);
  for (size_t i = 0; i < targets.size(); ++i) {
    model.targets_.row(i) = targets[i];
  }
  model.k_ = k;
  return model;
}

std::vector<size_t> KnnModel::neighbors(const std::vector<double>& query) const {
  if (query.size() != dimension()) {
    fail(ErrorCode::DimensionMismatch,
         "query dimension " + std::to_string(query.size()) + " != " +
             std::to_string(dimension()));
  }
  const Eigen::Map<const Eigen::VectorXd> q(query.data(), query.size());
  // |a - q|^2 = |a|^2 - 2 a.q + |q|^2; the |q|^2 term is rank-irrelevant,
  // and the matrix-vector product beats a row-by-row subtraction by far
  const Eigen::VectorXd d2 =
      (row_norms_ - 2.0 * (features_ * q)).array() + q.squaredNorm();

  std::vector<size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  const size_t k = static_cast<size_t>(k_);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](size_t a, size_t b) {
                      if (d2[a] != d2[b]) return d2[a] < d2[b];
                      return a < b;  // distance tie: lower training index
                    });
  order.resize(k);
  return order;
}

KnnModel::Vote KnnModel::classify(const std::vector<double>& query) const {
  const auto nn = neighbors(query);
  int object_votes = 0;
  for (size_t idx : nn) {
    object_votes += labels_[idx] != 0 ? 1 : 0;
  }
  const int no_object_votes = static_cast<int>(nn.size()) - object_votes;
  Vote vote;
  // vote tie goes to no-object
  vote.label = object_votes > no_object_votes ? 1 : 0;
  const int winner = vote.label == 1 ? object_votes : no_object_votes;
  vote.fraction = static_cast<double>(winner) / static_cast<double>(nn.size());
  return vote;
}

Eigen::Vector4d KnnModel::regress(const std::vector<double>& query) const {
  const auto nn = neighbors(query);
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (size_t idx : nn) {
    acc += targets_.row(idx).transpose();
  }
  return acc / static_cast<double>(nn.size());
}

std::vector<int> fold_assignment(size_t n, int folds, uint32_t seed) {
  if (folds < 2 || n < static_cast<size_t>(folds)) {
    fail(ErrorCode::TooFewSamples, "need at least one sample per fold");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // hand-rolled Fisher-Yates: std::shuffle is implementation-defined and
  // would break cross-platform reproducibility of the fold split
  std::mt19937 gen(seed);
  for (size_t i = n - 1; i > 0; --i) {
    const size_t j = gen() % (i + 1);
    std::swap(order[i], order[j]);
  }
  std::vector<int> assignment(n);
  for (size_t pos = 0; pos < n; ++pos) {
    assignment[order[pos]] = static_cast<int>(pos % folds);
  }
  return assignment;
}

namespace {

template <typename Eval>
void run_folds(size_t n, int folds, uint32_t seed, const Eval& eval) {
  const auto assignment = fold_assignment(n, folds, seed);
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<size_t> train, test;
    for (size_t i = 0; i < n; ++i) {
      (assignment[i] == fold ? test : train).push_back(i);
    }
    eval(fold, train, test);
  }
}

}  // namespace

ClassificationReport cross_validate_classifier(
    const std::vector<std::vector<double>>& features,
    const std::vector<int>& labels, int folds, int k, uint32_t seed) {
  ClassificationReport report;
  report.folds = folds;
  report.k = k;
  report.seed = seed;
  run_folds(features.size(), folds, seed,
            [&](int, const std::vector<size_t>& train,
                const std::vector<size_t>& test) {
              std::vector<std::vector<double>> tf;
              std::vector<int> tl;
              for (size_t i : train) {
                tf.push_back(features[i]);
                tl.push_back(labels[i]);
              }
              const auto model =
                  KnnModel::fit(tf, tl, std::min<int>(k, tf.size()));
              size_t correct = 0;
              for (size_t i : test) {
                if (model.classify(features[i]).label == labels[i]) ++correct;
              }
              report.fold_accuracy.push_back(
                  static_cast<double>(correct) / test.size());
            });
  const double mean =
      std::accumulate(report.fold_accuracy.begin(),
                      report.fold_accuracy.end(), 0.0) /
      report.fold_accuracy.size();
  double var = 0.0;
  for (double a : report.fold_accuracy) var += (a - mean) * (a - mean);
  report.mean_accuracy = mean;
  report.std_accuracy = std::sqrt(var / report.fold_accuracy.size());
  return report;
}

RegressionReport cross_validate_regressor(
    const std::vector<std::vector<double>>& features,
    const std::vector<Eigen::Vector4d>& targets, int folds, int k,
    uint32_t seed) {
  RegressionReport report;
  report.folds = folds;
  report.k = k;
  report.seed = seed;
  run_folds(features.size(), folds, seed,
            [&](int, const std::vector<size_t>& train,
                const std::vector<size_t>& test) {
              std::vector<std::vector<double>> tf;
              std::vector<Eigen::Vector4d> tt;
              for (size_t i : train) {
                tf.push_back(features[i]);
                tt.push_back(targets[i]);
              }
              const auto model =
                  KnnModel::fit(tf, tt, std::min<int>(k, tf.size()));
              Eigen::Vector4d mae = Eigen::Vector4d::Zero();
              for (size_t i : test) {
                mae += (model.regress(features[i]) - targets[i]).cwiseAbs();
              }
              report.fold_mae.push_back(mae / static_cast<double>(test.size()));
            });
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  for (const auto& m : report.fold_mae) mean += m;
  mean /= static_cast<double>(report.fold_mae.size());
  Eigen::Vector4d var = Eigen::Vector4d::Zero();
  for (const auto& m : report.fold_mae) {
    var += (m - mean).cwiseProduct(m - mean);
  }
  report.mean_mae = mean;
  report.std_mae =
      (var / static_cast<double>(report.fold_mae.size())).cwiseSqrt();
  return report;
}

}  // namespace gazetk

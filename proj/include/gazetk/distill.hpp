#pragma once

#include <optional>
#include <vector>

#include "gazetk/ingest.hpp"

namespace gazetk {

struct DistilledProposal {
  size_t original_index = 0;  // 0-based position in the full proposal set
  BBox2D box;
};

// Keeps the proposals whose box contains the gaze point (inclusive
// boundaries), preserving the hierarchical order. An empty result is valid.
std::vector<DistilledProposal> distill(const ProposalList& proposals,
                                       const Vec2& gaze);
std::vector<DistilledProposal> distill(
    const std::vector<DistilledProposal>& proposals, const Vec2& gaze);

// Intersection of the per-point subsets; a second gaze point can pin down
// elongated objects.
std::vector<DistilledProposal> distill_multi(const ProposalList& proposals,
                                             const std::vector<Vec2>& gaze);

// Precision/recall of "sufficient" boxes (IoU >= tau against ground truth)
// plus the 1-based table indices. reference_sufficient supplies the recall
// denominator when analyzing a subset of a larger set; it defaults to the
// set's own sufficient count.
struct SufficiencyReport {
  size_t total = 0;
  size_t sufficient_count = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int best_index = 0;              // 1-based; 0 when no box overlaps
  double best_iou = 0.0;
  int first_sufficient_index = 0;  // 1-based; 0 when none is sufficient
  double first_sufficient_iou = 0.0;
};

SufficiencyReport sufficiency_report(
    const std::vector<BBox2D>& boxes, const BBox2D& ground_truth,
    double tau = 0.7,
    std::optional<size_t> reference_sufficient = std::nullopt);

// Full-vs-distilled comparison in the shape of the published tables.
struct DistillReport {
  std::vector<DistilledProposal> distilled;
  SufficiencyReport full;
  SufficiencyReport after;  // recall measured against the full set
  double tau = 0.7;
};

DistillReport distill_report(const ProposalList& proposals, const Vec2& gaze,
                             const BBox2D& ground_truth, double tau = 0.7);

}  // namespace gazetk

#include "gazetk/distill.hpp"

#include <algorithm>

namespace gazetk {

std::vector<DistilledProposal> distill(const ProposalList& proposals,
                                       const Vec2& gaze) {
  std::vector<DistilledProposal> out;
  for (size_t i = 0; i < proposals.boxes.size(); ++i) {
    if (proposals.boxes[i].contains(gaze.x(), gaze.y())) {
      out.push_back({i, proposals.boxes[i]});
    }
  }
  return out;
}

std::vector<DistilledProposal> distill(
    const std::vector<DistilledProposal>& proposals, const Vec2& gaze) {
  std::vector<DistilledProposal> out;
  for (const auto& p : proposals) {
    if (p.box.contains(gaze.x(), gaze.y())) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<DistilledProposal> distill_multi(const ProposalList& proposals,
                                             const std::vector<Vec2>& gaze) {
  std::vector<DistilledProposal> out;
  for (size_t i = 0; i < proposals.boxes.size(); ++i) {
    const auto& box = proposals.boxes[i];
    const bool keep = std::all_of(gaze.begin(), gaze.end(), [&](const Vec2& g) {
      return box.contains(g.x(), g.y());
    });
    if (keep) {
      out.push_back({i, box});
    }
  }
  return out;
}

SufficiencyReport sufficiency_report(
    const std::vector<BBox2D>& boxes, const BBox2D& ground_truth, double tau,
    std::optional<size_t> reference_sufficient) {
  if (tau <= 0.0 || tau > 1.0) {
    fail(ErrorCode::InvalidArgument, "tau must lie in (0, 1]");
  }
  SufficiencyReport report;
  report.total = boxes.size();
  for (size_t i = 0; i < boxes.size(); ++i) {
    const double iou = iou2d(boxes[i], ground_truth);
    if (iou > report.best_iou) {
      report.best_iou = iou;
      report.best_index = static_cast<int>(i) + 1;
    }
    if (iou >= tau) {
      ++report.sufficient_count;
      if (report.first_sufficient_index == 0) {
        report.first_sufficient_index = static_cast<int>(i) + 1;
        report.first_sufficient_iou = iou;
      }
    }
  }
  report.precision = boxes.empty()
                         ? 0.0
                         : static_cast<double>(report.sufficient_count) /
                               static_cast<double>(boxes.size());
  const size_t denom = reference_sufficient.value_or(report.sufficient_count);
  report.recall = denom == 0 ? 0.0
                             : static_cast<double>(report.sufficient_count) /
                                   static_cast<double>(denom);
  report.f1 = (report.precision + report.recall) > 0
                  ? 2.0 * report.precision * report.recall /
                        (report.precision + report.recall)
                  : 0.0;
  return report;
}

DistillReport distill_report(const ProposalList& proposals, const Vec2& gaze,
                             const BBox2D& ground_truth, double tau) {
  DistillReport report;
  report.tau = tau;
  report.distilled = distill(proposals, gaze);
  report.full = sufficiency_report(proposals.boxes, ground_truth, tau);
  std::vector<BBox2D> subset;
  subset.reserve(report.distilled.size());
  for (const auto& p : report.distilled) subset.push_back(p.box);
  report.after = sufficiency_report(subset, ground_truth, tau,
                                    report.full.sufficient_count);
  return report;
}

}  // namespace gazetk

#pragma once

#include <map>
#include <string>
#include <vector>

#include "gazetk/geometry.hpp"

namespace gazetk {

struct Detection {
  std::string image_id;
  std::string class_name;
  BBox2D box;
  double confidence = 0.0;
};

struct GroundTruthBox {
  std::string image_id;
  std::string class_name;
  BBox2D box;
};

// Greedy matching within one image/class group: detections ordered by
// confidence (ties keep input order), each grabs the unmatched ground truth
// of highest IoU >= threshold (ties: lowest ground-truth index).
struct GroupMatch {
  std::vector<size_t> det_order;  // indices into the input, sorted by score
  std::vector<int> matched_gt;    // per ordered detection, -1 for FP
};

GroupMatch match_detections(const std::vector<Detection>& dets,
                            const std::vector<BBox2D>& gts,
                            double iou_threshold);

// MS-COCO 101-point interpolated AP over a pooled, confidence-sorted
// TP/FP sequence. gt_count is the recall denominator.
struct ScoredMatch {
  double confidence = 0.0;
  bool tp = false;
};

double average_precision(std::vector<ScoredMatch> matches, size_t gt_count);

// Same quantity evaluated per recall threshold; the envelope precision at
// recall >= r for r in [0:0.01:1].
std::vector<double> precision_recall_curve(std::vector<ScoredMatch> matches,
                                           size_t gt_count);

struct ClassMetrics {
  std::string class_name;
  size_t gt_count = 0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ap = 0.0;  // averaged over IoU 0.5:0.05:0.95
  double ar1 = 0.0;
  double ar10 = 0.0;
  double ar100 = 0.0;
  std::vector<double> pr_curve_50;    // 101 precisions at IoU 0.5
  std::vector<double> ap_by_iou;      // one AP per IoU threshold
  std::vector<double> recall_by_iou;  // recall at 100 detections per IoU
};

struct MetricReport {
  std::vector<ClassMetrics> classes;
  std::vector<std::string> unknown_classes;  // detected but never annotated
  double map50 = 0.0;
  double map75 = 0.0;
  double map = 0.0;
  double mar1 = 0.0;
  double mar10 = 0.0;
  double mar100 = 0.0;
};

// IoU thresholds 0.5:0.05:0.95 used throughout.
std::vector<double> iou_thresholds();

// Full metric grid. Classes without ground truth are reported but excluded
// from the means unless include_empty_classes is set (then they count as 0).
MetricReport evaluate(const std::vector<Detection>& dets,
                      const std::vector<GroundTruthBox>& gts,
                      bool include_empty_classes = false);

// JSON ingestion. The native layout is an array of
// {image_id, class, box:{x1,y1,x2,y2}[, score]}; COCO-style files with
// images/annotations/categories and [x,y,w,h] boxes are accepted as well.
// COCO detection arrays reference the ground-truth file's category table.
using CategoryTable = std::map<int64_t, std::string>;

CategoryTable load_category_table(const std::string& path);
std::vector<GroundTruthBox> load_ground_truth_json(const std::string& path);
std::vector<Detection> load_detections_json(
    const std::string& path, const CategoryTable& categories = {});

}  // namespace gazetk

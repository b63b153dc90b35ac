#include "gazetk/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace gazetk {

namespace {

constexpr int kRecallSamples = 101;

struct Group {  // one image/class bucket, input order preserved
  std::vector<Detection> dets;
  std::vector<BBox2D> gts;
};

using GroupKey = std::pair<std::string, std::string>;  // class, image

std::map<GroupKey, Group> group_by_class_image(
    const std::vector<Detection>& dets,
    const std::vector<GroundTruthBox>& gts) {
  std::map<GroupKey, Group> groups;
  for (const auto& g : gts) {
    groups[{g.class_name, g.image_id}].gts.push_back(g.box);
  }
  for (const auto& d : dets) {
    groups[{d.class_name, d.image_id}].dets.push_back(d);
  }
  return groups;
}

// envelope + 101-point sampling shared by AP and the PR curve
std::vector<double> sampled_precisions(std::vector<ScoredMatch>& matches,
                                       size_t gt_count) {
  std::stable_sort(matches.begin(), matches.end(),
                   [](const ScoredMatch& a, const ScoredMatch& b) {
                     return a.confidence > b.confidence;
                   });
  std::vector<double> precision(matches.size());
  std::vector<double> recall(matches.size());
  size_t tp = 0;
  for (size_t i = 0; i < matches.size(); ++i) {
    if (matches[i].tp) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = gt_count > 0
                    ? static_cast<double>(tp) / static_cast<double>(gt_count)
                    : 0.0;
  }
  for (size_t i = matches.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  std::vector<double> sampled(kRecallSamples, 0.0);
  for (int s = 0; s < kRecallSamples; ++s) {
    const double r = static_cast<double>(s) / (kRecallSamples - 1);
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) {
      sampled[s] = precision[it - recall.begin()];
    }
  }
  return sampled;
}

}  // namespace

GroupMatch match_detections(const std::vector<Detection>& dets,
                            const std::vector<BBox2D>& gts,
                            double iou_threshold) {
  GroupMatch out;
  out.det_order.resize(dets.size());
  std::iota(out.det_order.begin(), out.det_order.end(), 0);
  std::stable_sort(out.det_order.begin(), out.det_order.end(),
                   [&](size_t a, size_t b) {
                     return dets[a].confidence > dets[b].confidence;
                   });
  std::vector<char> taken(gts.size(), 0);
  out.matched_gt.assign(dets.size(), -1);
  for (size_t pos = 0; pos < out.det_order.size(); ++pos) {
    const Detection& det = dets[out.det_order[pos]];
    double best_iou = iou_threshold;
    int best_gt = -1;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double iou = iou2d(det.box, gts[g]);
      // strictly greater keeps the lowest index on ties
      if (iou > best_iou || (best_gt < 0 && iou >= iou_threshold)) {
        best_iou = iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      taken[best_gt] = 1;
      out.matched_gt[pos] = best_gt;
    }
  }
  return out;
}

double average_precision(std::vector<ScoredMatch> matches, size_t gt_count) {
  if (gt_count == 0) {
    return 0.0;
  }
  const auto sampled = sampled_precisions(matches, gt_count);
  return std::accumulate(sampled.begin(), sampled.end(), 0.0) /
         kRecallSamples;
}

std::vector<double> precision_recall_curve(std::vector<ScoredMatch> matches,
                                           size_t gt_count) {
  return sampled_precisions(matches, gt_count);
}

std::vector<double> iou_thresholds() {
  std::vector<double> out(10);
  for (int i = 0; i < 10; ++i) out[i] = 0.5 + 0.05 * i;
  return out;
}

MetricReport evaluate(const std::vector<Detection>& dets,
                      const std::vector<GroundTruthBox>& gts,
                      bool include_empty_classes) {
  const auto thresholds = iou_thresholds();
  const auto groups = group_by_class_image(dets, gts);

  std::set<std::string> class_names;
  std::set<std::string> gt_classes;
  for (const auto& [key, group] : groups) {
    class_names.insert(key.first);
    if (!group.gts.empty()) gt_classes.insert(key.first);
  }

  MetricReport report;
  const std::vector<int> max_dets{1, 10, 100};

  for (const std::string& cls : class_names) {
    ClassMetrics cm;
    cm.class_name = cls;
    cm.ap_by_iou.assign(thresholds.size(), 0.0);
    cm.recall_by_iou.assign(thresholds.size(), 0.0);
    std::vector<double> ar_by_maxdet(max_dets.size(), 0.0);

    for (const auto& [key, group] : groups) {
      if (key.first == cls) cm.gt_count += group.gts.size();
    }

    for (size_t ti = 0; ti < thresholds.size(); ++ti) {
      const double thr = thresholds[ti];
      for (size_t di = 0; di < max_dets.size(); ++di) {
        const size_t cap = static_cast<size_t>(max_dets[di]);
        std::vector<ScoredMatch> pooled;
        size_t matched = 0;
        for (const auto& [key, group] : groups) {
          if (key.first != cls) continue;
          const GroupMatch match =
              match_detections(group.dets, group.gts, thr);
          const size_t take = std::min(cap, match.det_order.size());
          for (size_t pos = 0; pos < take; ++pos) {
            const bool tp = match.matched_gt[pos] >= 0;
            pooled.push_back(
                {group.dets[match.det_order[pos]].confidence, tp});
            if (tp) ++matched;
          }
        }
        const double recall =
            cm.gt_count > 0 ? static_cast<double>(matched) / cm.gt_count : 0.0;
        ar_by_maxdet[di] += recall / thresholds.size();
        if (cap == 100) {
          cm.ap_by_iou[ti] = average_precision(pooled, cm.gt_count);
          cm.recall_by_iou[ti] = recall;
          if (ti == 0) {
            cm.pr_curve_50 = precision_recall_curve(std::move(pooled),
                                                    cm.gt_count);
          }
        }
      }
    }
    cm.ap50 = cm.ap_by_iou[0];
    cm.ap75 = cm.ap_by_iou[5];
    cm.ap = std::accumulate(cm.ap_by_iou.begin(), cm.ap_by_iou.end(), 0.0) /
            cm.ap_by_iou.size();
    cm.ar1 = ar_by_maxdet[0];
    cm.ar10 = ar_by_maxdet[1];
    cm.ar100 = ar_by_maxdet[2];
    if (cm.gt_count == 0) {
      report.unknown_classes.push_back(cls);
    }
    report.classes.push_back(std::move(cm));
  }

  size_t counted = 0;
  for (const auto& cm : report.classes) {
    if (cm.gt_count == 0 && !include_empty_classes) continue;
    report.map50 += cm.ap50;
    report.map75 += cm.ap75;
    report.map += cm.ap;
    report.mar1 += cm.ar1;
    report.mar10 += cm.ar10;
    report.mar100 += cm.ar100;
    ++counted;
  }
  if (counted > 0) {
    report.map50 /= counted;
    report.map75 /= counted;
    report.map /= counted;
    report.mar1 /= counted;
    report.mar10 /= counted;
    report.mar100 /= counted;
  }
  return report;
}

namespace {

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open " + path);
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    fail(ErrorCode::ParseError, "invalid JSON in " + path);
  }
  return j;
}

std::string id_to_string(const json& v) {
  return v.is_string() ? v.get<std::string>() : std::to_string(v.get<int64_t>());
}

BBox2D box_from_entry(const json& e) {
  if (e.contains("bbox")) {  // COCO [x, y, w, h]
    const auto& b = e.at("bbox");
    const double x = b.at(0).get<double>();
    const double y = b.at(1).get<double>();
    return BBox2D{x, y, x + b.at(2).get<double>(), y + b.at(3).get<double>()};
  }
  const auto& b = e.at("box");
  return BBox2D{b.at("x1").get<double>(), b.at("y1").get<double>(),
                b.at("x2").get<double>(), b.at("y2").get<double>()};
}

std::map<int64_t, std::string> category_table(const json& root) {
  std::map<int64_t, std::string> table;
  if (root.contains("categories")) {
    for (const auto& c : root.at("categories")) {
      table[c.at("id").get<int64_t>()] = c.at("name").get<std::string>();
    }
  }
  return table;
}

std::string class_of(const json& e,
                     const std::map<int64_t, std::string>& categories) {
  if (e.contains("class")) return e.at("class").get<std::string>();
  if (e.contains("category")) return e.at("category").get<std::string>();
  const int64_t id = e.at("category_id").get<int64_t>();
  const auto it = categories.find(id);
  return it != categories.end() ? it->second : std::to_string(id);
}

}  // namespace

CategoryTable load_category_table(const std::string& path) {
  return category_table(parse_json_file(path));
}

std::vector<GroundTruthBox> load_ground_truth_json(const std::string& path) {
  const json root = parse_json_file(path);
  const json& entries =
      root.is_array() ? root
                      : (root.contains("annotations") ? root.at("annotations")
                                                      : root.at("ground_truth"));
  const auto categories = category_table(root);
  std::vector<GroundTruthBox> out;
  for (const auto& e : entries) {
    GroundTruthBox g;
    g.image_id = id_to_string(e.at("image_id"));
    g.class_name = class_of(e, categories);
    g.box = box_from_entry(e);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<Detection> load_detections_json(const std::string& path,
                                             const CategoryTable& categories_in) {
  const json root = parse_json_file(path);
  const json& entries =
      root.is_array() ? root
                      : (root.contains("detections") ? root.at("detections")
                                                     : root.at("annotations"));
  CategoryTable categories = category_table(root);
  categories.insert(categories_in.begin(), categories_in.end());
  std::vector<Detection> out;
  for (const auto& e : entries) {
    Detection d;
    d.image_id = id_to_string(e.at("image_id"));
    d.class_name = class_of(e, categories);
    d.box = box_from_entry(e);
    d.confidence = e.contains("score") ? e.at("score").get<double>()
                                       : e.value("confidence", 1.0);
    if (d.confidence < 0.0 || d.confidence > 1.0) {
      fail(ErrorCode::ParseError, "confidence outside [0,1] in " + path);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace gazetk

#include "gazetk/evalkit.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"

using namespace gazetk;
using testutil::irand;
using testutil::urand;

namespace {

// direct 101-point interpolation oracle: for each recall threshold scan all
// prefix points for the max precision at recall >= r
double ap_oracle(std::vector<ScoredMatch> matches, size_t gt_count) {
  if (gt_count == 0) return 0.0;
  std::stable_sort(matches.begin(), matches.end(),
                   [](const ScoredMatch& a, const ScoredMatch& b) {
                     return a.confidence > b.confidence;
                   });
  std::vector<double> prec, rec;
  size_t tp = 0;
  for (size_t i = 0; i < matches.size(); ++i) {
    if (matches[i].tp) ++tp;
    prec.push_back(double(tp) / double(i + 1));
    rec.push_back(double(tp) / double(gt_count));
  }
  double total = 0;
  for (int s = 0; s <= 100; ++s) {
    const double r = s / 100.0;
    double best = 0;
    for (size_t i = 0; i < prec.size(); ++i) {
      if (rec[i] >= r) best = std::max(best, prec[i]);
    }
    total += best;
  }
  return total / 101.0;
}

Detection det(const std::string& img, const std::string& cls, BBox2D box,
              double score) {
  return Detection{img, cls, box, score};
}

GroundTruthBox gt(const std::string& img, const std::string& cls,
                  BBox2D box) {
  return GroundTruthBox{img, cls, box};
}

}  // namespace

TEST_CASE("match_detections: basics and the greedy rule") {
  const BBox2D b{0, 0, 10, 10};
  const auto single = match_detections({det("a", "c", b, 0.9)}, {b}, 0.5);
  CHECK(single.matched_gt == std::vector<int>{0});

  // two detections on one ground truth: higher confidence wins, other is FP
  const auto two = match_detections(
      {det("a", "c", b, 0.3), det("a", "c", b, 0.8)}, {b}, 0.5);
  CHECK(two.det_order == std::vector<size_t>{1, 0});
  CHECK(two.matched_gt[0] == 0);
  CHECK(two.matched_gt[1] == -1);

  // confidence tie keeps input order
  const auto tie = match_detections(
      {det("a", "c", b, 0.5), det("a", "c", b, 0.5)}, {b}, 0.5);
  CHECK(tie.det_order == std::vector<size_t>{0, 1});
}

TEST_CASE("match_detections: equals a brute-force greedy oracle") {
  std::mt19937 gen(181);
  for (int round = 0; round < 300; ++round) {
    std::vector<Detection> dets;
    std::vector<BBox2D> gts;
    const int nd = irand(gen, 0, 5);
    const int ng = irand(gen, 0, 4);
    for (int i = 0; i < nd; ++i) {
      const double x = irand(gen, 0, 20), y = irand(gen, 0, 20);
      dets.push_back(det("img", "c",
                         BBox2D{x, y, x + irand(gen, 2, 15),
                                y + irand(gen, 2, 15)},
                         irand(gen, 0, 100) / 100.0));
    }
    for (int i = 0; i < ng; ++i) {
      const double x = irand(gen, 0, 20), y = irand(gen, 0, 20);
      gts.push_back(BBox2D{x, y, x + irand(gen, 2, 15),
                           y + irand(gen, 2, 15)});
    }
    const double thr = 0.5;
    const auto got = match_detections(dets, gts, thr);

    // oracle: same contract, written independently
    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return dets[a].confidence > dets[b].confidence;
    });
    std::vector<char> used(gts.size(), 0);
    for (size_t pos = 0; pos < order.size(); ++pos) {
      int pick = -1;
      double best = thr;
      for (size_t g = 0; g < gts.size(); ++g) {
        if (used[g]) continue;
        const double iou = iou2d(dets[order[pos]].box, gts[g]);
        if (iou > best || (pick < 0 && iou >= thr)) {
          best = iou;
          pick = static_cast<int>(g);
        }
      }
      if (pick >= 0) used[pick] = 1;
      CHECK(got.matched_gt[pos] == pick);
    }
    CHECK(got.det_order == order);
  }
}

TEST_CASE("average_precision: endpoints") {
  // perfect detector
  std::vector<ScoredMatch> perfect{{0.9, true}, {0.8, true}};
  CHECK(average_precision(perfect, 2) == doctest::Approx(1.0));

  // nothing detected with ground truth present
  CHECK(average_precision({}, 3) == doctest::Approx(0.0));

  // three detections on two ground truths, one FP in the middle
  std::vector<ScoredMatch> mixed{{0.9, true}, {0.8, false}, {0.7, true}};
  CHECK(average_precision(mixed, 2) ==
        doctest::Approx(ap_oracle(mixed, 2)).epsilon(1e-9));
}

TEST_CASE("average_precision: randomized micro-cases vs oracle") {
  std::mt19937 gen(191);
  for (int round = 0; round < 500; ++round) {
    const int n = irand(gen, 0, 6);
    std::vector<ScoredMatch> matches;
    size_t tps = 0;
    for (int i = 0; i < n; ++i) {
      const bool tp = irand(gen, 0, 1) == 1;
      tps += tp;
      matches.push_back({irand(gen, 0, 20) / 20.0, tp});
    }
    const size_t gt_count = tps + irand(gen, 0, 3);
    if (gt_count == 0) continue;
    CHECK(average_precision(matches, gt_count) ==
          doctest::Approx(ap_oracle(matches, gt_count)).epsilon(1e-9));
  }
}

TEST_CASE("evaluate: exact detections score 1.0 across the board") {
  std::vector<GroundTruthBox> gts;
  std::vector<Detection> dets;
  std::mt19937 gen(193);
  for (int img = 0; img < 4; ++img) {
    for (int i = 0; i < 3; ++i) {
      const double x = irand(gen, 0, 50), y = irand(gen, 0, 50);
      const BBox2D b{x, y, x + irand(gen, 10, 30), y + irand(gen, 10, 30)};
      const std::string image = "img" + std::to_string(img);
      const std::string cls = i % 2 == 0 ? "cup" : "fork";
      gts.push_back(gt(image, cls, b));
      dets.push_back(det(image, cls, b, 0.9 - 0.01 * i));
    }
  }
  const MetricReport rep = evaluate(dets, gts);
  CHECK(rep.map == doctest::Approx(1.0));
  CHECK(rep.map50 == doctest::Approx(1.0));
  CHECK(rep.map75 == doctest::Approx(1.0));
  CHECK(rep.mar1 > 0);
  CHECK(rep.mar100 == doctest::Approx(1.0));
  for (const auto& cm : rep.classes) {
    CHECK(cm.ap50 == doctest::Approx(1.0));
    CHECK(cm.pr_curve_50.size() == 101);
  }
}

TEST_CASE("evaluate: AR respects the per-image detection caps") {
  // one image, two ground truths, two perfect detections:
  // with a single allowed detection only one gt can be recalled
  const BBox2D a{0, 0, 10, 10};
  const BBox2D b{50, 50, 70, 70};
  const MetricReport rep = evaluate(
      {det("i", "c", a, 0.9), det("i", "c", b, 0.8)},
      {gt("i", "c", a), gt("i", "c", b)});
  const auto& cm = rep.classes.at(0);
  CHECK(cm.ar1 == doctest::Approx(0.5));
  CHECK(cm.ar10 == doctest::Approx(1.0));
  CHECK(cm.ar100 == doctest::Approx(1.0));
  CHECK(cm.ap50 == doctest::Approx(1.0));
}

TEST_CASE("evaluate: detections for an unannotated class are reported") {
  const BBox2D b{0, 0, 10, 10};
  const MetricReport rep =
      evaluate({det("a", "ghost", b, 0.5), det("a", "cup", b, 0.8)},
               {gt("a", "cup", b)});
  REQUIRE(rep.unknown_classes.size() == 1);
  CHECK(rep.unknown_classes[0] == "ghost");
  CHECK(rep.map == doctest::Approx(1.0));  // ghost excluded from the mean

  const MetricReport inc =
      evaluate({det("a", "ghost", b, 0.5), det("a", "cup", b, 0.8)},
               {gt("a", "cup", b)}, true);
  CHECK(inc.map == doctest::Approx(0.5));  // included as zero
}

TEST_CASE("evaluate: AP non-increasing in IoU, duplicates never help") {
  std::mt19937 gen(197);
  for (int round = 0; round < 20; ++round) {
    std::vector<GroundTruthBox> gts;
    std::vector<Detection> dets;
    for (int i = 0; i < 6; ++i) {
      const double x = irand(gen, 0, 40), y = irand(gen, 0, 40);
      const BBox2D b{x, y, x + irand(gen, 8, 25), y + irand(gen, 8, 25)};
      gts.push_back(gt("img", "c", b));
      // jittered detection
      const BBox2D d{b.x1 + urand(gen, -3, 3), b.y1 + urand(gen, -3, 3),
                     b.x2 + urand(gen, -3, 3), b.y2 + urand(gen, -3, 3)};
      if (d.x1 <= d.x2 && d.y1 <= d.y2) {
        dets.push_back(det("img", "c", d, urand(gen, 0.1, 1.0)));
      }
    }
    const MetricReport rep = evaluate(dets, gts);
    const auto& by_iou = rep.classes[0].ap_by_iou;
    for (size_t i = 1; i < by_iou.size(); ++i) {
      CHECK(by_iou[i] <= by_iou[i - 1] + 1e-12);
    }

    // duplicating every detection at lower confidence cannot raise AP
    std::vector<Detection> doubled = dets;
    for (auto d : dets) {
      d.confidence *= 0.5;
      doubled.push_back(d);
    }
    const MetricReport rep2 = evaluate(doubled, gts);
    CHECK(rep2.map <= rep.map + 1e-12);
  }
}

TEST_CASE("evaluate: deterministic under det permutation with unique scores") {
  std::mt19937 gen(199);
  std::vector<GroundTruthBox> gts;
  std::vector<Detection> dets;
  for (int i = 0; i < 12; ++i) {
    const double x = irand(gen, 0, 40), y = irand(gen, 0, 40);
    const BBox2D b{x, y, x + irand(gen, 8, 25), y + irand(gen, 8, 25)};
    gts.push_back(gt("img" + std::to_string(i % 3), "c", b));
    dets.push_back(det("img" + std::to_string(i % 3), "c", b,
                       (100.0 - i) / 100.0));
  }
  const MetricReport a = evaluate(dets, gts);
  std::reverse(dets.begin(), dets.end());
  const MetricReport b = evaluate(dets, gts);
  CHECK(a.map == b.map);
  CHECK(a.mar100 == b.mar100);
}

TEST_CASE("json loaders accept both native and COCO layouts") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gazetk_eval";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "native_gt.json");
    out << R"([{"image_id":"a","class":"cup","box":{"x1":0,"y1":0,"x2":10,"y2":10}}])";
  }
  {
    std::ofstream out(dir / "coco_gt.json");
    out << R"({"images":[{"id":1}],)"
        << R"("annotations":[{"image_id":1,"category_id":7,"bbox":[0,0,10,10]}],)"
        << R"("categories":[{"id":7,"name":"cup"}]})";
  }
  {
    std::ofstream out(dir / "dets.json");
    out << R"([{"image_id":1,"category_id":7,"bbox":[0,0,10,10],"score":0.75}])";
  }
  const auto native = load_ground_truth_json((dir / "native_gt.json").string());
  REQUIRE(native.size() == 1);
  CHECK(native[0].class_name == "cup");
  CHECK(native[0].box.x2 == 10);

  const auto coco = load_ground_truth_json((dir / "coco_gt.json").string());
  REQUIRE(coco.size() == 1);
  CHECK(coco[0].class_name == "cup");
  CHECK(coco[0].image_id == "1");

  const auto categories =
      load_category_table((dir / "coco_gt.json").string());
  auto dets = load_detections_json((dir / "dets.json").string(), categories);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].confidence == 0.75);
  CHECK(dets[0].class_name == "cup");

  // the COCO det file must evaluate cleanly against the COCO gt
  const MetricReport rep = evaluate(dets, coco);
  CHECK(rep.map == doctest::Approx(1.0));
}

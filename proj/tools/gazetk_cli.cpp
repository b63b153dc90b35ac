// Command-line front end: wires ingestion, the gaze/saliency algorithms and
// the metric reports together. Every run drops a manifest.json with inputs,
// parameters and seed so it can be replayed exactly.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "gazetk/cloud.hpp"
#include "gazetk/distill.hpp"
#include "gazetk/evalkit.hpp"
#include "gazetk/gbvs.hpp"
#include "gazetk/heatmap.hpp"
#include "gazetk/ingest.hpp"
#include "gazetk/knn.hpp"
#include "gazetk/multiview.hpp"
#include "gazetk/roi.hpp"
#include "gazetk/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gazetk;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string out;
  uint32_t seed = 42;
  int threads = 1;
};

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot write " + path.string());
  f << j.dump(2) << "\n";
}

void write_manifest(const CommonOpts& common, const std::string& subcommand,
                    const json& inputs, const json& params) {
  json m{{"tool", "gazetk"},
         {"version", kVersion},
         {"subcommand", subcommand},
         {"inputs", inputs},
         {"parameters", params},
         {"seed", common.seed},
         {"threads", common.threads}};
  write_json_file(fs::path(common.out) / "manifest.json", m);
}

fs::path ensure_out(const CommonOpts& common) {
  fs::create_directories(common.out);
  return common.out;
}

// index-sliced worker pool; results land in pre-sized slots so the output
// is identical for any thread count
void parallel_for(int threads, size_t count,
                  const std::function<void(size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  const int n = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(n);
  for (int t = 0; t < n; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= count) break;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<Vec2> gaze_points_2d(const GazeLog& log) {
  std::vector<Vec2> out;
  out.reserve(log.samples.size());
  for (const auto& s : log.samples) out.emplace_back(s.x, s.y);
  return out;
}

std::vector<Vec3> gaze_points_3d(const GazeLog& log) {
  std::vector<Vec3> out;
  out.reserve(log.samples.size());
  for (const auto& s : log.samples) out.emplace_back(s.x, s.y, s.z);
  return out;
}

json box_json(const BBox2D& b) {
  return json{{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}};
}

void save_field_binary(const fs::path& bin, const fs::path& sidecar,
                       const Raster& field) {
  std::vector<std::vector<double>> rows{field.data};
  json meta{{"count", 1},
            {"dim", field.data.size()},
            {"width", field.width},
            {"height", field.height},
            {"dtype", "float64-le"}};
  save_feature_matrix(bin.string(), sidecar.string(), rows,
                      meta.dump(2) + "\n");
}

Raster load_field_binary(const fs::path& bin, const fs::path& sidecar) {
  std::string meta_text;
  const auto rows =
      load_feature_matrix(bin.string(), sidecar.string(), &meta_text);
  const json meta = json::parse(meta_text);
  Raster field(meta.at("width").get<int>(), meta.at("height").get<int>(), 1);
  field.data = rows.at(0);
  return field;
}

Raster overlay(const Raster& image, const Raster& field) {
  Raster out(image.width, image.height, 3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double a = 0.6 * field.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double base =
            image.channels >= 3 ? image.at(x, y, c) : image.at(x, y, 0);
        // heat tint: saliency pushes toward red
        const double tint = c == 0 ? 1.0 : (c == 1 ? 0.25 : 0.0);
        out.at(x, y, c) = (1 - a) * base + a * tint;
      }
    }
  }
  return out;
}

GbvsVariant parse_variant(const std::string& name) {
  if (name == "plain") return GbvsVariant::Plain;
  if (name == "ga") return GbvsVariant::GA;
  if (name == "dga") return GbvsVariant::DGA;
  fail(ErrorCode::InvalidArgument, "unknown variant '" + name + "'");
}

// ---------------------------------------------------------------------------
// heatmap: gaze log -> windowed feature vectors (+ labels when annotated)

struct HeatmapOpts {
  CommonOpts common;
  std::string gaze;
  std::string annotations;
  double window_ms = 250;
  double stride_ms = 250;
  int grid = 30;
  std::string mode = "2d";
};

void run_heatmap(const HeatmapOpts& o) {
  const GazeLog log = load_gaze_log(o.gaze);
  const GridSpec grid{o.grid, o.grid, o.mode == "3d" ? o.grid : 1};
  const auto wins = windows(log, {o.window_ms, o.stride_ms});

  AnnotationSet ann;
  if (!o.annotations.empty()) {
    ann = load_annotations(o.annotations);
    validate_annotations(ann, log);
  }

  std::vector<std::vector<double>> features;
  json labels = json::array();
  for (const auto& w : wins) {
    if (w.empty()) continue;
    const HeatmapGrid heat = encode(w.samples, log.resolution_x,
                                    log.resolution_y, log.resolution_z, grid);
    features.push_back(flatten(heat));
    if (!o.annotations.empty()) {
      const WindowLabel label =
          label_window(w, ann, log.resolution_x, log.resolution_y);
      json entry{{"start_ms", w.start_ms},
                 {"object", label.has_object}};
      if (label.target) {
        entry["target"] = {(*label.target)[0], (*label.target)[1],
                           (*label.target)[2], (*label.target)[3]};
      }
      labels.push_back(entry);
    }
  }

  const fs::path out = ensure_out(o.common);
  json sidecar{{"count", features.size()},
               {"dim", grid.cell_count()},
               {"grid", {grid.gx, grid.gy, grid.gz}},
               {"resolution",
                {log.resolution_x, log.resolution_y, log.resolution_z}},
               {"window", {{"length_ms", o.window_ms},
                           {"stride_ms", o.stride_ms}}}};
  save_feature_matrix((out / "features.bin").string(),
                      (out / "features.json").string(), features,
                      sidecar.dump(2) + "\n");
  if (!o.annotations.empty()) {
    write_json_file(out / "labels.json", labels);
  }
  write_manifest(o.common, "heatmap",
                 {{"gaze", o.gaze}, {"annotations", o.annotations}},
                 {{"window_ms", o.window_ms},
                  {"stride_ms", o.stride_ms},
                  {"grid", o.grid},
                  {"mode", o.mode}});
  std::cout << "wrote " << features.size() << " feature vectors of dim "
            << grid.cell_count() << "\n";
}

// ---------------------------------------------------------------------------
// knn: cross-validated window classification / box regression

struct KnnOpts {
  CommonOpts common;
  std::string gaze;
  std::string annotations;
  std::string task = "classify";
  int k = 1;
  int folds = 5;
  double window_ms = 250;
  double stride_ms = 250;
  int grid = 30;
  std::string mode = "2d";
};

void run_knn(const KnnOpts& o) {
  const GazeLog log = load_gaze_log(o.gaze);
  const AnnotationSet ann = load_annotations(o.annotations);
  validate_annotations(ann, log);
  const GridSpec grid{o.grid, o.grid, o.mode == "3d" ? o.grid : 1};

  std::vector<std::vector<double>> features;
  std::vector<int> classes;
  std::vector<Eigen::Vector4d> targets;
  for (const auto& w : windows(log, {o.window_ms, o.stride_ms})) {
    if (w.empty()) continue;
    const WindowLabel label =
        label_window(w, ann, log.resolution_x, log.resolution_y);
    const HeatmapGrid heat = encode(w.samples, log.resolution_x,
                                    log.resolution_y, log.resolution_z, grid);
    if (o.task == "regress") {
      if (!label.target) continue;  // only annotated windows regress
      targets.push_back(*label.target);
    } else {
      classes.push_back(label.has_object ? 1 : 0);
    }
    features.push_back(flatten(heat));
  }

  const fs::path out = ensure_out(o.common);
  json report;
  if (o.task == "regress") {
    const RegressionReport r = cross_validate_regressor(
        features, targets, o.folds, o.k, o.common.seed);
    json folds = json::array();
    for (const auto& mae : r.fold_mae) {
      folds.push_back({mae[0], mae[1], mae[2], mae[3]});
    }
    report = json{{"task", "regress"},
                  {"folds", r.folds},
                  {"k", r.k},
                  {"seed", r.seed},
                  {"fold_mae", folds},
                  {"mean_mae",
                   {r.mean_mae[0], r.mean_mae[1], r.mean_mae[2],
                    r.mean_mae[3]}},
                  {"std_mae",
                   {r.std_mae[0], r.std_mae[1], r.std_mae[2], r.std_mae[3]}}};
  } else {
    const ClassificationReport r = cross_validate_classifier(
        features, classes, o.folds, o.k, o.common.seed);
    report = json{{"task", "classify"},
                  {"folds", r.folds},
                  {"k", r.k},
                  {"seed", r.seed},
                  {"fold_accuracy", r.fold_accuracy},
                  {"mean_accuracy", r.mean_accuracy},
                  {"std_accuracy", r.std_accuracy}};
  }
  report["samples"] = features.size();
  report["dim"] = grid.cell_count();
  write_json_file(out / "report.json", report);
  write_manifest(o.common, "knn",
                 {{"gaze", o.gaze}, {"annotations", o.annotations}},
                 {{"task", o.task},
                  {"k", o.k},
                  {"folds", o.folds},
                  {"window_ms", o.window_ms},
                  {"stride_ms", o.stride_ms},
                  {"grid", o.grid},
                  {"mode", o.mode}});
  std::cout << report.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// saliency / roi

struct SaliencyOpts {
  CommonOpts common;
  std::string image;
  std::string gaze;
  std::vector<std::string> gaze_points;
  std::string variant = "plain";
  int k = 1;
  double sigma = 0;
  double sparsity = 0;
  double blend = 0;
  int cap = 32;
  int normalize_k = 1;
  bool legacy_sigma = false;
  bool converge = false;
};

std::vector<Vec2> collect_gaze_2d(const std::string& gaze_csv,
                                  const std::vector<std::string>& points) {
  std::vector<Vec2> gaze;
  if (!gaze_csv.empty()) {
    gaze = gaze_points_2d(load_gaze_log(gaze_csv));
  }
  for (const auto& p : points) {
    const auto comma = p.find(',');
    if (comma == std::string::npos) {
      fail(ErrorCode::InvalidArgument, "--gaze-point expects 'x,y'");
    }
    gaze.emplace_back(std::stod(p.substr(0, comma)),
                      std::stod(p.substr(comma + 1)));
  }
  return gaze;
}

GbvsParams gbvs_params_from(const SaliencyOpts& o) {
  GbvsParams params;
  params.variant = parse_variant(o.variant);
  params.k = o.k;
  params.sigma = o.sigma;
  params.sparsity = o.sparsity;
  params.temporal_blend = o.blend;
  params.cap = o.cap;
  params.normalize_k = o.normalize_k;
  params.legacy_sigma = o.legacy_sigma;
  params.converge = o.converge;
  return params;
}

json gbvs_params_json(const SaliencyOpts& o) {
  return json{{"variant", o.variant},   {"k", o.k},
              {"sigma", o.sigma},       {"sparsity", o.sparsity},
              {"blend", o.blend},       {"cap", o.cap},
              {"normalize_k", o.normalize_k},
              {"legacy_sigma", o.legacy_sigma},
              {"converge", o.converge}};
}

void run_saliency(const SaliencyOpts& o) {
  const Raster image = read_png(o.image);
  const auto gaze = collect_gaze_2d(o.gaze, o.gaze_points);
  const SaliencyResult result = saliency(image, gaze, gbvs_params_from(o));

  const fs::path out = ensure_out(o.common);
  write_png((out / "saliency.png").string(), result.field);
  write_png((out / "overlay.png").string(), overlay(image, result.field));
  save_field_binary(out / "saliency.bin", out / "saliency.json",
                    result.field);
  write_manifest(o.common, "saliency",
                 {{"image", o.image}, {"gaze", o.gaze}},
                 gbvs_params_json(o));
  std::cout << "saliency field " << result.field.width << "x"
            << result.field.height
            << (result.converged ? "" : " (not converged)") << "\n";
}

struct RoiOpts {
  SaliencyOpts saliency;
  std::string field;  // precomputed saliency.bin (expects sibling .json)
  bool largest_component = false;
};

void run_roi(const RoiOpts& o) {
  Raster field;
  if (!o.field.empty()) {
    fs::path sidecar = fs::path(o.field);
    sidecar.replace_extension(".json");
    field = load_field_binary(o.field, sidecar);
  } else {
    const Raster image = read_png(o.saliency.image);
    const auto gaze =
        collect_gaze_2d(o.saliency.gaze, o.saliency.gaze_points);
    field = saliency(image, gaze, gbvs_params_from(o.saliency)).field;
  }
  const RoiResult roi = extract_roi(field, o.largest_component);

  const fs::path out = ensure_out(o.saliency.common);
  json j = box_json(roi.box);
  j["threshold"] = roi.mask.threshold;
  write_json_file(out / "box.json", j);
  write_mask_png((out / "mask.png").string(), roi.mask);
  write_manifest(o.saliency.common, "roi",
                 {{"image", o.saliency.image},
                  {"gaze", o.saliency.gaze},
                  {"field", o.field}},
                 {{"largest_component", o.largest_component}});
  std::cout << "roi " << j.dump() << "\n";
}

// ---------------------------------------------------------------------------
// distill

struct DistillOpts {
  CommonOpts common;
  std::string proposals;
  std::vector<std::string> gaze_points;
  std::string gt;
  double tau = 0.7;
};

void run_distill(const DistillOpts& o) {
  const ProposalList proposals = load_proposals(o.proposals);
  const auto gaze = collect_gaze_2d("", o.gaze_points);
  if (gaze.empty()) {
    fail(ErrorCode::InvalidArgument, "at least one --gaze-point required");
  }
  const auto subset = gaze.size() == 1 ? distill(proposals, gaze[0])
                                       : distill_multi(proposals, gaze);

  const fs::path out = ensure_out(o.common);
  {
    std::ofstream f(out / "distilled.csv", std::ios::binary);
    for (const auto& p : subset) {
      f << p.original_index << ',' << format_double(p.box.x1) << ','
        << format_double(p.box.y1) << ',' << format_double(p.box.x2) << ','
        << format_double(p.box.y2) << "\n";
    }
  }
  json report{{"total", proposals.size()}, {"distilled", subset.size()}};
  if (!o.gt.empty()) {
    const LabeledBoxJson gt = load_box_json(o.gt);
    const DistillReport rep =
        distill_report(proposals, gaze[0], gt.box, o.tau);
    auto suff = [](const SufficiencyReport& s) {
      return json{{"total", s.total},
                  {"sufficient", s.sufficient_count},
                  {"precision", s.precision},
                  {"recall", s.recall},
                  {"f1", s.f1},
                  {"best_index", s.best_index},
                  {"best_iou", s.best_iou},
                  {"first_sufficient_index", s.first_sufficient_index},
                  {"first_sufficient_iou", s.first_sufficient_iou}};
    };
    report["tau"] = o.tau;
    report["full"] = suff(rep.full);
    report["after"] = suff(rep.after);
  }
  write_json_file(out / "report.json", report);
  write_manifest(o.common, "distill",
                 {{"proposals", o.proposals}, {"gt", o.gt}},
                 {{"tau", o.tau}, {"gaze_points", o.gaze_points}});
  std::cout << report.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// segment

struct SegmentOpts {
  CommonOpts common;
  std::string cloud;
  std::string gaze;  // "x,y,z"
  std::string mode = "nearest";
  double pass_min = 0.0;
  double pass_max = 3.0;
  double leaf = 0.03;
  double tolerance = 0.005;
  size_t min_cluster = 500;
  double gaze_radius = 0.02;
  size_t radius_min_cluster = 5;
  double inlier_distance = 0.01;
  int iterations = 1000;
  double normal_deviation = 30.0;
  std::vector<double> expected_normal{0, 0, 1};
};

void run_segment(const SegmentOpts& o) {
  const PointCloud cloud = load_xyz(o.cloud, "camera");
  Vec3 gaze;
  {
    std::istringstream ss(o.gaze);
    std::string part;
    std::vector<double> v;
    while (std::getline(ss, part, ',')) v.push_back(std::stod(part));
    if (v.size() != 3) {
      fail(ErrorCode::InvalidArgument, "--gaze expects 'x,y,z'");
    }
    gaze = Vec3(v[0], v[1], v[2]);
  }
  SegParams params;
  params.pass_min = o.pass_min;
  params.pass_max = o.pass_max;
  params.voxel_leaf = o.leaf;
  params.cluster_tolerance = o.tolerance;
  params.min_cluster_size = o.min_cluster;
  params.gaze_radius = o.gaze_radius;
  params.radius_min_cluster_size = o.radius_min_cluster;
  params.inlier_distance = o.inlier_distance;
  params.ransac_iterations = o.iterations;
  params.normal_deviation_deg = o.normal_deviation;
  params.expected_normal =
      Vec3(o.expected_normal[0], o.expected_normal[1], o.expected_normal[2]);
  params.seed = o.common.seed;
  params.mode = o.mode == "radius" ? SegMode::Radius : SegMode::Nearest;

  const Segmentation seg = segment_by_gaze(cloud, gaze, params);

  const fs::path out = ensure_out(o.common);
  PointCloud object;
  object.frame_id = seg.working.frame_id;
  for (size_t i : seg.object_indices) {
    object.points.push_back(seg.working.points[i]);
  }
  save_xyz((out / "object.xyz").string(), object);
  json j{{"object_points", seg.object_indices.size()},
         {"object_indices", seg.object_indices},
         {"plane",
          {{"normal",
            {seg.plane.normal.x(), seg.plane.normal.y(),
             seg.plane.normal.z()}},
           {"offset", seg.plane.offset}}},
         {"plane_inliers", seg.plane_indices.size()},
         {"plane_indices", seg.plane_indices},
         {"box",
          {{"center",
            {seg.box.center.x(), seg.box.center.y(), seg.box.center.z()}},
           {"size", {seg.box.size.x(), seg.box.size.y(), seg.box.size.z()}},
           {"frame", seg.box.frame_id}}}};
  write_json_file(out / "segmentation.json", j);
  write_manifest(o.common, "segment", {{"cloud", o.cloud}},
                 {{"gaze", o.gaze},
                  {"mode", o.mode},
                  {"pass", {o.pass_min, o.pass_max}},
                  {"leaf", o.leaf},
                  {"tolerance", o.tolerance},
                  {"min_cluster", o.min_cluster},
                  {"inlier_distance", o.inlier_distance},
                  {"iterations", o.iterations}});
  std::cout << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// label

struct LabelOpts {
  CommonOpts common;
  std::string mode = "cloud-project";
  std::string cloud;
  std::string cam;
  std::string class_name = "object";
  int views = 8;
  double min_dist = 0.5;
  size_t min_projected = 10;
  std::string views_dir;
  std::string gaze;
  SaliencyOpts gbvs;  // only the GBVS fields are used
};

void run_label(const LabelOpts& o) {
  const fs::path out = ensure_out(o.common);
  json summary = json::array();

  if (o.mode == "cloud-project") {
    const PointCloud cloud = load_xyz(o.cloud, "world");
    if (cloud.empty()) fail(ErrorCode::EmptyLog, "empty object cloud");
    const CameraExtrinsics cam = load_camera_json(o.cam);
    Vec3 lo = cloud.points[0], hi = cloud.points[0];
    for (const auto& p : cloud.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    BBox3D box;
    box.center = 0.5 * (lo + hi);
    box.size = (hi - lo).cwiseMax(1e-6);
    box.frame_id = "world";
    const auto path = circular_path(box, o.views, o.min_dist);
    std::vector<ViewOutcome> outcomes(path.size());
    parallel_for(o.common.threads, path.size(), [&](size_t i) {
      outcomes[i] = label_run_cloud(cloud, {path[i]}, cam.camera,
                                    o.min_projected)[0];
      outcomes[i].path_index = i;
    });
    for (size_t i = 0; i < outcomes.size(); ++i) {
      const auto& oc = outcomes[i];
      if (oc.view) {
        CameraExtrinsics view_cam = cam;
        view_cam.transform = invert(oc.view->viewpoint.world_from_camera);
        save_omd_view(out.string(), static_cast<int>(i), view_cam,
                      oc.view->roi, o.class_name, nullptr, nullptr);
        summary.push_back({{"view", i},
                           {"roi", box_json(oc.view->roi)},
                           {"in_frame", oc.view->in_frame_count}});
      } else {
        summary.push_back({{"view", i}, {"error", oc.error}});
      }
    }
  } else if (o.mode == "gaze-saliency") {
    const auto records = load_omd_view_dir(o.views_dir);
    if (records.empty()) fail(ErrorCode::MissingComponent, "no views found");
    const auto gaze = gaze_points_3d(load_gaze_log(o.gaze));
    std::vector<Viewpoint> path(records.size());
    std::vector<Raster> images(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
      if (records[i].rgb_path.empty()) {
        fail(ErrorCode::MissingComponent,
             "view " + std::to_string(records[i].index) + " has no rgb");
      }
      path[i].world_from_camera = invert(records[i].cam_from_object);
      path[i].target = Vec3::Zero();
      images[i] = read_png(records[i].rgb_path);
    }
    GbvsParams params = gbvs_params_from(o.gbvs);
    if (params.variant == GbvsVariant::Plain) {
      params.variant = GbvsVariant::GA;  // labeling needs the gaze signal
    }
    std::vector<ViewOutcome> outcomes(records.size());
    parallel_for(o.common.threads, records.size(), [&](size_t i) {
      outcomes[i] = label_run_gaze(gaze, {path[i]}, records[i].camera,
                                   {images[i]}, params)[0];
      outcomes[i].path_index = i;
    });
    for (size_t i = 0; i < outcomes.size(); ++i) {
      const auto& oc = outcomes[i];
      if (oc.view) {
        save_box_json(
            (out / (std::string("roi_") + std::to_string(records[i].index) +
                    ".json"))
                .string(),
            {oc.view->roi, records[i].class_name});
        summary.push_back({{"view", records[i].index},
                           {"roi", box_json(oc.view->roi)}});
      } else {
        summary.push_back({{"view", records[i].index}, {"error", oc.error}});
      }
    }
  } else {
    fail(ErrorCode::InvalidArgument, "unknown label mode '" + o.mode + "'");
  }

  write_json_file(out / "labels.json", summary);
  write_manifest(o.common, "label",
                 {{"cloud", o.cloud},
                  {"cam", o.cam},
                  {"views_dir", o.views_dir},
                  {"gaze", o.gaze}},
                 {{"mode", o.mode},
                  {"views", o.views},
                  {"min_dist", o.min_dist},
                  {"min_projected", o.min_projected},
                  {"class", o.class_name}});
  std::cout << "labeled " << summary.size() << " views\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  CommonOpts common;
  std::string gt;
  std::string dets;
  bool include_empty = false;
  bool plots = false;
};

void save_curve_csv(const fs::path& path, const MetricReport& report) {
  std::ofstream f(path, std::ios::binary);
  f << "class,kind,index,value\n";
  for (const auto& cm : report.classes) {
    for (size_t i = 0; i < cm.pr_curve_50.size(); ++i) {
      f << cm.class_name << ",pr50," << i << ','
        << format_double(cm.pr_curve_50[i]) << "\n";
    }
    for (size_t i = 0; i < cm.ap_by_iou.size(); ++i) {
      f << cm.class_name << ",ap_iou," << i << ','
        << format_double(cm.ap_by_iou[i]) << "\n";
    }
    for (size_t i = 0; i < cm.recall_by_iou.size(); ++i) {
      f << cm.class_name << ",recall_iou," << i << ','
        << format_double(cm.recall_by_iou[i]) << "\n";
    }
  }
}

void save_pr_plot(const fs::path& path, const MetricReport& report) {
  const int w = 505, h = 340, margin = 20;
  Raster img(w, h, 3, 1.0);
  auto put = [&](int x, int y, double r, double g, double b) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    img.at(x, y, 0) = r;
    img.at(x, y, 1) = g;
    img.at(x, y, 2) = b;
  };
  for (int x = margin; x < w - margin; ++x) {
    put(x, h - margin, 0, 0, 0);
    put(x, margin, 0.8, 0.8, 0.8);
  }
  for (int y = margin; y < h - margin; ++y) {
    put(margin, y, 0, 0, 0);
    put(w - margin, y, 0.8, 0.8, 0.8);
  }
  size_t idx = 0;
  for (const auto& cm : report.classes) {
    const double hue = report.classes.size() > 1
                           ? double(idx) / (report.classes.size() - 1)
                           : 0.0;
    const double r = 0.9 - 0.7 * hue, g = 0.2 + 0.5 * hue, b = 0.3 * hue;
    for (size_t i = 0; i < cm.pr_curve_50.size(); ++i) {
      const int x = margin + static_cast<int>(
                                 i * double(w - 2 * margin) /
                                 (cm.pr_curve_50.size() - 1));
      const int y = h - margin -
                    static_cast<int>(cm.pr_curve_50[i] * (h - 2 * margin));
      for (int dy = -1; dy <= 1; ++dy) put(x, y + dy, r, g, b);
    }
    ++idx;
  }
  write_png(path.string(), img);
}

json metric_report_json(const MetricReport& report) {
  json classes = json::array();
  for (const auto& cm : report.classes) {
    classes.push_back({{"class", cm.class_name},
                       {"gt_count", cm.gt_count},
                       {"ap50", cm.ap50},
                       {"ap75", cm.ap75},
                       {"ap", cm.ap},
                       {"ar1", cm.ar1},
                       {"ar10", cm.ar10},
                       {"ar100", cm.ar100}});
  }
  return json{{"classes", classes},
              {"unknown_classes", report.unknown_classes},
              {"mAP50", report.map50},
              {"mAP75", report.map75},
              {"mAP", report.map},
              {"mAR1", report.mar1},
              {"mAR10", report.mar10},
              {"mAR100", report.mar100}};
}

void run_eval(const EvalOpts& o) {
  const auto gts = load_ground_truth_json(o.gt);
  const auto categories = load_category_table(o.gt);
  const auto dets = load_detections_json(o.dets, categories);
  const MetricReport report = evaluate(dets, gts, o.include_empty);

  const fs::path out = ensure_out(o.common);
  write_json_file(out / "report.json", metric_report_json(report));
  save_curve_csv(out / "curves.csv", report);
  if (o.plots) {
    save_pr_plot(out / "pr_curve.png", report);
  }
  write_manifest(o.common, "eval", {{"gt", o.gt}, {"dets", o.dets}},
                 {{"include_empty_classes", o.include_empty}});
  std::cout << "mAP50 " << report.map50 << "  mAP75 " << report.map75
            << "  mAP " << report.map << "\n";
}

// ---------------------------------------------------------------------------
// demo-synthetic: rendered frames -> gaze -> GA-GBVS roi -> metric report

struct DemoOpts {
  CommonOpts common;
  int frames = 12;
  int width = 192;
  int height = 144;
  std::string variant = "ga";
};

void run_demo(const DemoOpts& o) {
  const fs::path out = ensure_out(o.common);
  GbvsParams params;
  params.variant = parse_variant(o.variant);
  params.k = 1;
  params.normalize_k = 4;

  struct FrameResult {
    Raster image;
    BBox2D truth;
    BBox2D roi;
    std::string error;
  };
  std::vector<FrameResult> results(o.frames);
  parallel_for(o.common.threads, static_cast<size_t>(o.frames), [&](size_t i) {
    const uint32_t frame_seed =
        o.common.seed + static_cast<uint32_t>(i) * 7919u;
    const RenderedFrame frame = render_object_frame(
        o.width, o.height, frame_seed, i % 2 == 1);
    results[i].image = frame.image;
    results[i].truth = frame.object_box;
    try {
      const auto gaze = jittered_gaze(frame.object_box, 40, 5.0,
                                      frame_seed ^ 0x9e3779b9u);
      const SaliencyResult sal = saliency(frame.image, gaze, params);
      results[i].roi = extract_roi(sal.field).box;
    } catch (const Error& e) {
      results[i].error = e.what();
    }
  });

  std::vector<Detection> dets;
  std::vector<GroundTruthBox> gts;
  json frames_json = json::array();
  for (int i = 0; i < o.frames; ++i) {
    const std::string image_id = "frame" + std::to_string(i);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03d.png", i);
    write_png((out / name).string(), results[i].image);
    gts.push_back({image_id, "object", results[i].truth});
    json entry{{"image", name}, {"truth", box_json(results[i].truth)}};
    if (results[i].error.empty()) {
      dets.push_back({image_id, "object", results[i].roi, 1.0});
      entry["roi"] = box_json(results[i].roi);
      entry["iou"] = iou2d(results[i].truth, results[i].roi);
    } else {
      entry["error"] = results[i].error;
    }
    frames_json.push_back(entry);
  }
  const MetricReport report = evaluate(dets, gts);
  write_json_file(out / "frames.json", frames_json);
  write_json_file(out / "report.json", metric_report_json(report));
  write_manifest(o.common, "demo-synthetic", json::object(),
                 {{"frames", o.frames},
                  {"width", o.width},
                  {"height", o.height},
                  {"variant", o.variant}});
  std::cout << "demo mAP50 " << report.map50 << " over " << o.frames
            << " frames\n";
}

void add_common(CLI::App* sub, CommonOpts* common) {
  sub->add_option("--out", common->out, "output directory")->required();
  sub->add_option("--seed", common->seed, "PRNG seed recorded in outputs");
  sub->add_option("--threads", common->threads, "worker threads");
  sub->fallthrough();  // lets --config appear after the subcommand
}

void add_gbvs_flags(CLI::App* sub, SaliencyOpts* o) {
  sub->add_option("--variant", o->variant, "plain|ga|dga")
      ->check(CLI::IsMember({"plain", "ga", "dga"}));
  sub->add_option("--k", o->k, "activation iterations (0 = gaze heatmap)");
  sub->add_option("--sigma", o->sigma, "distance weight scale in cells");
  sub->add_option("--sparsity", o->sparsity,
                  "transition threshold l (0 disables)");
  sub->add_option("--blend", o->blend, "temporal blend q");
  sub->add_option("--cap", o->cap, "internal resolution cap");
  sub->add_option("--normalize-k", o->normalize_k,
                  "iterations of the accentuation pass");
  sub->add_flag("--legacy-sigma", o->legacy_sigma,
                "use exp(-D^2/(2 sigma)) instead of 2 sigma^2");
  sub->add_flag("--converge", o->converge, "iterate to stationarity");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaze-driven unknown-object perception toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");

  HeatmapOpts heatmap_opts;
  auto* heatmap_cmd =
      app.add_subcommand("heatmap", "gaze log to windowed heatmap features");
  heatmap_cmd->add_option("--gaze", heatmap_opts.gaze, "gaze CSV")
      ->required()
      ->check(CLI::ExistingFile);
  heatmap_cmd->add_option("--annotations", heatmap_opts.annotations,
                          "annotation JSON");
  heatmap_cmd->add_option("--window", heatmap_opts.window_ms, "window ms");
  heatmap_cmd->add_option("--stride", heatmap_opts.stride_ms, "stride ms");
  heatmap_cmd->add_option("--grid", heatmap_opts.grid, "cells per axis");
  heatmap_cmd->add_option("--mode", heatmap_opts.mode, "2d|3d")
      ->check(CLI::IsMember({"2d", "3d"}));
  add_common(heatmap_cmd, &heatmap_opts.common);
  heatmap_cmd->callback([&]() { run_heatmap(heatmap_opts); });

  KnnOpts knn_opts;
  auto* knn_cmd =
      app.add_subcommand("knn", "cross-validated detection / regression");
  knn_cmd->add_option("--gaze", knn_opts.gaze, "gaze CSV")
      ->required()
      ->check(CLI::ExistingFile);
  knn_cmd->add_option("--annotations", knn_opts.annotations, "annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  knn_cmd->add_option("--task", knn_opts.task, "classify|regress")
      ->check(CLI::IsMember({"classify", "regress"}));
  knn_cmd->add_option("--k", knn_opts.k, "neighbor count");
  knn_cmd->add_option("--folds", knn_opts.folds, "cross-validation folds");
  knn_cmd->add_option("--window", knn_opts.window_ms, "window ms");
  knn_cmd->add_option("--stride", knn_opts.stride_ms, "stride ms");
  knn_cmd->add_option("--grid", knn_opts.grid, "cells per axis");
  knn_cmd->add_option("--mode", knn_opts.mode, "2d|3d")
      ->check(CLI::IsMember({"2d", "3d"}));
  add_common(knn_cmd, &knn_opts.common);
  knn_cmd->callback([&]() { run_knn(knn_opts); });

  SaliencyOpts saliency_opts;
  auto* saliency_cmd =
      app.add_subcommand("saliency", "gaze-assisted saliency field");
  saliency_cmd->add_option("--image", saliency_opts.image, "input PNG")
      ->required()
      ->check(CLI::ExistingFile);
  saliency_cmd->add_option("--gaze", saliency_opts.gaze, "gaze CSV");
  saliency_cmd->add_option("--gaze-point", saliency_opts.gaze_points,
                           "pixel gaze point 'x,y' (repeatable)");
  add_gbvs_flags(saliency_cmd, &saliency_opts);
  add_common(saliency_cmd, &saliency_opts.common);
  saliency_cmd->callback([&]() { run_saliency(saliency_opts); });

  RoiOpts roi_opts;
  auto* roi_cmd =
      app.add_subcommand("roi", "bounding box from a saliency field");
  roi_cmd->add_option("--image", roi_opts.saliency.image, "input PNG");
  roi_cmd->add_option("--gaze", roi_opts.saliency.gaze, "gaze CSV");
  roi_cmd->add_option("--gaze-point", roi_opts.saliency.gaze_points,
                      "pixel gaze point 'x,y' (repeatable)");
  roi_cmd->add_option("--field", roi_opts.field,
                      "precomputed saliency .bin (with .json sidecar)");
  roi_cmd->add_flag("--largest-component", roi_opts.largest_component,
                    "box only the largest connected region");
  add_gbvs_flags(roi_cmd, &roi_opts.saliency);
  add_common(roi_cmd, &roi_opts.saliency.common);
  roi_cmd->callback([&]() { run_roi(roi_opts); });

  DistillOpts distill_opts;
  auto* distill_cmd =
      app.add_subcommand("distill", "filter proposals by gaze containment");
  distill_cmd->add_option("--proposals", distill_opts.proposals,
                          "proposal CSV (x1,y1,x2,y2 per line)")
      ->required()
      ->check(CLI::ExistingFile);
  distill_cmd->add_option("--gaze-point", distill_opts.gaze_points,
                          "gaze point 'x,y' (repeatable)")
      ->required();
  distill_cmd->add_option("--gt", distill_opts.gt, "ground-truth box JSON");
  distill_cmd->add_option("--tau", distill_opts.tau,
                          "sufficient-IoU threshold");
  add_common(distill_cmd, &distill_opts.common);
  distill_cmd->callback([&]() { run_distill(distill_opts); });

  SegmentOpts segment_opts;
  auto* segment_cmd =
      app.add_subcommand("segment", "gaze-seeded point cloud segmentation");
  segment_cmd->add_option("--cloud", segment_opts.cloud, "xyz cloud")
      ->required()
      ->check(CLI::ExistingFile);
  segment_cmd->add_option("--gaze", segment_opts.gaze, "3D gaze 'x,y,z'")
      ->required();
  segment_cmd->add_option("--mode", segment_opts.mode, "nearest|radius")
      ->check(CLI::IsMember({"nearest", "radius"}));
  segment_cmd->add_option("--pass-min", segment_opts.pass_min, "z min (m)");
  segment_cmd->add_option("--pass-max", segment_opts.pass_max, "z max (m)");
  segment_cmd->add_option("--leaf", segment_opts.leaf, "voxel leaf (m)");
  segment_cmd->add_option("--tolerance", segment_opts.tolerance,
                          "cluster tolerance (m)");
  segment_cmd->add_option("--min-cluster", segment_opts.min_cluster,
                          "minimum cluster size");
  segment_cmd->add_option("--gaze-radius", segment_opts.gaze_radius,
                          "radius-mode attach distance (m)");
  segment_cmd->add_option("--radius-min-cluster",
                          segment_opts.radius_min_cluster,
                          "radius-mode minimum cluster size");
  segment_cmd->add_option("--inlier-distance", segment_opts.inlier_distance,
                          "RANSAC inlier distance (m)");
  segment_cmd->add_option("--iterations", segment_opts.iterations,
                          "RANSAC iterations");
  segment_cmd->add_option("--normal-deviation",
                          segment_opts.normal_deviation,
                          "max plane normal deviation (deg)");
  segment_cmd
      ->add_option("--expected-normal", segment_opts.expected_normal,
                   "expected plane normal")
      ->expected(3);
  add_common(segment_cmd, &segment_opts.common);
  segment_cmd->callback([&]() { run_segment(segment_opts); });

  LabelOpts label_opts;
  auto* label_cmd =
      app.add_subcommand("label", "multiperspective auto-labeling");
  label_cmd->add_option("--mode", label_opts.mode,
                        "cloud-project|gaze-saliency")
      ->check(CLI::IsMember({"cloud-project", "gaze-saliency"}));
  label_cmd->add_option("--cloud", label_opts.cloud, "segmented object xyz");
  label_cmd->add_option("--cam", label_opts.cam, "camera JSON");
  label_cmd->add_option("--class", label_opts.class_name, "class name");
  label_cmd->add_option("--views", label_opts.views, "waypoint count");
  label_cmd->add_option("--min-dist", label_opts.min_dist,
                        "minimum camera distance (m)");
  label_cmd->add_option("--min-projected", label_opts.min_projected,
                        "minimum in-frame points per view");
  label_cmd->add_option("--views-dir", label_opts.views_dir,
                        "recorded views directory (gaze-saliency mode)");
  label_cmd->add_option("--gaze", label_opts.gaze,
                        "3D gaze CSV (gaze-saliency mode)");
  add_gbvs_flags(label_cmd, &label_opts.gbvs);
  add_common(label_cmd, &label_opts.common);
  label_cmd->callback([&]() { run_label(label_opts); });

  EvalOpts eval_opts;
  auto* eval_cmd = app.add_subcommand("eval", "COCO-style detection metrics");
  eval_cmd->add_option("--gt", eval_opts.gt, "ground truth JSON")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--dets", eval_opts.dets, "detections JSON")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_flag("--include-empty-classes", eval_opts.include_empty,
                     "count classes without ground truth into the means");
  eval_cmd->add_flag("--plots", eval_opts.plots, "write PR curve PNG");
  add_common(eval_cmd, &eval_opts.common);
  eval_cmd->callback([&]() { run_eval(eval_opts); });

  DemoOpts demo_opts;
  auto* demo_cmd = app.add_subcommand(
      "demo-synthetic", "end-to-end synthetic labeling and evaluation");
  demo_cmd->add_option("--frames", demo_opts.frames, "frame count");
  demo_cmd->add_option("--width", demo_opts.width, "frame width");
  demo_cmd->add_option("--height", demo_opts.height, "frame height");
  demo_cmd->add_option("--variant", demo_opts.variant, "ga|dga")
      ->check(CLI::IsMember({"ga", "dga"}));
  add_common(demo_cmd, &demo_opts.common);
  demo_cmd->callback([&]() { run_demo(demo_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gazetk/geometry.hpp"

namespace gazetk {

// Ordered gaze recording plus the stimulus extents used to normalize it:
// resolution_x/y in pixels, resolution_z the maximum depth in meters.
struct GazeLog {
  std::vector<GazeSample> samples;
  double resolution_x = 0.0;
  double resolution_y = 0.0;
  double resolution_z = 0.0;
  bool has_depth = false;

  double t_min() const { return samples.front().t_ms; }
  double t_max() const { return samples.back().t_ms; }
};

struct Annotation {
  std::string class_name;
  BBox2D box;
};

// Frame timestamp -> annotation. A present key with an empty optional is an
// explicitly reviewed frame without an object.
using AnnotationSet = std::map<double, std::optional<Annotation>>;

// Class-independent proposals in their original hierarchical order; the
// vector index is the 0-based position index.
struct ProposalList {
  std::vector<BBox2D> boxes;

  size_t size() const { return boxes.size(); }
  bool empty() const { return boxes.empty(); }
};

// One recorded perspective of an object: raster paths (possibly empty for
// synthetic runs), intrinsics, the camera<-object transform, and the label.
struct ViewRecord {
  int index = 0;
  std::string rgb_path;
  std::string depth_path;
  PinholeCamera camera;
  RigidTransform cam_from_object;
  std::optional<BBox2D> roi;
  std::string class_name;
};

// Column-role remapping for gaze CSVs whose header differs from the
// canonical `t_ms,x,y,z,frame`. Keys are file column names, values one of
// "t", "x", "y", "z", "frame".
struct GazeCsvOptions {
  std::map<std::string, std::string> column_roles;
  std::optional<double> resolution_x;
  std::optional<double> resolution_y;
  std::optional<double> resolution_z;
};

GazeLog load_gaze_log(const std::string& path,
                      const GazeCsvOptions& options = {});
void save_gaze_log(const std::string& path, const GazeLog& log);

AnnotationSet load_annotations(const std::string& path);
void save_annotations(const std::string& path, const AnnotationSet& set);

// Every annotated timestamp must fall inside [t_min, t_max] of the log.
void validate_annotations(const AnnotationSet& set, const GazeLog& log);

ProposalList load_proposals(const std::string& path);
void save_proposals(const std::string& path, const ProposalList& list);

PointCloud load_xyz(const std::string& path, const std::string& frame_id = "");
void save_xyz(const std::string& path, const PointCloud& cloud);

struct CameraExtrinsics {
  PinholeCamera camera;
  RigidTransform transform;
};

CameraExtrinsics load_camera_json(const std::string& path);
void save_camera_json(const std::string& path, const CameraExtrinsics& cam);

struct LabeledBoxJson {
  BBox2D box;
  std::string class_name;
};

LabeledBoxJson load_box_json(const std::string& path);
void save_box_json(const std::string& path, const LabeledBoxJson& box);

// Loads one class directory in the multiperspective layout: per view index
// NNNN the files NNNN_rgb.png, NNNN_depth.png, NNNN_camera.json and
// NNNN_roi.json. Camera is mandatory, rasters and roi optional. Raster
// dimensions must match the declared camera resolution.
std::vector<ViewRecord> load_omd_view_dir(const std::string& dir);

// Writes a record group back in the same layout. Raster pointers may be
// null to emit a metadata-only group.
void save_omd_view(const std::string& dir, int index,
                   const CameraExtrinsics& cam,
                   const std::optional<BBox2D>& roi,
                   const std::string& class_name, const Raster* rgb,
                   const Raster* depth);

// Flat little-endian float64 feature matrix with a JSON sidecar describing
// grid, resolution and windowing. `sidecar` receives/provides the metadata
// verbatim as a JSON string.
void save_feature_matrix(const std::string& bin_path,
                         const std::string& json_path,
                         const std::vector<std::vector<double>>& rows,
                         const std::string& sidecar_json);
std::vector<std::vector<double>> load_feature_matrix(
    const std::string& bin_path, const std::string& json_path,
    std::string* sidecar_json = nullptr);

// Shortest round-trip decimal rendering; all text emitters use it so that
// save(load(x)) is byte-stable.
std::string format_double(double v);

}  // namespace gazetk

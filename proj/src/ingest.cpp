#include "gazetk/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "gazetk/raster.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gazetk {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoError, "cannot write " + path);
  }
  out << content;
}

json parse_json(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) {
    fail(ErrorCode::ParseError, "invalid JSON in " + path);
  }
  return j;
}

void write_json(const std::string& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& text, int row, int column) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || t.empty()) {
    fail(ErrorCode::ParseError, "bad numeric field '" + text + "' at row " +
                                    std::to_string(row) + ", column " +
                                    std::to_string(column));
  }
  if (!std::isfinite(value)) {
    fail(ErrorCode::ParseError, "non-finite value at row " +
                                    std::to_string(row) + ", column " +
                                    std::to_string(column));
  }
  return value;
}

BBox2D box_from_json(const json& j) {
  BBox2D b{j.at("x1").get<double>(), j.at("y1").get<double>(),
           j.at("x2").get<double>(), j.at("y2").get<double>()};
  if (!b.valid()) {
    fail(ErrorCode::ParseError, "invalid box corners in JSON");
  }
  return b;
}

json box_to_json(const BBox2D& b) {
  return json{{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}};
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

GazeLog load_gaze_log(const std::string& path, const GazeCsvOptions& options) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open " + path);
  }
  GazeLog log;
  log.resolution_x = options.resolution_x.value_or(1088.0);
  log.resolution_y = options.resolution_y.value_or(1080.0);
  log.resolution_z = options.resolution_z.value_or(5.0);

  std::string line;
  int row = 0;
  // role index within a data row, -1 when the column is absent
  int col_t = -1, col_x = -1, col_y = -1, col_z = -1, col_frame = -1;
  bool header_seen = false;
  size_t expected_fields = 0;

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped[0] == '#') {
      // metadata comment, e.g. "# rx=1088 ry=1080 rz=5"
      std::istringstream meta(stripped.substr(1));
      std::string token;
      while (meta >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const double value = parse_number(token.substr(eq + 1), row, 1);
        if (key == "rx") log.resolution_x = value;
        if (key == "ry") log.resolution_y = value;
        if (key == "rz") log.resolution_z = value;
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      const auto columns = split(stripped, ',');
      expected_fields = columns.size();
      for (size_t i = 0; i < columns.size(); ++i) {
        std::string name = trim(columns[i]);
        auto remap = options.column_roles.find(name);
        if (remap != options.column_roles.end()) name = remap->second;
        if (name == "t_ms" || name == "t") col_t = static_cast<int>(i);
        else if (name == "x") col_x = static_cast<int>(i);
        else if (name == "y") col_y = static_cast<int>(i);
        else if (name == "z") col_z = static_cast<int>(i);
        else if (name == "frame") col_frame = static_cast<int>(i);
      }
      if (col_t < 0 || col_x < 0 || col_y < 0) {
        fail(ErrorCode::ParseError,
             "header must provide t, x and y columns (row " +
                 std::to_string(row) + ")");
      }
      log.has_depth = col_z >= 0;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != expected_fields) {
      fail(ErrorCode::ParseError, "expected " +
                                      std::to_string(expected_fields) +
                                      " fields, got " +
                                      std::to_string(fields.size()) +
                                      " at row " + std::to_string(row));
    }
    GazeSample s;
    s.t_ms = parse_number(fields[col_t], row, col_t + 1);
    s.x = parse_number(fields[col_x], row, col_x + 1);
    s.y = parse_number(fields[col_y], row, col_y + 1);
    if (col_z >= 0) s.z = parse_number(fields[col_z], row, col_z + 1);
    if (col_frame >= 0) s.frame_id = trim(fields[col_frame]);
    if (s.t_ms < 0) {
      fail(ErrorCode::ParseError,
           "negative timestamp at row " + std::to_string(row));
    }
    log.samples.push_back(std::move(s));
  }
  if (log.samples.empty()) {
    fail(ErrorCode::EmptyLog, path);
  }
  if (log.resolution_x <= 0 || log.resolution_y <= 0 ||
      log.resolution_z <= 0) {
    fail(ErrorCode::ParseError, "stimulus resolution must be positive");
  }
  std::stable_sort(
      log.samples.begin(), log.samples.end(),
      [](const GazeSample& a, const GazeSample& b) { return a.t_ms < b.t_ms; });
  return log;
}

void save_gaze_log(const std::string& path, const GazeLog& log) {
  std::ostringstream out;
  out << "# rx=" << format_double(log.resolution_x)
      << " ry=" << format_double(log.resolution_y)
      << " rz=" << format_double(log.resolution_z) << "\n";
  const bool frames = std::any_of(
      log.samples.begin(), log.samples.end(),
      [](const GazeSample& s) { return !s.frame_id.empty(); });
  out << "t_ms,x,y";
  if (log.has_depth) out << ",z";
  if (frames) out << ",frame";
  out << "\n";
  for (const auto& s : log.samples) {
    out << format_double(s.t_ms) << ',' << format_double(s.x) << ','
        << format_double(s.y);
    if (log.has_depth) out << ',' << format_double(s.z);
    if (frames) out << ',' << s.frame_id;
    out << "\n";
  }
  write_file(path, out.str());
}

AnnotationSet load_annotations(const std::string& path) {
  const json j = parse_json(path);
  AnnotationSet set;
  for (const auto& entry : j) {
    const double t = entry.at("t_ms").get<double>();
    if (entry.contains("box")) {
      Annotation a;
      a.class_name = entry.value("class", "object");
      a.box = box_from_json(entry.at("box"));
      set[t] = a;
    } else {
      set[t] = std::nullopt;
    }
  }
  return set;
}

void save_annotations(const std::string& path, const AnnotationSet& set) {
  json j = json::array();
  for (const auto& [t, ann] : set) {
    json e{{"t_ms", t}};
    if (ann) {
      e["class"] = ann->class_name;
      e["box"] = box_to_json(ann->box);
    }
    j.push_back(e);
  }
  write_json(path, j);
}

void validate_annotations(const AnnotationSet& set, const GazeLog& log) {
  if (log.samples.empty()) {
    fail(ErrorCode::EmptyLog, "cannot validate against an empty log");
  }
  for (const auto& [t, ann] : set) {
    if (t < log.t_min() || t > log.t_max()) {
      fail(ErrorCode::OutOfRange,
           "annotation at t=" + format_double(t) + " outside log range [" +
               format_double(log.t_min()) + ", " + format_double(log.t_max()) +
               "]");
    }
  }
}

ProposalList load_proposals(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open " + path);
  }
  ProposalList list;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto fields = split(stripped, ',');
    if (fields.size() != 4) {
      fail(ErrorCode::ParseError, "expected x1,y1,x2,y2 at row " +
                                      std::to_string(row));
    }
    BBox2D b{parse_number(fields[0], row, 1), parse_number(fields[1], row, 2),
             parse_number(fields[2], row, 3), parse_number(fields[3], row, 4)};
    if (!b.valid()) {
      fail(ErrorCode::ParseError,
           "corner ordering violated at row " + std::to_string(row));
    }
    list.boxes.push_back(b);
  }
  return list;
}

void save_proposals(const std::string& path, const ProposalList& list) {
  std::ostringstream out;
  for (const auto& b : list.boxes) {
    out << format_double(b.x1) << ',' << format_double(b.y1) << ','
        << format_double(b.x2) << ',' << format_double(b.y2) << "\n";
  }
  write_file(path, out.str());
}

PointCloud load_xyz(const std::string& path, const std::string& frame_id) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open " + path);
  }
  PointCloud cloud;
  cloud.frame_id = frame_id;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::istringstream ss(stripped);
    std::string fx, fy, fz;
    if (!(ss >> fx >> fy >> fz)) {
      fail(ErrorCode::ParseError,
           "expected 'x y z' at row " + std::to_string(row));
    }
    cloud.points.emplace_back(parse_number(fx, row, 1),
                              parse_number(fy, row, 2),
                              parse_number(fz, row, 3));
  }
  return cloud;
}

void save_xyz(const std::string& path, const PointCloud& cloud) {
  std::ostringstream out;
  for (const auto& p : cloud.points) {
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
        << format_double(p.z()) << "\n";
  }
  write_file(path, out.str());
}

CameraExtrinsics load_camera_json(const std::string& path) {
  const json j = parse_json(path);
  CameraExtrinsics cam;
  cam.camera.fx = j.at("fx").get<double>();
  cam.camera.fy = j.at("fy").get<double>();
  cam.camera.cx = j.at("cx").get<double>();
  cam.camera.cy = j.at("cy").get<double>();
  cam.camera.width = j.at("width").get<int>();
  cam.camera.height = j.at("height").get<int>();
  if (!cam.camera.valid()) {
    fail(ErrorCode::ParseError, "invalid intrinsics in " + path);
  }
  const auto t = j.at("t");
  const auto q = j.at("q");
  if (t.size() != 3 || q.size() != 4) {
    fail(ErrorCode::ParseError, "t must be [x,y,z], q must be [w,x,y,z]");
  }
  cam.transform.translation = Vec3(t[0].get<double>(), t[1].get<double>(),
                                   t[2].get<double>());
  cam.transform.rotation =
      Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
           q[3].get<double>());
  if (std::abs(cam.transform.rotation.norm() - 1.0) > 1e-6) {
    fail(ErrorCode::ParseError, "quaternion is not unit length in " + path);
  }
  cam.transform.rotation.normalize();
  return cam;
}

void save_camera_json(const std::string& path, const CameraExtrinsics& cam) {
  const Quat& q = cam.transform.rotation;
  const Vec3& t = cam.transform.translation;
  json j{{"fx", cam.camera.fx},       {"fy", cam.camera.fy},
         {"cx", cam.camera.cx},       {"cy", cam.camera.cy},
         {"width", cam.camera.width}, {"height", cam.camera.height},
         {"t", {t.x(), t.y(), t.z()}},
         {"q", {q.w(), q.x(), q.y(), q.z()}}};
  write_json(path, j);
}

LabeledBoxJson load_box_json(const std::string& path) {
  const json j = parse_json(path);
  LabeledBoxJson out;
  out.box = box_from_json(j);
  out.class_name = j.value("class", "");
  return out;
}

void save_box_json(const std::string& path, const LabeledBoxJson& box) {
  json j = box_to_json(box.box);
  j["class"] = box.class_name;
  write_json(path, j);
}

std::vector<ViewRecord> load_omd_view_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    fail(ErrorCode::IoError, dir + " is not a directory");
  }
  static const std::regex group_re(R"((\d{4})_(rgb|depth|camera|roi)\.(png|json))");
  std::map<int, std::map<std::string, std::string>> groups;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, group_re)) {
      groups[std::stoi(m[1])][m[2]] = entry.path().string();
    }
  }
  const std::string class_name = fs::path(dir).filename().string();
  std::vector<ViewRecord> records;
  for (const auto& [index, files] : groups) {
    auto camera_it = files.find("camera");
    if (camera_it == files.end()) {
      fail(ErrorCode::MissingComponent,
           "view " + std::to_string(index) + " lacks its camera file");
    }
    ViewRecord rec;
    rec.index = index;
    rec.class_name = class_name;
    const CameraExtrinsics cam = load_camera_json(camera_it->second);
    rec.camera = cam.camera;
    rec.cam_from_object = cam.transform;
    if (auto it = files.find("rgb"); it != files.end()) {
      rec.rgb_path = it->second;
      int w, h;
      png_size(rec.rgb_path, &w, &h);
      if (w != rec.camera.width || h != rec.camera.height) {
        fail(ErrorCode::InconsistentResolution,
             rec.rgb_path + " is " + std::to_string(w) + "x" +
                 std::to_string(h) + ", camera declares " +
                 std::to_string(rec.camera.width) + "x" +
                 std::to_string(rec.camera.height));
      }
    }
    if (auto it = files.find("depth"); it != files.end()) {
      rec.depth_path = it->second;
      int w, h;
      png_size(rec.depth_path, &w, &h);
      if (w != rec.camera.width || h != rec.camera.height) {
        fail(ErrorCode::InconsistentResolution,
             rec.depth_path + " does not match the declared resolution");
      }
    }
    if (auto it = files.find("roi"); it != files.end()) {
      rec.roi = load_box_json(it->second).box;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_omd_view(const std::string& dir, int index,
                   const CameraExtrinsics& cam,
                   const std::optional<BBox2D>& roi,
                   const std::string& class_name, const Raster* rgb,
                   const Raster* depth) {
  fs::create_directories(dir);
  char prefix[16];
  std::snprintf(prefix, sizeof(prefix), "%04d", index);
  const std::string base = (fs::path(dir) / prefix).string();
  save_camera_json(base + "_camera.json", cam);
  if (roi) {
    save_box_json(base + "_roi.json", {*roi, class_name});
  }
  if (rgb) {
    write_png(base + "_rgb.png", *rgb);
  }
  if (depth) {
    write_depth_png(base + "_depth.png", *depth);
  }
}

void save_feature_matrix(const std::string& bin_path,
                         const std::string& json_path,
                         const std::vector<std::vector<double>>& rows,
                         const std::string& sidecar_json) {
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoError, "cannot write " + bin_path);
  }
  for (const auto& row : rows) {
    for (double v : row) {
      // doubles serialized little-endian
      uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      char bytes[8];
      for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
      }
      out.write(bytes, 8);
    }
  }
  write_file(json_path, sidecar_json);
}

std::vector<std::vector<double>> load_feature_matrix(
    const std::string& bin_path, const std::string& json_path,
    std::string* sidecar_json) {
  const std::string sidecar = read_file(json_path);
  if (sidecar_json) *sidecar_json = sidecar;
  const json meta = json::parse(sidecar, nullptr, false);
  if (meta.is_discarded() || !meta.contains("dim") || !meta.contains("count")) {
    fail(ErrorCode::ParseError, "sidecar must declare dim and count");
  }
  const size_t dim = meta.at("dim").get<size_t>();
  const size_t count = meta.at("count").get<size_t>();
  const std::string raw = read_file(bin_path);
  if (raw.size() != dim * count * 8) {
    fail(ErrorCode::ParseError, "feature binary size does not match sidecar");
  }
  std::vector<std::vector<double>> rows(count, std::vector<double>(dim));
  size_t offset = 0;
  for (auto& row : rows) {
    for (double& v : row) {
      uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) {
        bits |= static_cast<uint64_t>(
                    static_cast<unsigned char>(raw[offset + i]))
                << (8 * i);
      }
      std::memcpy(&v, &bits, sizeof(v));
      offset += 8;
    }
  }
  return rows;
}

}  // namespace gazetk

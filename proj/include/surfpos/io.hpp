#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SVD>

#include "surfpos/compare.hpp"
#include "surfpos/heightmap.hpp"
#include "surfpos/markers.hpp"
#include "surfpos/scene.hpp"

namespace surfpos::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Text helpers

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Shortest decimal form that reads back to the same float.
inline std::string format_float(float v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Error parse_error(const fs::path& file, std::size_t line, const std::string& msg) {
  return Error(ErrorKind::Parse, file.string() + ":" + std::to_string(line) + ": " + msg);
}

/// Non-empty, non-comment lines of a text file, split on whitespace.
struct TextLine {
  std::size_t number;
  std::vector<std::string> fields;
};

inline std::vector<TextLine> read_text_lines(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string());
  std::vector<TextLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    TextLine tl{n, {}};
    for (std::string f; ss >> f;) tl.fields.push_back(f);
    if (!tl.fields.empty()) out.push_back(std::move(tl));
  }
  return out;
}

inline double parse_number(const std::string& s, const fs::path& file, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw parse_error(file, line, "not a number: '" + s + "'");
  return v;
}

inline long long parse_integer(const std::string& s, const fs::path& file, std::size_t line) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw parse_error(file, line, "not an integer: '" + s + "'");
  return v;
}

inline std::ofstream open_for_write(const fs::path& file, bool binary = false) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + file.string());
  return out;
}

inline void finish_write(std::ofstream& out, const fs::path& file) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed: " + file.string());
}

/// Rotation read from text; tolerates print rounding up to 1e-6 and snaps
/// the matrix back onto SO(3).
inline RigidTransform make_transform(const std::vector<double>& v, const fs::path& file, std::size_t line) {
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  const Eigen::Vector3d t(v[9], v[10], v[11]);
  if (!RigidTransform::is_rotation(r)) {
    if (!RigidTransform::is_rotation(r, 1e-6)) throw parse_error(file, line, "rotation is not orthonormal");
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    r = svd.matrixU() * svd.matrixV().transpose();
  }
  if (!t.allFinite()) throw parse_error(file, line, "translation is not finite");
  return {r, t};
}

inline std::string transform_fields(const RigidTransform& t) {
  std::string s;
  const auto& r = t.rotation();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += format_double(r(i, j)) + ' ';
  s += format_double(t.translation().x()) + ' ' + format_double(t.translation().y()) + ' ' +
       format_double(t.translation().z());
  return s;
}

// ---------------------------------------------------------------------------
// Rigid transform: one line, 9 rotation values row-major then 3 translation
// values in meters.

inline void write_transform(const RigidTransform& t, const fs::path& file) {
  auto out = open_for_write(file);
  out << transform_fields(t) << '\n';
  finish_write(out, file);
}

inline RigidTransform read_transform(const fs::path& file) {
  std::vector<double> v;
  std::size_t line = 0;
  for (const auto& tl : read_text_lines(file)) {
    line = tl.number;
    for (const auto& f : tl.fields) v.push_back(parse_number(f, file, tl.number));
  }
  if (v.size() != 12) throw parse_error(file, line, "expected 12 numbers, got " + std::to_string(v.size()));
  return make_transform(v, file, line);
}

/// One transform per line.
inline void write_transforms(const std::vector<RigidTransform>& ts, const fs::path& file) {
  auto out = open_for_write(file);
  for (const auto& t : ts) out << transform_fields(t) << '\n';
  finish_write(out, file);
}

inline std::vector<RigidTransform> read_transforms(const fs::path& file) {
  std::vector<RigidTransform> out;
  for (const auto& tl : read_text_lines(file)) {
    if (tl.fields.size() != 12) throw parse_error(file, tl.number, "expected 12 numbers");
    std::vector<double> v;
    for (const auto& f : tl.fields) v.push_back(parse_number(f, file, tl.number));
    out.push_back(make_transform(v, file, tl.number));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 16-bit PGM depth (P5, maxval 65535, big-endian, millimeters, 0 = invalid)

inline std::uint16_t depth_to_mm(double d) {
  if (!(d > 0) || !std::isfinite(d)) return 0;
  const double mm = std::round(d * 1000.0);
  return static_cast<std::uint16_t>(std::clamp(mm, 1.0, 65535.0));
}

inline void write_depth_pgm(const DepthImage& img, const fs::path& file) {
  auto out = open_for_write(file, true);
  out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
  std::vector<unsigned char> buf(img.depth.size() * 2);
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    const std::uint16_t mm = depth_to_mm(img.depth[i]);
    buf[2 * i] = static_cast<unsigned char>(mm >> 8);
    buf[2 * i + 1] = static_cast<unsigned char>(mm & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  finish_write(out, file);
}

namespace detail {

/// Reads the next header token of a PNM file, skipping comments.
inline std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
};

inline PnmHeader read_pnm_header(std::istream& in, const fs::path& file) {
  PnmHeader h;
  h.magic = pnm_token(in);
  try {
    h.width = std::stoi(pnm_token(in));
    h.height = std::stoi(pnm_token(in));
    h.maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    throw parse_error(file, 1, "malformed PNM header");
  }
  if (h.width <= 0 || h.height <= 0) throw parse_error(file, 1, "bad PNM dimensions");
  return h;
}

}  // namespace detail

inline DepthImage read_depth_pgm(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string());
  const auto h = detail::read_pnm_header(in, file);
  if (h.magic != "P5" || h.maxval != 65535) throw parse_error(file, 1, "expected 16-bit P5 PGM");
  DepthImage img(h.width, h.height);
  std::vector<unsigned char> buf(img.depth.size() * 2);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw parse_error(file, 1, "truncated pixel data");
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    const int mm = (buf[2 * i] << 8) | buf[2 * i + 1];
    img.depth[i] = mm / 1000.0;
  }
  return img;
}

// ---------------------------------------------------------------------------
// Binary PPM (P6, maxval 255)

inline void write_image(const RgbImage& img, const fs::path& file) {
  auto out = open_for_write(file, true);
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size() * 3));
  finish_write(out, file);
}

inline RgbImage read_image(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string());
  const auto h = detail::read_pnm_header(in, file);
  if (h.magic != "P6" || h.maxval != 255) throw parse_error(file, 1, "expected 8-bit P6 PPM");
  RgbImage img(h.width, h.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size() * 3));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size() * 3)) throw parse_error(file, 1, "truncated pixel data");
  return img;
}

// ---------------------------------------------------------------------------
// ASCII PLY point cloud

inline void write_ply(const PointCloud& cloud, const fs::path& file) {
  auto out = open_for_write(file);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors()) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  std::string row;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    row = format_float(static_cast<float>(p.x())) + ' ' + format_float(static_cast<float>(p.y())) + ' ' +
          format_float(static_cast<float>(p.z()));
    if (cloud.has_colors()) {
      const Rgb& c = cloud.colors[i];
      row += ' ' + std::to_string(c[0]) + ' ' + std::to_string(c[1]) + ' ' + std::to_string(c[2]);
    }
    row += '\n';
    out << row;
  }
  finish_write(out, file);
}

/// Reader for the ASCII files write_ply produces (x y z [red green blue]).
inline PointCloud read_ply(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string());
  std::string line;
  std::size_t n = 0, count = 0;
  bool colors = false, ascii = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (n == 1 && key != "ply") throw parse_error(file, n, "not a PLY file");
    if (key == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (key == "element") {
      std::string name;
      ss >> name >> count;
      if (name != "vertex") throw parse_error(file, n, "only vertex elements are supported");
    } else if (key == "property") {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
      if (name == "red") colors = true;
    } else if (key == "end_header") {
      break;
    }
  }
  if (!ascii) throw parse_error(file, n, "only ASCII PLY is supported");
  if (props.size() < 3 || props[0] != "x" || props[1] != "y" || props[2] != "z") {
    throw parse_error(file, n, "expected x y z vertex properties");
  }
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw parse_error(file, n, "fewer vertices than declared");
    ++n;
    std::istringstream ss(line);
    std::vector<std::string> f;
    for (std::string s; ss >> s;) f.push_back(s);
    if (f.size() != props.size()) throw parse_error(file, n, "wrong number of vertex fields");
    cloud.points.emplace_back(parse_number(f[0], file, n), parse_number(f[1], file, n), parse_number(f[2], file, n));
    if (colors) {
      cloud.colors.push_back({static_cast<std::uint8_t>(parse_integer(f[3], file, n)),
                              static_cast<std::uint8_t>(parse_integer(f[4], file, n)),
                              static_cast<std::uint8_t>(parse_integer(f[5], file, n))});
    }
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Heightmap: key/value header, then one text row per grid row (y index
// ascending), cells separated by spaces, "nan" for undefined cells.

inline void write_heightmap(const HeightMap& map, const fs::path& file) {
  auto out = open_for_write(file);
  const auto& p = map.params();
  out << "surfpos_heightmap 1\n"
      << "step " << format_double(p.step) << '\n'
      << "x_range " << format_double(p.x_min) << ' ' << format_double(p.x_max) << '\n'
      << "y_range " << format_double(p.y_min) << ' ' << format_double(p.y_max) << '\n'
      << "thickness " << format_double(p.thickness) << '\n'
      << "marker_side " << format_double(p.marker_side) << '\n'
      << "size " << map.cols() << ' ' << map.rows() << '\n'
      << "data\n";
  std::string row;
  for (int b = 0; b < map.rows(); ++b) {
    row.clear();
    for (int a = 0; a < map.cols(); ++a) {
      if (a) row += ' ';
      row += format_float(static_cast<float>(map.at(a, b)));
    }
    row += '\n';
    out << row;
  }
  finish_write(out, file);
}

inline HeightMap read_heightmap(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + file.string());
  std::string line;
  std::size_t n = 0;
  HeightMapParams p;
  int cols = -1, rows = -1;
  bool data = false;
  const auto num = [&](std::istringstream& ss) {
    std::string s;
    if (!(ss >> s)) throw parse_error(file, n, "missing value");
    return parse_number(s, file, n);
  };
  while (!data && std::getline(in, line)) {
    ++n;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (n == 1) {
      if (key != "surfpos_heightmap") throw parse_error(file, n, "not a heightmap file");
    } else if (key == "step") {
      p.step = num(ss);
    } else if (key == "x_range") {
      p.x_min = num(ss);
      p.x_max = num(ss);
    } else if (key == "y_range") {
      p.y_min = num(ss);
      p.y_max = num(ss);
    } else if (key == "thickness") {
      p.thickness = num(ss);
    } else if (key == "marker_side") {
      p.marker_side = num(ss);
    } else if (key == "size") {
      cols = static_cast<int>(num(ss));
      rows = static_cast<int>(num(ss));
    } else if (key == "data") {
      data = true;
    } else {
      throw parse_error(file, n, "unknown header key '" + key + "'");
    }
  }
  if (!data) throw parse_error(file, n, "missing data section");
  try {
    p.validate();
  } catch (const Error& e) {
    throw parse_error(file, n, e.what());
  }
  HeightMap map(p);
  if (cols != map.cols() || rows != map.rows()) throw parse_error(file, n, "size does not match the grid parameters");
  for (int b = 0; b < rows; ++b) {
    if (!std::getline(in, line)) throw parse_error(file, n, "fewer rows than declared");
    ++n;
    std::istringstream ss(line);
    int a = 0;
    for (std::string s; ss >> s; ++a) {
      if (a >= cols) throw parse_error(file, n, "too many cells in row");
      map.at(a, b) = parse_number(s, file, n);
    }
    if (a != cols) throw parse_error(file, n, "too few cells in row");
  }
  return map;
}

// ---------------------------------------------------------------------------
// Scene marker corners: "marker_id corner x y z support", corner in 1..4.

inline void write_corners(const SceneMarkerCorners& corners, const fs::path& file) {
  auto out = open_for_write(file);
  out << "# marker_id corner x y z support\n";
  for (const auto& [id, mc] : corners) {
    for (int l = 0; l < 4; ++l) {
      if (!mc.position[l]) continue;
      const Point3& p = *mc.position[l];
      out << id << ' ' << l + 1 << ' ' << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
          << format_double(p.z()) << ' ' << mc.support[l] << '\n';
    }
  }
  finish_write(out, file);
}

inline SceneMarkerCorners read_corners(const fs::path& file) {
  SceneMarkerCorners out;
  for (const auto& tl : read_text_lines(file)) {
    if (tl.fields.size() != 6) throw parse_error(file, tl.number, "expected: marker_id corner x y z support");
    const int id = static_cast<int>(parse_integer(tl.fields[0], file, tl.number));
    const auto l = parse_integer(tl.fields[1], file, tl.number);
    if (l < 1 || l > 4) throw parse_error(file, tl.number, "corner index must be 1..4");
    auto& mc = out[id];
    mc.position[l - 1] = Point3(parse_number(tl.fields[2], file, tl.number), parse_number(tl.fields[3], file, tl.number),
                                parse_number(tl.fields[4], file, tl.number));
    mc.support[l - 1] = static_cast<int>(parse_integer(tl.fields[5], file, tl.number));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset directory:
//   intrinsics.txt    fx fy cx cy width height
//   poses.txt         id r11 r12 r13 r21 r22 r23 r31 r32 r33 tx ty tz (camera-to-world, m)
//   detections.txt    keyframe_id marker_id x1 y1 x2 y2 x3 y3 x4 y4
//   depth/<id>.pgm    16-bit depth in mm, 0 = invalid; id zero-padded to 4 digits
//   ground_truth.txt  optional, one transform line

inline fs::path depth_file(const fs::path& dir, int id) {
  char name[32];
  std::snprintf(name, sizeof name, "%04d.pgm", id);
  return dir / "depth" / name;
}

inline void write_intrinsics(const CameraIntrinsics& k, const fs::path& file) {
  auto out = open_for_write(file);
  out << "# fx fy cx cy width height\n"
      << format_double(k.fx) << ' ' << format_double(k.fy) << ' ' << format_double(k.cx) << ' '
      << format_double(k.cy) << ' ' << k.width << ' ' << k.height << '\n';
  finish_write(out, file);
}

inline CameraIntrinsics read_intrinsics(const fs::path& file) {
  const auto lines = read_text_lines(file);
  if (lines.size() != 1 || lines[0].fields.size() != 6) {
    throw parse_error(file, lines.empty() ? 1 : lines[0].number, "expected one line: fx fy cx cy width height");
  }
  const auto& f = lines[0].fields;
  const std::size_t n = lines[0].number;
  CameraIntrinsics k{parse_number(f[0], file, n), parse_number(f[1], file, n), parse_number(f[2], file, n),
                     parse_number(f[3], file, n), static_cast<int>(parse_integer(f[4], file, n)),
                     static_cast<int>(parse_integer(f[5], file, n))};
  try {
    k.validate();
  } catch (const Error& e) {
    throw parse_error(file, n, e.what());
  }
  return k;
}

inline void write_dataset(const Scene& scene, const fs::path& dir,
                          const std::optional<RigidTransform>& ground_truth = std::nullopt) {
  fs::create_directories(dir / "depth");
  write_intrinsics(scene.intrinsics, dir / "intrinsics.txt");
  {
    auto out = open_for_write(dir / "poses.txt");
    out << "# id r11 r12 r13 r21 r22 r23 r31 r32 r33 tx ty tz\n";
    for (const auto& kf : scene.keyframes) out << kf.id << ' ' << transform_fields(kf.pose) << '\n';
    finish_write(out, dir / "poses.txt");
  }
  {
    auto out = open_for_write(dir / "detections.txt");
    out << "# keyframe_id marker_id x1 y1 x2 y2 x3 y3 x4 y4\n";
    for (const auto& kf : scene.keyframes) {
      for (const auto& m : kf.markers) {
        out << kf.id << ' ' << m.marker_id;
        for (const auto& c : m.corners) out << ' ' << format_double(c.x()) << ' ' << format_double(c.y());
        out << '\n';
      }
    }
    finish_write(out, dir / "detections.txt");
  }
  for (const auto& kf : scene.keyframes) write_depth_pgm(kf.depth, depth_file(dir, kf.id));
  if (ground_truth) write_transform(*ground_truth, dir / "ground_truth.txt");
}

/// Keyframes come back ordered as in poses.txt.
inline Scene read_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "dataset directory not found: " + dir.string());
  Scene scene;
  scene.intrinsics = read_intrinsics(dir / "intrinsics.txt");

  const fs::path poses_file = dir / "poses.txt";
  std::map<int, std::size_t> slot;
  for (const auto& tl : read_text_lines(poses_file)) {
    if (tl.fields.size() != 13) throw parse_error(poses_file, tl.number, "expected id + 12 numbers");
    DepthKeyframe kf;
    kf.id = static_cast<int>(parse_integer(tl.fields[0], poses_file, tl.number));
    if (slot.count(kf.id)) throw parse_error(poses_file, tl.number, "duplicate keyframe id " + std::to_string(kf.id));
    std::vector<double> v;
    for (std::size_t i = 1; i < 13; ++i) v.push_back(parse_number(tl.fields[i], poses_file, tl.number));
    kf.pose = make_transform(v, poses_file, tl.number);
    slot[kf.id] = scene.keyframes.size();
    scene.keyframes.push_back(std::move(kf));
  }

  const fs::path det_file = dir / "detections.txt";
  if (fs::exists(det_file)) {
    for (const auto& tl : read_text_lines(det_file)) {
      if (tl.fields.size() != 10) throw parse_error(det_file, tl.number, "expected keyframe_id marker_id + 8 corner coordinates");
      const int id = static_cast<int>(parse_integer(tl.fields[0], det_file, tl.number));
      auto it = slot.find(id);
      if (it == slot.end()) throw parse_error(det_file, tl.number, "unknown keyframe id " + std::to_string(id));
      MarkerObservation obs;
      obs.marker_id = static_cast<int>(parse_integer(tl.fields[1], det_file, tl.number));
      for (int l = 0; l < 4; ++l) {
        obs.corners[l] = Pixel(parse_number(tl.fields[2 + 2 * l], det_file, tl.number),
                               parse_number(tl.fields[3 + 2 * l], det_file, tl.number));
        if (!obs.corners[l].allFinite()) throw parse_error(det_file, tl.number, "corner is not finite");
      }
      scene.keyframes[it->second].markers.push_back(obs);
    }
  }

  for (auto& kf : scene.keyframes) {
    const fs::path f = depth_file(dir, kf.id);
    if (!fs::exists(f)) throw Error(ErrorKind::Io, "missing depth image " + f.string());
    kf.depth = read_depth_pgm(f);
    if (kf.depth.width != scene.intrinsics.width || kf.depth.height != scene.intrinsics.height) {
      throw parse_error(f, 1, "depth image size does not match intrinsics");
    }
  }
  return scene;
}

inline std::optional<RigidTransform> read_ground_truth(const fs::path& dir) {
  const fs::path f = dir / "ground_truth.txt";
  if (!fs::exists(f)) return std::nullopt;
  return read_transform(f);
}

}  // namespace surfpos::io

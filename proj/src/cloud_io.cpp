#include "truckloc/cloud_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

#include "truckloc/error.hpp"

namespace truckloc {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_double(const std::string& token, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": bad number '" + token + "'");
  }
  return v;
}

// Reads `count` rows of `fields` columns into a cloud, taking x/y/z/intensity columns.
PointCloud read_body(std::istream& in, std::size_t count, const std::vector<std::string>& fields, std::size_t line_no) {
  int ix = -1, iy = -1, iz = -1, ii = -1;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const auto& name = fields[f];
    if (name == "x") ix = static_cast<int>(f);
    if (name == "y") iy = static_cast<int>(f);
    if (name == "z") iz = static_cast<int>(f);
    if (name == "intensity") ii = static_cast<int>(f);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw Error(ErrorCode::kParse, "cloud header lacks x, y, z fields");
  PointCloud cloud;
  cloud.reserve(count);
  std::string line;
  std::vector<double> row(fields.size());
  while (cloud.size() < count && std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    std::size_t f = 0;
    while (ss >> tok) {
      if (f >= fields.size()) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": too many values");
      row[f++] = parse_double(tok, line_no);
    }
    if (f == 0) continue;
    if (f != fields.size()) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": too few values");
    const Vec3 p(row[static_cast<std::size_t>(ix)], row[static_cast<std::size_t>(iy)],
                 row[static_cast<std::size_t>(iz)]);
    if (!p.allFinite()) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": non-finite coordinate");
    cloud.push_back(p, ii >= 0 ? static_cast<float>(row[static_cast<std::size_t>(ii)]) : 0.0f);
  }
  if (cloud.size() != count) {
    throw Error(ErrorCode::kParse, "header declares " + std::to_string(count) + " points, body has " +
                                       std::to_string(cloud.size()));
  }
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::kParse, "body has more points than the header declares");
  return cloud;
}

void write_rows(std::ostream& out, const PointCloud& cloud) {
  char buf[128];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const int n = std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g\n", p.x(), p.y(), p.z(),
                                static_cast<double>(cloud.intensity[i]));
    out.write(buf, n);
  }
}

}  // namespace

CloudFormat cloud_format_for(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".pcd") return CloudFormat::kPcd;
  if (ext == ".ply") return CloudFormat::kPly;
  throw Error(ErrorCode::kInvalidArgument, "unsupported cloud extension '" + ext + "' (use .pcd or .ply)");
}

void write_pcd(std::ostream& out, const PointCloud& cloud) {
  out << "# .PCD v0.7 - Point Cloud Data file format\n"
      << "VERSION 0.7\n"
      << "FIELDS x y z intensity\n"
      << "SIZE 8 8 8 4\n"
      << "TYPE F F F F\n"
      << "COUNT 1 1 1 1\n"
      << "WIDTH " << cloud.size() << "\n"
      << "HEIGHT 1\n"
      << "VIEWPOINT 0 0 0 1 0 0 0\n"
      << "POINTS " << cloud.size() << "\n"
      << "DATA ascii\n";
  write_rows(out, cloud);
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\nproperty float intensity\n"
      << "end_header\n";
  write_rows(out, cloud);
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  const CloudFormat fmt = cloud_format_for(path);
  auto out = open_out(path);
  if (fmt == CloudFormat::kPcd) {
    write_pcd(out, cloud);
  } else {
    write_ply(out, cloud);
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

PointCloud read_pcd(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t points = 0;
  bool have_points = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    key = lower(key);
    if (key == "fields") {
      std::string f;
      while (ss >> f) fields.push_back(lower(f));
    } else if (key == "points") {
      if (!(ss >> points)) throw Error(ErrorCode::kParse, "bad POINTS line");
      have_points = true;
    } else if (key == "data") {
      std::string kind;
      ss >> kind;
      if (lower(kind) != "ascii") throw Error(ErrorCode::kParse, "only ASCII PCD is supported (DATA " + kind + ")");
      if (!have_points) throw Error(ErrorCode::kParse, "PCD header lacks POINTS");
      return read_body(in, points, fields, line_no);
    }
  }
  throw Error(ErrorCode::kParse, "PCD header lacks DATA line");
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || lower(line).rfind("ply", 0) != 0) throw Error(ErrorCode::kParse, "missing 'ply' magic");
  ++line_no;
  std::vector<std::string> fields;
  std::size_t vertices = 0;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    key = lower(key);
    if (key == "format") {
      std::string kind;
      ss >> kind;
      if (kind != "ascii") throw Error(ErrorCode::kParse, "only ASCII PLY is supported");
    } else if (key == "element") {
      std::string name;
      ss >> name >> vertices;
      in_vertex = name == "vertex";
      if (!in_vertex) {
        throw Error(ErrorCode::kParse, "unsupported PLY element '" + name + "' (vertex only)");
      }
    } else if (key == "property" && in_vertex) {
      std::string type, name;
      ss >> type >> name;
      if (type == "list") throw Error(ErrorCode::kParse, "list properties are not supported");
      fields.push_back(lower(name));
    } else if (key == "end_header") {
      return read_body(in, vertices, fields, line_no);
    }
  }
  throw Error(ErrorCode::kParse, "PLY header lacks end_header");
}

PointCloud read_cloud(const std::filesystem::path& path) {
  const CloudFormat fmt = cloud_format_for(path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return fmt == CloudFormat::kPcd ? read_pcd(in) : read_ply(in);
}

void write_overlay_ply(const std::filesystem::path& path, const std::vector<Vec3>& points,
                       const std::vector<RGB>& colors, const std::vector<LineSegment3D>& segments,
                       RGB segment_color) {
  auto out = open_out(path);
  const std::size_t nv = points.size() + 2 * segments.size();
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << nv << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "element edge " << segments.size() << "\n"
      << "property int vertex1\nproperty int vertex2\n"
      << "end_header\n";
  char buf[160];
  const auto vertex = [&](const Vec3& p, RGB c) {
    const int n = std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %d %d %d\n", p.x(), p.y(), p.z(), c.r, c.g, c.b);
    out.write(buf, n);
  };
  for (std::size_t i = 0; i < points.size(); ++i) vertex(points[i], i < colors.size() ? colors[i] : RGB{});
  for (const auto& s : segments) {
    vertex(s.start(), segment_color);
    vertex(s.end(), segment_color);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out << points.size() + 2 * i << " " << points.size() + 2 * i + 1 << "\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace truckloc

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "truckloc/geometry.hpp"
#include "truckloc/point_cloud.hpp"

namespace truckloc {

enum class CloudFormat { kPcd, kPly };

/// From the file extension (.pcd / .ply); throws Error(kInvalidArgument) otherwise.
CloudFormat cloud_format_for(const std::filesystem::path& path);

/// ASCII, x y z intensity, coordinates at 9 significant digits.
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);
void write_pcd(std::ostream& out, const PointCloud& cloud);
void write_ply(std::ostream& out, const PointCloud& cloud);

/// ASCII PCD or PLY with fields x, y, z and optional intensity. Throws
/// Error(kIo) when unreadable and Error(kParse) on malformed content.
PointCloud read_cloud(const std::filesystem::path& path);
PointCloud read_pcd(std::istream& in);
PointCloud read_ply(std::istream& in);

struct RGB {
  unsigned char r = 200, g = 200, b = 200;
};

/// Colored points plus line segments as PLY edges, for inspection.
void write_overlay_ply(const std::filesystem::path& path, const std::vector<Vec3>& points,
                       const std::vector<RGB>& colors, const std::vector<LineSegment3D>& segments,
                       RGB segment_color = {255, 0, 0});

}  // namespace truckloc

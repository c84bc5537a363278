#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "spinenav/core/types.hpp"

namespace spinenav::io {

// ASCII PLY. Coordinates are written with 17 significant digits so a
// write/read cycle is lossless. Units are millimeters; callers holding
// meter-scale data convert before writing.
void write_ply(std::ostream& os, const PointCloud& pc);
void write_ply(std::ostream& os, const TriangleMesh& mesh);
void write_ply(const std::filesystem::path& path, const PointCloud& pc);
void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh);

/// Reads vertices (and nx/ny/nz when present). Faces, if any, are ignored.
PointCloud read_ply_cloud(std::istream& is);
PointCloud read_ply_cloud(const std::filesystem::path& path);
/// Reads vertices and triangular faces.
TriangleMesh read_ply_mesh(std::istream& is);
TriangleMesh read_ply_mesh(const std::filesystem::path& path);

/// {"rotation": [9 row-major], "translation_mm": [3]}
nlohmann::json to_json(const RigidTransform& t);
RigidTransform transform_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Point3& p);
Point3 point_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace spinenav::io

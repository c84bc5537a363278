#include "spinenav/core/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace spinenav::io {

namespace {

struct PlyHeader {
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  std::vector<std::string> vertex_props;
  bool faces_before_vertices = false;
};

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::ParseError, msg); }

PlyHeader read_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("ply", 0) != 0) parse_fail("missing 'ply' magic");
  PlyHeader h;
  std::string current;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") parse_fail("only ascii PLY is supported, got " + fmt);
    } else if (kw == "element") {
      std::size_t n = 0;
      ls >> current >> n;
      if (current == "vertex") {
        h.vertex_count = n;
      } else if (current == "face") {
        h.face_count = n;
        if (h.vertex_count == 0) h.faces_before_vertices = true;
      } else if (n > 0) {
        parse_fail("unsupported element '" + current + "'");
      }
    } else if (kw == "property" && current == "vertex") {
      std::string type, name;
      ls >> type >> name;
      h.vertex_props.push_back(name);
    } else if (kw == "end_header") {
      if (h.faces_before_vertices) parse_fail("face element before vertex element");
      return h;
    }
  }
  parse_fail("unterminated PLY header");
}

void read_vertices(std::istream& is, const PlyHeader& h, PointCloud& pc) {
  auto index_of = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < h.vertex_props.size(); ++i) {
      if (h.vertex_props[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  const int inx = index_of("nx"), iny = index_of("ny"), inz = index_of("nz");
  if (ix < 0 || iy < 0 || iz < 0) parse_fail("vertex element lacks x/y/z");
  const bool normals = inx >= 0 && iny >= 0 && inz >= 0;

  std::vector<double> row(h.vertex_props.size());
  pc.points.reserve(h.vertex_count);
  for (std::size_t v = 0; v < h.vertex_count; ++v) {
    for (auto& x : row) {
      if (!(is >> x)) parse_fail("truncated vertex data at vertex " + std::to_string(v));
    }
    pc.points.emplace_back(row[ix], row[iy], row[iz]);
    if (normals) pc.normals.emplace_back(Eigen::Vector3d(row[inx], row[iny], row[inz]));
  }
}

void write_header(std::ostream& os, std::size_t nv, bool normals, std::size_t nf) {
  os << "ply\nformat ascii 1.0\n";
  os << "element vertex " << nv << "\n";
  os << "property double x\nproperty double y\nproperty double z\n";
  if (normals) os << "property double nx\nproperty double ny\nproperty double nz\n";
  if (nf > 0) os << "element face " << nf << "\nproperty list uchar int vertex_indices\n";
  os << "end_header\n";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return is;
}

}  // namespace

void write_ply(std::ostream& os, const PointCloud& pc) {
  pc.validate();
  write_header(os, pc.size(), pc.has_normals(), 0);
  os << std::setprecision(17);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto& p = pc.points[i];
    os << p.x() << ' ' << p.y() << ' ' << p.z();
    if (pc.has_normals()) {
      const auto& n = pc.normals[i];
      os << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
    }
    os << '\n';
  }
}

void write_ply(std::ostream& os, const TriangleMesh& mesh) {
  write_header(os, mesh.vertices.size(), false, mesh.faces.size());
  os << std::setprecision(17);
  for (const auto& p : mesh.vertices) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& f : mesh.faces) os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_ply(const std::filesystem::path& path, const PointCloud& pc) {
  auto os = open_out(path);
  write_ply(os, pc);
}

void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh) {
  auto os = open_out(path);
  write_ply(os, mesh);
}

PointCloud read_ply_cloud(std::istream& is) {
  const auto h = read_header(is);
  PointCloud pc;
  read_vertices(is, h, pc);
  return pc;
}

PointCloud read_ply_cloud(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_ply_cloud(is);
}

TriangleMesh read_ply_mesh(std::istream& is) {
  const auto h = read_header(is);
  PointCloud pc;
  read_vertices(is, h, pc);
  TriangleMesh mesh;
  mesh.vertices = std::move(pc.points);
  mesh.faces.reserve(h.face_count);
  for (std::size_t f = 0; f < h.face_count; ++f) {
    int count = 0;
    if (!(is >> count)) parse_fail("truncated face data at face " + std::to_string(f));
    if (count != 3) parse_fail("only triangular faces are supported");
    long long a, b, c;
    if (!(is >> a >> b >> c)) parse_fail("truncated face data at face " + std::to_string(f));
    if (a < 0 || b < 0 || c < 0) parse_fail("negative face index");
    mesh.faces.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(c)});
  }
  mesh.validate();
  return mesh;
}

TriangleMesh read_ply_mesh(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_ply_mesh(is);
}

nlohmann::json to_json(const Point3& p) { return nlohmann::json::array({p.x(), p.y(), p.z()}); }

Point3 point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) parse_fail("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json to_json(const RigidTransform& t) {
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(t.rotation()(r, c));
  }
  return {{"rotation", rot}, {"translation_mm", to_json(t.translation())}};
}

RigidTransform transform_from_json(const nlohmann::json& j) {
  if (!j.contains("rotation") || !j.contains("translation_mm")) {
    parse_fail("transform needs 'rotation' and 'translation_mm'");
  }
  const auto& rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 9) parse_fail("rotation must have 9 entries");
  Eigen::Matrix3d r;
  for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = rot[i].get<double>();
  return {r, point_from_json(j.at("translation_mm"))};
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto is = open_in(path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
}

}  // namespace spinenav::io

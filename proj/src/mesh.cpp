#include "surfspec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <string>
#include <unordered_map>

#include "surfspec/error.hpp"

namespace surfspec {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::geometry: return "geometry";
    case ErrorCategory::solve: return "solve";
    case ErrorCategory::empty_interface: return "empty_interface";
    case ErrorCategory::config: return "config";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCategory::parse,
            line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

IndexRangeError::IndexRangeError(std::size_t line, long long index, std::size_t vertex_count)
    : ParseError(line, "vertex index " + std::to_string(index) + " out of range (" +
                           std::to_string(vertex_count) + " vertices)") {}

struct TriangleMesh::Cache {
  std::once_flag once;
  MeshTopology topology;
};

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

double corner_angle(const Vec3& corner, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - corner;
  const Vec3 v = q - corner;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

MeshTopology build_topology(const std::vector<Vec3>& vertices, const std::vector<Face>& faces) {
  MeshTopology topo;
  const std::size_t nf = faces.size();
  topo.face_areas.resize(nf);
  topo.corner_angles.resize(nf);
  topo.vertex_faces.assign(vertices.size(), {});
  topo.boundary_vertex.assign(vertices.size(), 0);

  std::unordered_map<std::uint64_t, std::size_t> edge_index;
  edge_index.reserve(nf * 2);

  for (std::size_t f = 0; f < nf; ++f) {
    const Face& t = faces[f];
    const Vec3& p0 = vertices[t[0]];
    const Vec3& p1 = vertices[t[1]];
    const Vec3& p2 = vertices[t[2]];
    topo.face_areas[f] = triangle_area(p0, p1, p2);
    topo.corner_angles[f] = {corner_angle(p0, p1, p2), corner_angle(p1, p2, p0),
                             corner_angle(p2, p0, p1)};
    for (int c = 0; c < 3; ++c) {
      topo.vertex_faces[t[c]].push_back(static_cast<int>(f));
      int a = t[(c + 1) % 3];
      int b = t[(c + 2) % 3];
      if (a > b) std::swap(a, b);
      const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      auto [it, inserted] = edge_index.try_emplace(key, topo.edges.size());
      if (inserted) {
        Edge e;
        e.a = a;
        e.b = b;
        topo.edges.push_back(e);
      }
      Edge& e = topo.edges[it->second];
      if (e.face_count < 2) {
        e.face[e.face_count] = static_cast<int>(f);
        e.opposite[e.face_count] = t[c];
      } else if (e.face_count == 2) {
        ++topo.non_manifold_edges;
      }
      ++e.face_count;
    }
  }
  for (const Edge& e : topo.edges) {
    if (e.boundary()) {
      topo.boundary_vertex[e.a] = 1;
      topo.boundary_vertex[e.b] = 1;
    }
  }
  return topo;
}

}  // namespace

TriangleMesh::TriangleMesh() : TriangleMesh({}, {}) {}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)), cache_(std::make_shared<Cache>()) {
  const auto n = static_cast<long long>(vertices_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& t = faces_[f];
    for (int v : t) {
      if (v < 0 || v >= n) {
        throw GeometryError("face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                            " but the mesh has " + std::to_string(n) + " vertices");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw GeometryError("face " + std::to_string(f) + " repeats a vertex");
    }
  }
  std::uint64_t h = 1469598103934665603ULL;
  const std::uint64_t counts[2] = {vertices_.size(), faces_.size()};
  h = fnv1a(h, counts, sizeof(counts));
  for (const Vec3& v : vertices_) {
    const double xyz[3] = {v.x(), v.y(), v.z()};
    h = fnv1a(h, xyz, sizeof(xyz));
  }
  for (const Face& t : faces_) h = fnv1a(h, t.data(), sizeof(int) * 3);
  hash_ = h;
}

const MeshTopology& TriangleMesh::topology() const {
  std::call_once(cache_->once, [this] { cache_->topology = build_topology(vertices_, faces_); });
  return cache_->topology;
}

void TriangleMesh::validate_manifold() const {
  const MeshTopology& topo = topology();
  if (topo.non_manifold_edges > 0) {
    throw GeometryError(std::to_string(topo.non_manifold_edges) +
                        " edge(s) shared by more than two faces");
  }
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (!(topo.face_areas[f] > 0.0)) {
      throw GeometryError("face " + std::to_string(f) + " has zero area");
    }
  }
}

Eigen::MatrixX3d TriangleMesh::vertex_matrix() const {
  Eigen::MatrixX3d X(vertices_.size(), 3);
  for (std::size_t i = 0; i < vertices_.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = vertices_[i].transpose();
  return X;
}

TriangleMesh TriangleMesh::transformed(const Eigen::Matrix3d& linear, const Vec3& translation) const {
  std::vector<Vec3> moved;
  moved.reserve(vertices_.size());
  for (const Vec3& v : vertices_) moved.push_back(linear * v + translation);
  std::vector<Face> faces = faces_;
  if (linear.determinant() < 0.0) {
    for (Face& t : faces) std::swap(t[1], t[2]);
  }
  return TriangleMesh(std::move(moved), std::move(faces));
}

TriangleMesh TriangleMesh::with_vertices(std::vector<Vec3> vertices) const {
  return TriangleMesh(std::move(vertices), faces_);
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double surface_area(const TriangleMesh& mesh) {
  double total = 0.0;
  for (const Face& t : mesh.faces()) {
    total += triangle_area(mesh.vertices()[t[0]], mesh.vertices()[t[1]], mesh.vertices()[t[2]]);
  }
  return total;
}

long euler_characteristic(const TriangleMesh& mesh) {
  return static_cast<long>(mesh.vertex_count()) - static_cast<long>(mesh.topology().edges.size()) +
         static_cast<long>(mesh.face_count());
}

}  // namespace surfspec

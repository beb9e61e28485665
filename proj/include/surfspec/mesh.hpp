#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace surfspec {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Undirected edge (a < b) with up to two incident faces. `opposite[s]` is the
/// vertex of `face[s]` not on the edge; unused slots hold -1.
struct Edge {
  int a = -1;
  int b = -1;
  std::array<int, 2> face{-1, -1};
  std::array<int, 2> opposite{-1, -1};
  int face_count = 0;

  bool boundary() const { return face_count == 1; }
};

/// Connectivity and per-face measures derived from a TriangleMesh.
struct MeshTopology {
  std::vector<double> face_areas;
  /// Interior angle at each corner, in the same order as the face indices.
  std::vector<std::array<double, 3>> corner_angles;
  std::vector<std::vector<int>> vertex_faces;
  std::vector<Edge> edges;
  std::vector<char> boundary_vertex;
  /// Edges that were seen in more than two faces (only the first two are
  /// recorded in `edges`).
  std::size_t non_manifold_edges = 0;
};

/// Immutable triangle mesh. Derived topology is computed on first use and
/// shared between copies; concurrent readers are safe.
class TriangleMesh {
public:
  TriangleMesh();

  /// Throws GeometryError when a face index is out of range or a face repeats
  /// a vertex.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t face_count() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }

  const MeshTopology& topology() const;

  /// FNV-1a over vertex coordinates and face indices; identifies fields and
  /// bases computed on this mesh.
  std::uint64_t hash() const { return hash_; }

  /// Throws GeometryError on non-manifold edges or zero-area faces.
  void validate_manifold() const;

  /// Vertices as an N x 3 matrix.
  Eigen::MatrixX3d vertex_matrix() const;

  /// x -> linear * x + translation, faces untouched. A reflection (det < 0)
  /// also flips face winding so outward orientation is preserved.
  TriangleMesh transformed(const Eigen::Matrix3d& linear, const Vec3& translation) const;

  TriangleMesh with_vertices(std::vector<Vec3> vertices) const;

private:
  struct Cache;

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::uint64_t hash_ = 0;
  std::shared_ptr<Cache> cache_;
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

double surface_area(const TriangleMesh& mesh);

/// V - E + F.
long euler_characteristic(const TriangleMesh& mesh);

}  // namespace surfspec

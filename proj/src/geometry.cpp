#include "surfspec/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "surfspec/error.hpp"

namespace surfspec {

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
  const auto& verts = mesh.vertices();
  std::vector<Vec3> normals(verts.size(), Vec3::Zero());
  std::vector<char> touched(verts.size(), 0);
  // Max's corner weights: cross(e1, e2) / (|e1|^2 |e2|^2), exact for vertices
  // on a sphere.
  for (const Face& t : mesh.faces()) {
    for (int c = 0; c < 3; ++c) {
      const int v = t[c];
      const Vec3 e1 = verts[t[(c + 1) % 3]] - verts[v];
      const Vec3 e2 = verts[t[(c + 2) % 3]] - verts[v];
      normals[v] += e1.cross(e2) / (e1.squaredNorm() * e2.squaredNorm());
      touched[v] = 1;
    }
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!touched[i]) throw GeometryError("vertex " + std::to_string(i) + " has no incident face");
    const double len = normals[i].norm();
    if (!(len > 0.0)) throw GeometryError("vertex " + std::to_string(i) + " has a degenerate normal");
    normals[i] /= len;
  }
  return normals;
}

Eigen::VectorXd angle_defects(const TriangleMesh& mesh) {
  const MeshTopology& topo = mesh.topology();
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  Eigen::VectorXd defect(n);
  for (Eigen::Index i = 0; i < n; ++i) defect[i] = topo.boundary_vertex[i] ? std::numbers::pi : 2.0 * std::numbers::pi;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& t = mesh.faces()[f];
    for (int c = 0; c < 3; ++c) defect[t[c]] -= topo.corner_angles[f][c];
  }
  return defect;
}

Eigen::VectorXd mixed_voronoi_area(const TriangleMesh& mesh) {
  const MeshTopology& topo = mesh.topology();
  const auto& verts = mesh.vertices();
  Eigen::VectorXd area = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  constexpr double right = std::numbers::pi / 2.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& t = mesh.faces()[f];
    const auto& ang = topo.corner_angles[f];
    const double a = topo.face_areas[f];
    const int obtuse = ang[0] > right ? 0 : ang[1] > right ? 1 : ang[2] > right ? 2 : -1;
    for (int c = 0; c < 3; ++c) {
      if (obtuse >= 0) {
        area[t[c]] += c == obtuse ? 0.5 * a : 0.25 * a;
        continue;
      }
      const int j = (c + 1) % 3;
      const int k = (c + 2) % 3;
      // Edge c-k is opposite corner j, edge c-j opposite corner k.
      area[t[c]] += ((verts[t[k]] - verts[t[c]]).squaredNorm() / std::tan(ang[j]) +
                     (verts[t[j]] - verts[t[c]]).squaredNorm() / std::tan(ang[k])) /
                    8.0;
    }
  }
  for (Eigen::Index i = 0; i < area.size(); ++i) {
    if (!(area[i] > 0.0)) throw GeometryError("vertex " + std::to_string(i) + " has no incident face");
  }
  return area;
}

Eigen::VectorXd gaussian_curvature(const TriangleMesh& mesh) {
  return angle_defects(mesh).cwiseQuotient(mixed_voronoi_area(mesh));
}

MeanCurvature mean_curvature(const TriangleMesh& mesh) { return mean_curvature(mesh, assemble_stiffness(mesh)); }

MeanCurvature mean_curvature(const TriangleMesh& mesh, const SparseSymMatrix& stiffness) {
  const std::vector<Vec3> normals = vertex_normals(mesh);
  const Eigen::VectorXd area = mixed_voronoi_area(mesh);
  const Eigen::MatrixXd LX = stiffness.matrix() * Eigen::MatrixXd(mesh.vertex_matrix());
  const MeshTopology& topo = mesh.topology();

  MeanCurvature out;
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  out.values.resize(n);
  out.boundary.assign(topo.boundary_vertex.begin(), topo.boundary_vertex.end());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 d = LX.row(i).transpose() / area[i];
    const double h = 0.5 * d.norm();
    out.values[i] = d.dot(normals[i]) < 0.0 ? -h : h;
    out.boundary_count += out.boundary[i] ? 1 : 0;
  }
  return out;
}

CurvatureField compute_curvature(const TriangleMesh& mesh) {
  CurvatureField field;
  field.normals = vertex_normals(mesh);
  field.gaussian = gaussian_curvature(mesh);
  MeanCurvature h = mean_curvature(mesh);
  field.mean = std::move(h.values);
  field.boundary = std::move(h.boundary);
  return field;
}

}  // namespace surfspec

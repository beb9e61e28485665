#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "surfspec/mesh.hpp"
#include "surfspec/spectral.hpp"

namespace surfspec {

/// Normalized sum of incident face normals with Max's corner weights
/// 1 / (|e1|^2 |e2|^2), which is exact for vertices on a sphere. Throws
/// GeometryError naming the first vertex without an incident face.
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

/// 2*pi (pi on boundary vertices) minus the incident corner angles.
Eigen::VectorXd angle_defects(const TriangleMesh& mesh);

/// Mixed Voronoi vertex area: the Voronoi region inside non-obtuse triangles,
/// and half / quarter of the triangle at and next to an obtuse corner. Sums
/// to the surface area.
Eigen::VectorXd mixed_voronoi_area(const TriangleMesh& mesh);

/// Angle defect divided by the mixed Voronoi vertex area.
Eigen::VectorXd gaussian_curvature(const TriangleMesh& mesh);

struct MeanCurvature {
  Eigen::VectorXd values;
  /// Boundary vertices; their values are unreliable.
  std::vector<char> boundary;
  std::size_t boundary_count = 0;
};

/// H_i = sign(<d_i, n_i>) |d_i| / 2 with d = A^-1 L X, L the PSD cotangent
/// Laplacian and A the mixed Voronoi area. Positive on convex,
/// outward-oriented surfaces.
MeanCurvature mean_curvature(const TriangleMesh& mesh);
MeanCurvature mean_curvature(const TriangleMesh& mesh, const SparseSymMatrix& stiffness);

struct CurvatureField {
  Eigen::VectorXd gaussian;
  Eigen::VectorXd mean;
  std::vector<Vec3> normals;
  std::vector<char> boundary;
};

CurvatureField compute_curvature(const TriangleMesh& mesh);

}  // namespace surfspec

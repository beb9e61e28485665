#include <cmath>
#include <string>

#include "surfspec/error.hpp"
#include "surfspec/spectral.hpp"

namespace surfspec {

SparseSymMatrix::SparseSymMatrix(Storage m) : m_(std::move(m)) {
  m_.makeCompressed();
}

double SparseSymMatrix::total() const {
  double s = 0.0;
  for (Eigen::Index k = 0; k < m_.outerSize(); ++k)
    for (Storage::InnerIterator it(m_, k); it; ++it) s += it.value();
  return s;
}

namespace {

double cotangent(const Vec3& corner, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - corner;
  const Vec3 v = q - corner;
  return u.dot(v) / u.cross(v).norm();
}

}  // namespace

SparseSymMatrix assemble_stiffness(const TriangleMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  const auto& verts = mesh.vertices();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.face_count() * 6 + n);
  for (Eigen::Index i = 0; i < n; ++i) trips.emplace_back(i, i, 0.0);

  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& t = mesh.faces()[f];
    for (int c = 0; c < 3; ++c) {
      const int i = t[(c + 1) % 3];
      const int j = t[(c + 2) % 3];
      const double cot = cotangent(verts[t[c]], verts[i], verts[j]);
      if (!std::isfinite(cot)) {
        throw GeometryError("non-finite cotangent in face " + std::to_string(f) + " (zero area?)");
      }
      trips.emplace_back(i, j, -0.5 * cot);
      trips.emplace_back(j, i, -0.5 * cot);
    }
  }
  SparseSymMatrix::Storage L(n, n);
  L.setFromTriplets(trips.begin(), trips.end());
  L.makeCompressed();

  // Diagonal = -(sum of the row's off-diagonals), accumulated in storage order.
  for (Eigen::Index col = 0; col < n; ++col) {
    double off = 0.0;
    double* diag = nullptr;
    for (SparseSymMatrix::Storage::InnerIterator it(L, col); it; ++it) {
      if (it.row() == col) {
        diag = &it.valueRef();
      } else {
        off += it.value();
      }
    }
    *diag = -off;
  }
  return SparseSymMatrix(std::move(L));
}

SparseSymMatrix assemble_mass(const TriangleMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  const auto& verts = mesh.vertices();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.face_count() * 9);
  for (const Face& t : mesh.faces()) {
    const double area = triangle_area(verts[t[0]], verts[t[1]], verts[t[2]]);
    for (int c = 0; c < 3; ++c) {
      trips.emplace_back(t[c], t[c], area / 6.0);
      const int i = t[(c + 1) % 3];
      const int j = t[(c + 2) % 3];
      trips.emplace_back(i, j, area / 12.0);
      trips.emplace_back(j, i, area / 12.0);
    }
  }
  SparseSymMatrix::Storage B(n, n);
  B.setFromTriplets(trips.begin(), trips.end());
  return SparseSymMatrix(std::move(B));
}

Eigen::VectorXd lumped_mass(const TriangleMesh& mesh) {
  Eigen::VectorXd area = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  const auto& verts = mesh.vertices();
  for (const Face& t : mesh.faces()) {
    const double a = triangle_area(verts[t[0]], verts[t[1]], verts[t[2]]) / 3.0;
    for (int v : t) area[v] += a;
  }
  return area;
}

}  // namespace surfspec

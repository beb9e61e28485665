#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "surfspec/fixtures.hpp"
#include "surfspec/geometry.hpp"

using namespace surfspec;

namespace {

// Interior angle at corner a of triangle (a, b, c), straight from acos.
double corner_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  return std::acos(std::clamp((b - a).normalized().dot((c - a).normalized()), -1.0, 1.0));
}

// Angle defect recomputed face by face with acos.
Eigen::VectorXd defects_by_acos(const TriangleMesh& m) {
  Eigen::VectorXd d = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m.vertex_count()), 2 * oracle::kPi);
  const auto& v = m.vertices();
  for (const Face& f : m.faces()) {
    for (int c = 0; c < 3; ++c) {
      d[f[c]] -= corner_angle(v[f[c]], v[f[(c + 1) % 3]], v[f[(c + 2) % 3]]);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("icosphere normals are radial") {
  const TriangleMesh m = icosphere(2, 1.0);
  const auto n = vertex_normals(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    CHECK(n[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
    worst = std::max(worst, std::acos(std::min(1.0, n[i].dot(m.vertices()[i].normalized()))));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("flat fan normals point along z consistently") {
  std::vector<Vec3> v = {Vec3(0, 0, 0)};
  std::vector<Face> f;
  for (int i = 0; i < 6; ++i) {
    const double a = 2 * oracle::kPi * i / 6;
    v.push_back(Vec3(std::cos(a), std::sin(a), 0));
  }
  for (int i = 0; i < 6; ++i) f.push_back(Face{0, 1 + i, 1 + (i + 1) % 6});
  const auto n = vertex_normals(TriangleMesh(v, f));
  for (const Vec3& x : n) CHECK((x - Vec3(0, 0, 1)).norm() < 1e-14);
}

TEST_CASE("tetrahedron apex normal is the area-weighted face normal sum") {
  const TriangleMesh m = regular_tetrahedron(1.3);
  const auto n = vertex_normals(m);
  const auto& v = m.vertices();
  for (int apex = 0; apex < 4; ++apex) {
    Vec3 sum = Vec3::Zero();
    for (const Face& f : m.faces()) {
      if (f[0] != apex && f[1] != apex && f[2] != apex) continue;
      // Cross product length is twice the area, so this is area weighting.
      sum += (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
    }
    CHECK((n[apex] - sum.normalized()).norm() < 1e-12);
  }
}

TEST_CASE("Gauss-Bonnet on closed genus-0 fixtures") {
  for (const TriangleMesh& m : {icosphere(0, 1.0), icosphere(3, 2.5), bumpy_sphere(3, 1.0, 0.2, 2),
                                jittered_sphere(2, 1.0, 0.1, 9), regular_tetrahedron(2.0)}) {
    const Eigen::VectorXd d = angle_defects(m);
    CHECK(std::abs(d.sum() - 4 * oracle::kPi) < 1e-9);
    CHECK((d - defects_by_acos(m)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("mixed Voronoi areas tile the surface") {
  for (const TriangleMesh& m : {icosphere(3, 1.0), jittered_sphere(2, 1.0, 0.15, 3), grid_patch(6, 5.0, 0.0)}) {
    const Eigen::VectorXd a = mixed_voronoi_area(m);
    CHECK(a.minCoeff() > 0.0);
    CHECK(a.sum() == doctest::Approx(surface_area(m)).epsilon(1e-12));
  }
}

TEST_CASE("sphere curvature within 10% of the analytic value") {
  for (double r : {1.0, 2.0}) {
    const TriangleMesh m = icosphere(3, r);
    const Eigen::VectorXd K = gaussian_curvature(m);
    const MeanCurvature H = mean_curvature(m);
    CHECK(((K.array() - 1 / (r * r)).abs() / (1 / (r * r))).maxCoeff() < 0.10);
    CHECK(((H.values.array() - 1 / r).abs() / (1 / r)).maxCoeff() < 0.10);
    CHECK(H.boundary_count == 0);
  }
}

TEST_CASE("sphere curvature matches frozen reference values") {
  // Computed independently (numpy, closed-form Meyer areas) on icosphere(3, 1).
  const TriangleMesh m = icosphere(3, 1.0);
  const Eigen::VectorXd K = gaussian_curvature(m);
  const MeanCurvature H = mean_curvature(m);
  CHECK(K.minCoeff() == doctest::Approx(1.0042).epsilon(2e-4));
  CHECK(K.maxCoeff() == doctest::Approx(1.0055).epsilon(2e-4));
  CHECK(H.values.mean() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("mean curvature sign follows the outward normal") {
  // Inverting the orientation flips the normals and hence the sign of H.
  const TriangleMesh m = icosphere(2, 1.0);
  std::vector<Face> flipped;
  for (const Face& f : m.faces()) flipped.push_back(Face{f[0], f[2], f[1]});
  const MeanCurvature H = mean_curvature(TriangleMesh(m.vertices(), flipped));
  CHECK(H.values.maxCoeff() < 0.0);
}

TEST_CASE("planar patch has zero interior mean curvature") {
  const TriangleMesh m = grid_patch(7, 3.0, 1.5);
  const MeanCurvature H = mean_curvature(m);
  const auto& boundary = m.topology().boundary_vertex;
  int interior = 0;
  for (Eigen::Index i = 0; i < H.values.size(); ++i) {
    if (boundary[i]) continue;
    ++interior;
    CHECK(std::abs(H.values[i]) < 1e-6);
  }
  CHECK(interior == 25);
  CHECK(H.boundary_count == 24);
}

TEST_CASE("curvature is invariant under rigid motion and scales with size") {
  const TriangleMesh m = bumpy_sphere(2, 1.0, 0.2, 11);
  FixtureRng rng(5);
  const Eigen::Matrix3d R = oracle::random_rotation(rng);
  const TriangleMesh moved = m.transformed(R, Vec3(3, -2, 7));
  const CurvatureField a = compute_curvature(m);
  const CurvatureField b = compute_curvature(moved);
  CHECK((a.gaussian - b.gaussian).cwiseAbs().maxCoeff() < 1e-9 * a.gaussian.cwiseAbs().maxCoeff());
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-9 * a.mean.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < a.normals.size(); ++i) CHECK((R * a.normals[i] - b.normals[i]).norm() < 1e-9);

  const TriangleMesh big = m.transformed(3.0 * Eigen::Matrix3d::Identity(), Vec3::Zero());
  CHECK((gaussian_curvature(big) * 9.0 - a.gaussian).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((mean_curvature(big).values * 3.0 - a.mean).cwiseAbs().maxCoeff() < 1e-9);
}

#include "surfspec/fixtures.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Geometry>

#include "surfspec/error.hpp"

namespace surfspec {

std::uint64_t FixtureRng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double FixtureRng::normal() {
  // Box-Muller; one value per call keeps the stream simple.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec3 FixtureRng::unit_vector() {
  Vec3 v;
  do {
    v = Vec3(normal(), normal(), normal());
  } while (v.norm() < 1e-12);
  return v.normalized();
}

Eigen::Matrix3d FixtureRng::rotation() {
  Eigen::Quaterniond q(normal(), normal(), normal(), normal());
  q.normalize();
  return q.toRotationMatrix();
}

TriangleMesh icosphere(int subdivisions, double radius) {
  if (subdivisions < 0 || subdivisions > 7) throw GeometryError("icosphere subdivisions must be in [0, 7]");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                         {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1},  {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
                         {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& t : f) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh bumpy_sphere(int subdivisions, double radius, double amplitude, std::uint64_t seed, int bumps,
                          double width) {
  const TriangleMesh base = icosphere(subdivisions, 1.0);
  FixtureRng rng(seed);
  std::vector<Vec3> centers;
  std::vector<double> weights;
  for (int j = 0; j < bumps; ++j) {
    centers.push_back(rng.unit_vector());
    weights.push_back(rng.uniform(-1.0, 1.0));
  }
  std::vector<Vec3> verts;
  verts.reserve(base.vertex_count());
  for (const Vec3& u : base.vertices()) {
    double bump = 0.0;
    for (int j = 0; j < bumps; ++j) bump += weights[j] * std::exp(-(u - centers[j]).squaredNorm() / (2 * width * width));
    verts.push_back(radius * (1.0 + amplitude * bump) * u);
  }
  return base.with_vertices(std::move(verts));
}

TriangleMesh jittered_sphere(int subdivisions, double radius, double jitter, std::uint64_t seed) {
  const TriangleMesh base = icosphere(subdivisions, 1.0);
  FixtureRng rng(seed);
  std::vector<Vec3> verts;
  verts.reserve(base.vertex_count());
  for (const Vec3& u : base.vertices()) verts.push_back(radius * rng.uniform(1.0 - jitter, 1.0 + jitter) * u);
  return base.with_vertices(std::move(verts));
}

TriangleMesh grid_patch(int n, double size, double z0, const std::function<double(double, double)>& height) {
  if (n < 2) throw GeometryError("grid_patch needs at least 2 vertices per side");
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  const double h = size / (n - 1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = i * h;
      const double y = j * h;
      verts.emplace_back(x, y, z0 + (height ? height(x, y) : 0.0));
    }
  }
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const int a = j * n + i;
      const int b = a + 1;
      const int c = a + n;
      const int d = c + 1;
      faces.push_back({a, b, d});
      faces.push_back({a, d, c});
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh regular_tetrahedron(double edge) {
  const double s = edge / (2.0 * std::sqrt(2.0));
  std::vector<Vec3> v = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  std::vector<Face> f = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return TriangleMesh(std::move(v), std::move(f));
}

}  // namespace surfspec

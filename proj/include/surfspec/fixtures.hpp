#pragma once

#include <cstdint>
#include <functional>

#include "surfspec/mesh.hpp"

namespace surfspec {

/// Midpoint-subdivided icosahedron projected onto a sphere: 10*4^s + 2
/// vertices, outward-facing winding. Throws GeometryError for s > 7.
TriangleMesh icosphere(int subdivisions, double radius);

/// Icosphere whose radius is modulated by a few smooth random bumps,
/// r(u) = radius * (1 + amplitude * sum_j w_j exp(-|u - c_j|^2 / (2 width^2))).
/// Breaks the icosahedral symmetry while keeping the surface smooth.
TriangleMesh bumpy_sphere(int subdivisions, double radius, double amplitude, std::uint64_t seed, int bumps = 6,
                          double width = 0.5);

/// Icosphere with each vertex radius independently scaled by a factor drawn
/// uniformly from [1 - jitter, 1 + jitter].
TriangleMesh jittered_sphere(int subdivisions, double radius, double jitter, std::uint64_t seed);

/// Regular n x n vertex grid over [0, size]^2 at height z0 + height(x, y).
TriangleMesh grid_patch(int n, double size, double z0, const std::function<double(double, double)>& height = {});

/// Regular tetrahedron with the given edge length, outward winding.
TriangleMesh regular_tetrahedron(double edge = 1.0);

/// Deterministic uniform [0, 1) stream from a 64-bit seed (SplitMix64), so
/// fixtures are identical across standard libraries.
class FixtureRng {
public:
  explicit FixtureRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Vec3 unit_vector();
  /// Uniformly distributed proper rotation.
  Eigen::Matrix3d rotation();

private:
  std::uint64_t state_;
};

}  // namespace surfspec
